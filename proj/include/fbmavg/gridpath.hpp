#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fbmavg {

// Uniform grid on [t0, t1] with n intervals (n+1 points).
struct TimeGrid {
  double t0 = 0.0;
  double t1 = 1.0;
  std::size_t n = 1;

  TimeGrid() = default;
  TimeGrid(double a, double b, std::size_t intervals) : t0(a), t1(b), n(intervals) {
    if (!(t1 > t0)) throw std::invalid_argument("TimeGrid: t1 must exceed t0");
    if (n < 1) throw std::invalid_argument("TimeGrid: need at least one interval");
  }

  double spacing() const { return (t1 - t0) / static_cast<double>(n); }
  std::size_t points() const { return n + 1; }
  double point(std::size_t k) const {
    return t0 + (t1 - t0) * (static_cast<double>(k) / static_cast<double>(n));
  }
  bool operator==(const TimeGrid& o) const { return t0 == o.t0 && t1 == o.t1 && n == o.n; }
};

// Values of a d-dimensional process on a TimeGrid, stored row-major
// (point-major). Carrier for paths, drivers and solutions.
class GridPath {
 public:
  GridPath() = default;
  GridPath(TimeGrid grid, std::size_t dims)
      : grid_(grid), dims_(dims), data_(grid.points() * dims, 0.0) {
    if (dims == 0) throw std::invalid_argument("GridPath: dims must be positive");
  }
  GridPath(TimeGrid grid, std::vector<double> scalar_values) : grid_(grid), dims_(1) {
    if (scalar_values.size() != grid.points())
      throw std::invalid_argument("GridPath: value count does not match grid");
    data_ = std::move(scalar_values);
  }

  const TimeGrid& grid() const { return grid_; }
  std::size_t dims() const { return dims_; }
  std::size_t points() const { return grid_.points(); }

  double& at(std::size_t k, std::size_t d = 0) { return data_[k * dims_ + d]; }
  double at(std::size_t k, std::size_t d = 0) const { return data_[k * dims_ + d]; }
  std::span<const double> value(std::size_t k) const {
    return std::span<const double>(data_.data() + k * dims_, dims_);
  }
  std::span<double> value(std::size_t k) {
    return std::span<double>(data_.data() + k * dims_, dims_);
  }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  bool all_finite() const;

  // Euclidean norm of the increment between grid indices i < j.
  double increment_norm(std::size_t i, std::size_t j) const;

 private:
  TimeGrid grid_;
  std::size_t dims_ = 1;
  std::vector<double> data_;
};

// Cumulative trapezoid primitive of a scalar path; result[0] = 0.
std::vector<double> trapezoid_primitive(const GridPath& path);

}  // namespace fbmavg
