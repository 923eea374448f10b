#include "fbmavg/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace fbmavg {

namespace {
void require_stream(const std::ios& s, const std::string& filename, const char* action) {
  if (!s) throw std::runtime_error(std::string(action) + " failed: " + filename);
}
}  // namespace

void write_csv(const GridPath& path, const std::string& filename) {
  std::ofstream out(filename);
  require_stream(out, filename, "open for write");
  out << "t";
  for (std::size_t d = 1; d <= path.dims(); ++d) out << ",x_" << d;
  out << "\n";
  out << std::setprecision(17);
  for (std::size_t k = 0; k < path.points(); ++k) {
    out << path.grid().point(k);
    for (std::size_t d = 0; d < path.dims(); ++d) out << "," << path.at(k, d);
    out << "\n";
  }
  require_stream(out, filename, "write");
}

GridPath read_csv(const std::string& filename) {
  std::ifstream in(filename);
  require_stream(in, filename, "open for read");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + filename);
  std::size_t dims = 0;
  for (char c : line)
    if (c == ',') ++dims;
  if (dims == 0) throw std::runtime_error("csv lacks value columns: " + filename);

  std::vector<double> times;
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    times.push_back(std::stod(cell));
    for (std::size_t d = 0; d < dims; ++d) {
      std::getline(ss, cell, ',');
      values.push_back(std::stod(cell));
    }
  }
  if (times.size() < 2) throw std::runtime_error("csv has fewer than 2 rows: " + filename);
  TimeGrid grid(times.front(), times.back(), times.size() - 1);
  GridPath path(grid, dims);
  path.data() = values;
  return path;
}

void write_binary(const GridPath& path, const std::string& filename) {
  std::ofstream out(filename, std::ios::binary);
  require_stream(out, filename, "open for write");
  const char magic[4] = {'G', 'P', 'T', 'H'};
  out.write(magic, 4);
  const std::uint32_t dims = static_cast<std::uint32_t>(path.dims());
  const std::uint64_t n = static_cast<std::uint64_t>(path.grid().n);
  const double t0 = path.grid().t0, t1 = path.grid().t1;
  out.write(reinterpret_cast<const char*>(&dims), sizeof(dims));
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&t0), sizeof(t0));
  out.write(reinterpret_cast<const char*>(&t1), sizeof(t1));
  out.write(reinterpret_cast<const char*>(path.data().data()),
            static_cast<std::streamsize>(path.data().size() * sizeof(double)));
  require_stream(out, filename, "write");
}

GridPath read_binary(const std::string& filename) {
  std::ifstream in(filename, std::ios::binary);
  require_stream(in, filename, "open for read");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "GPTH", 4) != 0)
    throw std::runtime_error("bad GPTH magic: " + filename);
  std::uint32_t dims = 0;
  std::uint64_t n = 0;
  double t0 = 0.0, t1 = 0.0;
  in.read(reinterpret_cast<char*>(&dims), sizeof(dims));
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&t0), sizeof(t0));
  in.read(reinterpret_cast<char*>(&t1), sizeof(t1));
  require_stream(in, filename, "read header");
  GridPath path(TimeGrid(t0, t1, static_cast<std::size_t>(n)), dims);
  in.read(reinterpret_cast<char*>(path.data().data()),
          static_cast<std::streamsize>(path.data().size() * sizeof(double)));
  require_stream(in, filename, "read values");
  return path;
}

std::string file_fingerprint(const std::string& filename) {
  std::ifstream in(filename, std::ios::binary);
  require_stream(in, filename, "open for read");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace fbmavg
