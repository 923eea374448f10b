#pragma once

#include <string>

#include "fbmavg/gridpath.hpp"

namespace fbmavg {

// CSV with header t,x_1,...,x_d; full double precision.
void write_csv(const GridPath& path, const std::string& filename);
GridPath read_csv(const std::string& filename);

// Binary layout: magic "GPTH" | u32 dims | u64 n | f64 t0 | f64 t1 |
// (n+1)*dims little-endian f64 values, point-major.
void write_binary(const GridPath& path, const std::string& filename);
GridPath read_binary(const std::string& filename);

// SHA-1-free content fingerprint (FNV-1a over bytes) used by manifests.
std::string file_fingerprint(const std::string& filename);

}  // namespace fbmavg
