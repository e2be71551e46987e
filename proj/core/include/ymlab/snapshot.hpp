#pragma once

#include <filesystem>

#include "ymlab/field.hpp"

namespace ymlab {

// Gauge potential snapshot, one file per flow time. Layout, little-endian:
//   "YMF1"  u32 m  u32 n  u32 extents[m]  f64 spacing  f64 origin[m]  f64 tau
// followed by volume * m * n * n complex doubles in field storage order.

struct FieldSnapshot {
  LieField a;
  double tau = 0.0;
};

void write_field(const std::filesystem::path& path, const LieField& a, double tau);
FieldSnapshot read_field(const std::filesystem::path& path);

}  // namespace ymlab
