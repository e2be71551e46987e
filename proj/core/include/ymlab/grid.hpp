#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace ymlab {

/// Uniform periodic lattice on an m-torus. Sites are ordered row-major with
/// the last axis fastest. Cheap to copy: the index tables live behind a
/// shared immutable block.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<int> extents, double spacing, std::vector<double> origin = {});

  int dim() const;
  int extent(int axis) const;
  double spacing() const;
  double origin(int axis) const;
  double length(int axis) const;      // extent * spacing
  double min_length() const;
  std::size_t volume() const;

  std::size_t index(std::span<const int> coords) const;  // coords wrapped
  void coords(std::size_t site, std::span<int> out) const;
  int wrap(int c, int axis) const;

  /// Unit-step periodic neighbor, table-backed. step must be +1 or -1.
  std::size_t neighbor(std::size_t site, int axis, int step) const;

  double position(std::size_t site, int axis) const;
  std::vector<double> site_position(std::size_t site) const;

  bool same_shape(const Grid& other) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  void require() const;
};

}  // namespace ymlab
