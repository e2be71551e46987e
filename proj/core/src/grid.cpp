#include "ymlab/grid.hpp"

#include <cmath>
#include <limits>

#include "ymlab/errors.hpp"

namespace ymlab {

struct Grid::Impl {
  std::vector<int> extents;
  double h = 0.0;
  std::vector<double> origin;
  std::size_t volume = 1;
  std::vector<std::size_t> strides;            // per axis, in sites
  std::vector<std::vector<uint32_t>> plus;     // per axis: site -> site + e_a
  std::vector<std::vector<uint32_t>> minus;
};

Grid::Grid(std::vector<int> extents, double spacing, std::vector<double> origin) {
  if (extents.empty()) throw InvalidArgumentError("Grid: extents must be non-empty");
  for (int e : extents)
    if (e < 4) throw InvalidArgumentError("Grid: every extent must be >= 4");
  if (!(spacing > 0.0)) throw InvalidArgumentError("Grid: spacing must be positive");
  if (origin.empty()) origin.assign(extents.size(), 0.0);
  if (origin.size() != extents.size())
    throw InvalidArgumentError("Grid: origin dimension mismatch");

  auto impl = std::make_shared<Impl>();
  impl->extents = std::move(extents);
  impl->h = spacing;
  impl->origin = std::move(origin);
  const int m = static_cast<int>(impl->extents.size());

  impl->volume = 1;
  for (int a = 0; a < m; ++a) {
    const std::size_t e = static_cast<std::size_t>(impl->extents[a]);
    if (impl->volume > (std::numeric_limits<uint32_t>::max() / e))
      throw InvalidArgumentError("Grid: volume exceeds the 2^32-site index cap");
    impl->volume *= e;
  }

  impl->strides.assign(m, 1);
  for (int a = m - 2; a >= 0; --a)
    impl->strides[a] = impl->strides[a + 1] * static_cast<std::size_t>(impl->extents[a + 1]);

  impl->plus.resize(m);
  impl->minus.resize(m);
  std::vector<int> c(m, 0);
  for (int a = 0; a < m; ++a) {
    impl->plus[a].resize(impl->volume);
    impl->minus[a].resize(impl->volume);
  }
  for (std::size_t s = 0; s < impl->volume; ++s) {
    for (int a = 0; a < m; ++a) {
      const int ea = impl->extents[a];
      const std::size_t st = impl->strides[a];
      const int ca = c[a];
      impl->plus[a][s] = static_cast<uint32_t>(ca + 1 == ea ? s - st * (ea - 1) : s + st);
      impl->minus[a][s] = static_cast<uint32_t>(ca == 0 ? s + st * (ea - 1) : s - st);
    }
    for (int a = m - 1; a >= 0; --a) {
      if (++c[a] < impl->extents[a]) break;
      c[a] = 0;
    }
  }
  impl_ = std::move(impl);
}

void Grid::require() const {
  if (!impl_) throw InvalidArgumentError("Grid: default-constructed grid used");
}

int Grid::dim() const { require(); return static_cast<int>(impl_->extents.size()); }
int Grid::extent(int axis) const { require(); return impl_->extents.at(axis); }
double Grid::spacing() const { require(); return impl_->h; }
double Grid::origin(int axis) const { require(); return impl_->origin.at(axis); }
double Grid::length(int axis) const { require(); return impl_->extents.at(axis) * impl_->h; }

double Grid::min_length() const {
  require();
  double l = length(0);
  for (int a = 1; a < dim(); ++a) l = std::min(l, length(a));
  return l;
}

std::size_t Grid::volume() const { require(); return impl_->volume; }

int Grid::wrap(int c, int axis) const {
  require();
  const int e = impl_->extents.at(axis);
  int r = c % e;
  return r < 0 ? r + e : r;
}

std::size_t Grid::index(std::span<const int> coords) const {
  require();
  if (coords.size() != impl_->extents.size())
    throw InvalidArgumentError("Grid::index: coordinate dimension mismatch");
  std::size_t s = 0;
  for (std::size_t a = 0; a < coords.size(); ++a)
    s += static_cast<std::size_t>(wrap(coords[a], static_cast<int>(a))) * impl_->strides[a];
  return s;
}

void Grid::coords(std::size_t site, std::span<int> out) const {
  require();
  if (out.size() != impl_->extents.size())
    throw InvalidArgumentError("Grid::coords: output dimension mismatch");
  for (std::size_t a = 0; a < out.size(); ++a) {
    out[a] = static_cast<int>((site / impl_->strides[a]) %
                              static_cast<std::size_t>(impl_->extents[a]));
  }
}

std::size_t Grid::neighbor(std::size_t site, int axis, int step) const {
  require();
  if (step == 1) return impl_->plus.at(axis)[site];
  if (step == -1) return impl_->minus.at(axis)[site];
  throw InvalidArgumentError("Grid::neighbor: step must be +1 or -1");
}

double Grid::position(std::size_t site, int axis) const {
  require();
  const std::size_t c = (site / impl_->strides.at(axis)) %
                        static_cast<std::size_t>(impl_->extents[axis]);
  return impl_->origin[axis] + static_cast<double>(c) * impl_->h;
}

std::vector<double> Grid::site_position(std::size_t site) const {
  require();
  const int m = dim();
  std::vector<double> p(m);
  for (int a = 0; a < m; ++a) p[a] = position(site, a);
  return p;
}

bool Grid::same_shape(const Grid& other) const {
  if (!impl_ || !other.impl_) return false;
  if (impl_ == other.impl_) return true;
  return impl_->extents == other.impl_->extents && impl_->h == other.impl_->h &&
         impl_->origin == other.impl_->origin;
}

}  // namespace ymlab
