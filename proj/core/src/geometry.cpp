#include "ymlab/geometry.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "ymlab/errors.hpp"

namespace ymlab {

namespace {

void check_plane(const Plane& p, const char* who) {
  const int m = p.ambient();
  if (m == 0) throw InvalidArgumentError(std::string(who) + ": plane has no base point");
  for (const auto& row : p.frame)
    if (static_cast<int>(row.size()) != m)
      throw InvalidArgumentError(std::string(who) + ": frame row size must match ambient");
  if (!p.is_orthonormal(1e-8))
    throw InvalidArgumentError(std::string(who) + ": frame is not orthonormal");
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

bool Plane::is_orthonormal(double tol) const {
  for (std::size_t i = 0; i < frame.size(); ++i)
    for (std::size_t j = i; j < frame.size(); ++j) {
      const double want = i == j ? 1.0 : 0.0;
      if (std::abs(dot(frame[i], frame[j]) - want) > tol) return false;
    }
  return true;
}

Plane axis_plane(int m, std::span<const int> axes, std::span<const double> base) {
  if (static_cast<int>(base.size()) != m)
    throw InvalidArgumentError("axis_plane: base size must match ambient");
  Plane p;
  p.base.assign(base.begin(), base.end());
  for (int axis : axes) {
    if (axis < 0 || axis >= m) throw InvalidArgumentError("axis_plane: axis out of range");
    std::vector<double> row(m, 0.0);
    row[axis] = 1.0;
    for (const auto& prev : p.frame)
      if (prev[axis] != 0.0) throw InvalidArgumentError("axis_plane: repeated axis");
    p.frame.push_back(std::move(row));
  }
  return p;
}

Plane grassmann_sample(int m, int k, std::mt19937_64& rng) {
  if (k < 1 || k > m) throw InvalidArgumentError("grassmann_sample: need 1 <= k <= m");
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    Eigen::MatrixXd x(m, k);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < k; ++j) x(i, j) = gauss(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
    Eigen::MatrixXd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    bool degenerate = false;
    for (int j = 0; j < k; ++j) {
      if (std::abs(r(j, j)) < 1e-8) {
        degenerate = true;
        break;
      }
      if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }
    if (degenerate) continue;
    Plane p;
    p.base.assign(m, 0.0);
    p.frame.resize(k);
    for (int j = 0; j < k; ++j) {
      p.frame[j].resize(m);
      for (int i = 0; i < m; ++i) p.frame[j][i] = q(i, j);
    }
    return p;
  }
}

Plane orthogonal_complement(const Plane& p) {
  check_plane(p, "orthogonal_complement");
  const int m = p.ambient();
  const int k = p.dim();
  Eigen::MatrixXd f(m, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < m; ++i) f(i, j) = p.frame[j][i];
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(f);
  Eigen::MatrixXd q = qr.householderQ();  // full m x m; trailing columns span the complement
  Plane out;
  out.base = p.base;
  out.frame.resize(m - k);
  for (int j = k; j < m; ++j) {
    out.frame[static_cast<std::size_t>(j - k)].resize(m);
    for (int i = 0; i < m; ++i) out.frame[static_cast<std::size_t>(j - k)][i] = q(i, j);
  }
  return out;
}

double distance_to_plane(std::span<const double> z, const Plane& p) {
  check_plane(p, "distance_to_plane");
  const int m = p.ambient();
  if (static_cast<int>(z.size()) != m)
    throw InvalidArgumentError("distance_to_plane: point size must match ambient");
  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) w[i] = z[i] - p.base[i];
  double norm2 = dot(w, w);
  for (const auto& row : p.frame) {
    const double c = dot(w, row);
    norm2 -= c * c;
  }
  return std::sqrt(std::max(norm2, 0.0));
}

bool cone_contains(const Cone& c, std::span<const double> z) {
  const int m = c.axis.ambient();
  if (static_cast<int>(z.size()) != m)
    throw InvalidArgumentError("cone_contains: point size must match ambient");
  std::vector<double> w(m);
  for (int i = 0; i < m; ++i) w[i] = z[i] - c.axis.base[i];
  const double norm2 = dot(w, w);
  if (norm2 == 0.0) return false;
  double proj2 = 0.0;
  for (const auto& row : c.axis.frame) {
    const double p = dot(w, row);
    proj2 += p * p;
  }
  const double dist2 = std::max(norm2 - proj2, 0.0);
  return dist2 < c.aperture * c.aperture * norm2;
}

ConeCensus cone_census(const Cone& c, const std::vector<std::vector<double>>& points,
                       double radius) {
  check_plane(c.axis, "cone_census");
  if (!(c.aperture > 0.0))
    throw InvalidArgumentError("cone_census: aperture must be positive");
  ConeCensus out;
  const int m = c.axis.ambient();
  for (const auto& z : points) {
    if (static_cast<int>(z.size()) != m)
      throw InvalidArgumentError("cone_census: point size must match ambient");
    double norm2 = 0.0;
    for (int i = 0; i < m; ++i) {
      const double d = z[i] - c.axis.base[i];
      norm2 += d * d;
    }
    if (norm2 == 0.0 || norm2 > radius * radius) continue;
    ++out.in_ball;
    if (cone_contains(c, z)) ++out.inside;
  }
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty())
    throw InvalidArgumentError("ks_statistic: samples must be non-empty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double worst = 0.0;
  while (i < a.size() && j < b.size()) {
    // step past a whole run of the smallest remaining value in both samples,
    // so ties move the two empirical CDFs together
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    worst = std::max(worst, std::abs(fa - fb));
  }
  return worst;
}

ScalarField synthetic_tube_density(const Grid& g, const TubeSpec& spec) {
  const int m = g.dim();
  if (static_cast<int>(spec.point.size()) != m)
    throw InvalidArgumentError("synthetic_tube_density: point size must match dim");
  std::vector<bool> spanned(m, false);
  for (int axis : spec.axes) {
    if (axis < 0 || axis >= m)
      throw InvalidArgumentError("synthetic_tube_density: axis out of range");
    if (spanned[axis]) throw InvalidArgumentError("synthetic_tube_density: repeated axis");
    spanned[axis] = true;
  }
  if (!(spec.amplitude > 0.0) || !(spec.exponent > 0.0))
    throw InvalidArgumentError("synthetic_tube_density: amplitude and exponent must be positive");
  const double h = g.spacing();
  const double core = spec.core_radius > 0.0 ? spec.core_radius : 0.75 * h;
  if (core < 0.5 * h * (1.0 - 1e-12))
    throw InvalidArgumentError("synthetic_tube_density: core below h/2 is unresolved");

  ScalarField e = make_scalar_field(g);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    double d2 = 0.0;
    for (int mu = 0; mu < m; ++mu) {
      if (spanned[mu]) continue;
      const double L = g.length(mu);
      double d = std::fmod(std::abs(g.position(s, mu) - spec.point[mu]), L);
      d = std::min(d, L - d);
      d2 += d * d;
    }
    const double dist = std::max(std::sqrt(d2), core);
    e.v[s] = spec.amplitude * std::pow(dist, -spec.exponent);
  }
  return e;
}

namespace {

std::vector<SingularSite> collect_singular(const std::vector<double>& liminf,
                                           double epsilon) {
  std::vector<SingularSite> out;
  for (std::size_t s = 0; s < liminf.size(); ++s)
    if (liminf[s] > epsilon) out.push_back({s, liminf[s]});
  return out;
}

std::vector<double> finest_rungs(std::span<const double> ladder, int j, const char* who) {
  if (j < 1) throw InvalidArgumentError(std::string(who) + ": j must be positive");
  if (static_cast<int>(ladder.size()) < j)
    throw LadderError(std::string(who) + ": ladder has " +
                      std::to_string(ladder.size()) + " rungs, need " + std::to_string(j));
  std::vector<double> rungs(ladder.begin(), ladder.end());
  std::sort(rungs.begin(), rungs.end());
  rungs.resize(static_cast<std::size_t>(j));
  return rungs;
}

}  // namespace

std::vector<SingularSite> extract_singular_set(const ScalarField& e,
                                               std::span<const double> ladder,
                                               double epsilon, int j,
                                               const QuadratureConfig& q) {
  const std::vector<double> rungs = finest_rungs(ladder, j, "extract_singular_set");
  std::vector<double> liminf;
  for (double rho : rungs) {
    ScalarField tg = theta_grid(e, rho, q);
    if (liminf.empty()) {
      liminf = std::move(tg.v);
    } else {
      for (std::size_t s = 0; s < liminf.size(); ++s)
        liminf[s] = std::min(liminf[s], tg.v[s]);
    }
  }
  return collect_singular(liminf, epsilon);
}

std::vector<SingularSite> extract_singular_set(const EnergySeries& s, double tau,
                                               std::span<const double> ladder,
                                               double epsilon, int j,
                                               const QuadratureConfig& q) {
  const std::vector<double> rungs = finest_rungs(ladder, j, "extract_singular_set");
  std::vector<double> liminf;
  for (double rho : rungs) {
    ScalarField tg = theta_grid(s.at(tau - rho * rho), rho, q);
    if (liminf.empty()) {
      liminf = std::move(tg.v);
    } else {
      for (std::size_t i = 0; i < liminf.size(); ++i)
        liminf[i] = std::min(liminf[i], tg.v[i]);
    }
  }
  return collect_singular(liminf, epsilon);
}

double slice_integral(const ScalarField& e, const Plane& plane, double rho,
                      double half_width, double step, const QuadratureConfig& q) {
  check_plane(plane, "slice_integral");
  if (plane.dim() != 4)
    throw InvalidArgumentError("slice_integral: slicing planes are 4-dimensional");
  if (plane.ambient() != e.grid.dim())
    throw InvalidArgumentError("slice_integral: plane ambient must match grid dim");
  if (!(half_width > 0.0))
    throw InvalidArgumentError("slice_integral: half_width must be positive");
  const double want = step > 0.0 ? step : 0.5 * e.grid.spacing();
  const int k = std::max(1, static_cast<int>(std::llround(half_width / want)));
  const double dy = half_width / k;

  const int m = e.grid.dim();
  std::vector<double> z(m);
  std::vector<int> idx(4, -k);
  double acc = 0.0;
  for (;;) {
    double weight = 1.0;
    for (int i = 0; i < 4; ++i)
      if (idx[i] == -k || idx[i] == k) weight *= 0.5;
    for (int mu = 0; mu < m; ++mu) {
      double c = plane.base[mu];
      for (int i = 0; i < 4; ++i) c += idx[i] * dy * plane.frame[i][mu];
      z[mu] = c;
    }
    acc += weight * theta(e, z, rho, q);
    int i = 0;
    for (; i < 4; ++i) {
      if (++idx[i] <= k) break;
      idx[i] = -k;
    }
    if (i == 4) break;
  }
  return acc * dy * dy * dy * dy;
}

DirectionalDensity directional_density(const ScalarField& e,
                                       std::span<const double> zbar, const Plane& v,
                                       double offset, double rho,
                                       const QuadratureConfig& q) {
  check_plane(v, "directional_density");
  const int m = e.grid.dim();
  if (static_cast<int>(zbar.size()) != m)
    throw InvalidArgumentError("directional_density: point size must match dim");
  if (!(offset > 0.0))
    throw InvalidArgumentError("directional_density: offset must be positive");
  Plane perp = orthogonal_complement(v);
  std::vector<double> z(m);
  auto mean_over = [&](const std::vector<std::vector<double>>& dirs) {
    if (dirs.empty()) return 0.0;
    double acc = 0.0;
    for (const auto& dir : dirs)
      for (double sign : {1.0, -1.0}) {
        for (int mu = 0; mu < m; ++mu) z[mu] = zbar[mu] + sign * offset * dir[mu];
        acc += theta(e, z, rho, q);
      }
    return acc / (2.0 * static_cast<double>(dirs.size()));
  };
  return {mean_over(v.frame), mean_over(perp.frame)};
}

namespace {

double fd_residual(double th0, double lap, double drho, double dtau_term, double rho) {
  return dtau_term - lap - (th0 - 0.5 * rho * drho) / (rho * rho);
}

}  // namespace

double pde_residual(const ScalarField& e, std::span<const double> z, double rho,
                    const PdeResidualSpec& spec, const QuadratureConfig& q) {
  const int m = e.grid.dim();
  if (static_cast<int>(z.size()) != m)
    throw InvalidArgumentError("pde_residual: point size must match dim");
  const double dz = spec.dz > 0.0 ? spec.dz : 0.1 * rho;
  const double drho = spec.drho > 0.0 ? spec.drho : 0.05 * rho;
  const double th0 = theta(e, z, rho, q);
  std::vector<double> zp(z.begin(), z.end());
  double lap = 0.0;
  for (int mu = 0; mu < m; ++mu) {
    zp[mu] = z[mu] + dz;
    const double up = theta(e, zp, rho, q);
    zp[mu] = z[mu] - dz;
    const double dn = theta(e, zp, rho, q);
    zp[mu] = z[mu];
    lap += (up - 2.0 * th0 + dn) / (dz * dz);
  }
  const double dr = (theta(e, z, rho + drho, q) - theta(e, z, rho - drho, q)) / (2.0 * drho);
  return fd_residual(th0, lap, dr, 0.0, rho);
}

double pde_residual(const EnergySeries& s, std::span<const double> z, double tau,
                    double rho, const PdeResidualSpec& spec, const QuadratureConfig& q) {
  const int m = s.grid().dim();
  if (static_cast<int>(z.size()) != m)
    throw InvalidArgumentError("pde_residual: point size must match dim");
  const double dz = spec.dz > 0.0 ? spec.dz : 0.1 * rho;
  const double drho = spec.drho > 0.0 ? spec.drho : 0.05 * rho;
  const double dtau = spec.dtau > 0.0 ? spec.dtau : 0.1 * rho * rho;
  const double th0 = theta_at_time(s, z, rho, tau, q);
  std::vector<double> zp(z.begin(), z.end());
  double lap = 0.0;
  for (int mu = 0; mu < m; ++mu) {
    zp[mu] = z[mu] + dz;
    const double up = theta_at_time(s, zp, rho, tau, q);
    zp[mu] = z[mu] - dz;
    const double dn = theta_at_time(s, zp, rho, tau, q);
    zp[mu] = z[mu];
    lap += (up - 2.0 * th0 + dn) / (dz * dz);
  }
  const double dr = (theta_at_time(s, z, rho + drho, tau, q) -
                     theta_at_time(s, z, rho - drho, tau, q)) / (2.0 * drho);
  const double dt = (theta_at_time(s, z, rho, tau + dtau, q) -
                     theta_at_time(s, z, rho, tau - dtau, q)) / (2.0 * dtau);
  return fd_residual(th0, lap, dr, dt, rho);
}

}  // namespace ymlab
