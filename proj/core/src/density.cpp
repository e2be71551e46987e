#include "ymlab/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "ymlab/errors.hpp"
#include "ymlab/parallel.hpp"

namespace ymlab {

namespace {

struct AxisEntry {
  std::size_t offset;  // wrapped index times stride
  double d2;
  double w;
};

struct ProbeTables {
  std::vector<std::vector<AxisEntry>> axes;
  double radius2 = 0.0;
};

std::vector<std::size_t> row_major_strides(const Grid& g) {
  const int m = g.dim();
  std::vector<std::size_t> stride(m);
  stride[m - 1] = 1;
  for (int mu = m - 2; mu >= 0; --mu)
    stride[mu] = stride[mu + 1] * static_cast<std::size_t>(g.extent(mu + 1));
  return stride;
}

/// Nearest-image displacement tables for a truncated Gaussian centered at z.
ProbeTables build_tables(const Grid& g, std::span<const double> z, double radius,
                         double inv_denom, const char* who) {
  const int m = g.dim();
  if (static_cast<int>(z.size()) != m)
    throw InvalidArgumentError(std::string(who) + ": probe point size must match dim");
  if (2.0 * radius > g.min_length() * (1.0 + 1e-12))
    throw WrapContaminationError(std::string(who) + ": truncation ball of diameter " +
                                 std::to_string(2.0 * radius) +
                                 " exceeds the shortest period " +
                                 std::to_string(g.min_length()));
  ProbeTables t;
  t.radius2 = radius * radius * (1.0 + 1e-12);
  t.axes.resize(m);
  const std::vector<std::size_t> stride = row_major_strides(g);
  const double h = g.spacing();
  for (int mu = 0; mu < m; ++mu) {
    const int N = g.extent(mu);
    const double o = g.origin(mu);
    long jlo = static_cast<long>(std::ceil((z[mu] - o - radius) / h - 1e-12));
    long jhi = static_cast<long>(std::floor((z[mu] - o + radius) / h + 1e-12));
    while (jhi - jlo + 1 > N) {  // keep displacements unique on the torus
      const double dlo = std::abs(z[mu] - (o + static_cast<double>(jlo) * h));
      const double dhi = std::abs(z[mu] - (o + static_cast<double>(jhi) * h));
      if (dhi >= dlo) --jhi; else ++jlo;
    }
    auto& table = t.axes[mu];
    table.reserve(static_cast<std::size_t>(jhi - jlo + 1));
    for (long j = jlo; j <= jhi; ++j) {
      const double delta = z[mu] - (o + static_cast<double>(j) * h);
      const long jw = ((j % N) + N) % N;
      table.push_back({static_cast<std::size_t>(jw) * stride[mu], delta * delta,
                       std::exp(-delta * delta * inv_denom)});
    }
  }
  return t;
}

double accumulate(const ScalarField& e, const ProbeTables& t, int axis, double d2,
                  double w, std::size_t base) {
  if (axis == static_cast<int>(t.axes.size())) return w * e.v[base];
  double acc = 0.0;
  for (const AxisEntry& entry : t.axes[axis]) {
    const double nd2 = d2 + entry.d2;
    if (nd2 > t.radius2) continue;
    acc += accumulate(e, t, axis + 1, nd2, w * entry.w, base + entry.offset);
  }
  return acc;
}

/// Raw sum of exp(-|z - y|^2 inv_denom) e(y) over lattice sites in the ball.
double truncated_gaussian_sum(const ScalarField& e, std::span<const double> z,
                              double radius, double inv_denom, const char* who) {
  ProbeTables t = build_tables(e.grid, z, radius, inv_denom, who);
  return accumulate(e, t, 0, 0.0, 1.0, 0);
}

struct WeightedSums {
  double plain = 0.0;
  double r2 = 0.0;  // same sum with an extra |z - y|^2 factor
};

void accumulate_r2(const ScalarField& e, const ProbeTables& t, int axis, double d2,
                   double w, std::size_t base, WeightedSums& out) {
  if (axis == static_cast<int>(t.axes.size())) {
    const double v = w * e.v[base];
    out.plain += v;
    out.r2 += v * d2;
    return;
  }
  for (const AxisEntry& entry : t.axes[axis]) {
    const double nd2 = d2 + entry.d2;
    if (nd2 > t.radius2) continue;
    accumulate_r2(e, t, axis + 1, nd2, w * entry.w, base + entry.offset, out);
  }
}

void check_rho(double rho, const char* who) {
  if (!(rho > 0.0)) throw InvalidArgumentError(std::string(who) + ": rho must be positive");
}

int box_halfwidth(const Grid& g, int axis, double rho, const QuadratureConfig& q) {
  const long want = static_cast<long>(std::floor(q.r_trunc * rho / g.spacing() + 1e-12));
  const long cap = (g.extent(axis) - 1) / 2;
  return static_cast<int>(std::min(want, cap));
}

}  // namespace

double theta(const ScalarField& e, std::span<const double> z, double rho,
             const QuadratureConfig& q) {
  check_rho(rho, "theta");
  if (!(q.r_trunc > 0.0)) throw InvalidArgumentError("theta: r_trunc must be positive");
  const double raw = truncated_gaussian_sum(e, z, q.r_trunc * rho,
                                            1.0 / (4.0 * rho * rho), "theta");
  const int m = e.grid.dim();
  return std::pow(rho, 4 - m) * std::pow(e.grid.spacing(), m) * raw;
}

ThetaDerivatives theta_derivatives(const ScalarField& e, std::span<const double> z,
                                   double rho, const QuadratureConfig& q) {
  check_rho(rho, "theta_derivatives");
  const int m = e.grid.dim();
  ProbeTables t = build_tables(e.grid, z, q.r_trunc * rho, 1.0 / (4.0 * rho * rho),
                               "theta_derivatives");
  WeightedSums sums;
  accumulate_r2(e, t, 0, 0.0, 1.0, 0, sums);
  const double measure = std::pow(rho, 4 - m) * std::pow(e.grid.spacing(), m);
  ThetaDerivatives out;
  out.theta = measure * sums.plain;
  const double r2 = rho * rho;
  out.laplacian = measure * (sums.r2 / (4.0 * r2 * r2) - sums.plain * m / (2.0 * r2));
  out.rho_derivative = (4 - m) / rho * out.theta + measure * sums.r2 / (2.0 * r2 * rho);
  return out;
}

ScalarField theta_grid(const ScalarField& e, double rho, const QuadratureConfig& q) {
  check_rho(rho, "theta_grid");
  const Grid& g = e.grid;
  const int m = g.dim();
  const double inv_denom = 1.0 / (4.0 * rho * rho);
  const double h = g.spacing();
  const std::vector<std::size_t> stride = row_major_strides(g);

  std::vector<double> cur = e.v;
  std::vector<double> next(cur.size());
  for (int mu = 0; mu < m; ++mu) {
    const std::size_t N = static_cast<std::size_t>(g.extent(mu));
    const std::size_t s = stride[mu];
    const int D = box_halfwidth(g, mu, rho, q);
    std::vector<double> w(static_cast<std::size_t>(D) + 1);
    for (int d = 0; d <= D; ++d) w[d] = std::exp(-(d * h) * (d * h) * inv_denom);
    const std::size_t lines = g.volume() / N;
    parallel_for(0, lines, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t l = lo; l < hi; ++l) {
        const std::size_t base = (l / s) * (N * s) + (l % s);
        for (std::size_t j = 0; j < N; ++j) {
          double acc = w[0] * cur[base + j * s];
          for (int d = 1; d <= D; ++d) {
            const std::size_t jm = (j + N - static_cast<std::size_t>(d)) % N;
            const std::size_t jp = (j + static_cast<std::size_t>(d)) % N;
            acc += w[d] * (cur[base + jm * s] + cur[base + jp * s]);
          }
          next[base + j * s] = acc;
        }
      }
    });
    cur.swap(next);
  }
  const double scale = std::pow(rho, 4 - m) * std::pow(h, m);
  ScalarField out;
  out.grid = g;
  out.v = std::move(cur);
  for (double& v : out.v) v *= scale;
  return out;
}

double global_density_integral(const ScalarField& theta_field, double rho) {
  check_rho(rho, "global_density_integral");
  const double hm = std::pow(theta_field.grid.spacing(), theta_field.grid.dim());
  return scalar_sum(theta_field) * hm / (rho * rho * rho * rho);
}

double gaussian_kernel_mass_ratio(const Grid& g, double rho, const QuadratureConfig& q) {
  check_rho(rho, "gaussian_kernel_mass_ratio");
  const double h = g.spacing();
  const double inv_denom = 1.0 / (4.0 * rho * rho);
  const double continuum = std::sqrt(4.0 * std::numbers::pi) * rho;
  double ratio = 1.0;
  for (int mu = 0; mu < g.dim(); ++mu) {
    const int D = box_halfwidth(g, mu, rho, q);
    double mass = 1.0;
    for (int d = 1; d <= D; ++d) mass += 2.0 * std::exp(-(d * h) * (d * h) * inv_denom);
    ratio *= h * mass / continuum;
  }
  return ratio;
}

void EnergySeries::push(double tau, ScalarField e) {
  if (!taus_.empty()) {
    if (!(tau > taus_.back()))
      throw InvalidArgumentError("EnergySeries::push: taus must be strictly increasing");
    if (!fields_.front().grid.same_shape(e.grid))
      throw InvalidArgumentError("EnergySeries::push: grid shape changed");
  }
  taus_.push_back(tau);
  fields_.push_back(std::move(e));
}

double EnergySeries::front_tau() const {
  if (taus_.empty()) throw InvalidArgumentError("EnergySeries: empty");
  return taus_.front();
}

double EnergySeries::back_tau() const {
  if (taus_.empty()) throw InvalidArgumentError("EnergySeries: empty");
  return taus_.back();
}

const Grid& EnergySeries::grid() const {
  if (fields_.empty()) throw InvalidArgumentError("EnergySeries: empty");
  return fields_.front().grid;
}

ScalarField EnergySeries::at(double tau) const {
  if (taus_.empty()) throw InvalidArgumentError("EnergySeries: empty");
  const double slack = 1e-12 * (1.0 + std::abs(taus_.back()));
  if (tau < taus_.front() - slack || tau > taus_.back() + slack)
    throw InvalidProbeError("EnergySeries::at: tau " + std::to_string(tau) +
                            " outside the recorded range [" +
                            std::to_string(taus_.front()) + ", " +
                            std::to_string(taus_.back()) + "]");
  const double t = std::clamp(tau, taus_.front(), taus_.back());
  auto it = std::upper_bound(taus_.begin(), taus_.end(), t);
  if (it == taus_.begin()) return fields_.front();
  if (it == taus_.end()) return fields_.back();
  const std::size_t k = static_cast<std::size_t>(it - taus_.begin());
  const double w = (t - taus_[k - 1]) / (taus_[k] - taus_[k - 1]);
  ScalarField out = fields_[k - 1];
  for (std::size_t i = 0; i < out.v.size(); ++i)
    out.v[i] += w * (fields_[k].v[i] - out.v[i]);
  return out;
}

double theta_at_time(const EnergySeries& s, std::span<const double> z, double rho,
                     double tau, const QuadratureConfig& q) {
  check_rho(rho, "theta_at_time");
  const double te = tau - rho * rho;
  const double slack = 1e-12 * (1.0 + std::abs(s.back_tau()));
  if (te < s.front_tau() - slack || te > s.back_tau() + slack)
    throw InvalidProbeError("theta_at_time: tau - rho^2 = " + std::to_string(te) +
                            " outside the recorded range [" +
                            std::to_string(s.front_tau()) + ", " +
                            std::to_string(s.back_tau()) + "]");
  return theta(s.at(te), z, rho, q);
}

namespace {
std::vector<double> sorted_descending(std::span<const double> rhos, const char* who) {
  if (rhos.empty()) throw InvalidArgumentError(std::string(who) + ": empty scale list");
  std::vector<double> out(rhos.begin(), rhos.end());
  for (double r : out) check_rho(r, who);
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}
}  // namespace

DensityLadder density_ladder(const ScalarField& e, std::span<const double> z,
                             std::span<const double> rhos, const QuadratureConfig& q) {
  DensityLadder out;
  out.rhos = sorted_descending(rhos, "density_ladder");
  out.thetas.reserve(out.rhos.size());
  for (double r : out.rhos) out.thetas.push_back(theta(e, z, r, q));
  return out;
}

DensityLadder density_ladder(const EnergySeries& s, std::span<const double> z,
                             double tau, std::span<const double> rhos,
                             const QuadratureConfig& q) {
  DensityLadder out;
  out.rhos = sorted_descending(rhos, "density_ladder");
  out.thetas.reserve(out.rhos.size());
  for (double r : out.rhos) out.thetas.push_back(theta_at_time(s, z, r, tau, q));
  return out;
}

std::vector<double> default_ladder(const Grid& g) {
  const double h = g.spacing();
  const double top = g.min_length() / 16.0;
  const double floor_rho = 0.6 * h;  // below this, kernel aliasing bites
  if (top < floor_rho * (1.0 - 1e-12))
    throw LadderError("default_ladder: min_length/16 sits below the 0.6h aliasing floor");
  std::vector<double> out;
  if (top >= 4.0 * h * (1.0 - 1e-12)) {
    for (double r = top; r >= 2.0 * h * (1.0 - 1e-9); r /= std::numbers::sqrt2)
      out.push_back(r);
  } else {
    const double bottom = std::max(floor_rho, 0.5 * top);
    const double ratio = std::sqrt(bottom / top);
    out = {top, top * ratio, bottom};
  }
  return out;
}

double liminf_estimate(const DensityLadder& ladder, int j) {
  if (j < 1) throw InvalidArgumentError("liminf_estimate: j must be positive");
  const int k = static_cast<int>(ladder.rhos.size());
  if (k < j)
    throw LadderError("liminf_estimate: ladder has " + std::to_string(k) +
                      " rungs, need " + std::to_string(j));
  double best = ladder.thetas[static_cast<std::size_t>(k - j)];
  for (int i = k - j + 1; i < k; ++i)
    best = std::min(best, ladder.thetas[static_cast<std::size_t>(i)]);
  return best;
}

double monotonicity_fit_c(const DensityLadder& ladder, double ym0) {
  const std::size_t k = ladder.rhos.size();
  if (k < 2) throw LadderError("monotonicity_fit_c: need at least two rungs");
  if (ym0 < 0.0) throw InvalidArgumentError("monotonicity_fit_c: ym0 must be nonnegative");
  double worst = 0.0;
  // rhos are descending: pair (i, j) with i < j has rho_j < rho_i
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      const double rho_hi = ladder.rhos[i], rho_lo = ladder.rhos[j];
      const double d = rho_hi - rho_lo;
      if (d < 1e-15 * rho_hi) continue;
      const double th_hi = ladder.thetas[i], th_lo = ladder.thetas[j];
      if (th_lo <= 0.0) continue;  // C = 0 works
      const double quad = (rho_hi * rho_hi - rho_lo * rho_lo) * ym0;
      auto slack = [&](double c) {
        return c * std::exp(c * d) * th_hi + c * quad - th_lo;
      };
      double hi = 1.0;
      while (slack(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e12) break;
      }
      if (slack(hi) < 0.0) return hi;  // no admissible constant below the cap
      double lo = 0.0;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slack(mid) >= 0.0 ? hi : lo) = mid;
      }
      worst = std::max(worst, hi);
    }
  return worst;
}

double lipschitz_modulus(const ScalarField& e, std::span<const double> center,
                         double rho, const LipschitzProbe& probe,
                         const QuadratureConfig& q) {
  check_rho(rho, "lipschitz_modulus");
  const Grid& g = e.grid;
  const int m = g.dim();
  if (static_cast<int>(center.size()) != m)
    throw InvalidArgumentError("lipschitz_modulus: center size must match dim");
  if (probe.pairs < 1) throw InvalidArgumentError("lipschitz_modulus: pairs must be positive");
  const double region = probe.region_radius > 0.0 ? probe.region_radius : 2.0;
  std::mt19937_64 rng(probe.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto direction = [&](std::vector<double>& dir) {
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (double& v : dir) {
        v = gauss(rng);
        norm2 += v * v;
      }
    } while (norm2 < 1e-12);
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : dir) v *= inv;
  };
  std::vector<double> dir(m), za(m), zb(m);
  double worst = 0.0;
  for (int p = 0; p < probe.pairs; ++p) {
    direction(dir);
    const double r = region * std::pow(unif(rng), 1.0 / m);
    for (int mu = 0; mu < m; ++mu) za[mu] = center[mu] + rho * r * dir[mu];
    direction(dir);
    const double sep = 0.25 + 0.75 * unif(rng);  // rescaled |x - x'|
    for (int mu = 0; mu < m; ++mu) zb[mu] = za[mu] + rho * sep * dir[mu];
    const double da = theta(e, za, rho, q);
    const double db = theta(e, zb, rho, q);
    worst = std::max(worst, std::abs(da - db) / sep);
  }
  return worst;
}

RescalingCheck rescaling_check(const ScalarField& e, std::span<const double> zbar,
                               double rho, std::span<const double> x,
                               const QuadratureConfig& q) {
  check_rho(rho, "rescaling_check");
  const Grid& g = e.grid;
  const int m = g.dim();
  if (static_cast<int>(zbar.size()) != m || static_cast<int>(x.size()) != m)
    throw InvalidArgumentError("rescaling_check: zbar and x sizes must match dim");
  std::vector<double> probe_point(m);
  for (int mu = 0; mu < m; ++mu) probe_point[mu] = zbar[mu] + rho * x[mu];

  // route 1: rescaled-coordinate quadrature, own truncation radius
  const double r1 = 11.0;  // in rescaled units; tail exp(-121/8) ~ 3e-7
  const double raw = truncated_gaussian_sum(e, probe_point, r1 * rho,
                                            1.0 / (8.0 * rho * rho), "rescaling_check");
  RescalingCheck out;
  out.direct = raw * std::pow(g.spacing() / rho, m);

  // route 2: the density at scale sqrt(2) rho, Jacobian factors explicit
  out.via_theta = std::pow(2.0, 0.5 * (m - 4)) / (rho * rho * rho * rho) *
                  theta(e, probe_point, std::numbers::sqrt2 * rho, q);
  return out;
}

}  // namespace ymlab
