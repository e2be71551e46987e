#include "ymlab/flow.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "ymlab/errors.hpp"

namespace ymlab {

LieField flow_rhs(const LieField& a) {
  LieField g = divergence_star(a, curvature(a));
  scale(g, -1.0);
  return g;
}

std::vector<double> discrete_wave_vector(const Grid& g, const std::vector<int>& mode) {
  const int m = g.dim();
  if (static_cast<int>(mode.size()) != m)
    throw InvalidArgumentError("discrete_wave_vector: mode size must match dim");
  std::vector<double> s(m);
  for (int mu = 0; mu < m; ++mu) {
    const double kappa = 2.0 * std::numbers::pi * mode[mu] / g.length(mu);
    s[mu] = std::sin(kappa * g.spacing()) / g.spacing();
  }
  return s;
}

namespace {

double von_mises_envelope(const Grid& g, std::size_t site, const std::vector<double>& c,
                          double kappa) {
  double acc = 0.0;
  for (int mu = 0; mu < g.dim(); ++mu) {
    const double t = 2.0 * std::numbers::pi * (g.position(site, mu) - c[mu]) / g.length(mu);
    acc += kappa * (std::cos(t) - 1.0);
  }
  return std::exp(acc);
}

std::vector<double> resolve_center(const Grid& g, const std::vector<double>& given,
                                   const char* who) {
  if (given.empty()) {
    std::vector<double> c(g.dim());
    for (int mu = 0; mu < g.dim(); ++mu) c[mu] = g.origin(mu) + 0.5 * g.length(mu);
    return c;
  }
  if (static_cast<int>(given.size()) != g.dim())
    throw InvalidArgumentError(std::string(who) + ": center size must match dim");
  return given;
}

LieField make_abelian_wave(const Grid& g, const InitialData& d) {
  const int m = g.dim();
  if (static_cast<int>(d.mode.size()) != m)
    throw InvalidArgumentError("make_initial: abelian_wave needs a mode vector of size dim");
  std::vector<double> s = discrete_wave_vector(g, d.mode);
  double s2 = 0.0;
  for (double v : s) s2 += v * v;
  if (s2 < 1e-20)  // zero or Nyquist mode: no discrete frequency content
    throw InvalidArgumentError("make_initial: abelian_wave mode has zero discrete frequency");

  std::vector<double> eps = d.polarization;
  if (eps.empty()) {
    // default: the axis least aligned with s
    int best = 0;
    for (int mu = 1; mu < m; ++mu)
      if (std::abs(s[mu]) < std::abs(s[best])) best = mu;
    eps.assign(m, 0.0);
    eps[best] = 1.0;
  }
  if (static_cast<int>(eps.size()) != m)
    throw InvalidArgumentError("make_initial: polarization size must match dim");
  double dot = 0.0, raw2 = 0.0;
  for (int mu = 0; mu < m; ++mu) {
    dot += eps[mu] * s[mu];
    raw2 += eps[mu] * eps[mu];
  }
  for (int mu = 0; mu < m; ++mu) eps[mu] -= dot / s2 * s[mu];
  double eps2 = 0.0;
  for (double v : eps) eps2 += v * v;
  if (eps2 < 1e-24 * raw2)
    throw InvalidArgumentError("make_initial: polarization is parallel to the wave vector");
  const double rescale = d.amplitude / std::sqrt(eps2);
  for (double& v : eps) v *= rescale;

  LieField a = make_lie_field(g, d.n, m);
  for (std::size_t site = 0; site < g.volume(); ++site) {
    double phase = 0.0;
    for (int mu = 0; mu < m; ++mu)
      phase += 2.0 * std::numbers::pi * d.mode[mu] *
               (g.position(site, mu) - g.origin(mu)) / g.length(mu);
    const cplx value{0.0, std::sin(phase)};
    for (int nu = 0; nu < m; ++nu) {
      auto dst = a.at(site, nu);
      for (int i = 0; i < d.n; ++i) dst[static_cast<std::size_t>(i) * d.n + i] = eps[nu] * value;
    }
  }
  return a;
}

LieField make_bumps(const Grid& g, const InitialData& d, int bumps) {
  const int m = g.dim();
  std::mt19937_64 rng(d.seed);
  std::vector<std::vector<double>> centers;
  centers.push_back(resolve_center(g, d.center, "make_initial"));
  if (bumps == 2) {
    if (d.center2.empty()) {
      // offset the second bump by a quarter period along every axis
      std::vector<double> c2 = centers[0];
      for (int mu = 0; mu < m; ++mu) c2[mu] += 0.25 * g.length(mu);
      centers.push_back(c2);
    } else {
      centers.push_back(resolve_center(g, d.center2, "make_initial"));
    }
  }
  LieField a = make_lie_field(g, d.n, m);
  for (const auto& c : centers) {
    std::vector<LieMatrix> direction;
    direction.reserve(m);
    for (int nu = 0; nu < m; ++nu)
      direction.push_back(random_skew_hermitian(d.n, rng, d.traceless));
    for (std::size_t site = 0; site < g.volume(); ++site) {
      const double w = d.amplitude * von_mises_envelope(g, site, c, d.envelope_sharpness);
      for (int nu = 0; nu < m; ++nu) {
        auto dst = a.at(site, nu);
        const auto& b = direction[nu].a;
        for (std::size_t k = 0; k < b.size(); ++k) dst[k] += w * b[k];
      }
    }
  }
  return a;
}

}  // namespace

LieField make_initial(const Grid& g, const InitialData& d) {
  if (d.n <= 0) throw InvalidArgumentError("make_initial: n must be positive");
  if (d.kind == "flat") return make_lie_field(g, d.n, g.dim());
  if (d.kind == "abelian_wave") return make_abelian_wave(g, d);
  if (d.kind == "random_bump") return make_bumps(g, d, 1);
  if (d.kind == "two_bump") return make_bumps(g, d, 2);
  throw InvalidArgumentError("make_initial: unknown kind '" + d.kind + "'");
}

FlowResult run_flow(LieField a, const FlowParams& p, const SnapshotCallback& cb) {
  if (p.horizon < 0.0) throw InvalidArgumentError("run_flow: horizon must be nonnegative");
  if (p.cfl_fraction <= 0.0) throw InvalidArgumentError("run_flow: cfl_fraction must be positive");
  const double h = a.grid.spacing();
  const double dt_max = p.cfl_fraction * h * h;

  int steps = 0;
  double dt = 0.0;
  if (p.horizon > 0.0) {
    if (p.dt) {
      if (*p.dt <= 0.0) throw InvalidArgumentError("run_flow: dt must be positive");
      if (*p.dt > dt_max * (1.0 + 1e-12))
        throw CflError("run_flow: dt " + std::to_string(*p.dt) +
                       " exceeds the stability bound " + std::to_string(dt_max));
      steps = static_cast<int>(std::ceil(p.horizon / *p.dt - 1e-9));
    } else {
      steps = static_cast<int>(std::ceil(p.horizon / dt_max - 1e-9));
    }
    if (steps < 1) steps = 1;
    if (p.snapshot_cadence > 0)
      steps = p.snapshot_cadence * ((steps + p.snapshot_cadence - 1) / p.snapshot_cadence);
    dt = p.horizon / steps;
  }

  FlowResult out;
  out.steps = steps;
  out.dt = dt;
  out.ledger.reserve(static_cast<std::size_t>(steps) + 1);

  LieField k1 = flow_rhs(a);
  double g_prev = field_inner(k1, k1);
  const double ym0 = ym_energy(a);
  double dissipation = 0.0;
  out.ledger.push_back({0.0, ym0, 0.0, 0.0});
  if (cb) cb(0.0, a, 0);

  LieField stage = a;
  for (int step = 1; step <= steps; ++step) {
    // k1 already holds the rhs at the step start
    stage = a;
    axpy(stage, 0.5 * dt, k1);
    LieField k2 = flow_rhs(stage);
    stage = a;
    axpy(stage, 0.5 * dt, k2);
    LieField k3 = flow_rhs(stage);
    stage = a;
    axpy(stage, dt, k3);
    LieField k4 = flow_rhs(stage);

    axpy(a, dt / 6.0, k1);
    axpy(a, dt / 3.0, k2);
    axpy(a, dt / 3.0, k3);
    axpy(a, dt / 6.0, k4);
    if (p.project_skew_each_step) project_skew_field(a);

    k1 = flow_rhs(a);
    const double g_now = field_inner(k1, k1);
    dissipation += dt * (g_prev + g_now);  // 2 * trapezoid
    g_prev = g_now;

    const double tau = dt * step;
    const double ym = ym_energy(a);
    const double residual = ym0 > 0.0 ? (ym + dissipation - ym0) / ym0 : ym + dissipation;
    out.ledger.push_back({tau, ym, dissipation, residual});
    if (ym > ym0 * (1.0 + p.instability_tol) + 1e-12)
      throw FlowInstabilityError("run_flow: energy grew to " + std::to_string(ym) +
                                 " from " + std::to_string(ym0) + " at tau " +
                                 std::to_string(tau));
    if (cb && (step == steps || (p.snapshot_cadence > 0 && step % p.snapshot_cadence == 0)))
      cb(tau, a, step);
  }
  out.a = std::move(a);
  return out;
}

}  // namespace ymlab
