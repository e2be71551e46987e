#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ymlab/field.hpp"

namespace ymlab {

/// Right-hand side of the gradient flow, d A / d tau = -div* F(A).
LieField flow_rhs(const LieField& a);

/// Discrete wave vector s_mu = sin(2 pi mode_mu h / L_mu) / h. An abelian
/// plane wave with polarization orthogonal to s decays as exp(-|s|^2 tau)
/// exactly in the semi-discrete flow.
std::vector<double> discrete_wave_vector(const Grid& g, const std::vector<int>& mode);

struct InitialData {
  std::string kind = "flat";  // flat | abelian_wave | random_bump | two_bump
  int n = 1;
  double amplitude = 1.0;
  std::vector<int> mode;              // abelian_wave: integer wave vector
  std::vector<double> polarization;   // abelian_wave: raw direction, the
                                      // discrete-divergence part is projected out
  std::vector<double> center;         // bumps: absolute coordinates, default midpoint
  std::vector<double> center2;        // two_bump only
  double envelope_sharpness = 4.0;    // von Mises concentration
  bool traceless = false;             // restrict random matrices to su(n)
  std::uint64_t seed = 1;
};

LieField make_initial(const Grid& g, const InitialData& d);

struct FlowParams {
  double horizon = 0.0;            // total flow time
  std::optional<double> dt;        // explicit step, checked against the bound
  double cfl_fraction = 0.1;       // dt_max = cfl_fraction * h^2
  int snapshot_cadence = 0;        // 0 = endpoints only, else every k-th step
  bool project_skew_each_step = true;
  double instability_tol = 0.01;   // allowed relative growth of the energy
};

/// One row per accepted step plus the initial state. dissipation_cum is the
/// trapezoid estimate of 2 int |dA/dtau|^2, so residual =
/// (ym + dissipation_cum - ym0) / ym0 measures energy-balance drift.
struct LedgerRow {
  double tau = 0.0;
  double ym = 0.0;
  double dissipation_cum = 0.0;
  double residual = 0.0;
};

struct FlowResult {
  LieField a;
  std::vector<LedgerRow> ledger;
  int steps = 0;
  double dt = 0.0;
};

using SnapshotCallback = std::function<void(double tau, const LieField& a, int step)>;

/// Classical RK4 on the flow. Throws CflError if an explicit dt exceeds the
/// stability bound and FlowInstabilityError if the energy grows past the
/// tolerance. The callback fires at step 0, every snapshot_cadence steps, and
/// at the final step.
FlowResult run_flow(LieField a, const FlowParams& p, const SnapshotCallback& cb = {});

}  // namespace ymlab
