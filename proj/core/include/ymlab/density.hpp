#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ymlab/field.hpp"

namespace ymlab {

// Parabolic density of an energy field e at scale rho:
//   theta(z) = rho^(4-m) * integral exp(-|z - y|^2 / (4 rho^2)) e(y) dy,
// evaluated by lattice quadrature. Time dependence enters through which e is
// passed: the density at flow time tau probes e at tau - rho^2.

struct QuadratureConfig {
  double r_trunc = 8.0;  // Gaussian truncated at |z - y| <= r_trunc * rho
};

/// Single probe at an arbitrary (possibly off-grid) point. Ball truncation;
/// throws WrapContaminationError if the ball diameter exceeds one period.
double theta(const ScalarField& e, std::span<const double> z, double rho,
             const QuadratureConfig& q = {});

/// theta and its z-Laplacian and rho-derivative by closed-form kernel
/// quadrature, valid for a time-independent e:
///   lap  = rho^(4-m) int (r^2/(4 rho^4) - m/(2 rho^2)) K e,
///   drho = (4-m)/rho theta + rho^(4-m) int (r^2/(2 rho^3)) K e.
struct ThetaDerivatives {
  double theta = 0.0;
  double laplacian = 0.0;
  double rho_derivative = 0.0;
};
ThetaDerivatives theta_derivatives(const ScalarField& e, std::span<const double> z,
                                   double rho, const QuadratureConfig& q = {});

/// theta at every grid site via separable per-axis convolutions. The
/// truncation is the inscribed box rather than the ball, with per-axis
/// half-width min(floor(r_trunc rho / h), (extent - 1) / 2) so displacements
/// stay unique on the torus.
ScalarField theta_grid(const ScalarField& e, double rho, const QuadratureConfig& q = {});

/// rho^-4 h^m sum of a theta_grid field; compare with (4 pi)^(m/2) * YM.
double global_density_integral(const ScalarField& theta_field, double rho);

/// Predicted ratio of the discrete global integral to its continuum value:
/// the per-axis truncated kernel mass over sqrt(4 pi rho^2), multiplied over
/// axes. Deviates from 1 only by aliasing and truncation tails.
double gaussian_kernel_mass_ratio(const Grid& g, double rho,
                                  const QuadratureConfig& q = {});

/// Energy snapshots along a flow, strictly increasing in tau. theta is linear
/// in e, so linear interpolation between snapshots commutes with probing.
class EnergySeries {
 public:
  void push(double tau, ScalarField e);
  int size() const { return static_cast<int>(taus_.size()); }
  double front_tau() const;
  double back_tau() const;
  const Grid& grid() const;
  ScalarField at(double tau) const;
  const std::vector<double>& taus() const { return taus_; }

 private:
  std::vector<double> taus_;
  std::vector<ScalarField> fields_;
};

/// theta^rho(z, tau) against a series: probes e at tau - rho^2. Throws
/// InvalidProbeError when tau - rho^2 falls outside the recorded range.
double theta_at_time(const EnergySeries& s, std::span<const double> z, double rho,
                     double tau, const QuadratureConfig& q = {});

struct DensityLadder {
  std::vector<double> rhos;    // descending
  std::vector<double> thetas;  // matching order
};

DensityLadder density_ladder(const ScalarField& e, std::span<const double> z,
                             std::span<const double> rhos, const QuadratureConfig& q = {});
DensityLadder density_ladder(const EnergySeries& s, std::span<const double> z,
                             double tau, std::span<const double> rhos,
                             const QuadratureConfig& q = {});

/// Scale ladder for a grid: from min_length/16 downward by 1/sqrt(2) while
/// the rung stays above 2h; on grids too coarse for that, three geometric
/// rungs from min_length/16 down to 0.6h. Throws LadderError when even the
/// top rung would sit below the aliasing floor.
std::vector<double> default_ladder(const Grid& g);

/// min over the j finest rungs; the lattice stand-in for liminf as rho -> 0.
double liminf_estimate(const DensityLadder& ladder, int j = 3);

/// Smallest C >= 0 with theta(rho) <= C exp(C (rho' - rho)) theta(rho') +
/// C (rho'^2 - rho^2) ym0 across every rung pair rho < rho'; bisection.
double monotonicity_fit_c(const DensityLadder& ladder, double ym0);

/// Max difference quotient of the rescaled profile x -> theta(zbar + rho x):
/// |theta(zbar + rho x) - theta(zbar + rho x')| / |x - x'| over seeded pairs,
/// x uniform in the ball B_R of rescaled radius R = region_radius and
/// separations |x - x'| in [1/4, 1]. Uniformity of this quotient across rho
/// is what "no scale trend" means for the density.
struct LipschitzProbe {
  int pairs = 64;
  double region_radius = 0.0;  // rescaled units; 0 picks 2
  std::uint64_t seed = 1;
};
double lipschitz_modulus(const ScalarField& e, std::span<const double> center,
                         double rho, const LipschitzProbe& probe,
                         const QuadratureConfig& q = {});

struct RescalingCheck {
  double direct = 0.0;     // integral of exp(-|x - xbar|^2 / 8) e(zbar + rho xbar)
  double via_theta = 0.0;  // 2^((m-4)/2) rho^-4 theta^(sqrt(2) rho)(zbar + rho x)
};

/// Both routes through the parabolic rescaling identity; they agree up to
/// quadrature truncation. x and zbar are in rescaled and absolute
/// coordinates respectively.
RescalingCheck rescaling_check(const ScalarField& e, std::span<const double> zbar,
                               double rho, std::span<const double> x,
                               const QuadratureConfig& q = {});

}  // namespace ymlab
