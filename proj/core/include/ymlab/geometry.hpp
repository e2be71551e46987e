#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ymlab/density.hpp"
#include "ymlab/field.hpp"

namespace ymlab {

/// Affine k-plane in R^m: a base point plus k orthonormal frame rows.
struct Plane {
  std::vector<double> base;
  std::vector<std::vector<double>> frame;

  int ambient() const { return static_cast<int>(base.size()); }
  int dim() const { return static_cast<int>(frame.size()); }
  bool is_orthonormal(double tol = 1e-10) const;
};

/// Coordinate plane spanned by the given axes, through the given point.
Plane axis_plane(int m, std::span<const int> axes, std::span<const double> base);

/// Haar-like draw from the Grassmannian of k-planes through the origin:
/// QR of a Gaussian matrix with the R_ii > 0 sign convention.
Plane grassmann_sample(int m, int k, std::mt19937_64& rng);

/// Orthonormal frame spanning the orthogonal complement, same base point.
Plane orthogonal_complement(const Plane& p);

/// Euclidean distance from z to the affine plane.
double distance_to_plane(std::span<const double> z, const Plane& p);

/// X(apex, V, s) = { z : dist(z - apex, V) < s |z - apex| }, apex excluded.
/// Plain Euclidean geometry; callers keep radii inside a quarter period.
struct Cone {
  Plane axis;  // base is the apex, frame spans V
  double aperture = 0.5;
};
bool cone_contains(const Cone& c, std::span<const double> z);

struct ConeCensus {
  int in_ball = 0;  // points with 0 < |z - apex| <= radius
  int inside = 0;   // of those, how many the cone contains
};
ConeCensus cone_census(const Cone& c, const std::vector<std::vector<double>>& points,
                       double radius);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

/// Static tube profile amplitude * max(dist(y, P), core)^(-exponent), with the
/// nearest-image distance to the axis-aligned plane P. Cores below h/2 would
/// put unresolved mass between sites, so they are rejected.
struct TubeSpec {
  std::vector<double> point;  // a point on the plane
  std::vector<int> axes;      // axes the plane spans
  double amplitude = 1.0;
  double exponent = 4.0;
  double core_radius = 0.0;   // 0 picks 0.75 h
};
ScalarField synthetic_tube_density(const Grid& g, const TubeSpec& spec);

/// Sites whose min over the j finest ladder rungs of theta exceeds epsilon,
/// the lattice surrogate for the positive-liminf singular set.
struct SingularSite {
  std::size_t site = 0;
  double liminf = 0.0;
};
std::vector<SingularSite> extract_singular_set(const ScalarField& e,
                                               std::span<const double> ladder,
                                               double epsilon, int j = 3,
                                               const QuadratureConfig& q = {});
std::vector<SingularSite> extract_singular_set(const EnergySeries& s, double tau,
                                               std::span<const double> ladder,
                                               double epsilon, int j = 3,
                                               const QuadratureConfig& q = {});

/// Trapezoid quadrature of theta over the patch { base + sum Y_i frame_i :
/// |Y_i| <= half_width } of a 4-plane. step 0 picks h/2.
double slice_integral(const ScalarField& e, const Plane& plane, double rho,
                      double half_width, double step = 0.0,
                      const QuadratureConfig& q = {});

/// Mean density at offset probes along the plane frame versus along its
/// orthogonal complement; a tube direction shows along > perp.
struct DirectionalDensity {
  double along = 0.0;
  double perp = 0.0;
};
DirectionalDensity directional_density(const ScalarField& e,
                                       std::span<const double> zbar, const Plane& v,
                                       double offset, double rho,
                                       const QuadratureConfig& q = {});

/// Finite-difference residual of the density evolution equation
///   d_tau theta = lap_z theta + (theta - (rho/2) d_rho theta) / rho^2.
/// It is a limit equation, so the residual is reported, not driven to zero;
/// a time-independent e gives exactly theta / rho^2.
struct PdeResidualSpec {
  double dz = 0.0;    // 0 picks 0.1 rho
  double drho = 0.0;  // 0 picks 0.05 rho
  double dtau = 0.0;  // 0 picks 0.1 rho^2 (series overload only)
};
double pde_residual(const ScalarField& e, std::span<const double> z, double rho,
                    const PdeResidualSpec& spec = {}, const QuadratureConfig& q = {});
double pde_residual(const EnergySeries& s, std::span<const double> z, double tau,
                    double rho, const PdeResidualSpec& spec = {},
                    const QuadratureConfig& q = {});

}  // namespace ymlab
