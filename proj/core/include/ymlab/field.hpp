#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ymlab/grid.hpp"
#include "ymlab/lie.hpp"

namespace ymlab {

/// k-component Lie(U(n))-valued lattice field. Storage is site-major, then
/// component-major, then the n x n complex entries row-major. A gauge
/// potential is the comps == dim case; a curvature field stores the
/// m(m-1)/2 ordered pairs mu < nu.
struct LieField {
  Grid grid;
  int n = 1;
  int comps = 1;
  std::vector<cplx> data;

  std::size_t matrix_size() const { return static_cast<std::size_t>(n) * n; }
  std::size_t site_stride() const { return matrix_size() * comps; }

  std::span<cplx> at(std::size_t site, int c) {
    return {data.data() + site * site_stride() + c * matrix_size(), matrix_size()};
  }
  std::span<const cplx> at(std::size_t site, int c) const {
    return {data.data() + site * site_stride() + c * matrix_size(), matrix_size()};
  }

  bool compatible(const LieField& o) const {
    return grid.same_shape(o.grid) && n == o.n && comps == o.comps;
  }
};

struct ScalarField {
  Grid grid;
  std::vector<double> v;
};

LieField make_lie_field(const Grid& g, int n, int comps);
ScalarField make_scalar_field(const Grid& g, double fill = 0.0);

/// Index of the (mu, nu) pair, mu < nu, in curvature storage.
int pair_index(int m, int mu, int nu);

/// Central difference along one axis of every component:
/// (X(s + e_mu) - X(s - e_mu)) / (2h). Exactly skew-adjoint on the torus.
LieField central_difference(const LieField& x, int mu);

/// nabla_mu B = D_mu B + [A_mu, B] for a single-component field B.
LieField covariant_derivative(const LieField& a, const LieField& b, int mu);

/// F_{mu nu} = D_mu A_nu - D_nu A_mu + [A_mu, A_nu], pairs mu < nu.
LieField curvature(const LieField& a);

/// (div* S)_nu = -sum_mu (D_mu S_{mu nu} + [A_mu, S_{mu nu}]), the adjoint of
/// the full-tensor pairing sum_{mu,nu} <nabla_mu B_nu, S_{mu nu}>.
LieField divergence_star(const LieField& a, const LieField& s);

/// h^m sum over sites and components of the Killing inner product.
double field_inner(const LieField& x, const LieField& y);

/// |F(x)|^2 = sum_{mu<nu} <F_mu_nu, F_mu_nu>; nonnegative.
ScalarField energy_density(const LieField& f);

/// h^m sum of energy_density.
double ym_energy_from_curvature(const LieField& f);
double ym_energy(const LieField& a);  // curvature then sum

/// Site-independent gauge change A_mu -> g A_mu g^dagger.
LieField gauge_transform_constant(const LieField& a, const LieMatrix& g);

LieField component(const LieField& x, int c);           // copy one component out
void set_component(LieField& x, int c, const LieField& single);

void project_skew_field(LieField& x);
double max_skew_defect(const LieField& x);

// Vector-space helpers for integrators; shapes must match.
void axpy(LieField& y, double alpha, const LieField& x);  // y += alpha x
void scale(LieField& y, double alpha);
double scalar_sum(const ScalarField& e);  // deterministic chunked reduction

}  // namespace ymlab
