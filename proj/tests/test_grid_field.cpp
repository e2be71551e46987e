#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "ymlab/errors.hpp"
#include "ymlab/field.hpp"
#include "ymlab/grid.hpp"
#include "ymlab/parallel.hpp"

using namespace ymlab;

namespace {
const cplx I{0.0, 1.0};

LieField random_gauge(const Grid& g, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LieField a = make_lie_field(g, n, g.dim());
  for (std::size_t s = 0; s < g.volume(); ++s)
    for (int c = 0; c < g.dim(); ++c) {
      LieMatrix b = random_skew_hermitian(n, rng);
      auto dst = a.at(s, c);
      for (std::size_t k = 0; k < b.a.size(); ++k) dst[k] = b.a[k];
    }
  return a;
}
}  // namespace

TEST_CASE("grid indexing round-trips and wraps") {
  Grid g({4, 6, 8}, 0.5);
  CHECK(g.volume() == 4u * 6u * 8u);
  std::vector<int> c(3);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    g.coords(s, c);
    CHECK(g.index(c) == s);
  }
  // last axis fastest
  CHECK(g.index(std::vector<int>{0, 0, 1}) == 1);
  CHECK(g.index(std::vector<int>{0, 1, 0}) == 8);
  CHECK(g.index(std::vector<int>{1, 0, 0}) == 48);
  // wrapping
  CHECK(g.index(std::vector<int>{-1, 0, 0}) == g.index(std::vector<int>{3, 0, 0}));
  CHECK(g.index(std::vector<int>{0, 7, 0}) == g.index(std::vector<int>{0, 1, 0}));
}

TEST_CASE("neighbor tables agree with coordinate arithmetic") {
  Grid g({4, 4, 4}, 1.0);
  std::vector<int> c(3);
  for (std::size_t s = 0; s < g.volume(); ++s)
    for (int axis = 0; axis < 3; ++axis) {
      g.coords(s, c);
      std::vector<int> cp = c;
      cp[axis] += 1;
      CHECK(g.neighbor(s, axis, +1) == g.index(cp));
      cp[axis] -= 2;
      CHECK(g.neighbor(s, axis, -1) == g.index(cp));
    }
}

TEST_CASE("grid validation rejects degenerate shapes") {
  CHECK_THROWS_AS(Grid({}, 1.0), InvalidArgumentError);
  CHECK_THROWS_AS(Grid({3, 4}, 1.0), InvalidArgumentError);  // extent < 4
  CHECK_THROWS_AS(Grid({4, 4}, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(Grid({4, 4}, 1.0, {0.0}), InvalidArgumentError);
}

TEST_CASE("positions honor origin and spacing") {
  Grid g({4, 4}, 0.25, {1.0, -1.0});
  CHECK(g.position(0, 0) == doctest::Approx(1.0));
  CHECK(g.position(0, 1) == doctest::Approx(-1.0));
  std::size_t s = g.index(std::vector<int>{2, 3});
  CHECK(g.position(s, 0) == doctest::Approx(1.5));
  CHECK(g.position(s, 1) == doctest::Approx(-0.25));
  CHECK(g.length(0) == doctest::Approx(1.0));
  CHECK(g.min_length() == doctest::Approx(1.0));
}

TEST_CASE("pair_index enumerates ordered pairs") {
  // m = 4: (0,1)=0 (0,2)=1 (0,3)=2 (1,2)=3 (1,3)=4 (2,3)=5
  CHECK(pair_index(4, 0, 1) == 0);
  CHECK(pair_index(4, 0, 3) == 2);
  CHECK(pair_index(4, 1, 2) == 3);
  CHECK(pair_index(4, 2, 3) == 5);
  int m = 5, k = 0;
  for (int mu = 0; mu < m; ++mu)
    for (int nu = mu + 1; nu < m; ++nu) CHECK(pair_index(m, mu, nu) == k++);
  CHECK_THROWS(pair_index(4, 2, 2));
}

TEST_CASE("central difference of a sine is the discrete cosine wave") {
  // x(s) = i sin(2 pi x_0 / L) has D_0 x = i cos(2 pi x_0 / L) sin(2 pi h / L)/h.
  Grid g({16, 4}, 0.25);
  const double L = g.length(0);
  const double kappa = 2.0 * std::numbers::pi / L;
  LieField x = make_lie_field(g, 1, 1);
  for (std::size_t s = 0; s < g.volume(); ++s)
    x.at(s, 0)[0] = I * std::sin(kappa * g.position(s, 0));
  LieField d = central_difference(x, 0);
  const double factor = std::sin(kappa * g.spacing()) / g.spacing();
  for (std::size_t s = 0; s < g.volume(); ++s) {
    cplx want = I * std::cos(kappa * g.position(s, 0)) * factor;
    CHECK(std::abs(d.at(s, 0)[0] - want) < 1e-13);
  }
  // axis 1 sees a constant
  LieField d1 = central_difference(x, 1);
  for (const cplx& z : d1.data) CHECK(std::abs(z) < 1e-14);
}

TEST_CASE("central difference is skew-adjoint on the torus") {
  Grid g({6, 4, 4}, 0.5);
  LieField x = random_gauge(g, 2, 101);
  LieField y = random_gauge(g, 2, 202);
  for (int axis = 0; axis < 3; ++axis) {
    double lhs = field_inner(central_difference(x, axis), y);
    double rhs = field_inner(x, central_difference(y, axis));
    CHECK(lhs == doctest::Approx(-rhs).epsilon(1e-11));
  }
}

TEST_CASE("constant commuting potential on the 2-torus") {
  // A_0 = const i a, A_1 = const i b commute, all derivatives vanish: F = 0.
  Grid g({4, 4}, 1.0);
  LieField a = make_lie_field(g, 1, 2);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    a.at(s, 0)[0] = cplx{0.0, 0.7};
    a.at(s, 1)[0] = cplx{0.0, -0.3};
  }
  LieField f = curvature(a);
  for (const cplx& z : f.data) CHECK(std::abs(z) < 1e-15);
  CHECK(ym_energy(a) == doctest::Approx(0.0));
}

TEST_CASE("constant non-commuting potential gives commutator curvature") {
  // n = 2, A_0 = i sx, A_1 = i sy constants: F_01 = [i sx, i sy] = -2 i sz,
  // |F|^2 = <F_01, F_01> = 8 everywhere, YM = 8 * (4h)^2 with h = 1.
  Grid g({4, 4}, 1.0);
  LieField a = make_lie_field(g, 2, 2);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    a.at(s, 0)[1] = I;  // (0,1) entry
    a.at(s, 0)[2] = I;  // (1,0)
    a.at(s, 1)[1] = cplx{1.0, 0.0};
    a.at(s, 1)[2] = cplx{-1.0, 0.0};
  }
  LieField f = curvature(a);
  CHECK(f.comps == 1);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    CHECK(std::abs(f.at(s, 0)[0] - cplx{0.0, -2.0}) < 1e-14);
    CHECK(std::abs(f.at(s, 0)[3] - cplx{0.0, 2.0}) < 1e-14);
  }
  ScalarField e = energy_density(f);
  for (double v : e.v) CHECK(v == doctest::Approx(8.0));
  CHECK(ym_energy(a) == doctest::Approx(8.0 * 16.0));
}

TEST_CASE("abelian wave curvature and energy match the discrete closed form") {
  // a_1 = i sin(kappa x_0), a_0 = 0: F_01 = i cos(kappa x_0) sin(kappa h)/h.
  // With N = 8, h = 1/2, mode 1: sin(kappa h)/h = sqrt(2), sum of cos^2 over
  // sites is 8 * 8/2 = 32, so YM = h^2 * 2 * 32 = 16.
  Grid g({8, 8}, 0.5);
  const double kappa = 2.0 * std::numbers::pi / g.length(0);
  LieField a = make_lie_field(g, 1, 2);
  for (std::size_t s = 0; s < g.volume(); ++s)
    a.at(s, 1)[0] = I * std::sin(kappa * g.position(s, 0));
  LieField f = curvature(a);
  const double factor = std::sin(kappa * g.spacing()) / g.spacing();
  CHECK(factor == doctest::Approx(std::sqrt(2.0)));
  for (std::size_t s = 0; s < g.volume(); ++s) {
    cplx want = I * std::cos(kappa * g.position(s, 0)) * factor;
    CHECK(std::abs(f.at(s, 0)[0] - want) < 1e-13);
  }
  CHECK(ym_energy(a) == doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("divergence_star is the adjoint of the covariant derivative") {
  // sum_{mu,nu} <nabla_mu B_nu, S_mu_nu> = <B, div* S> with S antisymmetric.
  Grid g({4, 6, 4}, 0.5);
  const int m = 3, n = 2;
  LieField a = random_gauge(g, n, 31);
  LieField b = random_gauge(g, n, 57);  // m-component test vector
  // antisymmetric S from a curvature of another random potential
  LieField s = curvature(random_gauge(g, n, 93));
  double lhs = 0.0;
  for (int mu = 0; mu < m; ++mu)
    for (int nu = 0; nu < m; ++nu) {
      if (mu == nu) continue;
      LieField grad = covariant_derivative(a, component(b, nu), mu);
      const double sign = mu < nu ? 1.0 : -1.0;
      const int pi = mu < nu ? pair_index(m, mu, nu) : pair_index(m, nu, mu);
      LieField s_comp = component(s, pi);
      scale(s_comp, sign);
      lhs += field_inner(grad, s_comp);
    }
  double rhs = field_inner(b, divergence_star(a, s));
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("constant gauge transforms preserve energy and equivary curvature") {
  Grid g({4, 4, 4}, 0.5);
  std::mt19937_64 rng(77);
  LieField a = random_gauge(g, 2, 5);
  LieMatrix u = random_unitary(2, rng);
  LieField ag = gauge_transform_constant(a, u);
  CHECK(ym_energy(ag) == doctest::Approx(ym_energy(a)).epsilon(1e-11));
  LieField f = curvature(a);
  LieField fg = curvature(ag);
  for (std::size_t s = 0; s < g.volume(); ++s)
    for (int c = 0; c < f.comps; ++c) {
      std::vector<cplx> want(4);
      lie::conjugate(f.at(s, c), {u.a.data(), u.a.size()}, want, 2);
      auto got = fg.at(s, c);
      for (int k = 0; k < 4; ++k) CHECK(std::abs(got[k] - want[k]) < 1e-12);
    }
}

TEST_CASE("field_inner matches a direct double sum and scales with h^m") {
  Grid g({4, 4}, 0.5);
  LieField x = random_gauge(g, 2, 1);
  LieField y = random_gauge(g, 2, 2);
  double direct = 0.0;
  for (std::size_t s = 0; s < g.volume(); ++s)
    for (int c = 0; c < 2; ++c)
      direct += lie::killing_inner(x.at(s, c), y.at(s, c), 2);
  direct *= 0.25;  // h^2
  CHECK(field_inner(x, y) == doctest::Approx(direct).epsilon(1e-13));
}

TEST_CASE("reductions are bitwise reproducible for a fixed worker count") {
  Grid g({8, 8, 8}, 0.5);
  LieField x = random_gauge(g, 2, 64);
  set_workers(4);
  double a = field_inner(x, x);
  double b = field_inner(x, x);
  CHECK(a == b);  // same chunk boundaries, same summation order
  set_workers(1);
  double serial = field_inner(x, x);
  CHECK(serial == field_inner(x, x));
  // across counts only the rounding pattern differs
  CHECK(a == doctest::Approx(serial).epsilon(1e-13));
}

TEST_CASE("skew projection clears defects") {
  Grid g({4, 4}, 1.0);
  LieField x = make_lie_field(g, 2, 2);
  for (std::size_t s = 0; s < g.volume(); ++s) {
    x.at(s, 0)[0] = cplx{0.5, 0.2};
    x.at(s, 1)[1] = cplx{-0.25, 1.0};
  }
  CHECK(max_skew_defect(x) > 0.4);
  project_skew_field(x);
  CHECK(max_skew_defect(x) < 1e-15);
}

TEST_CASE("axpy and scale behave like vector ops") {
  Grid g({4, 4}, 1.0);
  LieField x = random_gauge(g, 2, 8);
  LieField y = random_gauge(g, 2, 9);
  LieField z = y;
  axpy(z, 2.0, x);
  scale(z, 0.5);
  for (std::size_t k = 0; k < z.data.size(); ++k)
    CHECK(std::abs(z.data[k] - (0.5 * y.data[k] + x.data[k])) < 1e-14);
}
