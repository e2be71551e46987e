#include "ymlab/field.hpp"

#include <cmath>

#include "ymlab/errors.hpp"
#include "ymlab/parallel.hpp"

namespace ymlab {

namespace {

void check_gauge_shape(const LieField& a, const char* who) {
  if (a.comps != a.grid.dim())
    throw InvalidArgumentError(std::string(who) + ": expected one component per axis");
}

inline void accumulate_commutator(const cplx* b, const cplx* c, cplx* out, int n,
                                  cplx coeff) {
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s{0.0, 0.0};
      for (int k = 0; k < n; ++k) s += b[i * n + k] * c[k * n + j] - c[i * n + k] * b[k * n + j];
      out[i * n + j] += coeff * s;
    }
}

inline double killing_raw(const cplx* b, const cplx* c, int n) {
  double re = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const cplx& x = b[i * n + k];
      const cplx& y = c[k * n + i];
      re += x.real() * y.real() - x.imag() * y.imag();
    }
  return -re;
}

}  // namespace

LieField make_lie_field(const Grid& g, int n, int comps) {
  if (n <= 0) throw InvalidArgumentError("make_lie_field: n must be positive");
  if (comps <= 0) throw InvalidArgumentError("make_lie_field: comps must be positive");
  LieField f;
  f.grid = g;
  f.n = n;
  f.comps = comps;
  f.data.assign(g.volume() * static_cast<std::size_t>(n) * n * comps, cplx{0.0, 0.0});
  return f;
}

ScalarField make_scalar_field(const Grid& g, double fill) {
  ScalarField e;
  e.grid = g;
  e.v.assign(g.volume(), fill);
  return e;
}

int pair_index(int m, int mu, int nu) {
  if (mu < 0 || nu <= mu || nu >= m)
    throw InvalidArgumentError("pair_index: need 0 <= mu < nu < m");
  // pairs (0,1),(0,2),...,(0,m-1),(1,2),...
  return mu * m - mu * (mu + 1) / 2 + (nu - mu - 1);
}

LieField central_difference(const LieField& x, int mu) {
  const int m = x.grid.dim();
  if (mu < 0 || mu >= m) throw InvalidArgumentError("central_difference: bad axis");
  LieField out = make_lie_field(x.grid, x.n, x.comps);
  const double inv2h = 1.0 / (2.0 * x.grid.spacing());
  const std::size_t stride = x.site_stride();
  parallel_for(0, x.grid.volume(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      const cplx* p = x.data.data() + x.grid.neighbor(s, mu, +1) * stride;
      const cplx* q = x.data.data() + x.grid.neighbor(s, mu, -1) * stride;
      cplx* o = out.data.data() + s * stride;
      for (std::size_t k = 0; k < stride; ++k) o[k] = (p[k] - q[k]) * inv2h;
    }
  });
  return out;
}

LieField covariant_derivative(const LieField& a, const LieField& b, int mu) {
  check_gauge_shape(a, "covariant_derivative");
  if (!a.grid.same_shape(b.grid) || a.n != b.n)
    throw InvalidArgumentError("covariant_derivative: field shape mismatch");
  if (b.comps != 1)
    throw InvalidArgumentError("covariant_derivative: B must be single-component");
  LieField out = central_difference(b, mu);
  const int n = a.n;
  parallel_for(0, a.grid.volume(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      accumulate_commutator(a.at(s, mu).data(), b.at(s, 0).data(), out.at(s, 0).data(),
                            n, cplx{1.0, 0.0});
    }
  });
  return out;
}

LieField curvature(const LieField& a) {
  check_gauge_shape(a, "curvature");
  const int m = a.grid.dim();
  const int n = a.n;
  const int npairs = m * (m - 1) / 2;
  LieField f = make_lie_field(a.grid, n, npairs);
  const double inv2h = 1.0 / (2.0 * a.grid.spacing());
  const std::size_t msz = a.matrix_size();
  parallel_for(0, a.grid.volume(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      for (int mu = 0; mu < m; ++mu) {
        const std::size_t sp = a.grid.neighbor(s, mu, +1);
        const std::size_t sm = a.grid.neighbor(s, mu, -1);
        for (int nu = mu + 1; nu < m; ++nu) {
          cplx* out = f.at(s, pair_index(m, mu, nu)).data();
          const cplx* anu_p = a.at(sp, nu).data();
          const cplx* anu_m = a.at(sm, nu).data();
          for (std::size_t k = 0; k < msz; ++k) out[k] += (anu_p[k] - anu_m[k]) * inv2h;
        }
      }
      for (int nu = 0; nu < m; ++nu) {
        const std::size_t sp = a.grid.neighbor(s, nu, +1);
        const std::size_t sm = a.grid.neighbor(s, nu, -1);
        for (int mu = 0; mu < nu; ++mu) {
          cplx* out = f.at(s, pair_index(m, mu, nu)).data();
          const cplx* amu_p = a.at(sp, mu).data();
          const cplx* amu_m = a.at(sm, mu).data();
          for (std::size_t k = 0; k < msz; ++k) out[k] -= (amu_p[k] - amu_m[k]) * inv2h;
        }
      }
      for (int mu = 0; mu < m; ++mu)
        for (int nu = mu + 1; nu < m; ++nu)
          accumulate_commutator(a.at(s, mu).data(), a.at(s, nu).data(),
                                f.at(s, pair_index(m, mu, nu)).data(), n, cplx{1.0, 0.0});
    }
  });
  return f;
}

LieField divergence_star(const LieField& a, const LieField& s_field) {
  check_gauge_shape(a, "divergence_star");
  const int m = a.grid.dim();
  const int n = a.n;
  if (!a.grid.same_shape(s_field.grid) || s_field.n != n ||
      s_field.comps != m * (m - 1) / 2)
    throw InvalidArgumentError("divergence_star: S must be curvature-shaped");
  LieField g = make_lie_field(a.grid, n, m);
  const double inv2h = 1.0 / (2.0 * a.grid.spacing());
  const std::size_t msz = a.matrix_size();
  parallel_for(0, a.grid.volume(), [&](std::size_t lo, std::size_t hi) {
    std::vector<cplx> buf(msz);
    for (std::size_t s = lo; s < hi; ++s) {
      for (int nu = 0; nu < m; ++nu) {
        cplx* out = g.at(s, nu).data();
        for (int mu = 0; mu < m; ++mu) {
          if (mu == nu) continue;
          // S_{mu nu} = sign * stored pair
          const double sign = mu < nu ? 1.0 : -1.0;
          const int pi = mu < nu ? pair_index(m, mu, nu) : pair_index(m, nu, mu);
          const std::size_t sp = a.grid.neighbor(s, mu, +1);
          const std::size_t sm = a.grid.neighbor(s, mu, -1);
          const cplx* fp = s_field.at(sp, pi).data();
          const cplx* fm = s_field.at(sm, pi).data();
          for (std::size_t k = 0; k < msz; ++k) out[k] -= sign * (fp[k] - fm[k]) * inv2h;
          const cplx* fs = s_field.at(s, pi).data();
          for (std::size_t k = 0; k < msz; ++k) buf[k] = sign * fs[k];
          accumulate_commutator(a.at(s, mu).data(), buf.data(), out, n, cplx{-1.0, 0.0});
        }
      }
    }
  });
  return g;
}

double field_inner(const LieField& x, const LieField& y) {
  if (!x.compatible(y)) throw InvalidArgumentError("field_inner: shape mismatch");
  const int n = x.n;
  const std::size_t vol = x.grid.volume();
  const std::size_t w = static_cast<std::size_t>(workers());
  const std::size_t chunk = (vol + w - 1) / w;
  std::vector<double> partial(w, 0.0);
  parallel_for(0, vol, [&](std::size_t lo, std::size_t hi) {
    const std::size_t slot = lo / chunk;
    double acc = 0.0;
    for (std::size_t s = lo; s < hi; ++s)
      for (int c = 0; c < x.comps; ++c)
        acc += killing_raw(x.at(s, c).data(), y.at(s, c).data(), n);
    partial[slot] += acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total * std::pow(x.grid.spacing(), x.grid.dim());
}

ScalarField energy_density(const LieField& f) {
  const int m = f.grid.dim();
  if (f.comps != m * (m - 1) / 2)
    throw InvalidArgumentError("energy_density: expected a curvature-shaped field");
  ScalarField e = make_scalar_field(f.grid);
  parallel_for(0, f.grid.volume(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s) {
      double acc = 0.0;
      for (int c = 0; c < f.comps; ++c) {
        const cplx* p = f.at(s, c).data();
        acc += killing_raw(p, p, f.n);
      }
      e.v[s] = acc;
    }
  });
  return e;
}

double scalar_sum(const ScalarField& e) {
  const std::size_t vol = e.v.size();
  const std::size_t w = static_cast<std::size_t>(workers());
  const std::size_t chunk = (vol + w - 1) / w;
  std::vector<double> partial(w, 0.0);
  parallel_for(0, vol, [&](std::size_t lo, std::size_t hi) {
    double acc = 0.0;
    for (std::size_t s = lo; s < hi; ++s) acc += e.v[s];
    partial[lo / chunk] += acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double ym_energy_from_curvature(const LieField& f) {
  ScalarField e = energy_density(f);
  return scalar_sum(e) * std::pow(f.grid.spacing(), f.grid.dim());
}

double ym_energy(const LieField& a) { return ym_energy_from_curvature(curvature(a)); }

LieField gauge_transform_constant(const LieField& a, const LieMatrix& g) {
  if (g.n != a.n) throw InvalidArgumentError("gauge_transform_constant: n mismatch");
  if (lie::unitary_defect(g.a, g.n) > 1e-10)
    throw InvalidArgumentError("gauge_transform_constant: g is not unitary");
  LieField out = make_lie_field(a.grid, a.n, a.comps);
  parallel_for(0, a.grid.volume(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s)
      for (int c = 0; c < a.comps; ++c)
        lie::conjugate(a.at(s, c), {g.a.data(), g.a.size()}, out.at(s, c), a.n);
  });
  return out;
}

LieField component(const LieField& x, int c) {
  if (c < 0 || c >= x.comps) throw InvalidArgumentError("component: index out of range");
  LieField out = make_lie_field(x.grid, x.n, 1);
  const std::size_t msz = x.matrix_size();
  for (std::size_t s = 0; s < x.grid.volume(); ++s) {
    auto src = x.at(s, c);
    auto dst = out.at(s, 0);
    for (std::size_t k = 0; k < msz; ++k) dst[k] = src[k];
  }
  return out;
}

void set_component(LieField& x, int c, const LieField& single) {
  if (c < 0 || c >= x.comps) throw InvalidArgumentError("set_component: index out of range");
  if (!x.grid.same_shape(single.grid) || x.n != single.n || single.comps != 1)
    throw InvalidArgumentError("set_component: shape mismatch");
  const std::size_t msz = x.matrix_size();
  for (std::size_t s = 0; s < x.grid.volume(); ++s) {
    auto src = single.at(s, 0);
    auto dst = x.at(s, c);
    for (std::size_t k = 0; k < msz; ++k) dst[k] = src[k];
  }
}

void project_skew_field(LieField& x) {
  parallel_for(0, x.grid.volume(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t s = lo; s < hi; ++s)
      for (int c = 0; c < x.comps; ++c) lie::project_skew(x.at(s, c), x.n);
  });
}

double max_skew_defect(const LieField& x) {
  const std::size_t vol = x.grid.volume();
  const std::size_t w = static_cast<std::size_t>(workers());
  const std::size_t chunk = (vol + w - 1) / w;
  std::vector<double> partial(w, 0.0);
  parallel_for(0, vol, [&](std::size_t lo, std::size_t hi) {
    double worst = 0.0;
    for (std::size_t s = lo; s < hi; ++s)
      for (int c = 0; c < x.comps; ++c)
        worst = std::max(worst, lie::skew_defect(x.at(s, c), x.n));
    partial[lo / chunk] = std::max(partial[lo / chunk], worst);
  });
  double worst = 0.0;
  for (double p : partial) worst = std::max(worst, p);
  return worst;
}

void axpy(LieField& y, double alpha, const LieField& x) {
  if (!y.compatible(x)) throw InvalidArgumentError("axpy: shape mismatch");
  parallel_for(0, y.data.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) y.data[k] += alpha * x.data[k];
  });
}

void scale(LieField& y, double alpha) {
  parallel_for(0, y.data.size(), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) y.data[k] *= alpha;
  });
}

}  // namespace ymlab
