#include "ymlab/lie.hpp"

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "ymlab/errors.hpp"

namespace ymlab {
namespace lie {

namespace {
inline std::size_t idx(int i, int j, int n) {
  return static_cast<std::size_t>(i) * n + j;
}

void check_size(std::span<const cplx> m, int n, const char* who) {
  if (n <= 0 || m.size() != static_cast<std::size_t>(n) * n)
    throw InvalidArgumentError(std::string(who) + ": matrix size does not match n");
}
}  // namespace

double killing_inner(std::span<const cplx> b, std::span<const cplx> c, int n) {
  check_size(b, n, "killing_inner");
  check_size(c, n, "killing_inner");
  cplx tr{0.0, 0.0};
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) tr += b[idx(i, k, n)] * c[idx(k, i, n)];
  if (std::abs(tr.imag()) > 1e-12)
    throw InvalidArgumentError("killing_inner: trace has non-negligible imaginary part");
  return -tr.real();
}

void commutator(std::span<const cplx> b, std::span<const cplx> c,
                std::span<cplx> out, int n) {
  check_size(b, n, "commutator");
  check_size(c, n, "commutator");
  if (out.size() != b.size()) throw InvalidArgumentError("commutator: bad output size");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s{0.0, 0.0};
      for (int k = 0; k < n; ++k)
        s += b[idx(i, k, n)] * c[idx(k, j, n)] - c[idx(i, k, n)] * b[idx(k, j, n)];
      out[idx(i, j, n)] = s;
    }
}

void conjugate(std::span<const cplx> b, std::span<const cplx> g,
               std::span<cplx> out, int n) {
  check_size(b, n, "conjugate");
  check_size(g, n, "conjugate");
  if (out.size() != b.size()) throw InvalidArgumentError("conjugate: bad output size");
  // tmp = g B, out = tmp g^dagger; n stays tiny so a local buffer is fine.
  std::vector<cplx> tmp(b.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s{0.0, 0.0};
      for (int k = 0; k < n; ++k) s += g[idx(i, k, n)] * b[idx(k, j, n)];
      tmp[idx(i, j, n)] = s;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s{0.0, 0.0};
      for (int k = 0; k < n; ++k) s += tmp[idx(i, k, n)] * std::conj(g[idx(j, k, n)]);
      out[idx(i, j, n)] = s;
    }
}

void project_skew(std::span<cplx> m, int n) {
  if (m.size() != static_cast<std::size_t>(n) * n)
    throw InvalidArgumentError("project_skew: matrix size does not match n");
  for (int i = 0; i < n; ++i) {
    m[idx(i, i, n)] = cplx{0.0, m[idx(i, i, n)].imag()};
    for (int j = i + 1; j < n; ++j) {
      const cplx v = 0.5 * (m[idx(i, j, n)] - std::conj(m[idx(j, i, n)]));
      m[idx(i, j, n)] = v;
      m[idx(j, i, n)] = -std::conj(v);
    }
  }
}

double skew_defect(std::span<const cplx> m, int n) {
  check_size(m, n, "skew_defect");
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      worst = std::max(worst, std::abs(m[idx(i, j, n)] + std::conj(m[idx(j, i, n)])));
  return worst;
}

double unitary_defect(std::span<const cplx> g, int n) {
  check_size(g, n, "unitary_defect");
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx s{0.0, 0.0};
      for (int k = 0; k < n; ++k) s += g[idx(i, k, n)] * std::conj(g[idx(j, k, n)]);
      if (i == j) s -= 1.0;
      worst = std::max(worst, std::abs(s));
    }
  return worst;
}

}  // namespace lie

LieMatrix::LieMatrix(int n_, std::vector<cplx> entries) : n(n_), a(std::move(entries)) {
  if (a.size() != static_cast<std::size_t>(n) * n)
    throw InvalidArgumentError("LieMatrix: entry count does not match n");
}

bool LieMatrix::is_skew_hermitian(double tol) const {
  return lie::skew_defect(a, n) <= tol;
}

LieMatrix operator+(const LieMatrix& b, const LieMatrix& c) {
  if (b.n != c.n) throw InvalidArgumentError("LieMatrix+: dimension mismatch");
  LieMatrix r(b.n);
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = b.a[i] + c.a[i];
  return r;
}

LieMatrix operator-(const LieMatrix& b, const LieMatrix& c) {
  if (b.n != c.n) throw InvalidArgumentError("LieMatrix-: dimension mismatch");
  LieMatrix r(b.n);
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = b.a[i] - c.a[i];
  return r;
}

LieMatrix operator*(double s, const LieMatrix& b) {
  LieMatrix r(b.n);
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = s * b.a[i];
  return r;
}

double killing_inner(const LieMatrix& b, const LieMatrix& c) {
  if (b.n != c.n) throw InvalidArgumentError("killing_inner: dimension mismatch");
  return lie::killing_inner(b.a, c.a, b.n);
}

LieMatrix commutator(const LieMatrix& b, const LieMatrix& c) {
  if (b.n != c.n) throw InvalidArgumentError("commutator: dimension mismatch");
  LieMatrix r(b.n);
  lie::commutator(b.a, c.a, r.a, b.n);
  return r;
}

LieMatrix conjugate(const LieMatrix& b, const LieMatrix& g) {
  if (b.n != g.n) throw InvalidArgumentError("conjugate: dimension mismatch");
  LieMatrix r(b.n);
  lie::conjugate(b.a, g.a, r.a, b.n);
  return r;
}

LieMatrix project_skew(const LieMatrix& m) {
  LieMatrix r = m;
  lie::project_skew(r.a, r.n);
  return r;
}

LieMatrix random_skew_hermitian(int n, std::mt19937_64& rng, bool traceless) {
  if (n <= 0) throw InvalidArgumentError("random_skew_hermitian: n must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  LieMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cplx{gauss(rng), gauss(rng)};
  lie::project_skew(m.a, n);
  if (traceless) {
    cplx tr{0.0, 0.0};
    for (int i = 0; i < n; ++i) tr += m(i, i);
    tr /= static_cast<double>(n);
    for (int i = 0; i < n; ++i) m(i, i) -= tr;
  }
  return m;
}

LieMatrix random_unitary(int n, std::mt19937_64& rng) {
  if (n <= 0) throw InvalidArgumentError("random_unitary: n must be positive");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXcd z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = cplx{gauss(rng), gauss(rng)};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(z);
  Eigen::MatrixXcd q = qr.householderQ();
  Eigen::MatrixXcd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < n; ++j) {
    cplx d = r(j, j);
    cplx ph = std::abs(d) > 0 ? d / std::abs(d) : cplx{1.0, 0.0};
    q.col(j) *= ph;
  }
  LieMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = q(i, j);
  return g;
}

}  // namespace ymlab
