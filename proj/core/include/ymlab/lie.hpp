#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace ymlab {

using cplx = std::complex<double>;

// Lie(U(n)) is the skew-Hermitian n x n complex matrices. Matrices are stored
// row-major as n*n complex doubles; the span kernels below run allocation-free
// so field loops can call them per site.

namespace lie {

/// -Re tr(BC). Real and positive definite on skew-Hermitian matrices.
/// Throws if the imaginary part of the trace exceeds 1e-12 in magnitude.
double killing_inner(std::span<const cplx> b, std::span<const cplx> c, int n);

/// out = BC - CB. Aliasing with inputs is not allowed.
void commutator(std::span<const cplx> b, std::span<const cplx> c,
                std::span<cplx> out, int n);

/// out = g B g^dagger for unitary g.
void conjugate(std::span<const cplx> b, std::span<const cplx> g,
               std::span<cplx> out, int n);

/// In place M <- (M - M^dagger)/2.
void project_skew(std::span<cplx> m, int n);

double skew_defect(std::span<const cplx> m, int n);  // max |(M + M^dagger)_ij|
double unitary_defect(std::span<const cplx> g, int n);  // max |(g g^dagger - I)_ij|

}  // namespace lie

/// Value-type wrapper over the span kernels; convenient in tests and fixtures.
struct LieMatrix {
  int n = 0;
  std::vector<cplx> a;  // n*n row-major

  LieMatrix() = default;
  explicit LieMatrix(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_) {}
  LieMatrix(int n_, std::vector<cplx> entries);

  cplx& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  const cplx& operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

  bool is_skew_hermitian(double tol = 1e-10) const;
};

LieMatrix operator+(const LieMatrix& b, const LieMatrix& c);
LieMatrix operator-(const LieMatrix& b, const LieMatrix& c);
LieMatrix operator*(double s, const LieMatrix& b);

double killing_inner(const LieMatrix& b, const LieMatrix& c);
LieMatrix commutator(const LieMatrix& b, const LieMatrix& c);
LieMatrix conjugate(const LieMatrix& b, const LieMatrix& g);
LieMatrix project_skew(const LieMatrix& m);

/// Gaussian skew-Hermitian draw; traceless = restrict to su(n).
LieMatrix random_skew_hermitian(int n, std::mt19937_64& rng, bool traceless = false);

/// Haar-like unitary: QR of a Ginibre matrix with the phase convention
/// R_ii > 0, so a fixed seed gives a fixed matrix.
LieMatrix random_unitary(int n, std::mt19937_64& rng);

}  // namespace ymlab
