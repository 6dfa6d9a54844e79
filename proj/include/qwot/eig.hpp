#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "qwot/matrix.hpp"

namespace qwot {

namespace tol {
inline constexpr double hermiticity = 1e-10;     // relative, Frobenius
inline constexpr double jacobi_off = 1e-14;      // off-diagonal mass vs ||M||_F
inline constexpr int jacobi_max_sweeps = 100;
inline constexpr double psd_clamp = 1e-10;       // eigenvalues in [-psd_clamp, 0) clamp to 0
inline constexpr double sqrt_residual = 1e-10;   // relative, ||R^2 - M||_F
}  // namespace tol

/// Spectral decomposition of a Hermitian matrix: M = V diag(values) V^dagger,
/// eigenvalues sorted descending, eigenvectors in the columns of `vectors`.
struct EigDecomposition {
  std::vector<double> values;
  ComplexMatrix vectors;
};

struct RealEigDecomposition {
  std::vector<double> values;
  RealMatrix vectors;
};

namespace detail {

// Cyclic Jacobi diagonalization, shared by the Hermitian (complex) and
// symmetric (real) paths. A is overwritten with the (nearly) diagonal form,
// V accumulates the rotations so that V^dagger A_in V = diag.
// Sweeps stop when the off-diagonal Frobenius mass drops below
// tol::jacobi_off * ||A_in||_F, with a hard cap of tol::jacobi_max_sweeps.
template <class S>
void jacobi_core(DenseMatrix<S>& a, DenseMatrix<S>& v) {
  const int n = a.dim();
  v = DenseMatrix<S>::identity(n);
  if (n == 1) {
    a(0, 0) = S{real_of(a(0, 0))};
    return;
  }

  const double norm0 = frobenius_norm(a);
  if (norm0 == 0.0) return;
  const double off_target = tol::jacobi_off * norm0;
  const double skip = off_target / (static_cast<double>(n) * n);

  auto off_mass = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += std::norm(std::complex<double>(a(i, j)));
    return std::sqrt(2.0 * s);
  };

  for (int sweep = 0; sweep < tol::jacobi_max_sweeps; ++sweep) {
    if (off_mass() <= off_target) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const S b = a(p, q);
        const double absb = std::abs(std::complex<double>(b));
        if (absb <= skip || absb < 1e-300) continue;

        // Phase factor pulling the pivot onto the real axis; +-1 in the real case.
        const S phase = b * S{1.0 / absb};
        const double app = real_of(a(p, p));
        const double aqq = real_of(a(q, q));
        const double tau = (aqq - app) / (2.0 * absb);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        // 2x2 unitary [[c*phase, s*phase], [-s, c]] zeroing the (p,q) entry.
        const S u00 = phase * S{c};
        const S u01 = phase * S{s};
        const S u10 = S{-s};
        const S u11 = S{c};

        // A <- G^dagger A G
        for (int r = 0; r < n; ++r) {
          const S xp = a(r, p), xq = a(r, q);
          a(r, p) = xp * u00 + xq * u10;
          a(r, q) = xp * u01 + xq * u11;
        }
        for (int col = 0; col < n; ++col) {
          const S xp = a(p, col), xq = a(q, col);
          a(p, col) = conj_scalar(u00) * xp + conj_scalar(u10) * xq;
          a(q, col) = conj_scalar(u01) * xp + conj_scalar(u11) * xq;
        }
        a(p, q) = S{};
        a(q, p) = S{};
        a(p, p) = S{real_of(a(p, p))};
        a(q, q) = S{real_of(a(q, q))};

        // V <- V G
        for (int r = 0; r < n; ++r) {
          const S xp = v(r, p), xq = v(r, q);
          v(r, p) = xp * u00 + xq * u10;
          v(r, q) = xp * u01 + xq * u11;
        }
      }
    }
  }
}

// Descending eigenvalue order; ties keep the Jacobi output order.
template <class S>
void sort_descending(std::vector<double>& values, DenseMatrix<S>& vectors) {
  const int n = static_cast<int>(values.size());
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int i, int j) { return values[i] > values[j]; });
  std::vector<double> sv(n);
  DenseMatrix<S> sm(n);
  for (int k = 0; k < n; ++k) {
    sv[k] = values[perm[k]];
    for (int r = 0; r < n; ++r) sm(r, k) = vectors(r, perm[k]);
  }
  values = std::move(sv);
  vectors = std::move(sm);
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// The input must be Hermitian within tol::hermiticity (relative Frobenius);
/// deterministic for identical input.
inline EigDecomposition hermitian_eig(const ComplexMatrix& m) {
  const double herm_err = hermiticity_error(m);
  const double scale = std::max(1.0, frobenius_norm(m));
  if (herm_err > tol::hermiticity * scale) {
    std::ostringstream os;
    os << "hermiticity violation " << herm_err << " exceeds tolerance " << tol::hermiticity
       << " * max(1, ||M||_F)";
    throw ValidationError(os.str());
  }
  ComplexMatrix a = hermitize(m);
  ComplexMatrix v;
  detail::jacobi_core(a, v);
  EigDecomposition e;
  e.values.resize(m.dim());
  for (int i = 0; i < m.dim(); ++i) e.values[i] = a(i, i).real();
  e.vectors = std::move(v);
  detail::sort_descending(e.values, e.vectors);
  return e;
}

/// Eigendecomposition of a real symmetric matrix (same Jacobi kernel).
inline RealEigDecomposition symmetric_eig(const RealMatrix& m, bool sorted = true) {
  RealMatrix a = hermitize(m);
  RealMatrix v;
  detail::jacobi_core(a, v);
  RealEigDecomposition e;
  e.values.resize(m.dim());
  for (int i = 0; i < m.dim(); ++i) e.values[i] = a(i, i);
  e.vectors = std::move(v);
  if (sorted) detail::sort_descending(e.values, e.vectors);
  return e;
}

/// Reconstruct V diag(f(values)) V^dagger.
inline ComplexMatrix spectral_apply(const EigDecomposition& e, const std::vector<double>& fvalues) {
  const int n = e.vectors.dim();
  ComplexMatrix r(n);
  for (int k = 0; k < n; ++k) {
    if (fvalues[k] == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const cplx vik = e.vectors(i, k) * fvalues[k];
      for (int j = 0; j < n; ++j) r(i, j) += vik * std::conj(e.vectors(j, k));
    }
  }
  return r;
}

/// Principal square root of a PSD Hermitian matrix. Eigenvalues in
/// [-tol::psd_clamp, 0) are clamped to zero; anything below is an error.
/// `rank_cutoff_rel` additionally zeroes eigenvalues below that fraction of
/// the largest one before taking roots: the square root amplifies eigenvalue
/// noise of boundary-rank inputs (sqrt(1e-16) = 1e-8), so callers needing
/// rank stability pass a small relative cutoff.
inline ComplexMatrix matrix_sqrt_psd(const ComplexMatrix& m, double rank_cutoff_rel = 0.0) {
  EigDecomposition e = hermitian_eig(m);
  const double cutoff = rank_cutoff_rel * std::max(e.values.front(), 0.0);
  std::vector<double> roots(e.values.size());
  for (size_t k = 0; k < e.values.size(); ++k) {
    double lam = e.values[k];
    if (lam < -tol::psd_clamp) {
      std::ostringstream os;
      os << "matrix is not PSD: eigenvalue " << lam << " below -" << tol::psd_clamp;
      throw ValidationError(os.str());
    }
    roots[k] = lam > cutoff && lam > 0.0 ? std::sqrt(lam) : 0.0;
  }
  return hermitize(spectral_apply(e, roots));
}

/// Frobenius-nearest PSD matrix: eigenvalue clipping at zero.
inline ComplexMatrix psd_project(const ComplexMatrix& m) {
  EigDecomposition e = hermitian_eig(m);
  std::vector<double> clipped(e.values.size());
  for (size_t k = 0; k < e.values.size(); ++k) clipped[k] = std::max(e.values[k], 0.0);
  return hermitize(spectral_apply(e, clipped));
}

inline double min_eigenvalue(const ComplexMatrix& m) {
  EigDecomposition e = hermitian_eig(m);
  return e.values.back();
}

}  // namespace qwot
