#pragma once

#include "qwot/eig.hpp"
#include "qwot/matrix.hpp"

namespace qwot {

/// Real symmetric embedding of a complex Hermitian matrix:
///   M = R + iI  ->  [[R, -I], [I, R]]  (2n x 2n, symmetric).
/// The embedding is a *-homomorphism; it doubles eigenvalue multiplicities
/// and doubles Frobenius inner products.
inline RealMatrix embed_real(const ComplexMatrix& m) {
  const int n = m.dim();
  RealMatrix w(2 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = m(i, j).real(), im = m(i, j).imag();
      w(i, j) = re;
      w(n + i, n + j) = re;
      w(i, n + j) = -im;
      w(n + i, j) = im;
    }
  return w;
}

/// Orthogonal projection of a symmetric 2n x 2n matrix onto the embedded
/// subalgebra, returned as the complex Hermitian matrix it represents:
///   R = (W11 + W22)/2 (symmetrized), I = antisymmetric part of (W21 - W12^T)/2.
inline ComplexMatrix extract_hermitian(const RealMatrix& w) {
  const int n = w.dim() / 2;
  if (w.dim() != 2 * n) throw DimensionError("extract_hermitian: dimension must be even");
  ComplexMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double re = 0.25 * (w(i, j) + w(j, i) + w(n + i, n + j) + w(n + j, n + i));
      const double im = 0.25 * (w(n + i, j) - w(i, n + j) - w(n + j, i) + w(j, n + i));
      m(i, j) = cplx(re, im);
    }
  return m;
}

/// PSD-cone projection performed in the real symmetric embedding:
/// embed, clip the (doubled) spectrum at zero, extract back.
inline ComplexMatrix psd_project_embedded(const ComplexMatrix& m) {
  RealMatrix w = embed_real(hermitize(m));
  RealEigDecomposition e = symmetric_eig(w, /*sorted=*/false);
  const int md = w.dim();
  RealMatrix z(md);
  for (int k = 0; k < md; ++k) {
    const double lam = e.values[k];
    if (lam <= 0.0) continue;
    for (int i = 0; i < md; ++i) {
      const double vik = e.vectors(i, k) * lam;
      if (vik == 0.0) continue;
      for (int j = 0; j < md; ++j) z(i, j) += vik * e.vectors(j, k);
    }
  }
  return hermitize(extract_hermitian(z));
}

}  // namespace qwot
