#pragma once

#include <cmath>
#include <sstream>

#include "qwot/eig.hpp"
#include "qwot/matrix.hpp"
#include "qwot/state.hpp"

namespace qwot {

/// Wigner-Yanase skew information I_rho(H) = Tr(H^2 rho) - Tr(H sqrt(rho) H sqrt(rho)).
/// Results in [-1e-12, 0) are clamped to zero; below -1e-10 is a numerical failure.
inline double skew_information(const DensityMatrix& rho, const Observable& h) {
  if (rho.dim() != h.dim()) throw DimensionError("skew_information: dimensions differ");
  // the rank cutoff keeps boundary-rank states (pure states in particular)
  // from leaking sqrt-amplified eigenvalue noise into the trace
  const ComplexMatrix root = matrix_sqrt_psd(rho.matrix(), 1e-12);
  const ComplexMatrix h2 = h.matrix() * h.matrix();
  const ComplexMatrix hr = h.matrix() * root;
  const double t1 = trace_prod(h2, rho.matrix()).real();
  const double t2 = trace_prod(hr, hr).real();
  double result = t1 - t2;
  if (result < -1e-10) {
    std::ostringstream os;
    os << "skew information " << result << " below -1e-10";
    throw NumericalError(os.str());
  }
  if (result < 0.0 && result >= -1e-12) result = 0.0;
  return result;
}

/// Quantum Fisher information from the spectral sum over eigenpairs,
///   F_Q = 2 sum_{k,l} (lam_k - lam_l)^2 / (lam_k + lam_l) |<k|H|l>|^2,
/// keeping only terms with lam_k + lam_l above the rank cutoff. The kernel
/// is exposed so callers holding a decomposition can reuse it.
inline double qfi_from_eig(const EigDecomposition& e, const ComplexMatrix& h) {
  const int n = e.vectors.dim();
  if (h.dim() != n) throw DimensionError("qfi: dimensions differ");
  // H in the eigenbasis: <k|H|l> = (V^dagger H V)[k][l]
  const ComplexMatrix hk = dagger(e.vectors) * h * e.vectors;
  double lam_max = 0.0;
  for (double lam : e.values) lam_max = std::max(lam_max, lam);
  const double cutoff = 1e-12 * lam_max;
  double f = 0.0;
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l) {
      const double sum = e.values[k] + e.values[l];
      if (sum <= cutoff) continue;  // both numerically zero: term vanishes analytically
      const double diff = e.values[k] - e.values[l];
      f += 2.0 * diff * diff / sum * std::norm(hk(k, l));
    }
  return f;
}

inline double qfi(const DensityMatrix& rho, const Observable& h) {
  if (rho.dim() != h.dim()) throw DimensionError("qfi: dimensions differ");
  return qfi_from_eig(hermitian_eig(rho.matrix()), h.matrix());
}

}  // namespace qwot
