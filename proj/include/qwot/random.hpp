#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "qwot/eig.hpp"
#include "qwot/matrix.hpp"
#include "qwot/state.hpp"

namespace qwot {

/// SplitMix64: 64-bit counter-based generator (Weyl increment + avalanche mix).
/// Bitwise-reproducible for a given seed; streams for independent trials are
/// derived as seed XOR trial-index.
class SplitMix64 {
public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

private:
  uint64_t state_;
};

inline SplitMix64 trial_stream(uint64_t seed, uint64_t trial) { return SplitMix64(seed ^ trial); }

/// Uniform double in the open interval (0,1).
inline double uniform01(SplitMix64& rng) {
  return (static_cast<double>(rng.next() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (cosine branch; two uniforms per draw).
inline double gaussian(SplitMix64& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Complex Gaussian with independent N(0,1) real and imaginary parts. The
// overall scale cancels in every ensemble below, so no 1/sqrt(2) factor.
inline cplx complex_gaussian(SplitMix64& rng) {
  const double re = gaussian(rng);
  const double im = gaussian(rng);
  return cplx(re, im);
}

inline ComplexMatrix ginibre(int d, SplitMix64& rng) {
  ComplexMatrix g(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = complex_gaussian(rng);
  return g;
}

inline RealMatrix ginibre_real(int d, SplitMix64& rng) {
  RealMatrix g(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = gaussian(rng);
  return g;
}

/// Haar-random pure state |psi><psi| from a normalized complex Gaussian vector.
inline DensityMatrix random_pure(int d, SplitMix64& rng) {
  if (d < 2) throw DimensionError("random_pure: d must be >= 2");
  std::vector<cplx> psi(d);
  double nrm = 0.0;
  do {
    nrm = 0.0;
    for (int i = 0; i < d; ++i) {
      psi[i] = complex_gaussian(rng);
      nrm += std::norm(psi[i]);
    }
  } while (nrm < 1e-280);
  nrm = std::sqrt(nrm);
  ComplexMatrix rho(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) rho(i, j) = psi[i] * std::conj(psi[j]) / (nrm * nrm);
  return DensityMatrix::unchecked(hermitize(rho));
}

/// Ginibre-induced mixed state GG^dagger / Tr(GG^dagger).
inline DensityMatrix random_mixed(int d, SplitMix64& rng) {
  if (d < 2) throw DimensionError("random_mixed: d must be >= 2");
  const ComplexMatrix g = ginibre(d, rng);
  ComplexMatrix rho = g * dagger(g);
  rho *= cplx(1.0 / trace(rho).real());
  return DensityMatrix::unchecked(hermitize(rho));
}

/// Mixed state with real entries: GG^T / Tr for a rectangular d x (d+2) real
/// Gaussian block. The column surplus keeps the spectrum away from the
/// singular boundary, where the real square Wishart ensemble concentrates.
inline DensityMatrix random_mixed_real(int d, SplitMix64& rng) {
  if (d < 2) throw DimensionError("random_mixed_real: d must be >= 2");
  const int cols = d + 2;
  std::vector<std::vector<double>> g(d, std::vector<double>(cols));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < cols; ++j) g[i][j] = gaussian(rng);
  ComplexMatrix rho(d);
  double tr = 0.0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (int k = 0; k < cols; ++k) s += g[i][k] * g[j][k];
      rho(i, j) = cplx(s);
      if (i == j) tr += s;
    }
  rho *= cplx(1.0 / tr);
  return DensityMatrix::unchecked(hermitize(rho));
}

/// Pure state with real entries: a normalized real Gaussian vector.
inline DensityMatrix random_pure_real(int d, SplitMix64& rng) {
  if (d < 2) throw DimensionError("random_pure_real: d must be >= 2");
  std::vector<double> psi(d);
  double nrm = 0.0;
  do {
    nrm = 0.0;
    for (int i = 0; i < d; ++i) {
      psi[i] = gaussian(rng);
      nrm += psi[i] * psi[i];
    }
  } while (nrm < 1e-280);
  ComplexMatrix rho(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) rho(i, j) = cplx(psi[i] * psi[j] / nrm);
  return DensityMatrix::unchecked(rho);
}

namespace detail {
inline Observable normalize_observable(ComplexMatrix h) {
  const int d = h.dim();
  const double tr = trace(h).real() / d;
  for (int i = 0; i < d; ++i) h(i, i) -= tr;
  EigDecomposition e = hermitian_eig(h);
  double radius = 0.0;
  for (double lam : e.values) radius = std::max(radius, std::abs(lam));
  if (radius < 1e-280) {
    // measure-zero draw; fall back to a fixed traceless operator
    h = ComplexMatrix::zero(d);
    h(0, 0) = 1.0;
    h(d - 1, d - 1) = -1.0;
    radius = 1.0;
  }
  h *= cplx(1.0 / radius);
  return Observable::unchecked(hermitize(h));
}
}  // namespace detail

/// Random Hermitian operator (G + G^dagger)/2, shifted traceless and scaled
/// to unit operator norm.
inline Observable random_hermitian(int d, SplitMix64& rng) {
  if (d < 2) throw DimensionError("random_hermitian: d must be >= 2");
  const ComplexMatrix g = ginibre(d, rng);
  ComplexMatrix h = (g + dagger(g)) * cplx(0.5);
  return detail::normalize_observable(std::move(h));
}

/// Same ensemble restricted to real symmetric operators.
inline Observable random_hermitian_real(int d, SplitMix64& rng) {
  if (d < 2) throw DimensionError("random_hermitian_real: d must be >= 2");
  const RealMatrix g = ginibre_real(d, rng);
  const RealMatrix s = (g + transpose(g)) * 0.5;
  ComplexMatrix h(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) h(i, j) = cplx(s(i, j));
  return detail::normalize_observable(std::move(h));
}

/// Haar-random unitary: modified Gram-Schmidt on a complex Ginibre matrix
/// (QR with positive diagonal R).
inline ComplexMatrix random_unitary(int d, SplitMix64& rng) {
  ComplexMatrix g = ginibre(d, rng);
  ComplexMatrix q(d);
  for (int col = 0; col < d; ++col) {
    std::vector<cplx> v(d);
    for (int i = 0; i < d; ++i) v[i] = g(i, col);
    for (int prev = 0; prev < col; ++prev) {
      cplx proj(0);
      for (int i = 0; i < d; ++i) proj += std::conj(q(i, prev)) * v[i];
      for (int i = 0; i < d; ++i) v[i] -= proj * q(i, prev);
    }
    double nrm = 0.0;
    for (int i = 0; i < d; ++i) nrm += std::norm(v[i]);
    nrm = std::sqrt(nrm);
    for (int i = 0; i < d; ++i) q(i, col) = v[i] / nrm;
  }
  return q;
}

}  // namespace qwot
