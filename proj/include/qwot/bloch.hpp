#pragma once

#include <cmath>

#include "qwot/matrix.hpp"
#include "qwot/state.hpp"

namespace qwot {

inline ComplexMatrix pauli_x() { return ComplexMatrix(2, {cplx(0), cplx(1), cplx(1), cplx(0)}); }
inline ComplexMatrix pauli_y() {
  return ComplexMatrix(2, {cplx(0), cplx(0, -1), cplx(0, 1), cplx(0)});
}
inline ComplexMatrix pauli_z() { return ComplexMatrix(2, {cplx(1), cplx(0), cplx(0), cplx(-1)}); }

/// Real 3-vector representation of a qubit state, r_a = Tr(sigma_a rho).
struct BlochVector {
  double x = 0, y = 0, z = 0;
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

/// Pauli decomposition of a qubit observable, H = h0*1 + hx*sx + hy*sy + hz*sz.
struct PauliComponents {
  double h0 = 0, hx = 0, hy = 0, hz = 0;
};

inline BlochVector bloch_vector(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw DimensionError("bloch_vector: qubit states only");
  const ComplexMatrix& m = rho.matrix();
  BlochVector r;
  r.x = trace_prod(pauli_x(), m).real();
  r.y = trace_prod(pauli_y(), m).real();
  r.z = trace_prod(pauli_z(), m).real();
  return r;
}

inline PauliComponents bloch_of_observable(const Observable& h) {
  if (h.dim() != 2) throw DimensionError("bloch_of_observable: qubit operators only");
  const ComplexMatrix& m = h.matrix();
  PauliComponents c;
  c.h0 = 0.5 * trace(m).real();
  c.hx = 0.5 * trace_prod(pauli_x(), m).real();
  c.hy = 0.5 * trace_prod(pauli_y(), m).real();
  c.hz = 0.5 * trace_prod(pauli_z(), m).real();
  return c;
}

}  // namespace qwot
