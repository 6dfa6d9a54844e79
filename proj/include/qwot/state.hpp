#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qwot/eig.hpp"
#include "qwot/matrix.hpp"

namespace qwot {

namespace tol {
inline constexpr double state_validation = 1e-10;
}

struct Violation {
  std::string invariant;  // "hermiticity", "trace", "positivity", "finiteness"
  double magnitude;
  double tolerance;
};

/// Outcome of a state/observable check: which invariants failed and by how much.
struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  std::string summary() const {
    if (ok()) return "valid";
    std::ostringstream os;
    for (size_t i = 0; i < violations.size(); ++i) {
      if (i) os << "; ";
      os << violations[i].invariant << " violation " << violations[i].magnitude
         << " (tolerance " << violations[i].tolerance << ")";
    }
    return os.str();
  }
};

/// Check the density-matrix invariants: Hermitian (relative Frobenius),
/// unit trace, and min eigenvalue >= -tolerance.
inline ValidationReport check_density(const ComplexMatrix& m, double tolerance = tol::state_validation) {
  ValidationReport rep;
  if (!m.all_finite()) {
    rep.violations.push_back({"finiteness", std::numeric_limits<double>::infinity(), 0.0});
    return rep;
  }
  const double herm = hermiticity_error(m);
  const double scale = std::max(1.0, frobenius_norm(m));
  if (herm > tolerance * scale) rep.violations.push_back({"hermiticity", herm, tolerance});
  const double tr_err = std::abs(trace(m) - cplx(1.0));
  if (tr_err > tolerance) rep.violations.push_back({"trace", tr_err, tolerance});
  EigDecomposition e = hermitian_eig(hermitize(m));
  const double min_eig = e.values.back();
  if (min_eig < -tolerance) rep.violations.push_back({"positivity", -min_eig, tolerance});
  return rep;
}

inline ValidationReport check_observable(const ComplexMatrix& m, double tolerance = tol::state_validation) {
  ValidationReport rep;
  if (!m.all_finite()) {
    rep.violations.push_back({"finiteness", std::numeric_limits<double>::infinity(), 0.0});
    return rep;
  }
  const double herm = hermiticity_error(m);
  const double scale = std::max(1.0, frobenius_norm(m));
  if (herm > tolerance * scale) rep.violations.push_back({"hermiticity", herm, tolerance});
  return rep;
}

/// Validated quantum state: Hermitian, unit trace, PSD within tolerance.
/// Immutable after construction.
class DensityMatrix {
public:
  DensityMatrix() = default;  // empty placeholder (dim 0)

  static DensityMatrix validated(ComplexMatrix m, double tolerance = tol::state_validation) {
    ValidationReport rep = check_density(m, tolerance);
    if (!rep.ok()) throw ValidationError(rep.summary());
    return DensityMatrix(std::move(m));
  }

  static std::optional<DensityMatrix> try_validated(ComplexMatrix m, ValidationReport& report,
                                                    double tolerance = tol::state_validation) {
    report = check_density(m, tolerance);
    if (!report.ok()) return std::nullopt;
    return DensityMatrix(std::move(m));
  }

  // For outputs that are valid by construction (random ensembles, solver
  // iterates with recorded residuals).
  static DensityMatrix unchecked(ComplexMatrix m) { return DensityMatrix(std::move(m)); }

  const ComplexMatrix& matrix() const { return mat_; }
  int dim() const { return mat_.dim(); }

private:
  explicit DensityMatrix(ComplexMatrix m) : mat_(std::move(m)) {}
  ComplexMatrix mat_;
};

/// Validated Hermitian operator entering a transport cost.
class Observable {
public:
  Observable() = default;  // empty placeholder (dim 0)

  static Observable validated(ComplexMatrix m, double tolerance = tol::state_validation) {
    ValidationReport rep = check_observable(m, tolerance);
    if (!rep.ok()) throw ValidationError(rep.summary());
    return Observable(std::move(m));
  }

  static Observable unchecked(ComplexMatrix m) { return Observable(std::move(m)); }

  const ComplexMatrix& matrix() const { return mat_; }
  int dim() const { return mat_.dim(); }

private:
  explicit Observable(ComplexMatrix m) : mat_(std::move(m)) {}
  ComplexMatrix mat_;
};

/// <H> = Tr(H rho); the imaginary part is a numerical residual and is dropped.
inline double expectation(const DensityMatrix& rho, const Observable& h) {
  if (rho.dim() != h.dim()) throw DimensionError("expectation: dimensions differ");
  return trace_prod(h.matrix(), rho.matrix()).real();
}

/// Var(H) = <H^2> - <H>^2.
inline double variance(const DensityMatrix& rho, const Observable& h) {
  if (rho.dim() != h.dim()) throw DimensionError("variance: dimensions differ");
  const ComplexMatrix h2 = h.matrix() * h.matrix();
  const double m2 = trace_prod(h2, rho.matrix()).real();
  const double m1 = trace_prod(h.matrix(), rho.matrix()).real();
  return m2 - m1 * m1;
}

}  // namespace qwot
