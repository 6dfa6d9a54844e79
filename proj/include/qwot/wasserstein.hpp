#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qwot/bloch.hpp"
#include "qwot/info_measures.hpp"
#include "qwot/random.hpp"
#include "qwot/solver.hpp"
#include "qwot/state.hpp"

namespace qwot {

/// The two coupling-based Wasserstein-2 distances. `gmpc` uses the cost
/// (H (x) 1 - 1 (x) H)^2 with marginals (rho, sigma); `dpt` transposes the
/// first cost factor and the first marginal.
enum class Definition { gmpc, dpt };

inline const char* to_string(Definition d) { return d == Definition::gmpc ? "gmpc" : "dpt"; }

struct DistanceResult {
  double d_squared = 0;  // half the solver optimum
  Coupling coupling;
  double dual_bound = 0;  // unhalved solver value
  Definition definition = Definition::gmpc;
  std::vector<Observable> operators;
  long iterations = 0;
  bool converged = false;
  double rel_gap = 0;
};

namespace detail {
inline void check_cost_inputs(int dim, const std::vector<Observable>& hs) {
  if (hs.empty()) throw ValidationError("operator list is empty");
  for (const auto& h : hs)
    if (h.dim() != dim) throw DimensionError("operator dimension mismatch");
}
}  // namespace detail

/// Transport cost sum_n (H_n (x) 1 - 1 (x) H_n)^2. Hermitian PSD.
inline ComplexMatrix cost_gmpc(const std::vector<Observable>& hs) {
  if (hs.empty()) throw ValidationError("operator list is empty");
  const int d = hs.front().dim();
  detail::check_cost_inputs(d, hs);
  const ComplexMatrix eye = ComplexMatrix::identity(d);
  ComplexMatrix c(d * d);
  for (const auto& h : hs) {
    const ComplexMatrix diff = kron(h.matrix(), eye) - kron(eye, h.matrix());
    c += diff * diff;
  }
  return hermitize(c);
}

/// Transport cost sum_n (H_n^T (x) 1 - 1 (x) H_n)^2. Equals cost_gmpc when
/// every H_n is real.
inline ComplexMatrix cost_dpt(const std::vector<Observable>& hs) {
  if (hs.empty()) throw ValidationError("operator list is empty");
  const int d = hs.front().dim();
  detail::check_cost_inputs(d, hs);
  const ComplexMatrix eye = ComplexMatrix::identity(d);
  ComplexMatrix c(d * d);
  for (const auto& h : hs) {
    const ComplexMatrix diff = kron(transpose(h.matrix()), eye) - kron(eye, h.matrix());
    c += diff * diff;
  }
  return hermitize(c);
}

namespace detail {
inline DistanceResult distance_from_solution(Definition def, const std::vector<Observable>& hs,
                                             SdpSolution sol) {
  DistanceResult r;
  r.d_squared = 0.5 * sol.primal_value;
  r.dual_bound = sol.dual_bound;
  r.definition = def;
  r.operators = hs;
  r.iterations = sol.iterations;
  r.converged = sol.converged;
  r.rel_gap = sol.rel_gap;
  r.coupling = std::move(sol.coupling);
  return r;
}
}  // namespace detail

/// Squared distance with cost_gmpc and marginals (rho, sigma).
inline DistanceResult d2_gmpc(const DensityMatrix& rho, const DensityMatrix& sigma,
                              const std::vector<Observable>& hs, const SolverOptions& opts = {}) {
  if (rho.dim() != sigma.dim()) throw DimensionError("d2_gmpc: state dimensions differ");
  detail::check_cost_inputs(rho.dim(), hs);
  SdpProblem p{cost_gmpc(hs), rho, sigma};
  return detail::distance_from_solution(Definition::gmpc, hs, solve_coupling(p, opts));
}

/// Squared distance with cost_dpt and marginals (rho^T, sigma).
inline DistanceResult d2_dpt(const DensityMatrix& rho, const DensityMatrix& sigma,
                             const std::vector<Observable>& hs, const SolverOptions& opts = {}) {
  if (rho.dim() != sigma.dim()) throw DimensionError("d2_dpt: state dimensions differ");
  detail::check_cost_inputs(rho.dim(), hs);
  SdpProblem p{cost_dpt(hs), DensityMatrix::unchecked(transpose(rho.matrix())), sigma};
  return detail::distance_from_solution(Definition::dpt, hs, solve_coupling(p, opts));
}

/// Closed-form self-distance: the total skew information sum_n I_rho(H_n).
inline double self_distance_closed(const DensityMatrix& rho, const std::vector<Observable>& hs) {
  detail::check_cost_inputs(rho.dim(), hs);
  double s = 0.0;
  for (const auto& h : hs) s += skew_information(rho, h);
  return s;
}

/// Product-coupling upper bound:
///   1/2 sum_n [ Var(H_n)_rho + Var(H_n)_sigma + (<H_n>_rho - <H_n>_sigma)^2 ].
inline double product_bound(const DensityMatrix& rho, const DensityMatrix& sigma,
                            const std::vector<Observable>& hs) {
  if (rho.dim() != sigma.dim()) throw DimensionError("product_bound: state dimensions differ");
  detail::check_cost_inputs(rho.dim(), hs);
  double s = 0.0;
  for (const auto& h : hs) {
    const double dm = expectation(rho, h) - expectation(sigma, h);
    s += 0.5 * (variance(rho, h) + variance(sigma, h) + dm * dm);
  }
  return s;
}

/// Fisher-information upper bound on the self-distance: 1/4 sum_n F_Q[rho, H_n].
inline double qfi_bound(const DensityMatrix& rho, const std::vector<Observable>& hs) {
  detail::check_cost_inputs(rho.dim(), hs);
  double s = 0.0;
  for (const auto& h : hs) s += 0.25 * qfi(rho, h);
  return s;
}

/// Constructive realification of a qubit pair (rho, H): U = W V^dagger with V
/// the eigenbasis of rho (descending) and W a z-rotation chosen so that the
/// rotated observable has no sigma_y component. U rho U^dagger is diagonal and
/// U H U^dagger is real, both up to recorded imaginary residuals.
struct RealifyResult {
  ComplexMatrix u;         // 2x2 unitary
  ComplexMatrix rho_real;  // U rho U^dagger, diagonal and real up to residuals
  ComplexMatrix h_real;    // U H U^dagger, real up to residuals
  double phi = 0;          // z-rotation angle, radians
  double max_imag_rho = 0;
  double max_imag_h = 0;
};

inline RealifyResult realify_qubit(const DensityMatrix& rho, const Observable& h) {
  if (rho.dim() != 2 || h.dim() != 2) throw DimensionError("realify_qubit: qubits only");
  const EigDecomposition e = hermitian_eig(rho.matrix());
  const ComplexMatrix vdag = dagger(e.vectors);
  const ComplexMatrix h2 = hermitize(vdag * h.matrix() * e.vectors);
  const PauliComponents pc = bloch_of_observable(Observable::unchecked(h2));

  // The rotation angle only needs the transverse component; the sign
  // convention is settled by checking the sigma_y residual of both candidates.
  double phi = 0.0;
  if (std::hypot(pc.hx, pc.hy) > 1e-13) {
    const double candidate = std::atan2(pc.hy, pc.hx);
    auto sy_residual = [&](double angle) {
      const cplx w0 = std::exp(cplx(0, -0.5 * angle));
      const cplx w1 = std::exp(cplx(0, 0.5 * angle));
      // Tr(W H2 W^dagger sigma_y) depends only on the rotated (0,1) entry.
      const cplx h01 = w0 * h2(0, 1) * std::conj(w1);
      return std::abs(2.0 * -h01.imag());
    };
    phi = sy_residual(candidate) <= sy_residual(-candidate) ? candidate : -candidate;
  }

  ComplexMatrix w(2);
  w(0, 0) = std::exp(cplx(0, -0.5 * phi));
  w(1, 1) = std::exp(cplx(0, 0.5 * phi));

  RealifyResult r;
  r.phi = phi;
  r.u = w * vdag;
  r.rho_real = r.u * rho.matrix() * dagger(r.u);
  r.h_real = r.u * h.matrix() * dagger(r.u);
  r.max_imag_rho = max_abs_imag(r.rho_real);
  r.max_imag_h = max_abs_imag(r.h_real);
  return r;
}

enum class GroundEnergyVariant { transposed, plain };

/// Coupling-constrained ground-energy identity. The solver minimum of the
/// two-body interaction (lhs) must match the closed form
/// sum_n [ I_rho(H_n) - <H_n^2>_rho ] (rhs).
///   transposed: cost -sum_n H_n^T (x) H_n, marginals (rho^T, rho), any dim;
///   plain:      cost -H_1 (x) H_1, marginals (rho, rho), qubits with N = 1.
struct GroundEnergyResult {
  double lhs = 0;
  double rhs = 0;
  SdpSolution solution;
};

inline GroundEnergyResult ground_energy_sdp(const DensityMatrix& rho,
                                            const std::vector<Observable>& hs,
                                            GroundEnergyVariant variant,
                                            const SolverOptions& opts = {}) {
  detail::check_cost_inputs(rho.dim(), hs);
  const int d = rho.dim();
  ComplexMatrix cost(d * d);
  DensityMatrix marginal_1;
  if (variant == GroundEnergyVariant::plain) {
    if (hs.size() != 1 || d != 2)
      throw ValidationError("ground_energy_sdp: plain variant requires one operator on qubits");
    cost = cost - kron(hs.front().matrix(), hs.front().matrix());
    marginal_1 = rho;
  } else {
    for (const auto& h : hs) cost = cost - kron(transpose(h.matrix()), h.matrix());
    marginal_1 = DensityMatrix::unchecked(transpose(rho.matrix()));
  }

  GroundEnergyResult r;
  SdpProblem p{hermitize(cost), marginal_1, rho};
  r.solution = solve_coupling(p, opts);
  r.lhs = r.solution.primal_value;
  r.rhs = 0.0;
  for (const auto& h : hs) {
    const ComplexMatrix hh = h.matrix() * h.matrix();
    r.rhs += skew_information(rho, h) - trace_prod(hh, rho.matrix()).real();
  }
  return r;
}

/// Signed gaps for the transpose and unitary-covariance relations between the
/// two distances:
///   all H_n real     ->  d2_gmpc(rho, sigma) = d2_dpt(rho^T, sigma)
///   rho, sigma real  ->  d2_gmpc(rho, sigma) = d2_dpt(rho, sigma)
///   any U            ->  both distances invariant under conjugating all inputs.
struct TransposeRelationReport {
  double d2_gmpc_value = 0;
  std::optional<double> gap_real_ops;     // set when every H_n is real
  std::optional<double> gap_real_states;  // set when rho and sigma are real
  double gap_covariance_gmpc = 0;
  double gap_covariance_dpt = 0;
  bool all_converged = true;
};

inline TransposeRelationReport verify_transpose_relations(const DensityMatrix& rho,
                                                          const DensityMatrix& sigma,
                                                          const std::vector<Observable>& hs,
                                                          SplitMix64& rng,
                                                          const SolverOptions& opts = {}) {
  if (rho.dim() != sigma.dim()) throw DimensionError("state dimensions differ");
  detail::check_cost_inputs(rho.dim(), hs);
  const int d = rho.dim();

  TransposeRelationReport rep;
  const DistanceResult g = d2_gmpc(rho, sigma, hs, opts);
  const DistanceResult dp = d2_dpt(rho, sigma, hs, opts);
  rep.d2_gmpc_value = g.d_squared;
  rep.all_converged = g.converged && dp.converged;

  bool ops_real = true;
  for (const auto& h : hs) ops_real = ops_real && max_abs_imag(h.matrix()) <= 1e-12;
  if (ops_real) {
    const DistanceResult dt =
        d2_dpt(DensityMatrix::unchecked(transpose(rho.matrix())), sigma, hs, opts);
    rep.gap_real_ops = g.d_squared - dt.d_squared;
    rep.all_converged = rep.all_converged && dt.converged;
  }

  const bool states_real =
      max_abs_imag(rho.matrix()) <= 1e-12 && max_abs_imag(sigma.matrix()) <= 1e-12;
  if (states_real) rep.gap_real_states = g.d_squared - dp.d_squared;

  // covariance under a random unitary
  const ComplexMatrix u = random_unitary(d, rng);
  const DensityMatrix rho_u = DensityMatrix::unchecked(hermitize(u * rho.matrix() * dagger(u)));
  const DensityMatrix sigma_u =
      DensityMatrix::unchecked(hermitize(u * sigma.matrix() * dagger(u)));
  std::vector<Observable> hs_u;
  hs_u.reserve(hs.size());
  for (const auto& h : hs)
    hs_u.push_back(Observable::unchecked(hermitize(u * h.matrix() * dagger(u))));
  const DistanceResult gu = d2_gmpc(rho_u, sigma_u, hs_u, opts);
  const DistanceResult du = d2_dpt(rho_u, sigma_u, hs_u, opts);
  rep.gap_covariance_gmpc = gu.d_squared - g.d_squared;
  rep.gap_covariance_dpt = du.d_squared - dp.d_squared;
  rep.all_converged = rep.all_converged && gu.converged && du.converged;
  return rep;
}

}  // namespace qwot
