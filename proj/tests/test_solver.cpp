#include <catch2/catch.hpp>

#include "qwot/bloch.hpp"
#include "qwot/random.hpp"
#include "qwot/solver.hpp"

using namespace qwot;

namespace {
DensityMatrix half_mixed() {
  return DensityMatrix::validated(ComplexMatrix::identity(2) * cplx(0.5));
}

ComplexMatrix random_cost(int n, SplitMix64& rng) {
  const ComplexMatrix g = ginibre(n, rng);
  return hermitize((g + dagger(g)) * cplx(0.5));
}
}  // namespace

TEST_CASE("zero cost gives a zero optimum") {
  SplitMix64 rng(51);
  const SdpProblem p{ComplexMatrix(4), random_mixed(2, rng), random_mixed(2, rng)};
  const SdpSolution s = solve_coupling(p);
  REQUIRE(s.converged);
  REQUIRE(std::abs(s.primal_value) <= 1e-9);
  REQUIRE(s.dual_bound <= s.primal_value + 1e-9);
}

TEST_CASE("pure marginals force the product coupling") {
  SplitMix64 rng(52);
  for (int t = 0; t < 10; ++t) {
    const DensityMatrix a = random_pure(2, rng);
    const DensityMatrix b = random_pure(2, rng);
    const ComplexMatrix c = random_cost(4, rng);
    const double oracle = trace_prod(c, kron(a.matrix(), b.matrix())).real();
    const SdpSolution s = solve_coupling({c, a, b});
    REQUIRE(s.converged);
    REQUIRE(std::abs(s.primal_value - oracle) <= 1e-8);
    REQUIRE(frobenius_norm(s.coupling.mat.matrix() - kron(a.matrix(), b.matrix())) <= 1e-7);
    REQUIRE(s.dual_bound <= s.primal_value + 1e-9);
    REQUIRE(s.primal_value - s.dual_bound <= 1e-7 * std::max(1.0, std::abs(s.primal_value)));
    REQUIRE(s.face_reduced);
  }
}

TEST_CASE("ferromagnetic two-qubit instance attains -1") {
  const ComplexMatrix c = kron(pauli_z(), pauli_z()) * cplx(-1.0);
  const SdpSolution s = solve_coupling({c, half_mixed(), half_mixed()});
  REQUIRE(s.converged);
  REQUIRE(s.primal_value == Approx(-1.0).margin(1e-8));
  REQUIRE(s.dual_bound == Approx(-1.0).margin(1e-7));
  // the diagonal correlated coupling attains the optimum
  ComplexMatrix attaining(4);
  attaining(0, 0) = 0.5;
  attaining(3, 3) = 0.5;
  REQUIRE(trace_prod(c, attaining).real() == Approx(-1.0));
  REQUIRE(frobenius_norm(partial_trace(attaining, 2, 2) - half_mixed().matrix()) <= 1e-15);
}

TEST_CASE("mixed-rank marginals use the rectangular face") {
  SplitMix64 rng(53);
  for (int t = 0; t < 5; ++t) {
    const DensityMatrix a = random_pure(3, rng);
    const DensityMatrix b = random_mixed(3, rng);
    const ComplexMatrix c = random_cost(9, rng);
    // pure first marginal forces X = a (x) b
    const double oracle = trace_prod(c, kron(a.matrix(), b.matrix())).real();
    const SdpSolution s = solve_coupling({c, a, b});
    REQUIRE(s.converged);
    REQUIRE(s.face_reduced);
    REQUIRE(s.face_basis_1.size() == 1);
    REQUIRE(s.face_basis_2.size() == 3);
    REQUIRE(std::abs(s.primal_value - oracle) <= 1e-7 * std::max(1.0, std::abs(oracle)));
    REQUIRE(s.coupling.residual_1 <= 1e-8);
    REQUIRE(s.coupling.residual_2 <= 1e-8);
  }
}

TEST_CASE("affine projection postconditions") {
  SplitMix64 rng(54);
  const DensityMatrix a = random_mixed(2, rng);
  const DensityMatrix b = random_mixed(2, rng);

  // already feasible input is unchanged
  const ComplexMatrix feasible = kron(a.matrix(), b.matrix());
  REQUIRE(frobenius_norm(affine_project(feasible, a.matrix(), b.matrix()) - feasible) <= 1e-12);

  // zero input lands exactly on the constraints
  const ComplexMatrix from_zero = affine_project(ComplexMatrix(4), a.matrix(), b.matrix());
  REQUIRE(frobenius_norm(partial_trace(from_zero, 2, 2) - a.matrix()) <= 1e-13);
  REQUIRE(frobenius_norm(partial_trace(from_zero, 1, 2) - b.matrix()) <= 1e-13);

  // idempotence
  const ComplexMatrix g = random_cost(4, rng);
  const ComplexMatrix p1 = affine_project(g, a.matrix(), b.matrix());
  const ComplexMatrix p2 = affine_project(p1, a.matrix(), b.matrix());
  REQUIRE(frobenius_norm(p2 - p1) <= 1e-12);
}

TEST_CASE("dual bound certificate checks") {
  SplitMix64 rng(55);
  const DensityMatrix a = random_mixed(2, rng);
  const DensityMatrix b = random_mixed(2, rng);

  // zero multipliers on a PSD cost
  const ComplexMatrix cpsd = kron(pauli_z(), pauli_z()) + ComplexMatrix::identity(4);
  const DualCertificate zero = dual_bound({cpsd, a, b}, ComplexMatrix(2), ComplexMatrix(2));
  REQUIRE(zero.feasible);
  REQUIRE(zero.bound == Approx(0.0).margin(1e-14));

  // explicit certificate attaining the ferromagnetic optimum
  const ComplexMatrix c = kron(pauli_z(), pauli_z()) * cplx(-1.0);
  const ComplexMatrix yhalf = ComplexMatrix::identity(2) * cplx(-0.5);
  const DualCertificate cert = dual_bound({c, half_mixed(), half_mixed()}, yhalf, yhalf);
  REQUIRE(cert.feasible);
  REQUIRE(cert.bound == Approx(-1.0));

  // infeasible pair is reported with its margin
  const ComplexMatrix ybad = ComplexMatrix::identity(2) * cplx(1.0);
  const DualCertificate bad = dual_bound({c, half_mixed(), half_mixed()}, ybad, ybad);
  REQUIRE_FALSE(bad.feasible);
  REQUIRE(bad.min_slack_eig < -1e-9);
}

TEST_CASE("weak duality against sampled feasible points") {
  SplitMix64 rng(56);
  const DensityMatrix a = random_mixed(2, rng);
  const DensityMatrix b = random_mixed(2, rng);
  const ComplexMatrix c = random_cost(4, rng);
  const SdpProblem p{c, a, b};
  const SdpSolution s = solve_coupling(p);
  REQUIRE(s.converged);
  REQUIRE_FALSE(s.face_reduced);

  const DualCertificate cert = dual_bound(p, s.y1, s.y2);
  REQUIRE(cert.feasible);
  REQUIRE(cert.bound == Approx(s.dual_bound).margin(1e-12));

  const ComplexMatrix base = kron(a.matrix(), b.matrix());
  const double base_floor = min_eigenvalue(base);
  for (int t = 0; t < 100; ++t) {
    // random marginal-null direction keeps the marginals, scaled to stay PSD
    const ComplexMatrix k = random_cost(4, rng);
    const ComplexMatrix k0 = affine_project(k, ComplexMatrix(2), ComplexMatrix(2));
    const double scale = 0.9 * base_floor / std::max(frobenius_norm(k0), 1e-12);
    const ComplexMatrix x = base + k0 * cplx(scale);
    REQUIRE(min_eigenvalue(x) >= -1e-12);
    REQUIRE(frobenius_norm(partial_trace(x, 2, 2) - a.matrix()) <= 1e-12);
    REQUIRE(trace_prod(c, x).real() >= cert.bound - 1e-9);
  }
}

TEST_CASE("optimum is invariant under local conjugation") {
  SplitMix64 rng(57);
  const DensityMatrix a = random_mixed(2, rng);
  const DensityMatrix b = random_mixed(2, rng);
  const ComplexMatrix c = random_cost(4, rng);
  const SdpSolution s = solve_coupling({c, a, b});

  const ComplexMatrix u = random_unitary(2, rng);
  const ComplexMatrix v = random_unitary(2, rng);
  const ComplexMatrix uv = kron(u, v);
  const SdpProblem rotated{hermitize(uv * c * dagger(uv)),
                           DensityMatrix::unchecked(hermitize(u * a.matrix() * dagger(u))),
                           DensityMatrix::unchecked(hermitize(v * b.matrix() * dagger(v)))};
  const SdpSolution s2 = solve_coupling(rotated);
  REQUIRE(std::abs(s.primal_value - s2.primal_value) <= 1e-7);
}

TEST_CASE("restart from the returned solution is stationary") {
  SplitMix64 rng(58);
  const DensityMatrix a = random_mixed(2, rng);
  const DensityMatrix b = random_mixed(2, rng);
  const ComplexMatrix c = random_cost(4, rng);
  const SdpProblem p{c, a, b};
  const SdpSolution s = solve_coupling(p);
  REQUIRE(s.converged);

  SolverOptions warm;
  warm.init_coupling = s.coupling.mat.matrix();
  warm.init_y1 = s.y1;
  warm.init_y2 = s.y2;
  const SdpSolution s2 = solve_coupling(p, warm);
  REQUIRE(s2.converged);
  REQUIRE(std::abs(s2.primal_value - s.primal_value) <= 1e-9);
}

TEST_CASE("solver output is deterministic") {
  SplitMix64 rng(59);
  const DensityMatrix a = random_mixed(3, rng);
  const DensityMatrix b = random_mixed(3, rng);
  const ComplexMatrix c = random_cost(9, rng);
  const SdpSolution s1 = solve_coupling({c, a, b});
  const SdpSolution s2 = solve_coupling({c, a, b});
  REQUIRE(s1.primal_value == s2.primal_value);
  REQUIRE(s1.dual_bound == s2.dual_bound);
  REQUIRE(s1.iterations == s2.iterations);
  REQUIRE(s1.coupling.mat.matrix().data() == s2.coupling.mat.matrix().data());
}

TEST_CASE("solution coupling is a valid state at the feasibility tolerance") {
  SplitMix64 rng(60);
  for (int t = 0; t < 10; ++t) {
    const DensityMatrix a = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const DensityMatrix b = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const ComplexMatrix c = random_cost(4, rng);
    const SdpSolution s = solve_coupling({c, a, b});
    REQUIRE(s.converged);
    REQUIRE(check_density(s.coupling.mat.matrix(), 1e-8).ok());
    REQUIRE(s.coupling.residual_1 <= 1e-8);
    REQUIRE(s.coupling.residual_2 <= 1e-8);
  }
}

TEST_CASE("problem validation rejects bad inputs up front") {
  SplitMix64 rng(61);
  const DensityMatrix a = random_mixed(2, rng);
  const DensityMatrix scaled = DensityMatrix::unchecked(a.matrix() * cplx(0.9));
  REQUIRE_THROWS_AS(solve_coupling({ComplexMatrix(4), a, scaled}), ValidationError);

  ComplexMatrix nonherm(4);
  nonherm(0, 1) = 1.0;
  REQUIRE_THROWS_AS(solve_coupling({nonherm, a, a}), ValidationError);

  REQUIRE_THROWS_AS(solve_coupling({ComplexMatrix(9), a, a}), DimensionError);

  SolverOptions bad;
  bad.over_relax = 2.5;
  REQUIRE_THROWS_AS(solve_coupling({ComplexMatrix(4), a, a}, bad), ValidationError);
}

TEST_CASE("iteration cap returns the best iterate without converging") {
  SplitMix64 rng(62);
  const DensityMatrix a = random_mixed(2, rng);
  const DensityMatrix b = random_mixed(2, rng);
  const ComplexMatrix c = random_cost(4, rng);
  SolverOptions tight;
  tight.max_iters = 3;
  const SdpSolution s = solve_coupling({c, a, b}, tight);
  REQUIRE_FALSE(s.converged);
  REQUIRE(s.iterations == 3);
  REQUIRE(std::isfinite(s.primal_value));
  REQUIRE(std::isfinite(s.dual_bound));
  // the repaired certificate stays a genuine lower bound on the optimum
  const SdpSolution full = solve_coupling({c, a, b});
  REQUIRE(s.dual_bound <= full.primal_value + 1e-9);
}
