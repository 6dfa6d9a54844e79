#include <catch2/catch.hpp>

#include "qwot/bloch.hpp"
#include "qwot/wasserstein.hpp"

using namespace qwot;

namespace {
DensityMatrix ket0() { return DensityMatrix::validated(ComplexMatrix(2, {cplx(1), 0, 0, cplx(0)})); }
DensityMatrix ket1() { return DensityMatrix::validated(ComplexMatrix(2, {cplx(0), 0, 0, cplx(1)})); }
DensityMatrix plus() {
  return DensityMatrix::validated(ComplexMatrix(2, {cplx(0.5), cplx(0.5), cplx(0.5), cplx(0.5)}));
}
DensityMatrix half() { return DensityMatrix::validated(ComplexMatrix::identity(2) * cplx(0.5)); }
DensityMatrix diag91() {
  return DensityMatrix::validated(ComplexMatrix(2, {cplx(0.9), 0, 0, cplx(0.1)}));
}
Observable sz() { return Observable::unchecked(pauli_z()); }
Observable sx() { return Observable::unchecked(pauli_x()); }
Observable sy() { return Observable::unchecked(pauli_y()); }
}  // namespace

TEST_CASE("transport cost fixtures") {
  const ComplexMatrix cg = cost_gmpc({sz()});
  const ComplexMatrix want(4, {cplx(0), 0, 0, 0, 0, cplx(4), 0, 0, 0, 0, cplx(4), 0, 0, 0, 0,
                               cplx(0)});
  REQUIRE(frobenius_norm(cg - want) <= 1e-14);

  // real operator: both costs coincide
  REQUIRE(frobenius_norm(cost_dpt({sz()}) - cg) <= 1e-14);

  // sigma_y transposes to its negative, so the costs differ
  const ComplexMatrix eye2 = ComplexMatrix::identity(2);
  const ComplexMatrix diff = kron(pauli_y(), eye2) * cplx(-1.0) - kron(eye2, pauli_y());
  REQUIRE(frobenius_norm(cost_dpt({sy()}) - diff * diff) <= 1e-14);
  REQUIRE(frobenius_norm(cost_dpt({sy()}) - cost_gmpc({sy()})) > 1.0);

  REQUIRE(min_eigenvalue(cg) >= -1e-12);
  REQUIRE_THROWS_AS(cost_gmpc({}), ValidationError);
  REQUIRE_THROWS_AS(cost_gmpc({sz(), Observable::unchecked(ComplexMatrix::identity(3))}),
                    DimensionError);
}

TEST_CASE("squared distance fixtures, first definition") {
  REQUIRE(d2_gmpc(ket0(), ket0(), {sz()}).d_squared == Approx(0.0).margin(1e-8));
  REQUIRE(d2_gmpc(ket0(), ket1(), {sz()}).d_squared == Approx(2.0).margin(1e-7));
  REQUIRE(d2_gmpc(plus(), plus(), {sz()}).d_squared == Approx(1.0).margin(1e-7));
}

TEST_CASE("squared distance fixtures, transposed definition") {
  SplitMix64 rng(71);
  REQUIRE(d2_dpt(half(), half(), {random_hermitian(2, rng)}).d_squared ==
          Approx(0.0).margin(1e-8));
  REQUIRE(d2_dpt(diag91(), diag91(), {sx()}).d_squared == Approx(0.4).margin(1e-7));
  REQUIRE(d2_dpt(ket0(), ket1(), {sz()}).d_squared == Approx(2.0).margin(1e-7));
}

TEST_CASE("distance result bookkeeping") {
  const DistanceResult r = d2_gmpc(ket0(), ket1(), {sz()});
  REQUIRE(r.converged);
  REQUIRE(r.d_squared >= -1e-9);
  // halved objective consistent with the stored coupling
  const double tr_cx = trace_prod(cost_gmpc({sz()}), r.coupling.mat.matrix()).real();
  REQUIRE(std::abs(r.d_squared - 0.5 * tr_cx) <= 1e-10);
  // dual certificate brackets the value
  REQUIRE(0.5 * r.dual_bound <= r.d_squared + 1e-9);
  REQUIRE(2.0 * r.d_squared - r.dual_bound <= 1e-7 * std::max(1.0, 2.0 * r.d_squared));
  REQUIRE(r.definition == Definition::gmpc);
  REQUIRE(r.operators.size() == 1);
}

TEST_CASE("closed-form self-distance") {
  SplitMix64 rng(72);
  const DensityMatrix psi = random_pure(3, rng);
  const Observable h = random_hermitian(3, rng);
  REQUIRE(self_distance_closed(psi, {h}) == Approx(variance(psi, h)).margin(1e-10));

  const DensityMatrix max_mixed =
      DensityMatrix::validated(ComplexMatrix::identity(4) * cplx(0.25));
  REQUIRE(self_distance_closed(max_mixed, {random_hermitian(4, rng)}) ==
          Approx(0.0).margin(1e-12));

  REQUIRE(self_distance_closed(diag91(), {sx(), sz()}) == Approx(0.4).margin(1e-12));
}

TEST_CASE("product-state bound fixtures and dominance") {
  REQUIRE(product_bound(plus(), plus(), {sz()}) == Approx(1.0).margin(1e-12));
  REQUIRE(product_bound(ket0(), ket1(), {sz()}) == Approx(2.0).margin(1e-12));

  SplitMix64 rng(73);
  for (int t = 0; t < 30; ++t) {
    const DensityMatrix rho = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const DensityMatrix sig = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const Observable h = random_hermitian(2, rng);
    const double bound = product_bound(rho, sig, {h});
    const double d2 = d2_gmpc(rho, sig, {h}).d_squared;
    REQUIRE(d2 <= bound + 1e-7);
  }
}

TEST_CASE("Fisher bound fixtures") {
  SplitMix64 rng(74);
  const DensityMatrix psi = random_pure(2, rng);
  const Observable h = random_hermitian(2, rng);
  REQUIRE(qfi_bound(psi, {h}) == Approx(variance(psi, h)).margin(1e-10));
  REQUIRE(qfi_bound(half(), {h}) == Approx(0.0).margin(1e-12));
  REQUIRE(qfi_bound(diag91(), {sx()}) == Approx(0.64).margin(1e-12));
}

TEST_CASE("realification: already-real inputs need no rotation") {
  const DensityMatrix rho =
      DensityMatrix::validated(ComplexMatrix(2, {cplx(0.7), 0, 0, cplx(0.3)}));
  const Observable h = Observable::unchecked(pauli_x() + pauli_z() * cplx(0.3));
  const RealifyResult r = realify_qubit(rho, h);
  REQUIRE(r.phi == Approx(0.0).margin(1e-13));
  REQUIRE(frobenius_norm(r.u - ComplexMatrix::identity(2)) <= 1e-12);
  REQUIRE(r.max_imag_rho <= 1e-12);
  REQUIRE(r.max_imag_h <= 1e-12);
}

TEST_CASE("realification maps sigma_y onto the x axis") {
  const RealifyResult r = realify_qubit(half(), sy());
  REQUIRE(r.max_imag_rho <= 1e-11);
  REQUIRE(r.max_imag_h <= 1e-11);
  const double off = r.h_real(0, 1).real();
  REQUIRE(std::abs(std::abs(off) - 1.0) <= 1e-11);  // +-sigma_x
  REQUIRE(std::abs(r.h_real(0, 0)) <= 1e-11);
}

TEST_CASE("realification property sweep") {
  SplitMix64 rng(75);
  for (int t = 0; t < 300; ++t) {
    const DensityMatrix rho = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const Observable h = random_hermitian(2, rng);
    const RealifyResult r = realify_qubit(rho, h);
    REQUIRE(r.max_imag_rho <= 1e-11);
    REQUIRE(r.max_imag_h <= 1e-11);
    REQUIRE(frobenius_norm(dagger(r.u) * r.u - ComplexMatrix::identity(2)) <= 1e-12);
    // rotated state is diagonal
    REQUIRE(std::abs(r.rho_real(0, 1)) <= 1e-11);
    // spectra preserved
    const EigDecomposition eh = hermitian_eig(h.matrix());
    const EigDecomposition ehr = hermitian_eig(hermitize(r.h_real));
    REQUIRE(std::abs(eh.values[0] - ehr.values[0]) <= 1e-11);
    REQUIRE(std::abs(eh.values[1] - ehr.values[1]) <= 1e-11);
  }
}

TEST_CASE("ground-energy identities on fixtures") {
  const GroundEnergyResult plain = ground_energy_sdp(half(), {sz()}, GroundEnergyVariant::plain);
  REQUIRE(plain.lhs == Approx(-1.0).margin(1e-7));
  REQUIRE(plain.rhs == Approx(-1.0).margin(1e-12));

  const GroundEnergyResult zero = ground_energy_sdp(plus(), {sz()}, GroundEnergyVariant::plain);
  REQUIRE(zero.lhs == Approx(0.0).margin(1e-7));
  REQUIRE(zero.rhs == Approx(0.0).margin(1e-12));

  const GroundEnergyResult tr =
      ground_energy_sdp(diag91(), {sx()}, GroundEnergyVariant::transposed);
  REQUIRE(tr.lhs == Approx(-0.6).margin(1e-7));
  REQUIRE(tr.rhs == Approx(-0.6).margin(1e-12));

  SplitMix64 rng(76);
  REQUIRE_THROWS_AS(
      ground_energy_sdp(random_mixed(3, rng), {random_hermitian(3, rng)},
                        GroundEnergyVariant::plain),
      ValidationError);
}

TEST_CASE("transpose relations and unitary covariance") {
  SplitMix64 rng(77);
  for (int t = 0; t < 25; ++t) {
    const DensityMatrix rho = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const DensityMatrix sig = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const Observable hr = random_hermitian_real(2, rng);
    const TransposeRelationReport rep = verify_transpose_relations(rho, sig, {hr}, rng);
    REQUIRE(rep.all_converged);
    REQUIRE(rep.gap_real_ops.has_value());
    REQUIRE(std::abs(*rep.gap_real_ops) <= 1e-6);
    REQUIRE(std::abs(rep.gap_covariance_gmpc) <= 1e-6);
    REQUIRE(std::abs(rep.gap_covariance_dpt) <= 1e-6);
  }
}

TEST_CASE("real states make the two distances coincide") {
  SplitMix64 rng(78);
  for (int t = 0; t < 25; ++t) {
    const DensityMatrix rho = random_mixed_real(2, rng);
    const DensityMatrix sig = random_mixed_real(2, rng);
    const Observable h = random_hermitian(2, rng);
    const TransposeRelationReport rep = verify_transpose_relations(rho, sig, {h}, rng);
    REQUIRE(rep.gap_real_states.has_value());
    REQUIRE(std::abs(*rep.gap_real_states) <= 1e-6);
  }
}

TEST_CASE("covariance sweep over random unitaries") {
  SplitMix64 rng(79);
  const DensityMatrix rho = random_mixed(2, rng);
  const DensityMatrix sig = random_mixed(2, rng);
  const Observable h = random_hermitian(2, rng);
  const double base_g = d2_gmpc(rho, sig, {h}).d_squared;
  const double base_d = d2_dpt(rho, sig, {h}).d_squared;
  for (int t = 0; t < 100; ++t) {
    const ComplexMatrix u = random_unitary(2, rng);
    const DensityMatrix rho_u = DensityMatrix::unchecked(hermitize(u * rho.matrix() * dagger(u)));
    const DensityMatrix sig_u = DensityMatrix::unchecked(hermitize(u * sig.matrix() * dagger(u)));
    const Observable h_u = Observable::unchecked(hermitize(u * h.matrix() * dagger(u)));
    REQUIRE(std::abs(d2_gmpc(rho_u, sig_u, {h_u}).d_squared - base_g) <= 1e-6);
    REQUIRE(std::abs(d2_dpt(rho_u, sig_u, {h_u}).d_squared - base_d) <= 1e-6);
  }
}

TEST_CASE("qubit equality of the two distances, seeded smoke run") {
  SplitMix64 seedgen(80);
  for (int t = 0; t < 50; ++t) {
    SplitMix64 rng = trial_stream(80, static_cast<uint64_t>(t));
    const DensityMatrix rho = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const DensityMatrix sig = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const Observable h = random_hermitian(2, rng);
    const double g = d2_gmpc(rho, sig, {h}).d_squared;
    const double d = d2_dpt(rho, sig, {h}).d_squared;
    REQUIRE(std::abs(g - d) <= 1e-6);
  }
}

TEST_CASE("self-distance identity beyond qubits") {
  SplitMix64 rng(81);
  const DensityMatrix rho = random_mixed(4, rng);
  std::vector<Observable> hs = {random_hermitian(4, rng), random_hermitian(4, rng),
                                random_hermitian(4, rng)};
  const DistanceResult r = d2_dpt(rho, rho, hs);
  REQUIRE(r.converged);
  REQUIRE(std::abs(r.d_squared - self_distance_closed(rho, hs)) <= 1e-6);
}
