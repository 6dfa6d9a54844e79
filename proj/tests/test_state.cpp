#include <catch2/catch.hpp>

#include "qwot/bloch.hpp"
#include "qwot/random.hpp"
#include "qwot/state.hpp"

using namespace qwot;

TEST_CASE("density validation fixtures") {
  REQUIRE(check_density(ComplexMatrix::identity(2) * cplx(0.5)).ok());

  const ValidationReport bad_trace = check_density(ComplexMatrix(2, {cplx(0.6), 0, 0, cplx(0.5)}));
  REQUIRE_FALSE(bad_trace.ok());
  REQUIRE(bad_trace.violations.size() == 1);
  REQUIRE(bad_trace.violations[0].invariant == "trace");
  REQUIRE(bad_trace.violations[0].magnitude == Approx(0.1));
  REQUIRE_THAT(bad_trace.summary(), Catch::Contains("trace violation 0.1"));

  // PSD boundary: (sigma_x + 1)/2 has eigenvalues {1, 0}
  const ComplexMatrix boundary = (pauli_x() + ComplexMatrix::identity(2)) * cplx(0.5);
  REQUIRE(check_density(boundary).ok());

  ComplexMatrix nonherm(2, {cplx(0.5), cplx(0.3), cplx(0.1), cplx(0.5)});
  const ValidationReport rep = check_density(nonherm);
  REQUIRE_FALSE(rep.ok());
  REQUIRE(rep.violations[0].invariant == "hermiticity");

  const ComplexMatrix negative(2, {cplx(1.2), 0, 0, cplx(-0.2)});
  const ValidationReport rep2 = check_density(negative);
  REQUIRE_FALSE(rep2.ok());
  REQUIRE(rep2.violations[0].invariant == "positivity");
  REQUIRE(rep2.violations[0].magnitude == Approx(0.2));

  REQUIRE_THROWS_AS(DensityMatrix::validated(negative), ValidationError);
  ValidationReport out;
  REQUIRE_FALSE(DensityMatrix::try_validated(negative, out).has_value());
  REQUIRE(DensityMatrix::try_validated(boundary, out).has_value());
}

TEST_CASE("expectation and variance fixtures") {
  const DensityMatrix ket0 = DensityMatrix::validated(ComplexMatrix(2, {cplx(1), 0, 0, cplx(0)}));
  const DensityMatrix mixed = DensityMatrix::validated(ComplexMatrix::identity(2) * cplx(0.5));
  const Observable sz = Observable::unchecked(pauli_z());
  const Observable sx = Observable::unchecked(pauli_x());

  REQUIRE(expectation(ket0, sz) == Approx(1.0));
  REQUIRE(variance(ket0, sz) == Approx(0.0).margin(1e-14));
  REQUIRE(expectation(ket0, sx) == Approx(0.0).margin(1e-14));
  REQUIRE(variance(ket0, sx) == Approx(1.0));
  REQUIRE(expectation(mixed, sz) == Approx(0.0).margin(1e-14));
  REQUIRE(variance(mixed, sz) == Approx(1.0));

  const Observable big = Observable::unchecked(ComplexMatrix::identity(3));
  REQUIRE_THROWS_AS(expectation(ket0, big), DimensionError);
}

TEST_CASE("bloch fixtures") {
  const DensityMatrix mixed = DensityMatrix::validated(ComplexMatrix::identity(2) * cplx(0.5));
  const BlochVector r0 = bloch_vector(mixed);
  REQUIRE(r0.norm() <= 1e-14);

  const DensityMatrix ket0 = DensityMatrix::validated(ComplexMatrix(2, {cplx(1), 0, 0, cplx(0)}));
  const BlochVector r1 = bloch_vector(ket0);
  REQUIRE(r1.x == Approx(0.0).margin(1e-14));
  REQUIRE(r1.y == Approx(0.0).margin(1e-14));
  REQUIRE(r1.z == Approx(1.0));

  const PauliComponents pc = bloch_of_observable(Observable::unchecked(pauli_x() + pauli_z()));
  REQUIRE(pc.h0 == Approx(0.0).margin(1e-14));
  REQUIRE(pc.hx == Approx(1.0));
  REQUIRE(pc.hy == Approx(0.0).margin(1e-14));
  REQUIRE(pc.hz == Approx(1.0));

  SplitMix64 rng(31);
  REQUIRE_THROWS_AS(bloch_vector(random_mixed(3, rng)), DimensionError);
}

TEST_CASE("bloch reconstruction of qubit states") {
  SplitMix64 rng(32);
  for (int t = 0; t < 100; ++t) {
    const DensityMatrix rho = (t % 2) ? random_pure(2, rng) : random_mixed(2, rng);
    const BlochVector r = bloch_vector(rho);
    REQUIRE(r.norm() <= 1.0 + 1e-10);
    ComplexMatrix rec = ComplexMatrix::identity(2) * cplx(0.5);
    rec += (pauli_x() * cplx(0.5 * r.x) + pauli_y() * cplx(0.5 * r.y) + pauli_z() * cplx(0.5 * r.z));
    REQUIRE(frobenius_norm(rec - rho.matrix()) <= 1e-13);
  }
}

TEST_CASE("diagonal qubit states have no transverse components") {
  SplitMix64 rng(33);
  for (int t = 0; t < 20; ++t) {
    const double p = uniform01(rng);
    const DensityMatrix rho =
        DensityMatrix::validated(ComplexMatrix(2, {cplx(p), 0, 0, cplx(1.0 - p)}));
    REQUIRE(expectation(rho, Observable::unchecked(pauli_x())) == Approx(0.0).margin(1e-14));
    REQUIRE(expectation(rho, Observable::unchecked(pauli_y())) == Approx(0.0).margin(1e-14));
  }
}

TEST_CASE("random ensembles: construction invariants") {
  SplitMix64 rng(34);
  for (int t = 0; t < 25; ++t) {
    const int d = 2 + static_cast<int>(rng.next() % 3);

    const DensityMatrix pure = random_pure(d, rng);
    REQUIRE(trace_prod(pure.matrix(), pure.matrix()).real() == Approx(1.0).margin(1e-12));
    REQUIRE(check_density(pure.matrix()).ok());

    const DensityMatrix mixed = random_mixed(d, rng);
    REQUIRE(check_density(mixed.matrix()).ok());

    const Observable h = random_hermitian(d, rng);
    REQUIRE(std::abs(trace(h.matrix())) <= 1e-12);
    EigDecomposition e = hermitian_eig(h.matrix());
    const double radius = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
    REQUIRE(radius == Approx(1.0).margin(1e-10));

    const Observable hr = random_hermitian_real(d, rng);
    REQUIRE(max_abs_imag(hr.matrix()) == 0.0);
    const DensityMatrix mr = random_mixed_real(d, rng);
    REQUIRE(max_abs_imag(mr.matrix()) == 0.0);
    REQUIRE(check_density(mr.matrix()).ok());
    const DensityMatrix pr = random_pure_real(d, rng);
    REQUIRE(max_abs_imag(pr.matrix()) == 0.0);
    REQUIRE(trace_prod(pr.matrix(), pr.matrix()).real() == Approx(1.0).margin(1e-12));

    const ComplexMatrix u = random_unitary(d, rng);
    REQUIRE(frobenius_norm(dagger(u) * u - ComplexMatrix::identity(d)) <= 1e-12);
  }
}

TEST_CASE("random ensembles are bitwise reproducible per seed") {
  SplitMix64 a(99), b(99);
  const DensityMatrix ra = random_mixed(3, a);
  const DensityMatrix rb = random_mixed(3, b);
  REQUIRE(ra.matrix().data() == rb.matrix().data());

  SplitMix64 c = trial_stream(7, 5), d = trial_stream(7, 5);
  REQUIRE(random_pure(4, c).matrix().data() == random_pure(4, d).matrix().data());

  SplitMix64 e = trial_stream(7, 6);
  REQUIRE_FALSE(random_pure(4, e).matrix().data() == random_pure(4, d).matrix().data());
}
