#include <doctest.h>

#include "qot/density.hpp"
#include "qot/quantize.hpp"
#include "qot/rng.hpp"

using namespace qot;

TEST_CASE("validate passes projectors and mixed states, flags violations") {
  FockBasis b = build_basis(1.0, 4);
  DensityOperator e0 = pure_state(coherent_vector(b, 0.0, 0.0));
  CHECK(validate(e0).pass);

  DensityOperator mixed = maximally_mixed(b, 4);
  CHECK(validate(mixed).pass);

  DensityOperator bad = mixed;
  bad.matrix(0, 0) -= 1e-3;
  bad.matrix(1, 1) += 2e-3;
  bad.matrix(0, 0) -= 1e-3;  // eigenvalue pushed below -1e-3
  DensityDiagnostics d = validate(bad);
  CHECK_FALSE(d.pass);
  CHECK(d.failure == "psd");

  DensityOperator nonherm = mixed;
  nonherm.matrix(0, 1) = Cd(0.3, 0.1);
  DensityDiagnostics d2 = validate(nonherm);
  CHECK_FALSE(d2.pass);
  CHECK(d2.failure == "hermiticity");

  DensityOperator off_trace = mixed;
  off_trace.matrix *= 1.5;
  DensityDiagnostics d3 = validate(off_trace);
  CHECK_FALSE(d3.pass);
  CHECK(d3.failure == "trace");
}

TEST_CASE("tensor and partial trace invert each other") {
  FockBasis b = build_basis(0.5, 5);
  DensityOperator r = pure_state(coherent_vector(b, 0.4, 0.0));
  DensityOperator s = maximally_mixed(b, 3);
  DensityOperator t = tensor(r, s);
  CHECK(t.matrix.trace().real() == doctest::Approx(1.0).epsilon(1e-12));

  DensityOperator back_r = partial_trace(t, {0});
  DensityOperator back_s = partial_trace(t, {1});
  CHECK((back_r.matrix - r.matrix).norm() < 1e-12);
  CHECK((back_s.matrix - s.matrix).norm() < 1e-12);

  // trace preserved under any partial trace
  CHECK(back_r.matrix.trace().real() == doctest::Approx(t.matrix.trace().real()));
  CHECK_THROWS_AS(partial_trace(t, {2}), std::invalid_argument);
}

TEST_CASE("swap-symmetrized product state has equal one-particle marginals") {
  FockBasis b = build_basis(1.0, 4);
  DensityOperator r = pure_state(coherent_vector(b, 0.5, 0.0));
  DensityOperator s = maximally_mixed(b, 2);
  DensityOperator rs = tensor(r, s);
  DensityOperator sr = tensor(s, r);
  DensityOperator sym = rs;
  sym.matrix = 0.5 * (rs.matrix + sr.matrix);
  DensityOperator m1 = partial_trace(sym, {0});
  DensityOperator m2 = partial_trace(sym, {1});
  CHECK((m1.matrix - m2.matrix).norm() < 1e-12);

  DensityOperator marg = marginal_k(sym, 1);
  CHECK((marg.matrix - m1.matrix).norm() < 1e-14);
}

TEST_CASE("PSD preserved by tensor and partial trace on random mixtures") {
  FockBasis b = build_basis(1.0, 4);
  CounterRng rng(3, 9);
  Mat g(4, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) g(i, j) = Cd(rng.next_gaussian(), rng.next_gaussian());
  DensityOperator r = make_density(b, Mat((g * g.adjoint()) / (g * g.adjoint()).trace().real()));
  DensityOperator t = tensor(r, r);
  CHECK(min_eigenvalue(t.matrix) > -1e-12);
  CHECK(min_eigenvalue(partial_trace(t, {1}).matrix) > -1e-12);
}

TEST_CASE("norm chain and the coherent key example") {
  double hbar = 0.25;
  FockBasis b = build_basis(hbar, 48);
  DensityOperator r1 = pure_state(coherent_vector(b, 0.0, 0.0));
  DensityOperator r2 = pure_state(coherent_vector(b, 1.0, 0.0));
  OperatorNormReport rep = norms(r1.matrix - r2.matrix);
  // |R1 - R2|_2^2 = 2 (1 - e^{-|dz|^2/2hbar}) with |dz|^2/2hbar = 2
  double want_hs_sq = 2.0 * (1.0 - std::exp(-2.0));
  CHECK(rep.hs_norm * rep.hs_norm == doctest::Approx(want_hs_sq).epsilon(1e-8));
  CHECK(rep.trace_norm == doctest::Approx(std::sqrt(2.0) * rep.hs_norm).epsilon(1e-8));
  CHECK(rep.op_norm <= rep.hs_norm + 1e-14);
  CHECK(rep.hs_norm <= rep.trace_norm + 1e-14);

  // trace norm of any density operator is one
  CHECK(norms(r1.matrix).trace_norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("trace norm saturates at 2 for far-separated coherent pairs") {
  // |dz|^2 / 2 hbar = 6.48 >= 6
  double hbar = 0.25;
  FockBasis b = build_basis(hbar, 40);
  DensityOperator r1 = pure_state(coherent_vector(b, -0.9, 0.0));
  DensityOperator r2 = pure_state(coherent_vector(b, 0.9, 0.0));
  CHECK(norms(r1.matrix - r2.matrix).trace_norm > 1.99);
  CHECK(norms(r1.matrix - r2.matrix).trace_norm <= 2.0 + 1e-10);
}

TEST_CASE("oscillator energy values") {
  SUBCASE("ground state") {
    FockBasis b = build_basis(1.0, 8);
    CHECK(energy(b, pure_state(coherent_vector(b, 0, 0))) == doctest::Approx(1.0));
  }
  SUBCASE("coherent state carries q^2+p^2+d hbar") {
    FockBasis b = build_basis(0.3, 32);
    DensityOperator r = pure_state(coherent_vector(b, 0.8, -0.5));
    CHECK(energy(b, r) == doctest::Approx(0.64 + 0.25 + 0.3).epsilon(1e-8));
  }
  SUBCASE("maximally mixed on two modes") {
    FockBasis b = build_basis(1.0, 8);
    CHECK(energy(b, maximally_mixed(b, 2)) == doctest::Approx(2.0));
  }
  SUBCASE("energy is bounded below by d hbar") {
    FockBasis b = build_basis(0.7, 10);
    CounterRng rng(5, 2);
    Mat g(10, 3);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = Cd(rng.next_gaussian(), rng.next_gaussian());
    Mat m = g * g.adjoint();
    DensityOperator r = make_density(b, Mat(m / m.trace().real()));
    CHECK(energy(b, r) >= 0.7 - 1e-12);
  }
}

TEST_CASE("rank detection") {
  FockBasis b = build_basis(1.0, 6);
  CHECK(is_rank_one(pure_state(coherent_vector(b, 0.3, 0.2))));
  CHECK_FALSE(is_rank_one(maximally_mixed(b, 2)));
  Vec v = principal_vector(pure_state(coherent_vector(b, 0.3, 0.2)));
  CHECK(std::abs(std::abs((v.adjoint() * coherent_vector(b, 0.3, 0.2).normalized().coeffs)(0, 0)) -
                 1.0) < 1e-10);
}
