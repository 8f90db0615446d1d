#include <doctest.h>

#include "qot/fock.hpp"
#include "qot/rng.hpp"

using namespace qot;

TEST_CASE("ladder algebra of the truncated basis") {
  FockBasis b = build_basis(1.0, 8);
  CHECK((b.raise - b.lower.adjoint()).norm() == doctest::Approx(0.0));

  Mat number = b.raise * b.lower;
  for (int k = 0; k < 8; ++k) CHECK(number(k, k).real() == doctest::Approx(double(k)));
  CHECK(number.diagonal().imag().norm() == doctest::Approx(0.0));

  // spectrum of a*a is {0,...,n-1} exactly
  RVec ev = hermitian_eigenvalues(number);
  for (int k = 0; k < 8; ++k) CHECK(ev(k) == doctest::Approx(double(k)).epsilon(1e-12));

  CHECK(hermiticity_defect(b.pos_op) < 1e-14);
  CHECK(hermiticity_defect(b.mom_op) < 1e-14);

  // [x,p] = i hbar on the top (n-1) block
  Mat comm = b.pos_op * b.mom_op - b.mom_op * b.pos_op;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      Cd want = i == j ? Cd(0.0, 1.0) : Cd(0.0, 0.0);
      CHECK(std::abs(comm(i, j) - want) < 1e-12);
    }
}

TEST_CASE("n=2 ladder matrices and small-basis guards") {
  FockBasis b = build_basis(1.0, 2);
  CHECK(b.lower(0, 1).real() == doctest::Approx(1.0));
  CHECK(b.lower(0, 0) == Cd(0, 0));
  CHECK(b.lower(1, 0) == Cd(0, 0));
  CHECK_THROWS_AS(build_basis(1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(build_basis(-0.5, 8), std::invalid_argument);
  CHECK_THROWS_AS(build_basis(0.0, 8), std::invalid_argument);
}

TEST_CASE("ground-state oscillator energy is d hbar") {
  FockBasis b = build_basis(0.1, 16);
  Mat osc = b.oscillator();
  CHECK(osc(0, 0).real() == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("coherent vector at the origin is the ground mode") {
  FockBasis b = build_basis(1.0, 12);
  StateVector s = coherent_vector(b, 0.0, 0.0);
  CHECK(std::abs(s.coeffs(0) - Cd(1, 0)) < 1e-15);
  CHECK(s.coeffs.tail(11).norm() == doctest::Approx(0.0));
  CHECK(s.truncation_deficit == doctest::Approx(0.0));
}

TEST_CASE("coherent overlap magnitude and phase match the wave packet") {
  // magnitude e^{-|dz|^2/4 hbar}
  double hbar = 0.5;
  FockBasis b = build_basis(hbar, 48);
  StateVector s1 = coherent_vector(b, 0.0, 0.0);
  StateVector s2 = coherent_vector(b, 1.0, 0.0);
  Cd ov = (s1.coeffs.adjoint() * s2.coeffs)(0, 0);
  CHECK(std::abs(ov) == doctest::Approx(std::exp(-0.5)).epsilon(1e-10));
  CHECK(std::abs(ov - coherent_overlap(hbar, 0, 0, 1, 0)) < 1e-10);

  // the closed-form overlap agrees with the Fock inner product including the
  // symplectic phase
  FockBasis b1 = build_basis(1.0, 48);
  StateVector sa = coherent_vector(b1, 0.0, 1.0);
  StateVector sb = coherent_vector(b1, 1.0, 0.0);
  Cd got = (sa.coeffs.adjoint() * sb.coeffs)(0, 0);
  Cd want = coherent_overlap(1.0, 0.0, 1.0, 1.0, 0.0);
  CHECK(std::abs(got - want) < 1e-10);

  // three-point phase test: the triple product is phase-convention invariant
  // and pins the symplectic cocycle coefficient 1/(2 hbar)
  StateVector sc = coherent_vector(b1, 0.3, -0.7);
  Cd triple = (sa.coeffs.adjoint() * sb.coeffs)(0, 0) * (sb.coeffs.adjoint() * sc.coeffs)(0, 0) *
              (sc.coeffs.adjoint() * sa.coeffs)(0, 0);
  Cd expect = coherent_overlap(1.0, 0.0, 1.0, 1.0, 0.0) *
              coherent_overlap(1.0, 1.0, 0.0, 0.3, -0.7) *
              coherent_overlap(1.0, 0.3, -0.7, 0.0, 1.0);
  CHECK(std::abs(triple - expect) < 1e-10);
}

TEST_CASE("coherent state matches the closed-form Gaussian wave packet") {
  double hbar = 0.5;
  FockBasis b = build_basis(hbar, 32);
  PositionGrid g = default_grid(b, 256);
  StateVector s = coherent_vector(b, 1.0, 0.4);
  Vec on_grid = fock_to_position(s, g);
  for (int i = 0; i < g.m_points; i += 7) {
    Cd want = coherent_wavefunction(hbar, 1.0, 0.4, g.points(i));
    CHECK(std::abs(on_grid(i) - want) < 1e-8);
  }
  // peak near x=1
  int imax = 0;
  for (int i = 1; i < g.m_points; ++i)
    if (std::abs(on_grid(i)) > std::abs(on_grid(imax))) imax = i;
  CHECK(std::abs(g.points(imax) - 1.0) < 2 * g.dx);
}

TEST_CASE("hermite grid columns are orthonormal under quadrature") {
  FockBasis b = build_basis(1.0, 8);
  PositionGrid g = default_grid(b, 256);
  // phi_0(0) = pi^{-1/4}
  Vec e0 = Vec::Zero(8);
  e0(0) = 1.0;
  Vec w = fock_to_position(b, e0, g);
  int mid = g.m_points / 2;
  CHECK(std::abs(w(mid)) == doctest::Approx(std::pow(kPi, -0.25)).epsilon(1e-4));

  RMat gram = g.fock_to_grid.transpose() * g.fock_to_grid;
  CHECK((gram - RMat::Identity(8, 8)).norm() < 1e-8);

  // mode 7 normalized to 1 under quadrature
  CHECK(gram(7, 7) == doctest::Approx(1.0).epsilon(1e-8));
  // orthogonality of phi_0 and phi_1
  CHECK(std::abs(gram(0, 1)) < 1e-10);
}

TEST_CASE("under-resolved grids are rejected") {
  FockBasis b = build_basis(1.0, 32);
  CHECK_THROWS_AS(hermite_grid(b, 16, 40.0), std::invalid_argument);   // too coarse
  CHECK_THROWS_AS(hermite_grid(b, 256, 4.0), std::invalid_argument);   // too short
}

TEST_CASE("round trip through the grid is the identity on low modes") {
  FockBasis b = build_basis(0.7, 24);
  PositionGrid g = default_grid(b, 256);
  CounterRng rng(11, 0);
  Vec c = Vec::Zero(24);
  for (int k = 0; k < 12; ++k) c(k) = Cd(rng.next_gaussian(), rng.next_gaussian());
  c /= c.norm();
  Vec back = position_to_fock(b, fock_to_position(b, c, g), g);
  CHECK((back - c).norm() < 1e-8);

  // operator round trip
  Mat rho = c * c.adjoint();
  Mat kernel = fock_to_position_kernel(b, rho, g);
  Mat rho2 = position_to_fock_kernel(b, kernel, g);
  CHECK((rho - rho2).norm() < 1e-8);
}

TEST_CASE("resolution of identity from a coherent phase grid") {
  double hbar = 0.4;
  FockBasis b = build_basis(hbar, 16);
  // Riemann sum of |z><z| dq dp/(2 pi hbar) over a wide grid
  int g = 41;
  double half = 5.0;
  double step = 2.0 * half / (g - 1);
  Mat acc = Mat::Zero(16, 16);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      double q = -half + i * step, p = -half + j * step;
      Vec c = coherent_vector(b, q, p).coeffs;
      acc += (c * c.adjoint()) * (step * step / (2.0 * kPi * hbar));
    }
  // identity on the first n/2 modes
  Mat diff = acc.topLeftCorner(8, 8) - Mat::Identity(8, 8);
  CHECK(operator_norm(diff) < 1e-3);
}

TEST_CASE("repeated raising reproduces the number states") {
  FockBasis b = build_basis(1.0, 10);
  Vec e0 = Vec::Zero(10);
  e0(0) = 1.0;
  Vec v = e0;
  for (int k = 1; k < 9; ++k) {
    v = b.raise * v;
    Vec want = Vec::Zero(10);
    want(k) = 1.0;
    CHECK((v / v.norm() - want).norm() < 1e-12);
  }
}
