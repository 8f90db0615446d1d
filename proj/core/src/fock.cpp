#include "qot/fock.hpp"

#include <cmath>
#include <stdexcept>

namespace qot {

FockBasis build_basis(double hbar, int n_modes) {
  if (n_modes < 2) throw std::invalid_argument("build_basis: n_modes must be >= 2");
  if (!(hbar > 0.0)) throw std::invalid_argument("build_basis: hbar must be positive");
  FockBasis b;
  b.hbar = hbar;
  b.n_modes = n_modes;
  b.lower = Mat::Zero(n_modes, n_modes);
  for (int k = 1; k < n_modes; ++k) b.lower(k - 1, k) = std::sqrt(double(k));
  b.raise = b.lower.adjoint();
  double s = std::sqrt(hbar / 2.0);
  b.pos_op = s * (b.lower + b.raise);
  b.mom_op = Cd(0.0, 1.0) * s * (b.raise - b.lower);
  return b;
}

StateVector StateVector::normalized() const {
  StateVector out = *this;
  double n = coeffs.norm();
  if (n > 0) out.coeffs /= n;
  return out;
}

StateVector coherent_vector(const FockBasis& basis, double q, double p) {
  Cd alpha = Cd(q, p) / std::sqrt(2.0 * basis.hbar);
  StateVector s;
  s.basis = &basis;
  s.coeffs = Vec(basis.n_modes);
  // log-scaled recurrence keeps k! under control
  Cd c = std::exp(-0.5 * std::norm(alpha));
  for (int k = 0; k < basis.n_modes; ++k) {
    s.coeffs(k) = c;
    c *= alpha / std::sqrt(double(k + 1));
  }
  s.truncation_deficit = std::max(0.0, 1.0 - s.coeffs.squaredNorm());
  return s;
}

Cd coherent_overlap(double hbar, double q, double p, double q2, double p2) {
  double dq = q - q2, dp = p - p2;
  double mag = std::exp(-(dq * dq + dp * dp) / (4.0 * hbar));
  double phase = -(p * q2 - q * p2) / (2.0 * hbar);
  return mag * std::exp(Cd(0.0, phase));
}

Cd coherent_wavefunction(double hbar, double q, double p, double x) {
  double norm = std::pow(kPi * hbar, -0.25);
  double gauss = std::exp(-(x - q) * (x - q) / (2.0 * hbar));
  double phase = p * (x - 0.5 * q) / hbar;
  return norm * gauss * std::exp(Cd(0.0, phase));
}

PositionGrid hermite_grid(const FockBasis& basis, int m_points, double extent) {
  int n = basis.n_modes;
  double hb = basis.hbar;
  // classical turning point of the top mode and its Nyquist wavelength
  double reach = 2.0 * std::sqrt(2.0 * hb * n);
  double max_dx = kPi * std::sqrt(hb / (2.0 * n));
  double dx = extent / m_points;
  if (extent < reach)
    throw std::invalid_argument("hermite_grid: extent too small to hold mode n-1");
  if (dx > max_dx)
    throw std::invalid_argument("hermite_grid: spacing too coarse for mode n-1");

  PositionGrid g;
  g.m_points = m_points;
  g.extent = extent;
  g.dx = dx;
  g.points = RVec(m_points);
  for (int i = 0; i < m_points; ++i) g.points(i) = -extent / 2.0 + i * dx;

  g.fock_to_grid = RMat(m_points, n);
  double sq = std::sqrt(dx);
  for (int i = 0; i < m_points; ++i) {
    double u = g.points(i) / std::sqrt(hb);
    double phi0 = std::pow(kPi * hb, -0.25) * std::exp(-0.5 * u * u);
    double prev = 0.0, cur = phi0;
    for (int k = 0; k < n; ++k) {
      g.fock_to_grid(i, k) = cur * sq;
      double next = (std::sqrt(2.0) * u * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1));
      prev = cur;
      cur = next;
    }
  }
  return g;
}

PositionGrid default_grid(const FockBasis& basis, int m_points) {
  double extent = 8.0 * std::sqrt(basis.hbar * basis.n_modes);
  return hermite_grid(basis, m_points, extent);
}

Vec fock_to_position(const FockBasis&, const Vec& coeffs, const PositionGrid& grid) {
  return (grid.fock_to_grid.cast<Cd>() * coeffs) / std::sqrt(grid.dx);
}

Vec fock_to_position(const StateVector& state, const PositionGrid& grid) {
  return fock_to_position(*state.basis, state.coeffs, grid);
}

Vec position_to_fock(const FockBasis&, const Vec& samples, const PositionGrid& grid) {
  return grid.fock_to_grid.transpose().cast<Cd>() * samples * std::sqrt(grid.dx);
}

Mat fock_to_position_kernel(const FockBasis&, const Mat& op, const PositionGrid& grid) {
  Mat f = grid.fock_to_grid.cast<Cd>();
  return f * op * f.adjoint() / grid.dx;
}

Mat position_to_fock_kernel(const FockBasis&, const Mat& kernel, const PositionGrid& grid) {
  Mat f = grid.fock_to_grid.cast<Cd>();
  return f.adjoint() * kernel * f * grid.dx;
}

}  // namespace qot
