#pragma once

#include "qot/linalg.hpp"

namespace qot {

// Truncated harmonic-oscillator (Fock/Hermite) basis with ladder, position
// and momentum matrices. The space dimension is fixed to 1 in the operator
// numerics; d only enters closed-form expressions symbolically.
struct FockBasis {
  double hbar = 1.0;
  int dim_space = 1;
  int n_modes = 0;
  Mat lower;     // a
  Mat raise;     // a^dagger
  Mat pos_op;    // sqrt(hbar/2) (a + a^dagger)
  Mat mom_op;    // i sqrt(hbar/2) (a^dagger - a)

  Mat number() const { return raise * lower; }
  // x^2 + p^2, the harmonic-oscillator energy observable of the basis.
  Mat oscillator() const { return pos_op * pos_op + mom_op * mom_op; }
};

FockBasis build_basis(double hbar, int n_modes);

struct StateVector {
  const FockBasis* basis = nullptr;
  Vec coeffs;
  // Mass lost to truncation: 1 - |coeffs|^2 for states normalized before
  // projecting onto the first n_modes modes.
  double truncation_deficit = 0.0;

  StateVector normalized() const;
};

// Truncated Schroedinger coherent state |q,p>: coeffs_k = e^{-|A|^2/2} A^k/sqrt(k!)
// with A = (q+ip)/sqrt(2 hbar). The global phase is the one generated by the
// Gaussian wave packet itself; see coherent_overlap for the overlap law.
StateVector coherent_vector(const FockBasis& basis, double q, double p);

// Closed-form overlap <q,p|q',p'> = e^{-|dz|^2/(4 hbar)} e^{-i(p q' - q p')/(2 hbar)}.
Cd coherent_overlap(double hbar, double q, double p, double q2, double p2);

// Wave function of |q,p> at position x (d=1).
Cd coherent_wavefunction(double hbar, double q, double p, double x);

struct PositionGrid {
  int m_points = 0;
  double extent = 0.0;  // grid covers [-L/2, L/2)
  RVec points;
  double dx = 0.0;
  // m x n matrix of Hermite-function values times sqrt(dx); columns
  // orthonormal under the plain dot product when the grid resolves mode n-1.
  RMat fock_to_grid;
};

// Uniform grid on [-L/2, L/2) carrying the basis's Hermite functions,
// evaluated by the stable normalized three-term recurrence.
// Rejects grids that under-resolve mode n_modes-1.
PositionGrid hermite_grid(const FockBasis& basis, int m_points, double extent);

PositionGrid default_grid(const FockBasis& basis, int m_points = 256);

// Fock coefficients -> samples of the wave function on the grid (no dx weight).
Vec fock_to_position(const StateVector& state, const PositionGrid& grid);
Vec fock_to_position(const FockBasis& basis, const Vec& coeffs, const PositionGrid& grid);
// Quadrature projection of grid samples back onto Fock coefficients.
Vec position_to_fock(const FockBasis& basis, const Vec& samples, const PositionGrid& grid);

// Same maps for operators: Fock matrix <-> position kernel r(x,x').
Mat fock_to_position_kernel(const FockBasis& basis, const Mat& op, const PositionGrid& grid);
Mat position_to_fock_kernel(const FockBasis& basis, const Mat& kernel, const PositionGrid& grid);

}  // namespace qot
