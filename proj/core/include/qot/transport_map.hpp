#pragma once

#include "qot/pseudometric.hpp"

namespace qot {

// Deformed Toeplitz quantization built from the ground states of
// c(z) - B_tilde: the map z -> f(z) |psi_z><psi_z| is an optimal coupling
// between f and sum_z f(z)|psi_z><psi_z|, with dual pair (a_tilde, B_tilde).
struct GroundStateTransport {
  std::vector<PhasePoint> zs;   // serpentine evaluation order
  std::vector<double> a_tilde;  // min spec(c(z) - B_tilde)
  std::vector<Vec> psis;        // phase-continuous ground states
  DensityOperator deformed_op;  // sum f_i |psi_i><psi_i|
  double primal_value = 0.0;    // sum f_i <psi_i| c(z_i) |psi_i>
  double dual_value = 0.0;      // sum a_tilde_i f_i + trace(B_tilde R)
  double min_gap = 0.0;         // smallest spectral gap above the ground state
};

GroundStateTransport ground_state_transport(const FockBasis& basis, const Mat& b_tilde,
                                            const PhaseMeasure& f);

// Evaluate a_tilde, psi_z on an arbitrary list of points (phase-continuous
// in the given order). Throws when a ground state is degenerate.
struct GroundFamily {
  std::vector<double> a_tilde;
  std::vector<Vec> psis;
  double min_gap = 0.0;
};
GroundFamily ground_family(const FockBasis& basis, const Mat& b_tilde,
                           const std::vector<PhasePoint>& zs, double degeneracy_gap = 1e-8);

struct LegendreGradientReport {
  double max_gradient_mismatch = 0.0;   // |grad a(z) - <psi_z|Z|psi_z>|, central differences
  double max_legendre_violation = 0.0;  // max over probes of (z.<Z> - <B>) - a(z)
  double max_attainment_error = 0.0;    // |B^L at psi_z - a(z)|
  double max_inverse_identity_error = 0.0;  // quantum-derivative identity for (x, xi)
  bool pass = false;
};

// Checks on a square z-grid of side `axis_points` and spacing h centered at
// the origin: grad a = <psi_z|Z|psi_z> against finite differences, the
// Legendre-dual inequality/attainment for B = (|Z|^2 - B_tilde)/2, and the
// inverse identity x_j = <psi_z| (i/hbar)[p, B] |psi_z>.
LegendreGradientReport legendre_gradient_check(const FockBasis& basis, const Mat& b_tilde,
                                               double half_width, int axis_points, double fd_step,
                                               std::uint64_t seed = 7, double grad_tol = 1e-3,
                                               double legendre_tol = 1e-8,
                                               double inverse_tol = 1e-6);

}  // namespace qot
