#pragma once

#include <vector>

#include "qot/density.hpp"
#include "qot/fock.hpp"

namespace qot {

struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

inline double sq_dist(const PhasePoint& a, const PhasePoint& b) {
  double dq = a.q - b.q, dp = a.p - b.p;
  return dq * dq + dp * dp;
}

// Weighted point cloud on phase space R^2 (d=1 numerics).
struct PhaseMeasure {
  std::vector<PhasePoint> points;
  std::vector<double> weights;

  int size() const { return int(points.size()); }
  double total_mass() const;
  double second_moment() const;
  PhasePoint mean() const;
  void validate() const;  // weights >= 0, sum to 1
};

PhaseMeasure point_mass(double q, double p);
PhaseMeasure two_point(double q1, double p1, double w1, double q2, double p2, double w2);

// Uniform rectangular phase grid with values; Riemann weight dq*dp.
struct PhaseGrid {
  RVec qs;
  RVec ps;
  double dq = 0.0;
  double dp = 0.0;
};

PhaseGrid make_phase_grid(double q_center, double p_center, double half_width, int points_per_axis);
PhaseGrid default_phase_grid(const FockBasis& basis, double max_support_radius = 0.0,
                             int points_per_axis = 128);

struct PhaseFunction {
  PhaseGrid grid;
  RMat values;  // values(i,j) at (qs(i), ps(j))

  double riemann_sum() const { return values.sum() * grid.dq * grid.dp; }
};

// Toeplitz quantization of a discrete measure: sum of weighted coherent
// projectors (each coherent vector renormalized after truncation).
// Warns through the returned deficit when a support point is unreliable.
struct ToeplitzResult {
  DensityOperator op;
  double max_point_deficit = 0.0;
};

ToeplitzResult toeplitz(const FockBasis& basis, const PhaseMeasure& m);
DensityOperator toeplitz_op(const FockBasis& basis, const PhaseMeasure& m);

// Husimi transform H[R](q,p) = <q,p|R|q,p> / (2 pi hbar) on a grid.
PhaseFunction husimi(const FockBasis& basis, const DensityOperator& r, const PhaseGrid& grid);
double husimi_at(const FockBasis& basis, const DensityOperator& r, double q, double p);

// Wigner transform on a grid, evaluated from the position kernel of R via
// direct Hermite evaluation in the rotated coordinates and a DFT in the
// offset variable. The p-axis of the output is the DFT frequency axis.
PhaseFunction wigner(const FockBasis& basis, const DensityOperator& r, const PhaseGrid& grid);
double wigner_at(const FockBasis& basis, const DensityOperator& r, double q, double p);

// Heat semigroup e^{t Laplacian} acting on grid values (Fourier space,
// periodic padding of at least four standard deviations).
PhaseFunction heat_smooth(const PhaseFunction& f, double t);

// Collapse a nonnegative grid function to a weighted point cloud by
// mass-weighted centroid binning; returns the within-cell dispersion
// sqrt(sum_i m_i var_i) as a W2-style aggregation slack.
struct AggregatedMeasure {
  PhaseMeasure measure;
  double dropped_mass = 0.0;
  double dispersion_slack = 0.0;
};

AggregatedMeasure aggregate_to_measure(const PhaseFunction& f, int max_cells_per_axis,
                                       double mass_cutoff = 1e-12);

void write_phase_function_csv(const PhaseFunction& f, const std::string& path);

}  // namespace qot
