#pragma once

#include <string>
#include <vector>

#include "qot/fock.hpp"
#include "qot/linalg.hpp"

namespace qot {

// Hermitian, PSD, unit-trace matrix on a (possibly tensor-product) truncated
// Fock space. factor_dims lists the per-factor sizes; their product is the
// matrix side.
struct DensityOperator {
  Mat matrix;
  std::vector<int> factor_dims;
  double hbar = 1.0;
  double trace_tol = 1e-9;

  int dim() const { return int(matrix.rows()); }
  int n_factors() const { return int(factor_dims.size()); }
};

DensityOperator make_density(const FockBasis& basis, Mat m, double trace_tol = 1e-9);
DensityOperator pure_state(const StateVector& s);
DensityOperator maximally_mixed(const FockBasis& basis, int n_levels);

struct DensityDiagnostics {
  double hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
  double trace_defect = 0.0;
  bool pass = false;
  std::string failure;  // which invariant broke, empty on pass
};

DensityDiagnostics validate(const DensityOperator& r);

// Clip tiny negative eigenvalues and rescale the trace to one.
DensityOperator clip_to_density(const DensityOperator& r);

struct OperatorNormReport {
  double trace_norm = 0.0;  // ||.||_1
  double hs_norm = 0.0;     // ||.||_2
  double op_norm = 0.0;     // ||.||
};

OperatorNormReport norms(const Mat& a);

DensityOperator tensor(const DensityOperator& r, const DensityOperator& s);

// Partial trace keeping the factors listed in `keep` (0-based, ascending order
// of the kept subsystems in the output).
DensityOperator partial_trace(const DensityOperator& t, const std::vector<int>& keep);
Mat partial_trace(const Mat& t, const std::vector<int>& dims, const std::vector<int>& keep);

// k-th marginal of a (symmetric) N-particle density: keep the first k factors.
DensityOperator marginal_k(const DensityOperator& r_n, int k);

// trace(R (x^2 + p^2)) per tensor factor, summed; >= d hbar for valid densities.
double energy(const FockBasis& basis, const DensityOperator& r);

double rank_estimate_tol(const DensityOperator& r, double tol = 1e-9);
bool is_rank_one(const DensityOperator& r, double tol = 1e-9);
// Dominant eigenvector of a (near-)rank-1 density.
Vec principal_vector(const DensityOperator& r);

}  // namespace qot
