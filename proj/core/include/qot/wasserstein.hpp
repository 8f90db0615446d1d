#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qot/linalg.hpp"
#include "qot/quantize.hpp"

namespace qot {

struct TransportPlan {
  struct Entry {
    int i = 0;
    int j = 0;
    double mass = 0.0;
  };
  std::vector<Entry> entries;
  double cost = 0.0;  // sum pi_ij |z_i - w_j|^2

  // row/column sums for feasibility checks
  std::vector<double> row_sums(int m) const;
  std::vector<double> col_sums(int n) const;
};

struct W2Result {
  double w2 = 0.0;  // the distance, sqrt of the optimal cost
  TransportPlan plan;
};

// Exact solution of the discrete transportation problem with squared
// Euclidean cost (network simplex on the bipartite graph, Bland's rule).
W2Result w2_discrete(const PhaseMeasure& mu, const PhaseMeasure& nu);

// Monotone-rearrangement cost for 1-d weighted supports.
double w2_1d_quantile(const std::vector<double>& xs, const std::vector<double>& wxs,
                      const std::vector<double>& ys, const std::vector<double>& wys);
double w2_1d_quantile(const std::vector<double>& xs, const std::vector<double>& ys);

// Gaussian closed form: W2^2 = |m1-m2|^2 + tr(A1 + A2 - 2 (sqrt(A1) A2 sqrt(A1))^{1/2}).
double w2_gaussian(const RVec& m1, const RMat& a1, const RVec& m2, const RMat& a2);

struct CycleReport {
  bool pass = true;
  double worst_violation = 0.0;
  std::vector<int> cycle;  // support-pair indices of the worst cycle, length 2 or 3
};

// Check 2- and 3-cycles of the plan's support pairs for cost-decreasing swaps.
CycleReport verify_cyclical_monotonicity(const PhaseMeasure& mu, const PhaseMeasure& nu,
                                         const TransportPlan& plan, double tol = 1e-9);

void write_plan_csv(const TransportPlan& plan, const std::string& path);

}  // namespace qot
