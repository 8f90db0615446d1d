#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qot/density.hpp"
#include "qot/fock.hpp"
#include "qot/quantize.hpp"
#include "qot/wasserstein.hpp"

namespace qot {

// Quantum-to-quantum transport cost lambda^2 (x (x) I - I (x) x)^2 + (p (x) I - I (x) p)^2,
// one copy per particle for multi-factor states. Bounded below by
// 2 lambda d hbar up to the truncation slack reported alongside.
struct CostQQ {
  double lambda = 1.0;
  double hbar = 1.0;
  int n_particles = 1;
  Mat matrix;
  double floor = 0.0;        // 2 lambda d hbar per particle
  double trunc_slack = 0.0;  // max(0, floor - min eig of the truncated matrix)
};

CostQQ cost_qq(const FockBasis& basis, double lambda = 1.0, int n_particles = 1);

// Classical-to-quantum cost lambda^2 |z_q - x|^2 + |z_p - p|^2 at a phase point.
Mat cost_cq(const FockBasis& basis, PhasePoint z, double lambda = 1.0);
double cost_cq_floor(const FockBasis& basis, double lambda = 1.0);
double cost_cq_trunc_slack(const FockBasis& basis, PhasePoint z, double lambda = 1.0);

struct SolverOptions {
  double tol = 1e-6;  // primal/dual residual and relative-gap targets
  long max_iterations = 50000;
  double rho0 = 0.0;  // 0: scale-based default
  int check_every = 10;
  bool trace = false;
  std::string trace_path;
};

struct DualCertificateQQ {
  Mat a;  // potential paired with R
  Mat b;  // potential paired with S
  double margin = 0.0;  // min eig of C - A(x)I - I(x)B
  double value = 0.0;   // trace(A R + B S)
};

struct DualCertificateCQ {
  std::vector<double> a;
  Mat b;
  double min_margin = 0.0;  // min over points of min eig(c(z_i) - a_i I - B)
  double value = 0.0;       // sum a_i f_i + trace(B R)
};

struct TransportResult {
  double value = 0.0;  // primal d^2 at the PSD iterate
  double dual_value = 0.0;
  double gap = 0.0;  // |primal - dual| / max(1, |primal|)
  long iterations = 0;
  bool converged = false;
  double floor = 0.0;
  double trunc_slack = 0.0;
  Mat coupling;             // QQ
  std::vector<Mat> blocks;  // CQ
  std::optional<DualCertificateQQ> dual_qq;
  std::optional<DualCertificateCQ> dual_cq;
  std::vector<std::array<double, 4>> history;  // iter, primal res, dual res, gap

  double distance() const;
};

// d_lambda(R,S)^2 by operator-splitting over the coupling SDP.
TransportResult dd_qq(const FockBasis& basis, const DensityOperator& r, const DensityOperator& s,
                      double lambda = 1.0, const SolverOptions& opt = {});

// d_lambda(f,R)^2, block SDP over the discrete support of f.
TransportResult dd_cq(const FockBasis& basis, const PhaseMeasure& f, const DensityOperator& r,
                      double lambda = 1.0, const SolverOptions& opt = {});

// Closed forms through the unique coupling when one side has rank one.
double dd_rank1_qq(const FockBasis& basis, const DensityOperator& r, const DensityOperator& s,
                   double lambda = 1.0, double rank_tol = 1e-9);
double dd_rank1_cq(const FockBasis& basis, const PhaseMeasure& f, const DensityOperator& r,
                   double lambda = 1.0, double rank_tol = 1e-9);

// Lifted classical plan sum_ij pi_ij |z_i><z_i| (x) |w_j><w_j|: a feasible
// QQ coupling between the Toeplitz quantizations of the plan's marginals.
struct LiftedPlan {
  Mat coupling;
  double objective = 0.0;
};
LiftedPlan toeplitz_lifted_plan(const FockBasis& basis, const PhaseMeasure& mu,
                                const PhaseMeasure& nu, const TransportPlan& plan,
                                double lambda = 1.0);

// Either a phase-space measure or a density operator; the pseudometric is
// defined across the union.
using Dens = std::variant<PhaseMeasure, DensityOperator>;

struct PairwiseDistance {
  double value_sq = 0.0;
  double gap = 0.0;
  bool exact = false;  // closed form (W2 LP or rank-1), no solver gap
};

PairwiseDistance pseudo_distance_sq(const FockBasis& basis, const Dens& a, const Dens& b,
                                    double lambda = 1.0, const SolverOptions& opt = {});

enum class TriangleKind { restricted_classical_middle, restricted_rank1, generalized };

struct TriangleAudit {
  TriangleKind kind = TriangleKind::generalized;
  double d12 = 0.0, d23 = 0.0, d13 = 0.0;
  double tolerance = 0.0;
  bool restricted_holds = false;   // d13 <= d12 + d23 (+tol), asserted when applicable
  bool generalized_holds = false;  // d13 <= d12 + d23 + sqrt(d hbar) (+tol)
  bool sharpened_holds = false;    // d13 <= sqrt(d12^2+d hbar) + sqrt(d23^2+d hbar) (+tol)
  bool pass = false;               // the inequality proven for this kind holds
};

TriangleAudit triangle_audit(const FockBasis& basis, const Dens& r1, const Dens& r2, const Dens& r3,
                             const SolverOptions& opt = {});

struct HusimiComparison {
  double w2_sq = 0.0;       // measured on aggregated Husimi clouds
  double dd_sq = 0.0;
  double bound = 0.0;       // dd_sq + 2 d hbar (QQ) or + d hbar (CQ)
  double slack = 0.0;       // aggregation + solver allowance
  bool holds = false;       // w2_sq <= bound + slack
};

HusimiComparison husimi_comparison_qq(const FockBasis& basis, const DensityOperator& r,
                                      const DensityOperator& s, const SolverOptions& opt = {});
HusimiComparison husimi_comparison_cq(const FockBasis& basis, const PhaseMeasure& f,
                                      const DensityOperator& r, const SolverOptions& opt = {});

struct Lemma26Check {
  double dd_qq_sq = 0.0;
  double dd_cq_sq = 0.0;  // d(Husimi[S] as measure, R)^2
  double slack = 0.0;
  bool holds = false;  // dd_qq_sq >= dd_cq_sq - d hbar - slack
};

Lemma26Check lemma26_check(const FockBasis& basis, const DensityOperator& r,
                           const DensityOperator& s, const SolverOptions& opt = {});

}  // namespace qot
