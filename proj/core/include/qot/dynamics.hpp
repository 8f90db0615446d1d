#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "qot/pseudometric.hpp"

namespace qot {

// Potential menu satisfying the propagation-theorem hypotheses with known
// constants: harmonic 0.5 w^2 x^2 and bounded cosine v0 cos(k x).
struct PotentialSpec {
  enum class Kind { zero, harmonic, cosine, tabulated };
  Kind kind = Kind::zero;
  double omega = 1.0;
  double v0 = 0.0;
  double wavenumber = 1.0;
  std::function<double(double)> v_fn;
  std::function<double(double)> dv_fn;
  double tab_lip = 0.0;
  double tab_lower = 0.0;

  double v(double x) const;
  double dv(double x) const;
  double lip_grad() const;      // Lip(grad V)
  double lower_bound() const;   // -M with V >= -M
  double grad_at_origin() const;
  // max(1, |grad V(0)|, ||V''||_inf), the splitting-scheme constant
  double lambda_const() const;
};

PotentialSpec harmonic_potential(double omega);
PotentialSpec cosine_potential(double v0, double k);
PotentialSpec zero_potential();

struct FlowState {
  std::vector<PhasePoint> particles;
  std::vector<double> weights;
  double time = 0.0;

  PhaseMeasure as_measure() const;
};

FlowState flow_from_measure(const PhaseMeasure& m);

// Stoermer-Verlet trajectories for H = |p|^2/2 + V.
FlowState classical_flow(const PotentialSpec& v, const FlowState& state, double t, double dt);
// Exact composition drift-then-kick per step (Lie-Trotter for Liouville).
FlowState lie_trotter_classical(const FlowState& state, const PotentialSpec& v, double dt,
                                int n_steps);
double hamiltonian_energy(const PotentialSpec& v, const PhasePoint& z);

// Split-step spectral propagator on a position grid (m = 1).
class SplitStep {
 public:
  SplitStep(const FockBasis& basis, const PositionGrid& grid, const PotentialSpec& v);
  ~SplitStep();
  SplitStep(const SplitStep&) = delete;
  SplitStep& operator=(const SplitStep&) = delete;

  // wave functions
  void lie_step(Vec& psi, double dt) const;     // full kinetic then full potential
  void strang_step(Vec& psi, double dt) const;  // half kinetic, potential, half kinetic
  void evolve_strang(Vec& psi, double t, double dt_ref) const;

  // density kernels r(x,x') (conjugation on both sides)
  void lie_step(Mat& kernel, double dt) const;
  void strang_step(Mat& kernel, double dt) const;
  void evolve_strang(Mat& kernel, double t, double dt_ref) const;

  const PositionGrid& grid() const { return grid_; }
  double hbar() const { return hbar_; }

  void kinetic(Vec& psi, double dt) const;
  void potential(Vec& psi, double dt) const;

 private:
  struct Fft;
  std::unique_ptr<Fft> fft_;
  PositionGrid grid_;
  double hbar_;
  RVec v_samples_;
  RVec k_values_;
};

// Reference propagator: Strang split-step at a fine internal step.
// Preserves trace, Hermiticity and the spectrum to machine precision.
DensityOperator evolve_von_neumann(const FockBasis& basis, const DensityOperator& r,
                                   const PotentialSpec& v, double t, const PositionGrid& grid,
                                   double dt_ref);

// The Lie-Trotter scheme under study, n_steps of size dt.
DensityOperator lie_trotter_quantum(const FockBasis& basis, const DensityOperator& r,
                                    const PotentialSpec& v, double dt, int n_steps,
                                    const PositionGrid& grid);

// Husimi transform of a weighted family of grid wave functions.
PhaseFunction husimi_from_grid(const FockBasis& basis, const PositionGrid& grid,
                               const std::vector<Vec>& psis, const std::vector<double>& weights,
                               const PhaseGrid& phase_grid);

struct PropagationAuditRow {
  double time = 0.0;
  double dd_lambda = 0.0;  // d_lambda at this time
  double bound = 0.0;      // d_lambda(0) * exp(L t)
  bool holds = false;
};

struct PropagationAudit {
  double l_const = 0.0;
  double dd0 = 0.0;
  std::vector<PropagationAuditRow> rows;
  bool pass = false;
};

// Theorem-6 check, quantum-quantum variant: two initial states evolved by the
// same potential; d_lambda(t) <= d_lambda(0) e^{L t} (1 + tol).
PropagationAudit propagation_audit_qq(const FockBasis& basis, const DensityOperator& r1,
                                      const DensityOperator& r2, const PotentialSpec& v,
                                      double lambda, const std::vector<double>& times,
                                      const PositionGrid& grid, double dt_ref,
                                      double rel_tol = 1e-3, const SolverOptions& opt = {});

// Classical-quantum variant: f^in pushed by the classical flow against the
// quantum evolution of r.
PropagationAudit propagation_audit_cq(const FockBasis& basis, const PhaseMeasure& f_in,
                                      const DensityOperator& r, const PotentialSpec& v,
                                      double lambda, const std::vector<double>& times,
                                      const PositionGrid& grid, double dt_ref,
                                      double rel_tol = 1e-3, const SolverOptions& opt = {});

struct StudyRow {
  double hbar = 0.0;
  double dt = 0.0;
  double time = 0.0;
  std::string metric;
  double value = 0.0;
};

// Uniform-in-hbar splitting study: for each (hbar, dt) evolve T[f_in] by the
// Lie-Trotter scheme and by the reference propagator, and record the
// W2 distance of the Husimi transforms plus the trace-norm error.
std::vector<StudyRow> splitting_uniformity_study(const PhaseMeasure& f_in, const PotentialSpec& v,
                                                 const std::vector<double>& hbars,
                                                 const std::vector<double>& dts, double t_final,
                                                 int grid_points = 512);

struct ObservationSpec {
  double k_qmin = 0.0, k_qmax = 0.0, k_pmin = 0.0, k_pmax = 0.0;  // compact rectangle K
  std::vector<std::pair<double, double>> omega;                   // open set: interval union
  double widen_delta = 0.0;                                       // delta
  double horizon = 1.0;                                           // T
  int k_grid = 64;
  double dt_obs = 1e-3;

  bool in_omega(double x) const;
  bool in_omega_widened(double x) const;
};

struct ObservationConstant {
  double value = 0.0;              // C[K, Omega, T]
  double refinement_delta = 0.0;   // change against the half-resolution grid
  bool gc_holds = false;           // value > 0
};

ObservationConstant observation_constant(const ObservationSpec& spec, const PotentialSpec& v);

struct ObservationAudit {
  double lhs = 0.0;          // integral of trace(1_{Omega_delta} R(t))
  double rhs = 0.0;          // C[K,Omega,T] - penalty
  double c_const = 0.0;
  double penalty = 0.0;
  double best_lambda = 0.0;
  double dd_lambda = 0.0;    // d_lambda(f_in, R_in) at the chosen lambda
  bool vacuous = false;      // rhs <= 0
  bool holds = false;        // lhs >= rhs - tol, asserted when nonvacuous
};

// Theorem-15 pipeline for a Toeplitz initial state with symbol mu supported
// in K; lambda is optimized over the supplied list.
ObservationAudit observation_audit(const FockBasis& basis, const PhaseMeasure& mu,
                                   const ObservationSpec& spec, const PotentialSpec& v,
                                   const std::vector<double>& lambdas, const PositionGrid& grid,
                                   double dt_ref, int snapshots = 200);

// Quantum heat semigroup: Strang composition of the exactly solvable
// position- and momentum-kernel factors.
Mat quantum_heat_kernel_step(const Mat& kernel, const PositionGrid& grid, double hbar, double t,
                             int n_steps);
DensityOperator quantum_heat_evolve(const FockBasis& basis, const DensityOperator& r, double t,
                                    const PositionGrid& grid, int n_steps = 64);

struct HeatContractionRow {
  double time = 0.0;
  double dd = 0.0;
};

struct HeatContractionAudit {
  std::vector<HeatContractionRow> rows;
  double tolerance = 0.0;
  bool monotone = false;
};

HeatContractionAudit heat_contraction_audit(const FockBasis& basis, const DensityOperator& r1,
                                            const DensityOperator& r2,
                                            const std::vector<double>& times,
                                            const PositionGrid& grid,
                                            const SolverOptions& opt = {});

void write_study_csv(const std::vector<StudyRow>& rows, const std::string& path);

}  // namespace qot
