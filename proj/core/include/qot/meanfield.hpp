#pragma once

#include "qot/dynamics.hpp"

namespace qot {

// Small-N mean-field laboratory: Hartree flow, exhaustive 2-particle
// von Neumann evolution of Toeplitz product data, Vlasov particles, and the
// mean-field error-bound audit on first marginals.
struct MeanFieldConfig {
  PhaseMeasure f_in;
  PotentialSpec interaction;  // even, bounded below, C^{1,1}
  double hbar = 0.25;
  int grid_points = 128;
  double grid_extent = 0.0;  // 0: automatic
  double dt = 1e-3;
  int fock_modes = 12;  // marginals projected here before the SDP
};

struct HartreeState {
  std::vector<Vec> components;  // eigencomponents sharing the mean-field potential
  std::vector<double> weights;
  double time = 0.0;
  double potential_drift = 0.0;  // max per-step change of the frozen potential
};

class HartreeEvolver {
 public:
  HartreeEvolver(const MeanFieldConfig& cfg, const FockBasis& basis, const PositionGrid& grid);
  ~HartreeEvolver();
  HartreeEvolver(const HartreeEvolver&) = delete;
  HartreeEvolver& operator=(const HartreeEvolver&) = delete;

  HartreeState initial_state() const;  // eigencomponents of T[f_in]
  void step(HartreeState& s) const;    // one Strang step with frozen potential
  void evolve(HartreeState& s, double t) const;

  RVec density(const HartreeState& s) const;             // rho(x) on the grid
  RVec mean_field_potential(const RVec& density) const;  // V * rho
  Mat kernel(const HartreeState& s) const;
  DensityOperator to_fock(const HartreeState& s) const;
  double hartree_energy(const HartreeState& s) const;  // kinetic + half interaction

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Exhaustive coherent-ensemble 2-particle evolution of T[(f_in)^(x)2].
struct NBodyState {
  std::vector<Mat> wavefunctions;  // Psi(x1, x2) per ensemble member
  std::vector<double> weights;
  double time = 0.0;
};

class NBodyEvolver {
 public:
  NBodyEvolver(const MeanFieldConfig& cfg, const FockBasis& basis, const PositionGrid& grid);
  ~NBodyEvolver();
  NBodyEvolver(const NBodyEvolver&) = delete;
  NBodyEvolver& operator=(const NBodyEvolver&) = delete;

  NBodyState initial_state() const;
  void evolve(NBodyState& s, double t) const;

  Mat marginal_kernel(const NBodyState& s) const;  // first-marginal r1(x,x')
  DensityOperator marginal_to_fock(const NBodyState& s) const;
  // Fock projection of the full two-particle operator (factor_dims {n,n}).
  DensityOperator two_particle_to_fock(const NBodyState& s, int n_modes) const;
  double swap_symmetry_defect(const NBodyState& s) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Self-consistent particle dynamics; total momentum conserved for even V.
FlowState vlasov_particles(const PhaseMeasure& f_in, const PotentialSpec& v, double t, double dt);
double total_momentum(const FlowState& s);

struct MeanFieldBoundRow {
  double time = 0.0;
  double lhs_quantum = 0.0;   // d(R_hartree(t), R_{N:1}(t))^2
  double rhs_quantum = 0.0;   // 2 d hbar e^{Lt} + 8 |grad V|_inf/(N-1) (e^{Lt}-1)/L
  double lhs_classical = 0.0; // d(f_vlasov(t), R_{N:1}(t))^2
  double rhs_classical = 0.0; // d hbar e^{Lt} + same tail
  double tolerance = 0.0;
  bool holds = false;
};

struct MeanFieldAudit {
  double l_const = 0.0;     // 2 (1 + 4 Lip(grad V)^2)
  double grad_inf = 0.0;    // ||grad V||_inf
  std::vector<MeanFieldBoundRow> rows;
  double projection_defect = 0.0;
  bool pass = false;
};

MeanFieldAudit meanfield_bound_audit(const MeanFieldConfig& cfg, const std::vector<double>& times,
                                     const SolverOptions& opt = {});

double meanfield_l_const(const PotentialSpec& v);
double grad_sup_norm(const PotentialSpec& v);
double meanfield_rhs(double dh_scale, double l_const, double grad_inf, int n_particles, double t);

}  // namespace qot
