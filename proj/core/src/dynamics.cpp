#include "qot/dynamics.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qot {

double PotentialSpec::v(double x) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::harmonic: return 0.5 * omega * omega * x * x;
    case Kind::cosine: return v0 * std::cos(wavenumber * x);
    case Kind::tabulated: return v_fn(x);
  }
  return 0.0;
}

double PotentialSpec::dv(double x) const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::harmonic: return omega * omega * x;
    case Kind::cosine: return -v0 * wavenumber * std::sin(wavenumber * x);
    case Kind::tabulated: return dv_fn(x);
  }
  return 0.0;
}

double PotentialSpec::lip_grad() const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::harmonic: return omega * omega;
    case Kind::cosine: return std::abs(v0) * wavenumber * wavenumber;
    case Kind::tabulated: return tab_lip;
  }
  return 0.0;
}

double PotentialSpec::lower_bound() const {
  switch (kind) {
    case Kind::zero: return 0.0;
    case Kind::harmonic: return 0.0;
    case Kind::cosine: return -std::abs(v0);
    case Kind::tabulated: return tab_lower;
  }
  return 0.0;
}

double PotentialSpec::grad_at_origin() const { return std::abs(dv(0.0)); }

double PotentialSpec::lambda_const() const {
  return std::max({1.0, grad_at_origin(), lip_grad()});
}

PotentialSpec harmonic_potential(double omega) {
  PotentialSpec p;
  p.kind = PotentialSpec::Kind::harmonic;
  p.omega = omega;
  return p;
}

PotentialSpec cosine_potential(double v0, double k) {
  PotentialSpec p;
  p.kind = PotentialSpec::Kind::cosine;
  p.v0 = v0;
  p.wavenumber = k;
  return p;
}

PotentialSpec zero_potential() { return {}; }

PhaseMeasure FlowState::as_measure() const {
  PhaseMeasure m;
  m.points = particles;
  m.weights = weights;
  return m;
}

FlowState flow_from_measure(const PhaseMeasure& m) {
  FlowState s;
  s.particles = m.points;
  s.weights = m.weights;
  return s;
}

double hamiltonian_energy(const PotentialSpec& v, const PhasePoint& z) {
  return 0.5 * z.p * z.p + v.v(z.q);
}

FlowState classical_flow(const PotentialSpec& v, const FlowState& state, double t, double dt) {
  double lip = v.lip_grad();
  if (lip > 0 && dt * std::sqrt(lip) >= 0.5)
    throw std::invalid_argument("classical_flow: dt too large for Verlet stability");
  FlowState out = state;
  long n_steps = std::lround(std::abs(t) / dt);
  if (n_steps < 1) n_steps = 1;
  double h = t / double(n_steps);
  for (auto& z : out.particles) {
    double f = -v.dv(z.q);
    for (long s = 0; s < n_steps; ++s) {
      z.p += 0.5 * h * f;
      z.q += h * z.p;
      f = -v.dv(z.q);
      z.p += 0.5 * h * f;
      if (!std::isfinite(z.q) || !std::isfinite(z.p))
        throw std::runtime_error("classical_flow: trajectory blew up");
    }
  }
  out.time = state.time + t;
  return out;
}

FlowState lie_trotter_classical(const FlowState& state, const PotentialSpec& v, double dt,
                                int n_steps) {
  FlowState out = state;
  for (auto& z : out.particles) {
    for (int s = 0; s < n_steps; ++s) {
      z.q += dt * z.p;          // drift K_dt
      z.p -= dt * v.dv(z.q);    // kick P_dt
    }
  }
  out.time = state.time + dt * n_steps;
  return out;
}

struct SplitStep::Fft {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
  mutable std::vector<Cd> buf;
  int m = 0;

  explicit Fft(int m_points) : m(m_points) {
    buf.assign(m, Cd(0, 0));
    fwd = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                           FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                           FFTW_ESTIMATE);
  }
  ~Fft() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }

  void forward(Cd* data) const {
    fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
  }
  void backward_scaled(Cd* data) const {
    fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(data),
                     reinterpret_cast<fftw_complex*>(data));
    double s = 1.0 / m;
    for (int i = 0; i < m; ++i) data[i] *= s;
  }
};

SplitStep::SplitStep(const FockBasis& basis, const PositionGrid& grid, const PotentialSpec& v)
    : fft_(std::make_unique<Fft>(grid.m_points)), grid_(grid), hbar_(basis.hbar) {
  int m = grid.m_points;
  v_samples_ = RVec(m);
  for (int i = 0; i < m; ++i) v_samples_(i) = v.v(grid.points(i));
  k_values_ = RVec(m);
  for (int j = 0; j < m; ++j) {
    int jj = j <= m / 2 ? j : j - m;
    k_values_(j) = 2.0 * kPi * jj / grid.extent;
  }
}

SplitStep::~SplitStep() = default;

void SplitStep::kinetic(Vec& psi, double dt) const {
  fft_->forward(psi.data());
  for (int j = 0; j < grid_.m_points; ++j) {
    double phase = -0.5 * hbar_ * k_values_(j) * k_values_(j) * dt;
    psi(j) *= std::exp(Cd(0.0, phase));
  }
  fft_->backward_scaled(psi.data());
}

void SplitStep::potential(Vec& psi, double dt) const {
  for (int i = 0; i < grid_.m_points; ++i)
    psi(i) *= std::exp(Cd(0.0, -v_samples_(i) * dt / hbar_));
}

void SplitStep::lie_step(Vec& psi, double dt) const {
  kinetic(psi, dt);
  potential(psi, dt);
}

void SplitStep::strang_step(Vec& psi, double dt) const {
  kinetic(psi, 0.5 * dt);
  potential(psi, dt);
  kinetic(psi, 0.5 * dt);
}

void SplitStep::evolve_strang(Vec& psi, double t, double dt_ref) const {
  long n = std::lround(std::abs(t) / dt_ref);
  if (n < 1) n = 1;
  double h = t / double(n);
  for (long s = 0; s < n; ++s) strang_step(psi, h);
}

namespace {

template <typename Step>
void conjugate_kernel(Mat& kernel, Step&& apply) {
  // kernel <- U kernel U^dagger through s = U kernel; kernel = U s^dagger
  for (Eigen::Index c = 0; c < kernel.cols(); ++c) {
    Vec col = kernel.col(c);
    apply(col);
    kernel.col(c) = col;
  }
  Mat s = kernel.adjoint();
  for (Eigen::Index c = 0; c < s.cols(); ++c) {
    Vec col = s.col(c);
    apply(col);
    s.col(c) = col;
  }
  kernel = std::move(s);
}

}  // namespace

void SplitStep::lie_step(Mat& kernel, double dt) const {
  conjugate_kernel(kernel, [&](Vec& v) { kinetic(v, dt); });
  conjugate_kernel(kernel, [&](Vec& v) { potential(v, dt); });
}

void SplitStep::strang_step(Mat& kernel, double dt) const {
  conjugate_kernel(kernel, [&](Vec& v) { kinetic(v, 0.5 * dt); });
  conjugate_kernel(kernel, [&](Vec& v) { potential(v, dt); });
  conjugate_kernel(kernel, [&](Vec& v) { kinetic(v, 0.5 * dt); });
}

void SplitStep::evolve_strang(Mat& kernel, double t, double dt_ref) const {
  long n = std::lround(std::abs(t) / dt_ref);
  if (n < 1) n = 1;
  double h = t / double(n);
  for (long s = 0; s < n; ++s) strang_step(kernel, h);
}

namespace {

// Evolve the eigencomponents of a density operator by a per-vector stepper;
// rebuilding from the unchanged eigenvalues preserves the spectrum exactly.
DensityOperator evolve_components(const FockBasis& basis, const DensityOperator& r,
                                  const PositionGrid& grid,
                                  const std::function<void(Vec&)>& evolve) {
  HermitianEig eig = hermitian_eig(hermitize(r.matrix));
  Mat acc = Mat::Zero(r.dim(), r.dim());
  for (int k = 0; k < eig.values.size(); ++k) {
    double lam = eig.values(k);
    if (lam <= 1e-14) continue;
    Vec psi = fock_to_position(basis, eig.vectors.col(k), grid);
    evolve(psi);
    Vec back = position_to_fock(basis, psi, grid);
    double nb = back.norm();
    if (nb > 0) back /= nb;
    acc += lam * (back * back.adjoint());
  }
  DensityOperator out = r;
  out.matrix = std::move(acc);
  return out;
}

}  // namespace

DensityOperator evolve_von_neumann(const FockBasis& basis, const DensityOperator& r,
                                   const PotentialSpec& v, double t, const PositionGrid& grid,
                                   double dt_ref) {
  SplitStep step(basis, grid, v);
  return evolve_components(basis, r, grid, [&](Vec& psi) { step.evolve_strang(psi, t, dt_ref); });
}

DensityOperator lie_trotter_quantum(const FockBasis& basis, const DensityOperator& r,
                                    const PotentialSpec& v, double dt, int n_steps,
                                    const PositionGrid& grid) {
  SplitStep step(basis, grid, v);
  return evolve_components(basis, r, grid, [&](Vec& psi) {
    for (int s = 0; s < n_steps; ++s) step.lie_step(psi, dt);
  });
}

PhaseFunction husimi_from_grid(const FockBasis& basis, const PositionGrid& grid,
                               const std::vector<Vec>& psis, const std::vector<double>& weights,
                               const PhaseGrid& phase_grid) {
  int nq = int(phase_grid.qs.size()), np = int(phase_grid.ps.size());
  PhaseFunction f;
  f.grid = phase_grid;
  f.values = RMat::Zero(nq, np);
  int m = grid.m_points;
  Vec coh(m);
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < np; ++j) {
      double q = phase_grid.qs(i), p = phase_grid.ps(j);
      for (int g = 0; g < m; ++g)
        coh(g) = std::conj(coherent_wavefunction(basis.hbar, q, p, grid.points(g)));
      double acc = 0.0;
      for (size_t c = 0; c < psis.size(); ++c) {
        Cd ov = (coh.transpose() * psis[c])(0) * grid.dx;
        acc += weights[c] * std::norm(ov);
      }
      f.values(i, j) = acc / (2.0 * kPi * basis.hbar);
    }
  return f;
}

namespace {

double theorem6_l_const(double lambda, double lip_grad) {
  return 0.5 * (lambda + lip_grad / lambda);  // m = 1
}

}  // namespace

PropagationAudit propagation_audit_qq(const FockBasis& basis, const DensityOperator& r1,
                                      const DensityOperator& r2, const PotentialSpec& v,
                                      double lambda, const std::vector<double>& times,
                                      const PositionGrid& grid, double dt_ref, double rel_tol,
                                      const SolverOptions& opt) {
  PropagationAudit audit;
  audit.l_const = theorem6_l_const(lambda, v.lip_grad());
  PairwiseDistance d0 = pseudo_distance_sq(basis, r1, r2, lambda, opt);
  audit.dd0 = std::sqrt(std::max(0.0, d0.value_sq));
  audit.pass = true;
  for (double t : times) {
    DensityOperator a = evolve_von_neumann(basis, r1, v, t, grid, dt_ref);
    DensityOperator b = evolve_von_neumann(basis, r2, v, t, grid, dt_ref);
    PairwiseDistance dt_pair = pseudo_distance_sq(basis, clip_to_density(a), clip_to_density(b),
                                                  lambda, opt);
    PropagationAuditRow row;
    row.time = t;
    row.dd_lambda = std::sqrt(std::max(0.0, dt_pair.value_sq));
    row.bound = audit.dd0 * std::exp(audit.l_const * std::abs(t)) *
                (1.0 + rel_tol + dt_pair.gap + d0.gap);
    row.holds = row.dd_lambda <= row.bound;
    audit.pass = audit.pass && row.holds;
    audit.rows.push_back(row);
  }
  return audit;
}

PropagationAudit propagation_audit_cq(const FockBasis& basis, const PhaseMeasure& f_in,
                                      const DensityOperator& r, const PotentialSpec& v,
                                      double lambda, const std::vector<double>& times,
                                      const PositionGrid& grid, double dt_ref, double rel_tol,
                                      const SolverOptions& opt) {
  PropagationAudit audit;
  audit.l_const = theorem6_l_const(lambda, v.lip_grad());
  PairwiseDistance d0 = pseudo_distance_sq(basis, f_in, r, lambda, opt);
  audit.dd0 = std::sqrt(std::max(0.0, d0.value_sq));
  audit.pass = true;
  FlowState flow0 = flow_from_measure(f_in);
  for (double t : times) {
    FlowState ft = classical_flow(v, flow0, t, dt_ref);
    DensityOperator rt = evolve_von_neumann(basis, r, v, t, grid, dt_ref);
    PairwiseDistance dt_pair =
        pseudo_distance_sq(basis, ft.as_measure(), clip_to_density(rt), lambda, opt);
    PropagationAuditRow row;
    row.time = t;
    row.dd_lambda = std::sqrt(std::max(0.0, dt_pair.value_sq));
    row.bound = audit.dd0 * std::exp(audit.l_const * std::abs(t)) *
                (1.0 + rel_tol + dt_pair.gap + d0.gap);
    row.holds = row.dd_lambda <= row.bound;
    audit.pass = audit.pass && row.holds;
    audit.rows.push_back(row);
  }
  return audit;
}

namespace {

// trace norm of sum_i w_i (|a_i><a_i| - |b_i><b_i|) for grid vectors,
// evaluated in the small span of the components
double trace_norm_of_difference(const std::vector<Vec>& as, const std::vector<Vec>& bs,
                                const std::vector<double>& w, double dx) {
  int k = int(as.size());
  int n = 2 * k;
  Mat v(as[0].size(), n);
  for (int i = 0; i < k; ++i) v.col(i) = as[i];
  for (int i = 0; i < k; ++i) v.col(k + i) = bs[i];
  Mat gram = v.adjoint() * v * dx;
  Mat a = Mat::Zero(n, n);
  for (int i = 0; i < k; ++i) {
    a(i, i) = w[i];
    a(k + i, k + i) = -w[i];
  }
  Mat half = sqrt_psd(hermitize(gram));
  Mat small = hermitize(half * a * half);
  RVec ev = hermitian_eigenvalues(small);
  return ev.cwiseAbs().sum();
}

}  // namespace

std::vector<StudyRow> splitting_uniformity_study(const PhaseMeasure& f_in, const PotentialSpec& v,
                                                 const std::vector<double>& hbars,
                                                 const std::vector<double>& dts, double t_final,
                                                 int grid_points) {
  f_in.validate();
  std::vector<StudyRow> rows;
  double dt_min = *std::min_element(dts.begin(), dts.end());
  double dt_ref = dt_min / 32.0;

  double q_reach = 0.0, p_reach = 0.0;
  for (const auto& z : f_in.points) {
    q_reach = std::max(q_reach, std::abs(z.q));
    p_reach = std::max(p_reach, std::abs(z.p));
  }

  for (double hb : hbars) {
    FockBasis basis = build_basis(hb, 8);  // carrier for hbar in grid transforms
    double extent = 2.0 * (q_reach + (p_reach + 1.5) * t_final + 6.0 * std::sqrt(hb) + 2.0);
    PositionGrid grid;
    grid.m_points = grid_points;
    grid.extent = extent;
    grid.dx = extent / grid_points;
    grid.points = RVec(grid_points);
    for (int i = 0; i < grid_points; ++i) grid.points(i) = -extent / 2.0 + i * grid.dx;

    SplitStep step(basis, grid, v);
    int m = grid.m_points;

    auto initial = [&](int c) {
      Vec psi(m);
      for (int g = 0; g < m; ++g)
        psi(g) = coherent_wavefunction(hb, f_in.points[c].q, f_in.points[c].p, grid.points(g));
      return psi;
    };

    std::vector<Vec> ref;
    for (int c = 0; c < f_in.size(); ++c) {
      Vec psi = initial(c);
      step.evolve_strang(psi, t_final, dt_ref);
      ref.push_back(std::move(psi));
    }

    double hw = q_reach + (p_reach + 1.0) * t_final + 5.0 * std::sqrt(hb) + 1.5;
    PhaseGrid pg = make_phase_grid(0.0, 0.0, hw, 96);
    PhaseFunction h_ref = husimi_from_grid(basis, grid, ref, f_in.weights, pg);
    AggregatedMeasure m_ref = aggregate_to_measure(h_ref, 40);

    for (double dt : dts) {
      int n_steps = int(std::lround(t_final / dt));
      std::vector<Vec> trotter;
      for (int c = 0; c < f_in.size(); ++c) {
        Vec psi = initial(c);
        for (int s = 0; s < n_steps; ++s) step.lie_step(psi, dt);
        trotter.push_back(std::move(psi));
      }
      PhaseFunction h_tr = husimi_from_grid(basis, grid, trotter, f_in.weights, pg);
      AggregatedMeasure m_tr = aggregate_to_measure(h_tr, 40);
      double w2 = w2_discrete(m_tr.measure, m_ref.measure).w2;
      double tn = trace_norm_of_difference(trotter, ref, f_in.weights, grid.dx);
      rows.push_back({hb, dt, t_final, "w2_husimi", w2});
      rows.push_back({hb, dt, t_final, "trace_norm", tn});
      rows.push_back({hb, dt, t_final, "w2_slack", m_tr.dispersion_slack + m_ref.dispersion_slack});
    }
  }
  return rows;
}

bool ObservationSpec::in_omega(double x) const {
  for (const auto& iv : omega)
    if (x > iv.first && x < iv.second) return true;
  return false;
}

bool ObservationSpec::in_omega_widened(double x) const {
  for (const auto& iv : omega)
    if (x > iv.first - widen_delta && x < iv.second + widen_delta) return true;
  return false;
}

namespace {

double min_time_in_omega(const ObservationSpec& spec, const PotentialSpec& v, int grid_n) {
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid_n; ++a)
    for (int b = 0; b < grid_n; ++b) {
      double q = spec.k_qmin + (spec.k_qmax - spec.k_qmin) * (grid_n == 1 ? 0.5 : a / double(grid_n - 1));
      double p = spec.k_pmin + (spec.k_pmax - spec.k_pmin) * (grid_n == 1 ? 0.5 : b / double(grid_n - 1));
      long n_steps = std::lround(spec.horizon / spec.dt_obs);
      double h = spec.horizon / n_steps;
      double acc = 0.0;
      double f = -v.dv(q);
      for (long s = 0; s < n_steps; ++s) {
        if (spec.in_omega(q)) acc += h;
        p += 0.5 * h * f;
        q += h * p;
        f = -v.dv(q);
        p += 0.5 * h * f;
      }
      best = std::min(best, acc);
    }
  return best;
}

}  // namespace

ObservationConstant observation_constant(const ObservationSpec& spec, const PotentialSpec& v) {
  ObservationConstant out;
  out.value = min_time_in_omega(spec, v, spec.k_grid);
  double coarse = min_time_in_omega(spec, v, std::max(2, spec.k_grid / 2));
  out.refinement_delta = std::abs(out.value - coarse);
  out.gc_holds = out.value > 0.0;
  return out;
}

ObservationAudit observation_audit(const FockBasis& basis, const PhaseMeasure& mu,
                                   const ObservationSpec& spec, const PotentialSpec& v,
                                   const std::vector<double>& lambdas, const PositionGrid& grid,
                                   double dt_ref, int snapshots) {
  mu.validate();
  ObservationAudit out;
  ObservationConstant c = observation_constant(spec, v);
  out.c_const = c.value;

  double mass_k = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    const auto& z = mu.points[i];
    if (z.q >= spec.k_qmin && z.q <= spec.k_qmax && z.p >= spec.k_pmin && z.p <= spec.k_pmax)
      mass_k += mu.weights[i];
  }

  double dh = basis.dim_space * basis.hbar;
  out.penalty = std::numeric_limits<double>::infinity();
  for (double lam : lambdas) {
    double l = theorem6_l_const(lam, v.lip_grad());
    double amp = (std::exp(l * spec.horizon) - 1.0) / l;
    double dd = std::sqrt(0.5 * (lam * lam + 1.0) * dh);  // inf over f supported in K
    double pen = (1.0 / spec.widen_delta) * (1.0 / lam) * amp * dd;
    if (pen < out.penalty) {
      out.penalty = pen;
      out.best_lambda = lam;
      out.dd_lambda = dd;
    }
  }
  out.rhs = out.c_const * mass_k - out.penalty;
  out.vacuous = out.rhs <= 0.0;

  // LHS: time quadrature of trace(1_{Omega_delta} R(t)) over the evolved mixture
  SplitStep step(basis, grid, v);
  int m = grid.m_points;
  std::vector<Vec> psis;
  for (int i = 0; i < mu.size(); ++i) {
    Vec psi(m);
    for (int g = 0; g < m; ++g)
      psi(g) = coherent_wavefunction(basis.hbar, mu.points[i].q, mu.points[i].p, grid.points(g));
    psis.push_back(std::move(psi));
  }
  std::vector<signed char> inside(m);
  for (int g = 0; g < m; ++g) inside[g] = spec.in_omega_widened(grid.points(g)) ? 1 : 0;

  double t_step = spec.horizon / (snapshots - 1);
  double acc = 0.0;
  for (int s = 0; s < snapshots; ++s) {
    double mass = 0.0;
    for (size_t i = 0; i < psis.size(); ++i) {
      double p = 0.0;
      for (int g = 0; g < m; ++g)
        if (inside[g]) p += std::norm(psis[i](g));
      mass += mu.weights[i] * p * grid.dx;
    }
    double w = (s == 0 || s == snapshots - 1) ? 0.5 : 1.0;  // trapezoid
    acc += w * mass * t_step;
    if (s + 1 < snapshots)
      for (auto& psi : psis) step.evolve_strang(psi, t_step, dt_ref);
  }
  out.lhs = acc;
  out.holds = !out.vacuous && out.lhs >= out.rhs - 1e-6 - 1e-3 * std::abs(out.rhs);
  return out;
}

Mat quantum_heat_kernel_step(const Mat& kernel, const PositionGrid& grid, double hbar, double t,
                             int n_steps) {
  int m = grid.m_points;
  Mat r = kernel;
  double h = t / n_steps;

  RVec ks(m);
  for (int j = 0; j < m; ++j) {
    int jj = j <= m / 2 ? j : j - m;
    ks(j) = 2.0 * kPi * jj / grid.extent;
  }

  std::vector<Cd> buf(size_t(m) * m);
  fftw_plan fwd =
      fftw_plan_dft_2d(m, m, reinterpret_cast<fftw_complex*>(buf.data()),
                       reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD, FFTW_ESTIMATE);
  fftw_plan bwd =
      fftw_plan_dft_2d(m, m, reinterpret_cast<fftw_complex*>(buf.data()),
                       reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD, FFTW_ESTIMATE);

  auto q_factor = [&](double tau) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double d = grid.points(i) - grid.points(j);
        r(i, j) *= std::exp(-tau * d * d / (hbar * hbar));
      }
  };
  // momentum factor: r(x,x') carries e^{i(kx - k'x')}; the 2-d transform of the
  // kernel diagonalizes [p,[p,.]] with multiplier (k - k')^2 in physical units
  auto p_factor = [&](double tau) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) buf[size_t(i) * m + j] = r(i, j);
    fftw_execute(fwd);
    // row index transforms as e^{-ikx}, column as e^{-ik'x'}; conjugate roles
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double d = ks(a) + ks(b);  // k - k' after orientation of the two transforms
        buf[size_t(a) * m + b] *= std::exp(-tau * d * d);
      }
    fftw_execute(bwd);
    double s = 1.0 / (double(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) r(i, j) = buf[size_t(i) * m + j] * s;
  };

  for (int s = 0; s < n_steps; ++s) {
    q_factor(0.5 * h);
    p_factor(h);
    q_factor(0.5 * h);
  }
  fftw_destroy_plan(fwd);
  fftw_destroy_plan(bwd);
  return r;
}

DensityOperator quantum_heat_evolve(const FockBasis& basis, const DensityOperator& r, double t,
                                    const PositionGrid& grid, int n_steps) {
  if (t <= 0.0) return r;
  Mat kernel = fock_to_position_kernel(basis, r.matrix, grid);
  kernel = quantum_heat_kernel_step(kernel, grid, basis.hbar, t, n_steps);
  DensityOperator out = r;
  out.matrix = position_to_fock_kernel(basis, kernel, grid);
  return clip_to_density(out);
}

HeatContractionAudit heat_contraction_audit(const FockBasis& basis, const DensityOperator& r1,
                                            const DensityOperator& r2,
                                            const std::vector<double>& times,
                                            const PositionGrid& grid, const SolverOptions& opt) {
  HeatContractionAudit audit;
  double gap_acc = 0.0;
  for (double t : times) {
    DensityOperator a = quantum_heat_evolve(basis, r1, t, grid);
    DensityOperator b = quantum_heat_evolve(basis, r2, t, grid);
    TransportResult res = dd_qq(basis, a, b, 1.0, opt);
    audit.rows.push_back({t, res.distance()});
    gap_acc = std::max(gap_acc, res.gap * std::max(1.0, res.value));
  }
  audit.tolerance = 2.0 * std::sqrt(gap_acc) + 1e-6;
  audit.monotone = true;
  for (size_t i = 1; i < audit.rows.size(); ++i)
    if (audit.rows[i].dd > audit.rows[i - 1].dd + audit.tolerance) audit.monotone = false;
  return audit;
}

void write_study_csv(const std::vector<StudyRow>& rows, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "hbar,dt,time,metric,value\n";
  for (const auto& r : rows)
    os << r.hbar << ',' << r.dt << ',' << r.time << ',' << r.metric << ',' << r.value << '\n';
}

}  // namespace qot
