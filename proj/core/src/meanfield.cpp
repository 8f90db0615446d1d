#include "qot/meanfield.hpp"

#include <fftw3.h>

#include <cmath>
#include <stdexcept>

namespace qot {

double meanfield_l_const(const PotentialSpec& v) {
  double lip = v.lip_grad();
  return 2.0 * (1.0 + 4.0 * lip * lip);
}

double grad_sup_norm(const PotentialSpec& v) {
  switch (v.kind) {
    case PotentialSpec::Kind::zero: return 0.0;
    case PotentialSpec::Kind::cosine: return std::abs(v.v0) * v.wavenumber;
    case PotentialSpec::Kind::harmonic:
      throw std::invalid_argument("grad_sup_norm: harmonic interaction has unbounded gradient");
    case PotentialSpec::Kind::tabulated: {
      double best = 0.0;
      for (int i = -400; i <= 400; ++i) best = std::max(best, std::abs(v.dv(i * 0.05)));
      return best;
    }
  }
  return 0.0;
}

double meanfield_rhs(double dh_scale, double l_const, double grad_inf, int n_particles, double t) {
  double amp = std::exp(l_const * t);
  return dh_scale * amp + 8.0 * grad_inf * grad_inf / double(n_particles - 1) * (amp - 1.0) / l_const;
}

namespace {

PositionGrid meanfield_grid(const MeanFieldConfig& cfg, const FockBasis& basis) {
  double extent = cfg.grid_extent;
  if (extent <= 0.0) {
    double reach = 0.0;
    for (const auto& z : cfg.f_in.points)
      reach = std::max({reach, std::abs(z.q), std::abs(z.p)});
    extent = 2.0 * (reach + (reach + 1.5) * 1.0 + 6.0 * std::sqrt(cfg.hbar) + 2.0);
  }
  PositionGrid g;
  g.m_points = cfg.grid_points;
  g.extent = extent;
  g.dx = extent / cfg.grid_points;
  g.points = RVec(cfg.grid_points);
  for (int i = 0; i < cfg.grid_points; ++i) g.points(i) = -extent / 2.0 + i * g.dx;
  (void)basis;
  return g;
}

struct Fft1d {
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<Cd> buf;
  int m;
  explicit Fft1d(int m_points) : m(m_points) {
    buf.assign(m, Cd(0, 0));
    fwd = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                           FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(m, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                           FFTW_ESTIMATE);
  }
  ~Fft1d() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }
  void forward(Cd* d) const {
    fftw_execute_dft(fwd, reinterpret_cast<fftw_complex*>(d), reinterpret_cast<fftw_complex*>(d));
  }
  void backward_scaled(Cd* d) const {
    fftw_execute_dft(bwd, reinterpret_cast<fftw_complex*>(d), reinterpret_cast<fftw_complex*>(d));
    double s = 1.0 / m;
    for (int i = 0; i < m; ++i) d[i] *= s;
  }
};

}  // namespace

struct HartreeEvolver::Impl {
  MeanFieldConfig cfg;
  FockBasis basis;
  PositionGrid grid;
  Fft1d fft;
  RVec ks;

  Impl(const MeanFieldConfig& c, const FockBasis& b, const PositionGrid& g)
      : cfg(c), basis(b), grid(g), fft(g.m_points), ks(g.m_points) {
    for (int j = 0; j < g.m_points; ++j) {
      int jj = j <= g.m_points / 2 ? j : j - g.m_points;
      ks(j) = 2.0 * kPi * jj / g.extent;
    }
  }

  void kinetic(Vec& psi, double dt) const {
    fft.forward(psi.data());
    for (int j = 0; j < grid.m_points; ++j)
      psi(j) *= std::exp(Cd(0.0, -0.5 * cfg.hbar * ks(j) * ks(j) * dt));
    fft.backward_scaled(psi.data());
  }
};

HartreeEvolver::HartreeEvolver(const MeanFieldConfig& cfg, const FockBasis& basis,
                               const PositionGrid& grid)
    : impl_(std::make_unique<Impl>(cfg, basis, grid)) {}

HartreeEvolver::~HartreeEvolver() = default;

HartreeState HartreeEvolver::initial_state() const {
  const auto& cfg = impl_->cfg;
  DensityOperator r = toeplitz_op(impl_->basis, cfg.f_in);
  HermitianEig eig = hermitian_eig(hermitize(r.matrix));
  HartreeState s;
  for (int k = int(eig.values.size()) - 1; k >= 0; --k) {
    if (eig.values(k) <= 1e-12) continue;
    Vec psi = fock_to_position(impl_->basis, eig.vectors.col(k), impl_->grid);
    s.components.push_back(std::move(psi));
    s.weights.push_back(eig.values(k));
  }
  return s;
}

RVec HartreeEvolver::density(const HartreeState& s) const {
  int m = impl_->grid.m_points;
  RVec rho = RVec::Zero(m);
  for (size_t c = 0; c < s.components.size(); ++c)
    for (int i = 0; i < m; ++i) rho(i) += s.weights[c] * std::norm(s.components[c](i));
  return rho;
}

RVec HartreeEvolver::mean_field_potential(const RVec& rho) const {
  const auto& grid = impl_->grid;
  const auto& v = impl_->cfg.interaction;
  int m = grid.m_points;
  RVec w = RVec::Zero(m);
  if (v.kind == PotentialSpec::Kind::cosine) {
    // V(x-y) = v0 [cos kx cos ky + sin kx sin ky]: rank-2 separable convolution
    double c = 0.0, sn = 0.0;
    for (int i = 0; i < m; ++i) {
      c += std::cos(v.wavenumber * grid.points(i)) * rho(i) * grid.dx;
      sn += std::sin(v.wavenumber * grid.points(i)) * rho(i) * grid.dx;
    }
    for (int i = 0; i < m; ++i)
      w(i) = v.v0 * (std::cos(v.wavenumber * grid.points(i)) * c +
                     std::sin(v.wavenumber * grid.points(i)) * sn);
  } else {
    for (int i = 0; i < m; ++i) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += v.v(grid.points(i) - grid.points(j)) * rho(j);
      w(i) = acc * grid.dx;
    }
  }
  return w;
}

void HartreeEvolver::step(HartreeState& s) const {
  const auto& grid = impl_->grid;
  double dt = impl_->cfg.dt;
  double hb = impl_->cfg.hbar;
  RVec w = mean_field_potential(density(s));
  for (auto& psi : s.components) {
    for (int i = 0; i < grid.m_points; ++i)
      psi(i) *= std::exp(Cd(0.0, -0.5 * w(i) * dt / hb));
    impl_->kinetic(psi, dt);
    for (int i = 0; i < grid.m_points; ++i)
      psi(i) *= std::exp(Cd(0.0, -0.5 * w(i) * dt / hb));
  }
  RVec w_end = mean_field_potential(density(s));
  s.potential_drift = std::max(s.potential_drift, (w_end - w).cwiseAbs().maxCoeff());
  s.time += dt;
}

void HartreeEvolver::evolve(HartreeState& s, double t) const {
  long n = std::lround(t / impl_->cfg.dt);
  for (long i = 0; i < n; ++i) step(s);
}

Mat HartreeEvolver::kernel(const HartreeState& s) const {
  int m = impl_->grid.m_points;
  Mat k = Mat::Zero(m, m);
  for (size_t c = 0; c < s.components.size(); ++c)
    k += s.weights[c] * (s.components[c] * s.components[c].adjoint());
  return k;
}

DensityOperator HartreeEvolver::to_fock(const HartreeState& s) const {
  Mat f = position_to_fock_kernel(impl_->basis, kernel(s), impl_->grid);
  DensityOperator out;
  out.matrix = std::move(f);
  out.factor_dims = {impl_->basis.n_modes};
  out.hbar = impl_->basis.hbar;
  return clip_to_density(out);
}

double HartreeEvolver::hartree_energy(const HartreeState& s) const {
  const auto& grid = impl_->grid;
  double hb = impl_->cfg.hbar;
  double kin = 0.0;
  for (size_t c = 0; c < s.components.size(); ++c) {
    Vec psi = s.components[c];
    impl_->fft.forward(psi.data());
    double acc = 0.0, nrm = 0.0;
    for (int j = 0; j < grid.m_points; ++j) {
      acc += 0.5 * hb * hb * impl_->ks(j) * impl_->ks(j) * std::norm(psi(j));
      nrm += std::norm(psi(j));
    }
    kin += s.weights[c] * acc / nrm;
  }
  RVec rho = density(s);
  RVec w = mean_field_potential(rho);
  double pot = 0.0;
  for (int i = 0; i < grid.m_points; ++i) pot += 0.5 * w(i) * rho(i) * grid.dx;
  return kin + pot;
}

struct NBodyEvolver::Impl {
  MeanFieldConfig cfg;
  FockBasis basis;
  PositionGrid grid;
  RVec ks;
  RMat v12;  // interaction samples V(x1 - x2) / N
  std::vector<Cd> buf;
  fftw_plan fwd = nullptr, bwd = nullptr;

  Impl(const MeanFieldConfig& c, const FockBasis& b, const PositionGrid& g)
      : cfg(c), basis(b), grid(g), ks(g.m_points) {
    int m = g.m_points;
    for (int j = 0; j < m; ++j) {
      int jj = j <= m / 2 ? j : j - m;
      ks(j) = 2.0 * kPi * jj / g.extent;
    }
    v12 = RMat(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        v12(i, j) = 0.5 * cfg.interaction.v(g.points(i) - g.points(j));  // 1/N with N=2
    buf.assign(size_t(m) * m, Cd(0, 0));
    fwd = fftw_plan_dft_2d(m, m, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                           FFTW_ESTIMATE);
    bwd = fftw_plan_dft_2d(m, m, reinterpret_cast<fftw_complex*>(buf.data()),
                           reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                           FFTW_ESTIMATE);
  }
  ~Impl() {
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
  }

  void strang_step(Mat& psi, double dt) const {
    int m = grid.m_points;
    double hb = cfg.hbar;
    // half potential
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        psi(i, j) *= std::exp(Cd(0.0, -0.5 * v12(i, j) * dt / hb));
    // full kinetic in both coordinates
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) buf[size_t(i) * m + j] = psi(i, j);
    fftw_execute(fwd);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        buf[size_t(a) * m + b] *=
            std::exp(Cd(0.0, -0.5 * hb * (ks(a) * ks(a) + ks(b) * ks(b)) * dt));
    fftw_execute(bwd);
    double s = 1.0 / (double(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) psi(i, j) = buf[size_t(i) * m + j] * s;
    // half potential
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        psi(i, j) *= std::exp(Cd(0.0, -0.5 * v12(i, j) * dt / hb));
  }
};

NBodyEvolver::NBodyEvolver(const MeanFieldConfig& cfg, const FockBasis& basis,
                           const PositionGrid& grid)
    : impl_(std::make_unique<Impl>(cfg, basis, grid)) {}

NBodyEvolver::~NBodyEvolver() = default;

NBodyState NBodyEvolver::initial_state() const {
  const auto& cfg = impl_->cfg;
  const auto& grid = impl_->grid;
  int m = grid.m_points;
  NBodyState s;
  // T[(f_in)^(x)2] is exactly the coherent mixture over atom pairs
  for (int a = 0; a < cfg.f_in.size(); ++a)
    for (int b = 0; b < cfg.f_in.size(); ++b) {
      Vec pa(m), pb(m);
      for (int g = 0; g < m; ++g) {
        pa(g) = coherent_wavefunction(cfg.hbar, cfg.f_in.points[a].q, cfg.f_in.points[a].p,
                                      grid.points(g));
        pb(g) = coherent_wavefunction(cfg.hbar, cfg.f_in.points[b].q, cfg.f_in.points[b].p,
                                      grid.points(g));
      }
      s.wavefunctions.push_back(pa * pb.transpose());
      s.weights.push_back(cfg.f_in.weights[a] * cfg.f_in.weights[b]);
    }
  return s;
}

void NBodyEvolver::evolve(NBodyState& s, double t) const {
  long n = std::lround(t / impl_->cfg.dt);
  for (long i = 0; i < n; ++i)
    for (auto& psi : s.wavefunctions) impl_->strang_step(psi, impl_->cfg.dt);
  s.time += t;
}

Mat NBodyEvolver::marginal_kernel(const NBodyState& s) const {
  int m = impl_->grid.m_points;
  Mat k = Mat::Zero(m, m);
  for (size_t c = 0; c < s.wavefunctions.size(); ++c)
    k += s.weights[c] * (s.wavefunctions[c] * s.wavefunctions[c].adjoint()) * impl_->grid.dx;
  return k;
}

DensityOperator NBodyEvolver::marginal_to_fock(const NBodyState& s) const {
  Mat f = position_to_fock_kernel(impl_->basis, marginal_kernel(s), impl_->grid);
  DensityOperator out;
  out.matrix = std::move(f);
  out.factor_dims = {impl_->basis.n_modes};
  out.hbar = impl_->basis.hbar;
  return clip_to_density(out);
}

DensityOperator NBodyEvolver::two_particle_to_fock(const NBodyState& s, int n_modes) const {
  FockBasis small = build_basis(impl_->cfg.hbar, n_modes);
  Mat f = impl_->grid.fock_to_grid.leftCols(n_modes).cast<Cd>();
  int n = n_modes;
  Mat acc = Mat::Zero(long(n) * n, long(n) * n);
  for (size_t c = 0; c < s.wavefunctions.size(); ++c) {
    Mat a = f.transpose() * s.wavefunctions[c] * f;  // Fock amplitudes A(k1,k2)
    Vec flat(long(n) * n);
    for (int k1 = 0; k1 < n; ++k1)
      for (int k2 = 0; k2 < n; ++k2) flat(long(k1) * n + k2) = a(k1, k2);
    acc += s.weights[c] * (flat * flat.adjoint());
  }
  DensityOperator out;
  out.matrix = std::move(acc);
  out.factor_dims = {n, n};
  out.hbar = impl_->cfg.hbar;
  (void)small;
  return out;
}

double NBodyEvolver::swap_symmetry_defect(const NBodyState& s) const {
  // swapping the particles transposes the amplitude matrix of each member;
  // compare the Fock-projected two-particle operator with its swap conjugate
  int n = impl_->cfg.fock_modes;
  DensityOperator r2 = two_particle_to_fock(s, n);
  Mat swapped(r2.matrix.rows(), r2.matrix.cols());
  for (int k1 = 0; k1 < n; ++k1)
    for (int k2 = 0; k2 < n; ++k2)
      for (int l1 = 0; l1 < n; ++l1)
        for (int l2 = 0; l2 < n; ++l2)
          swapped(long(k2) * n + k1, long(l2) * n + l1) =
              r2.matrix(long(k1) * n + k2, long(l1) * n + l2);
  return (r2.matrix - swapped).norm() / std::max(1e-300, r2.matrix.norm());
}

FlowState vlasov_particles(const PhaseMeasure& f_in, const PotentialSpec& v, double t, double dt) {
  f_in.validate();
  FlowState s = flow_from_measure(f_in);
  long n_steps = std::lround(t / dt);
  int n = int(s.particles.size());
  auto forces = [&](std::vector<double>& f) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc -= s.weights[j] * v.dv(s.particles[i].q - s.particles[j].q);
      f[i] = acc;
    }
  };
  std::vector<double> f(n);
  forces(f);
  for (long step = 0; step < n_steps; ++step) {
    for (int i = 0; i < n; ++i) s.particles[i].p += 0.5 * dt * f[i];
    for (int i = 0; i < n; ++i) s.particles[i].q += dt * s.particles[i].p;
    forces(f);
    for (int i = 0; i < n; ++i) s.particles[i].p += 0.5 * dt * f[i];
  }
  s.time += t;
  return s;
}

double total_momentum(const FlowState& s) {
  double p = 0.0;
  for (size_t i = 0; i < s.particles.size(); ++i) p += s.weights[i] * s.particles[i].p;
  return p;
}

MeanFieldAudit meanfield_bound_audit(const MeanFieldConfig& cfg, const std::vector<double>& times,
                                     const SolverOptions& opt) {
  MeanFieldAudit audit;
  audit.l_const = meanfield_l_const(cfg.interaction);
  audit.grad_inf = grad_sup_norm(cfg.interaction);

  FockBasis basis = build_basis(cfg.hbar, cfg.fock_modes);
  PositionGrid grid = meanfield_grid(cfg, basis);
  HartreeEvolver hartree(cfg, basis, grid);
  NBodyEvolver nbody(cfg, basis, grid);

  HartreeState hs = hartree.initial_state();
  NBodyState ns = nbody.initial_state();

  double dh = basis.dim_space * basis.hbar;
  audit.pass = true;
  double prev_t = 0.0;
  for (double t : times) {
    double advance = t - prev_t;
    if (advance > 0) {
      hartree.evolve(hs, advance);
      nbody.evolve(ns, advance);
      prev_t = t;
    }
    DensityOperator r_h = hartree.to_fock(hs);
    DensityOperator r_1 = nbody.marginal_to_fock(ns);
    FlowState vlasov = vlasov_particles(cfg.f_in, cfg.interaction, t, cfg.dt);

    MeanFieldBoundRow row;
    row.time = t;
    TransportResult q = dd_qq(basis, r_h, r_1, 1.0, opt);
    row.lhs_quantum = q.value;
    row.rhs_quantum = meanfield_rhs(2.0 * dh, audit.l_const, audit.grad_inf, 2, t);
    TransportResult c = dd_cq(basis, vlasov.as_measure(), r_1, 1.0, opt);
    row.lhs_classical = c.value;
    row.rhs_classical = meanfield_rhs(dh, audit.l_const, audit.grad_inf, 2, t);
    double defect = std::abs(1.0 - r_1.matrix.trace().real()) +
                    std::abs(1.0 - r_h.matrix.trace().real());
    audit.projection_defect = std::max(audit.projection_defect, defect);
    row.tolerance = (q.gap + c.gap) * std::max(1.0, row.lhs_quantum) + 10.0 * defect + 1e-6;
    row.holds = row.lhs_quantum <= row.rhs_quantum + row.tolerance &&
                row.lhs_classical <= row.rhs_classical + row.tolerance;
    audit.pass = audit.pass && row.holds;
    audit.rows.push_back(row);
  }
  return audit;
}

}  // namespace qot
