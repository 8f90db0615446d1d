#include "qot/pseudometric.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace qot {

namespace {

// I^(k-1) (x) op (x) I^(nf-k) over equal factor dimension n.
Mat embed(const Mat& op, int factor, int n_factors) {
  int n = int(op.rows());
  Mat out = factor == 0 ? op : Mat::Identity(n, n);
  for (int f = 1; f < n_factors; ++f) {
    const Mat& next = (f == factor) ? op : Mat::Identity(n, n);
    out = kron(out, next);
  }
  return out;
}

bool nearly_real(const Mat& m, double tol = 1e-13) {
  double scale = std::max(1.0, m.norm());
  return m.imag().cwiseAbs().maxCoeff() <= tol * scale;
}

inline double real_part(double x) { return x; }
inline double real_part(const Cd& x) { return x.real(); }

template <typename M>
double frob_inner(const M& a, const M& b) {
  return real_part((a.conjugate().cwiseProduct(b)).sum());
}

template <typename M>
double real_trace(const M& a) {
  return real_part(a.trace());
}

template <typename M>
M herm(const M& a) {
  return M(0.5 * (a + a.adjoint()));
}

template <typename M>
M psd_part(const M& a) {
  Eigen::SelfAdjointEigenSolver<M> es(a);
  RVec lam = es.eigenvalues().cwiseMax(0.0);
  return M(es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint());
}

template <typename M>
M kron_like(const M& r, const M& s) {
  M out(r.rows() * s.rows(), r.cols() * s.cols());
  for (Eigen::Index i = 0; i < r.rows(); ++i)
    for (Eigen::Index j = 0; j < r.cols(); ++j)
      out.block(i * s.rows(), j * s.cols(), s.rows(), s.cols()) = r(i, j) * s;
  return out;
}

// trace over the second (S-side) factor group: out(i,j) = sum_k W(i b + k, j b + k)
template <typename M>
M trace_out_second(const M& w, int a, int b) {
  M out = M::Zero(a, a);
  for (int i = 0; i < a; ++i)
    for (int j = 0; j < a; ++j) {
      typename M::Scalar acc{};
      for (int k = 0; k < b; ++k) acc += w(i * b + k, j * b + k);
      out(i, j) = acc;
    }
  return out;
}

template <typename M>
M trace_out_first(const M& w, int a, int b) {
  M out = M::Zero(b, b);
  for (int i = 0; i < a; ++i) out += w.block(i * b, i * b, b, b);
  return out;
}

// Operator-splitting solve of  min <C,T>  s.t. trace_2(T)=R, trace_1(T)=S, T>=0.
// Alternates the closed-form projection onto the marginal (affine) set with
// the PSD-cone projection and a scaled dual update; the penalty is
// residual-balanced (factor 2, hysteresis through a cooldown).
// The affine projection's own multipliers deliver the Kantorovich pair.
template <typename M>
void admm_qq(const M& C, const M& R, const M& S, const SolverOptions& opt, TransportResult& out,
             M& coupling, M& dualA, M& dualB) {
  const int a = int(R.rows()), b = int(S.rows());
  const long N = long(a) * b;
  const double scale = std::max(1.0, C.norm() / std::sqrt(double(N)));

  M Z = kron_like(R, S);
  M X = Z, U = M::Zero(N, N);
  double rho = opt.rho0 > 0 ? opt.rho0 : scale;

  M dX = M::Zero(a, a), dY = M::Zero(b, b);
  std::ofstream trace_os;
  if (opt.trace && !opt.trace_path.empty()) {
    trace_os.open(opt.trace_path);
    trace_os << "iteration,primal_residual,dual_residual,gap\n";
  }

  double primal = 0.0, dual = 0.0, pri = 1.0, dua = 1.0, gap = 1.0;
  long it = 0;
  int balance_cooldown = 0;
  for (it = 1; it <= opt.max_iterations; ++it) {
    M W = Z - (U + C) * (1.0 / rho);
    M P = trace_out_second(W, a, b);
    P -= R;
    M Q = trace_out_first(W, a, b);
    Q -= S;
    double tP = real_trace(P);
    dX = P * (1.0 / b);
    dY = (Q - (tP / b) * M::Identity(b, b)) * (1.0 / a);
    X = std::move(W);
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < a; ++j) {
        auto v = dX(i, j);
        for (int k = 0; k < b; ++k) X(i * b + k, j * b + k) -= v;
      }
    for (int i = 0; i < a; ++i) X.block(i * b, i * b, b, b) -= dY;

    M Zprev = std::move(Z);
    Z = psd_part(herm(M(X + U * (1.0 / rho))));
    U += rho * (X - Z);

    if (it % opt.check_every == 0 || it == opt.max_iterations) {
      pri = (X - Z).norm() / std::max(1.0, std::max(X.norm(), Z.norm()));
      dua = rho * (Z - Zprev).norm() / std::max(1.0, U.norm());
      primal = frob_inner(C, Z);
      dualA = herm(M(-rho * dX));
      dualB = herm(M(-rho * dY));
      dual = frob_inner(dualA, R) + frob_inner(dualB, S);
      gap = std::abs(primal - dual) / std::max(1.0, std::abs(primal));
      if (trace_os.is_open()) trace_os << it << ',' << pri << ',' << dua << ',' << gap << '\n';
      if (out.history.size() < 4000) out.history.push_back({double(it), pri, dua, gap});
      if (pri < opt.tol && dua < opt.tol && gap < opt.tol) {
        out.converged = true;
        break;
      }
      if (balance_cooldown > 0) {
        --balance_cooldown;
      } else if (pri > 10.0 * dua) {
        rho *= 2.0;
        U *= 0.5;
        balance_cooldown = 5;
      } else if (dua > 10.0 * pri) {
        rho *= 0.5;
        U *= 2.0;
        balance_cooldown = 5;
      }
    }
  }
  out.iterations = std::min(it, opt.max_iterations);
  out.value = primal;
  out.dual_value = dual;
  out.gap = gap;
  coupling = std::move(Z);
}

}  // namespace

CostQQ cost_qq(const FockBasis& basis, double lambda, int n_particles) {
  int np = n_particles;
  int nf = 2 * np;  // [R factors..., S factors...]
  CostQQ c;
  c.lambda = lambda;
  c.hbar = basis.hbar;
  c.n_particles = np;
  long dim = 1;
  for (int f = 0; f < nf; ++f) dim *= basis.n_modes;
  c.matrix = Mat::Zero(dim, dim);
  for (int k = 0; k < np; ++k) {
    Mat dx = embed(basis.pos_op, k, nf) - embed(basis.pos_op, np + k, nf);
    Mat dp = embed(basis.mom_op, k, nf) - embed(basis.mom_op, np + k, nf);
    c.matrix += lambda * lambda * dx * dx + dp * dp;
  }
  c.matrix = hermitize(c.matrix);
  c.floor = 2.0 * lambda * basis.dim_space * basis.hbar * np;
  c.trunc_slack = std::max(0.0, c.floor - min_eigenvalue(c.matrix));
  return c;
}

Mat cost_cq(const FockBasis& basis, PhasePoint z, double lambda) {
  int n = basis.n_modes;
  Mat dx = z.q * Mat::Identity(n, n) - basis.pos_op;
  Mat dp = z.p * Mat::Identity(n, n) - basis.mom_op;
  return hermitize(lambda * lambda * dx * dx + dp * dp);
}

double cost_cq_floor(const FockBasis& basis, double lambda) {
  return lambda * basis.dim_space * basis.hbar;
}

double cost_cq_trunc_slack(const FockBasis& basis, PhasePoint z, double lambda) {
  return std::max(0.0, cost_cq_floor(basis, lambda) - min_eigenvalue(cost_cq(basis, z, lambda)));
}

double TransportResult::distance() const { return std::sqrt(std::max(0.0, value)); }

TransportResult dd_qq(const FockBasis& basis, const DensityOperator& r, const DensityOperator& s,
                      double lambda, const SolverOptions& opt) {
  if (r.factor_dims != s.factor_dims)
    throw std::invalid_argument("dd_qq: operators live on different spaces");
  int np = r.n_factors();
  CostQQ cost = cost_qq(basis, lambda, np);
  if (cost.matrix.rows() != long(r.dim()) * s.dim())
    throw std::invalid_argument("dd_qq: basis does not match operator dimensions");

  TransportResult out;
  out.floor = cost.floor;
  out.trunc_slack = cost.trunc_slack;

  Mat A, B;
  if (nearly_real(cost.matrix) && nearly_real(r.matrix) && nearly_real(s.matrix)) {
    RMat C = cost.matrix.real(), R = r.matrix.real(), S = s.matrix.real();
    RMat coupling, dA, dB;
    admm_qq<RMat>(C, R, S, opt, out, coupling, dA, dB);
    out.coupling = coupling.cast<Cd>();
    A = dA.cast<Cd>();
    B = dB.cast<Cd>();
  } else {
    Mat coupling;
    admm_qq<Mat>(cost.matrix, r.matrix, s.matrix, opt, out, coupling, A, B);
    out.coupling = std::move(coupling);
  }

  DualCertificateQQ cert;
  cert.a = A;
  cert.b = B;
  Mat slackm = cost.matrix;
  int a_dim = r.dim(), b_dim = s.dim();
  for (int i = 0; i < a_dim; ++i)
    for (int j = 0; j < a_dim; ++j) {
      Cd v = A(i, j);
      for (int k = 0; k < b_dim; ++k) slackm(i * b_dim + k, j * b_dim + k) -= v;
    }
  for (int i = 0; i < a_dim; ++i) slackm.block(i * b_dim, i * b_dim, b_dim, b_dim) -= B;
  cert.margin = min_eigenvalue(hermitize(slackm));
  cert.value = ((A * r.matrix).trace() + (B * s.matrix).trace()).real();
  out.dual_qq = cert;
  return out;
}

TransportResult dd_cq(const FockBasis& basis, const PhaseMeasure& f, const DensityOperator& r,
                      double lambda, const SolverOptions& opt) {
  f.validate();
  int n = r.dim();
  int m = f.size();
  if (r.n_factors() != 1) throw std::invalid_argument("dd_cq: single-particle operators only");

  std::vector<Mat> C(m);
  double slack = 0.0;
  for (int i = 0; i < m; ++i) {
    C[i] = cost_cq(basis, f.points[i], lambda);
    slack = std::max(slack, cost_cq_trunc_slack(basis, f.points[i], lambda));
  }

  TransportResult out;
  out.floor = cost_cq_floor(basis, lambda);
  out.trunc_slack = slack;

  double cnorm = 0.0;
  for (const auto& c : C) cnorm = std::max(cnorm, c.norm() / n);
  double rho = opt.rho0 > 0 ? opt.rho0 : std::max(1.0, cnorm);

  std::vector<Mat> X(m), Z(m), U(m);
  for (int i = 0; i < m; ++i) {
    X[i] = f.weights[i] * r.matrix;
    Z[i] = X[i];
    U[i] = Mat::Zero(n, n);
  }

  std::vector<double> lam(m, 0.0);
  Mat Y = Mat::Zero(n, n);
  std::ofstream trace_os;
  if (opt.trace && !opt.trace_path.empty()) {
    trace_os.open(opt.trace_path);
    trace_os << "iteration,primal_residual,dual_residual,gap\n";
  }

  double primal = 0.0, dual = 0.0, pri = 1.0, dua = 1.0, gap = 1.0;
  long it = 0;
  int balance_cooldown = 0;
  std::vector<Mat> W(m);
  for (it = 1; it <= opt.max_iterations; ++it) {
    // affine projection across blocks: trace(X_i) = f_i, sum_i X_i = R
    Mat Q = -r.matrix;
    double sum_p = 0.0;
    for (int i = 0; i < m; ++i) {
      W[i] = Z[i] - (U[i] + C[i]) * (1.0 / rho);
      double p = W[i].trace().real() - f.weights[i];
      lam[i] = p / n;
      sum_p += p;
      Q += W[i];
    }
    Y = (Q - (sum_p / n) * Mat::Identity(n, n)) * (1.0 / m);
    double znorm = 0.0, xnorm = 0.0, prisq = 0.0, duasq = 0.0;
    for (int i = 0; i < m; ++i) {
      X[i] = W[i] - Y;
      X[i].diagonal().array() -= lam[i];
      Mat Zprev = std::move(Z[i]);
      Z[i] = psd_part<Mat>(hermitize(X[i] + U[i] * (1.0 / rho)));
      U[i] += rho * (X[i] - Z[i]);
      prisq += (X[i] - Z[i]).squaredNorm();
      duasq += (Z[i] - Zprev).squaredNorm();
      xnorm += X[i].squaredNorm();
      znorm += Z[i].squaredNorm();
    }
    if (it % opt.check_every == 0 || it == opt.max_iterations) {
      double unorm = 0.0;
      for (int i = 0; i < m; ++i) unorm += U[i].squaredNorm();
      pri = std::sqrt(prisq) / std::max(1.0, std::sqrt(std::max(xnorm, znorm)));
      dua = rho * std::sqrt(duasq) / std::max(1.0, std::sqrt(unorm));
      primal = 0.0;
      for (int i = 0; i < m; ++i) primal += frob_inner(C[i], Z[i]);
      dual = 0.0;
      for (int i = 0; i < m; ++i) dual += -rho * lam[i] * f.weights[i];
      dual += frob_inner(Mat(-rho * Y), r.matrix);
      gap = std::abs(primal - dual) / std::max(1.0, std::abs(primal));
      if (trace_os.is_open()) trace_os << it << ',' << pri << ',' << dua << ',' << gap << '\n';
      if (out.history.size() < 4000) out.history.push_back({double(it), pri, dua, gap});
      if (pri < opt.tol && dua < opt.tol && gap < opt.tol) {
        out.converged = true;
        break;
      }
      if (balance_cooldown > 0) {
        --balance_cooldown;
      } else if (pri > 10.0 * dua) {
        rho *= 2.0;
        for (auto& u : U) u *= 0.5;
        balance_cooldown = 5;
      } else if (dua > 10.0 * pri) {
        rho *= 0.5;
        for (auto& u : U) u *= 2.0;
        balance_cooldown = 5;
      }
    }
  }
  out.iterations = std::min(it, opt.max_iterations);
  out.value = primal;
  out.dual_value = dual;
  out.gap = gap;
  out.blocks = std::move(Z);

  DualCertificateCQ cert;
  cert.b = hermitize(Mat(-rho * Y));
  cert.a.resize(m);
  cert.min_margin = std::numeric_limits<double>::infinity();
  cert.value = 0.0;
  for (int i = 0; i < m; ++i) {
    cert.a[i] = -rho * lam[i];
    Mat sl = C[i] - cert.b;
    sl.diagonal().array() -= cert.a[i];
    cert.min_margin = std::min(cert.min_margin, min_eigenvalue(hermitize(sl)));
    cert.value += cert.a[i] * f.weights[i];
  }
  cert.value += (cert.b * r.matrix).trace().real();
  out.dual_cq = cert;
  return out;
}

double dd_rank1_qq(const FockBasis& basis, const DensityOperator& r, const DensityOperator& s,
                   double lambda, double rank_tol) {
  if (!is_rank_one(r, rank_tol) && !is_rank_one(s, rank_tol))
    throw std::invalid_argument("dd_rank1_qq: neither operator is rank one");
  if (r.n_factors() != 1 || s.n_factors() != 1)
    throw std::invalid_argument("dd_rank1_qq: single-particle operators only");
  const Mat& x = basis.pos_op;
  const Mat& p = basis.mom_op;
  auto mom = [](const Mat& rho, const Mat& op) { return (op * rho).trace().real(); };
  Mat x2 = x * x, p2 = p * p;
  double vx = mom(r.matrix, x2) - 2.0 * mom(r.matrix, x) * mom(s.matrix, x) + mom(s.matrix, x2);
  double vp = mom(r.matrix, p2) - 2.0 * mom(r.matrix, p) * mom(s.matrix, p) + mom(s.matrix, p2);
  return lambda * lambda * vx + vp;
}

double dd_rank1_cq(const FockBasis& basis, const PhaseMeasure& f, const DensityOperator& r,
                   double lambda, double rank_tol) {
  if (!is_rank_one(r, rank_tol))
    throw std::invalid_argument("dd_rank1_cq: operator is not rank one");
  f.validate();
  double acc = 0.0;
  for (int i = 0; i < f.size(); ++i)
    acc += f.weights[i] * (cost_cq(basis, f.points[i], lambda) * r.matrix).trace().real();
  return acc;
}

LiftedPlan toeplitz_lifted_plan(const FockBasis& basis, const PhaseMeasure& mu,
                                const PhaseMeasure& nu, const TransportPlan& plan,
                                double lambda) {
  int n = basis.n_modes;
  LiftedPlan out;
  out.coupling = Mat::Zero(long(n) * n, long(n) * n);
  CostQQ cost = cost_qq(basis, lambda);
  for (const auto& e : plan.entries) {
    Vec ci = coherent_vector(basis, mu.points[e.i].q, mu.points[e.i].p).normalized().coeffs;
    Vec cj = coherent_vector(basis, nu.points[e.j].q, nu.points[e.j].p).normalized().coeffs;
    Vec prod = Vec(long(n) * n);
    for (int a = 0; a < n; ++a) prod.segment(long(a) * n, n) = ci(a) * cj;
    out.coupling += e.mass * (prod * prod.adjoint());
  }
  out.objective = (cost.matrix.conjugate().cwiseProduct(out.coupling)).sum().real();
  return out;
}

PairwiseDistance pseudo_distance_sq(const FockBasis& basis, const Dens& a, const Dens& b,
                                    double lambda, const SolverOptions& opt) {
  PairwiseDistance out;
  if (std::holds_alternative<PhaseMeasure>(a) && std::holds_alternative<PhaseMeasure>(b)) {
    const auto& mu = std::get<PhaseMeasure>(a);
    const auto& nu = std::get<PhaseMeasure>(b);
    if (lambda != 1.0)
      throw std::invalid_argument("pseudo_distance_sq: classical side defined for lambda=1 only");
    W2Result w = w2_discrete(mu, nu);
    out.value_sq = w.plan.cost;
    out.exact = true;
    return out;
  }
  if (std::holds_alternative<DensityOperator>(a) && std::holds_alternative<DensityOperator>(b)) {
    const auto& r = std::get<DensityOperator>(a);
    const auto& s = std::get<DensityOperator>(b);
    if (is_rank_one(r) || is_rank_one(s)) {
      out.value_sq = dd_rank1_qq(basis, r, s, lambda);
      out.exact = true;
      return out;
    }
    TransportResult t = dd_qq(basis, r, s, lambda, opt);
    out.value_sq = t.value;
    out.gap = t.gap;
    return out;
  }
  const auto& f = std::holds_alternative<PhaseMeasure>(a) ? std::get<PhaseMeasure>(a)
                                                          : std::get<PhaseMeasure>(b);
  const auto& r = std::holds_alternative<DensityOperator>(a) ? std::get<DensityOperator>(a)
                                                             : std::get<DensityOperator>(b);
  if (is_rank_one(r)) {
    out.value_sq = dd_rank1_cq(basis, f, r, lambda);
    out.exact = true;
    return out;
  }
  TransportResult t = dd_cq(basis, f, r, lambda, opt);
  out.value_sq = t.value;
  out.gap = t.gap;
  return out;
}

TriangleAudit triangle_audit(const FockBasis& basis, const Dens& r1, const Dens& r2,
                             const Dens& r3, const SolverOptions& opt) {
  TriangleAudit audit;
  auto rank1 = [&](const Dens& d) {
    return std::holds_alternative<DensityOperator>(d) && is_rank_one(std::get<DensityOperator>(d));
  };
  if (std::holds_alternative<PhaseMeasure>(r2))
    audit.kind = TriangleKind::restricted_classical_middle;
  else if (rank1(r1) || rank1(r2) || rank1(r3))
    audit.kind = TriangleKind::restricted_rank1;
  else
    audit.kind = TriangleKind::generalized;

  PairwiseDistance p12 = pseudo_distance_sq(basis, r1, r2, 1.0, opt);
  PairwiseDistance p23 = pseudo_distance_sq(basis, r2, r3, 1.0, opt);
  PairwiseDistance p13 = pseudo_distance_sq(basis, r1, r3, 1.0, opt);
  audit.d12 = std::sqrt(std::max(0.0, p12.value_sq));
  audit.d23 = std::sqrt(std::max(0.0, p23.value_sq));
  audit.d13 = std::sqrt(std::max(0.0, p13.value_sq));

  double dh = basis.dim_space * basis.hbar;
  // solver gaps enter through the square roots; budget them linearly
  double gap_allow = 0.0;
  for (const auto& p : {p12, p23, p13})
    gap_allow += 0.5 * p.gap * std::max(1.0, std::sqrt(std::max(0.0, p.value_sq)));
  audit.tolerance = gap_allow + 1e-9;

  audit.restricted_holds = audit.d13 <= audit.d12 + audit.d23 + audit.tolerance;
  audit.generalized_holds = audit.d13 <= audit.d12 + audit.d23 + std::sqrt(dh) + audit.tolerance;
  audit.sharpened_holds =
      audit.d13 <= std::sqrt(audit.d12 * audit.d12 + dh) + std::sqrt(audit.d23 * audit.d23 + dh) +
                       audit.tolerance;
  audit.pass = (audit.kind == TriangleKind::generalized)
                   ? (audit.generalized_holds && audit.sharpened_holds)
                   : audit.restricted_holds;
  return audit;
}

namespace {

PhaseGrid grid_for_states(const FockBasis& basis, double energy_hint, int n_axis) {
  double radius = 2.0 * std::sqrt(std::max(energy_hint, basis.hbar)) + 3.0 * std::sqrt(basis.hbar);
  return make_phase_grid(0.0, 0.0, radius, n_axis);
}

}  // namespace

HusimiComparison husimi_comparison_qq(const FockBasis& basis, const DensityOperator& r,
                                      const DensityOperator& s, const SolverOptions& opt) {
  HusimiComparison out;
  double dh = basis.dim_space * basis.hbar;
  double e = std::max(energy(basis, r), energy(basis, s));
  PhaseGrid grid = grid_for_states(basis, e, 96);
  AggregatedMeasure hr = aggregate_to_measure(husimi(basis, r, grid), 32);
  AggregatedMeasure hs = aggregate_to_measure(husimi(basis, s, grid), 32);
  out.w2_sq = w2_discrete(hr.measure, hs.measure).plan.cost;
  TransportResult t = dd_qq(basis, r, s, 1.0, opt);
  out.dd_sq = t.value;
  out.bound = t.value + 2.0 * dh;
  double disp = hr.dispersion_slack + hs.dispersion_slack +
                std::sqrt(hr.dropped_mass + hs.dropped_mass) * 4.0 * std::sqrt(std::max(e, 1.0));
  out.slack = 2.0 * std::sqrt(out.w2_sq) * disp + disp * disp +
              t.gap * std::max(1.0, std::abs(t.value)) + 1e-9;
  out.holds = out.w2_sq <= out.bound + out.slack;
  return out;
}

HusimiComparison husimi_comparison_cq(const FockBasis& basis, const PhaseMeasure& f,
                                      const DensityOperator& r, const SolverOptions& opt) {
  HusimiComparison out;
  double dh = basis.dim_space * basis.hbar;
  double e = std::max(energy(basis, r), f.second_moment());
  PhaseGrid grid = grid_for_states(basis, e, 96);
  AggregatedMeasure hr = aggregate_to_measure(husimi(basis, r, grid), 32);
  out.w2_sq = w2_discrete(f, hr.measure).plan.cost;
  TransportResult t = dd_cq(basis, f, r, 1.0, opt);
  out.dd_sq = t.value;
  out.bound = t.value + dh;
  double disp =
      hr.dispersion_slack + std::sqrt(hr.dropped_mass) * 4.0 * std::sqrt(std::max(e, 1.0));
  out.slack = 2.0 * std::sqrt(out.w2_sq) * disp + disp * disp +
              t.gap * std::max(1.0, std::abs(t.value)) + 1e-9;
  out.holds = out.w2_sq <= out.bound + out.slack;
  return out;
}

Lemma26Check lemma26_check(const FockBasis& basis, const DensityOperator& r,
                           const DensityOperator& s, const SolverOptions& opt) {
  Lemma26Check out;
  double dh = basis.dim_space * basis.hbar;
  double e = std::max(energy(basis, r), energy(basis, s));
  PhaseGrid grid = grid_for_states(basis, e, 64);
  AggregatedMeasure hs = aggregate_to_measure(husimi(basis, s, grid), 14, 1e-8);

  TransportResult qq = dd_qq(basis, r, s, 1.0, opt);
  TransportResult cq = dd_cq(basis, hs.measure, r, 1.0, opt);
  out.dd_qq_sq = qq.value;
  out.dd_cq_sq = cq.value;
  double meas_slack =
      hs.dispersion_slack + std::sqrt(hs.dropped_mass) * 4.0 * std::sqrt(std::max(e, 1.0));
  out.slack = 2.0 * std::sqrt(std::max(0.0, cq.value)) * meas_slack + meas_slack * meas_slack +
              (qq.gap + cq.gap) * std::max(1.0, std::abs(qq.value)) + 1e-9;
  out.holds = out.dd_qq_sq >= out.dd_cq_sq - dh - out.slack;
  return out;
}

}  // namespace qot
