#include "qot/transport_map.hpp"

#include <cmath>
#include <stdexcept>

#include "qot/rng.hpp"

namespace qot {

GroundFamily ground_family(const FockBasis& basis, const Mat& b_tilde,
                           const std::vector<PhasePoint>& zs, double degeneracy_gap) {
  GroundFamily fam;
  fam.min_gap = std::numeric_limits<double>::infinity();
  Vec prev;
  for (const auto& z : zs) {
    Mat h = cost_cq(basis, z, 1.0) - b_tilde;
    HermitianEig eig = hermitian_eig(hermitize(h));
    double gap = eig.values(1) - eig.values(0);
    if (gap <= degeneracy_gap) {
      throw std::runtime_error("ground_family: degenerate ground state at z=(" +
                               std::to_string(z.q) + "," + std::to_string(z.p) + ")");
    }
    fam.min_gap = std::min(fam.min_gap, gap);
    Vec psi = eig.vectors.col(0);
    if (prev.size() > 0) {
      Cd ov = (prev.adjoint() * psi)(0, 0);
      if (std::abs(ov) > 1e-14) psi *= std::conj(ov) / std::abs(ov);
    } else {
      // pin the global phase: largest coefficient real positive
      int imax = 0;
      for (int k = 1; k < psi.size(); ++k)
        if (std::abs(psi(k)) > std::abs(psi(imax))) imax = k;
      if (std::abs(psi(imax)) > 0) psi *= std::conj(psi(imax)) / std::abs(psi(imax));
    }
    prev = psi;
    fam.a_tilde.push_back(eig.values(0));
    fam.psis.push_back(std::move(psi));
  }
  return fam;
}

GroundStateTransport ground_state_transport(const FockBasis& basis, const Mat& b_tilde,
                                            const PhaseMeasure& f) {
  f.validate();
  GroundStateTransport out;
  out.zs = f.points;
  GroundFamily fam = ground_family(basis, b_tilde, out.zs);
  out.a_tilde = fam.a_tilde;
  out.psis = fam.psis;
  out.min_gap = fam.min_gap;

  int n = basis.n_modes;
  Mat acc = Mat::Zero(n, n);
  out.primal_value = 0.0;
  out.dual_value = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const Vec& psi = out.psis[i];
    acc += f.weights[i] * (psi * psi.adjoint());
    Mat c = cost_cq(basis, f.points[i], 1.0);
    out.primal_value += f.weights[i] * ((psi.adjoint() * c * psi)(0, 0)).real();
    out.dual_value += out.a_tilde[i] * f.weights[i];
  }
  out.deformed_op.matrix = std::move(acc);
  out.deformed_op.factor_dims = {n};
  out.deformed_op.hbar = basis.hbar;
  out.dual_value += (b_tilde * out.deformed_op.matrix).trace().real();
  return out;
}

LegendreGradientReport legendre_gradient_check(const FockBasis& basis, const Mat& b_tilde,
                                               double half_width, int axis_points, double fd_step,
                                               std::uint64_t seed, double grad_tol,
                                               double legendre_tol, double inverse_tol) {
  LegendreGradientReport rep;
  int n = basis.n_modes;
  int g = axis_points;
  double h = fd_step;

  // serpentine-ordered interior grid; each interior point also needs its
  // 4-point finite-difference stencil, evaluated on the same phase-continuous
  // sweep to keep a(z) consistent
  std::vector<PhasePoint> grid;
  double step = g > 1 ? 2.0 * half_width / (g - 1) : 0.0;
  for (int i = 0; i < g; ++i) {
    for (int jj = 0; jj < g; ++jj) {
      int j = (i % 2 == 0) ? jj : g - 1 - jj;
      grid.push_back({-half_width + i * step, -half_width + j * step});
    }
  }
  GroundFamily fam = ground_family(basis, b_tilde, grid);

  Mat big_b = 0.5 * (basis.oscillator() - b_tilde);

  auto a_of = [&](const PhasePoint& z, double atilde) {
    return 0.5 * (z.q * z.q + z.p * z.p - atilde);
  };

  // gradient identity via dedicated stencils around each grid point
  for (size_t k = 0; k < grid.size(); ++k) {
    PhasePoint z = grid[k];
    std::vector<PhasePoint> stencil = {{z.q + h, z.p}, {z.q - h, z.p}, {z.q, z.p + h},
                                       {z.q, z.p - h}};
    GroundFamily st = ground_family(basis, b_tilde, stencil);
    double da_dq =
        (a_of(stencil[0], st.a_tilde[0]) - a_of(stencil[1], st.a_tilde[1])) / (2.0 * h);
    double da_dp =
        (a_of(stencil[2], st.a_tilde[2]) - a_of(stencil[3], st.a_tilde[3])) / (2.0 * h);
    const Vec& psi = fam.psis[k];
    double zq = ((psi.adjoint() * basis.pos_op * psi)(0, 0)).real();
    double zp = ((psi.adjoint() * basis.mom_op * psi)(0, 0)).real();
    double mismatch = std::hypot(da_dq - zq, da_dp - zp);
    rep.max_gradient_mismatch = std::max(rep.max_gradient_mismatch, mismatch);

    // Legendre dual: z.<phi|Z|phi> - <phi|B|phi> <= a(z), attained at psi_z
    double a_here = a_of(z, fam.a_tilde[k]);
    double attained =
        z.q * zq + z.p * zp - ((psi.adjoint() * big_b * psi)(0, 0)).real();
    rep.max_attainment_error = std::max(rep.max_attainment_error, std::abs(attained - a_here));

    // quantum-derivative inverse identity
    Mat dq_b = Cd(0, 1) / basis.hbar * (basis.mom_op * big_b - big_b * basis.mom_op);
    Mat dp_b = Cd(0, -1) / basis.hbar * (basis.pos_op * big_b - big_b * basis.pos_op);
    double xr = ((psi.adjoint() * dq_b * psi)(0, 0)).real();
    double pr = ((psi.adjoint() * dp_b * psi)(0, 0)).real();
    rep.max_inverse_identity_error =
        std::max(rep.max_inverse_identity_error, std::hypot(xr - z.q, pr - z.p));
  }

  // Legendre inequality over the eigenvector family and random probes
  CounterRng rng(seed, 0xB177E5);
  std::vector<Vec> probes;
  for (const auto& psi : fam.psis) probes.push_back(psi);
  for (int t = 0; t < 64; ++t) {
    Vec v(n);
    for (int k = 0; k < n; ++k) v(k) = Cd(rng.next_gaussian(), rng.next_gaussian());
    // keep probes inside the reliable window
    for (int k = 0; k < n; ++k) v(k) *= std::exp(-0.15 * k);
    v /= v.norm();
    probes.push_back(std::move(v));
  }
  for (size_t k = 0; k < grid.size(); ++k) {
    double a_here = a_of(grid[k], fam.a_tilde[k]);
    for (const auto& v : probes) {
      double zq = ((v.adjoint() * basis.pos_op * v)(0, 0)).real();
      double zp = ((v.adjoint() * basis.mom_op * v)(0, 0)).real();
      double bb = ((v.adjoint() * big_b * v)(0, 0)).real();
      double val = grid[k].q * zq + grid[k].p * zp - bb;
      rep.max_legendre_violation = std::max(rep.max_legendre_violation, val - a_here);
    }
  }

  rep.pass = rep.max_gradient_mismatch < grad_tol &&
             rep.max_legendre_violation < legendre_tol &&
             rep.max_attainment_error < 1e-8 && rep.max_inverse_identity_error < inverse_tol;
  return rep;
}

}  // namespace qot
