#include "qot/quantize.hpp"

#include <fftw3.h>

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qot {

double PhaseMeasure::total_mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double PhaseMeasure::second_moment() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i)
    s += weights[i] * (points[i].q * points[i].q + points[i].p * points[i].p);
  return s;
}

PhasePoint PhaseMeasure::mean() const {
  PhasePoint m;
  for (int i = 0; i < size(); ++i) {
    m.q += weights[i] * points[i].q;
    m.p += weights[i] * points[i].p;
  }
  return m;
}

void PhaseMeasure::validate() const {
  if (points.size() != weights.size())
    throw std::invalid_argument("PhaseMeasure: points/weights size mismatch");
  for (double w : weights)
    if (w < 0.0) throw std::invalid_argument("PhaseMeasure: negative weight");
  if (std::abs(total_mass() - 1.0) > 1e-12)
    throw std::invalid_argument("PhaseMeasure: weights must sum to 1");
}

PhaseMeasure point_mass(double q, double p) { return {{{q, p}}, {1.0}}; }

PhaseMeasure two_point(double q1, double p1, double w1, double q2, double p2, double w2) {
  return {{{q1, p1}, {q2, p2}}, {w1, w2}};
}

PhaseGrid make_phase_grid(double q_center, double p_center, double half_width, int n) {
  PhaseGrid g;
  g.dq = 2.0 * half_width / n;
  g.dp = g.dq;
  g.qs = RVec(n);
  g.ps = RVec(n);
  for (int i = 0; i < n; ++i) {
    g.qs(i) = q_center - half_width + (i + 0.5) * g.dq;
    g.ps(i) = p_center - half_width + (i + 0.5) * g.dp;
  }
  return g;
}

PhaseGrid default_phase_grid(const FockBasis& basis, double max_support_radius, int n) {
  double hw = (3.0 + max_support_radius) * std::sqrt(basis.hbar) * std::sqrt(double(basis.n_modes));
  // never smaller than the support itself plus a few thermal widths
  hw = std::max(hw, max_support_radius + 4.0 * std::sqrt(basis.hbar));
  return make_phase_grid(0.0, 0.0, hw, n);
}

ToeplitzResult toeplitz(const FockBasis& basis, const PhaseMeasure& m) {
  m.validate();
  Mat acc = Mat::Zero(basis.n_modes, basis.n_modes);
  double worst = 0.0;
  for (int i = 0; i < m.size(); ++i) {
    StateVector s = coherent_vector(basis, m.points[i].q, m.points[i].p);
    worst = std::max(worst, s.truncation_deficit);
    Vec c = s.normalized().coeffs;
    acc += m.weights[i] * (c * c.adjoint());
  }
  ToeplitzResult out;
  out.op.matrix = std::move(acc);
  out.op.factor_dims = {basis.n_modes};
  out.op.hbar = basis.hbar;
  out.max_point_deficit = worst;
  return out;
}

DensityOperator toeplitz_op(const FockBasis& basis, const PhaseMeasure& m) {
  return toeplitz(basis, m).op;
}

double husimi_at(const FockBasis& basis, const DensityOperator& r, double q, double p) {
  Vec c = coherent_vector(basis, q, p).coeffs;
  Cd v = (c.adjoint() * r.matrix * c)(0, 0);
  return v.real() / (2.0 * kPi * basis.hbar);
}

PhaseFunction husimi(const FockBasis& basis, const DensityOperator& r, const PhaseGrid& grid) {
  int nq = int(grid.qs.size()), np = int(grid.ps.size());
  // evaluate <z|R|z> via a matrix of coherent coefficient columns per q,
  // sweeping p; cost O(nq np n^2) dominated by the R c products
  PhaseFunction f;
  f.grid = grid;
  f.values = RMat(nq, np);
  for (int i = 0; i < nq; ++i) {
    for (int j = 0; j < np; ++j) {
      Vec c = coherent_vector(basis, grid.qs(i), grid.ps(j)).coeffs;
      f.values(i, j) = ((c.adjoint() * r.matrix * c)(0, 0)).real() / (2.0 * kPi * basis.hbar);
    }
  }
  return f;
}

namespace {

// g(u) = r(q+u, q-u) for the Fock-matrix operator, evaluated by the Hermite
// recurrence at the two rotated positions.
void hermite_values(const FockBasis& basis, double x, RVec& out) {
  double u = x / std::sqrt(basis.hbar);
  double phi0 = std::pow(kPi * basis.hbar, -0.25) * std::exp(-0.5 * u * u);
  double prev = 0.0, cur = phi0;
  for (int k = 0; k < basis.n_modes; ++k) {
    out(k) = cur;
    double next = (std::sqrt(2.0) * u * cur - std::sqrt(double(k)) * prev) / std::sqrt(double(k + 1));
    prev = cur;
    cur = next;
  }
}

}  // namespace

double wigner_at(const FockBasis& basis, const DensityOperator& r, double q, double p) {
  // W(q,p) = (1/pi hbar) Int r(q+u, q-u) e^{-2ipu/hbar} du
  double reach = std::sqrt(2.0 * basis.hbar * basis.n_modes) + std::abs(q);
  double p_scale = std::sqrt(2.0 * basis.hbar * basis.n_modes) + std::abs(p);
  double du = std::min(0.25 * std::sqrt(basis.hbar), kPi * basis.hbar / (8.0 * p_scale));
  int m = int(std::ceil(2.0 * reach / du));
  RVec hu(basis.n_modes), hv(basis.n_modes);
  Cd acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double u = -reach + (i + 0.5) * (2.0 * reach / m);
    hermite_values(basis, q + u, hu);
    hermite_values(basis, q - u, hv);
    Cd rv = (hu.cast<Cd>().transpose() * r.matrix * hv.cast<Cd>())(0);
    acc += rv * std::exp(Cd(0.0, -2.0 * p * u / basis.hbar));
  }
  acc *= 2.0 * reach / m;
  return acc.real() / (kPi * basis.hbar);
}

PhaseFunction wigner(const FockBasis& basis, const DensityOperator& r, const PhaseGrid& grid) {
  int nq = int(grid.qs.size()), np = int(grid.ps.size());
  double p_max = std::max(std::abs(grid.ps(0)), std::abs(grid.ps(np - 1)));
  double du_need = kPi * basis.hbar / (4.0 * std::max(p_max, 1e-12));
  double reach = std::sqrt(2.0 * basis.hbar * basis.n_modes) + 1.0 * std::sqrt(basis.hbar);
  if (du_need > 0.5 * std::sqrt(basis.hbar)) du_need = 0.5 * std::sqrt(basis.hbar);
  int m = int(std::ceil(2.0 * reach / du_need));
  PhaseFunction f;
  f.grid = grid;
  f.values = RMat(nq, np);
  RVec hu(basis.n_modes), hv(basis.n_modes);
  std::vector<Cd> g(m);
  for (int i = 0; i < nq; ++i) {
    double q = grid.qs(i);
    double du = 2.0 * reach / m;
    for (int k = 0; k < m; ++k) {
      double u = -reach + (k + 0.5) * du;
      hermite_values(basis, q + u, hu);
      hermite_values(basis, q - u, hv);
      g[k] = (hu.cast<Cd>().transpose() * r.matrix * hv.cast<Cd>())(0);
    }
    for (int j = 0; j < np; ++j) {
      double p = grid.ps(j);
      Cd acc = 0.0;
      for (int k = 0; k < m; ++k) {
        double u = -reach + (k + 0.5) * du;
        acc += g[k] * std::exp(Cd(0.0, -2.0 * p * u / basis.hbar));
      }
      f.values(i, j) = (acc * du).real() / (kPi * basis.hbar);
    }
  }
  return f;
}

PhaseFunction heat_smooth(const PhaseFunction& f, double t) {
  if (t <= 0.0) return f;
  int nq = int(f.values.rows()), np = int(f.values.cols());
  double sigma = std::sqrt(2.0 * t);
  int pad_q = int(std::ceil(4.0 * sigma / f.grid.dq)) + 1;
  int pad_p = int(std::ceil(4.0 * sigma / f.grid.dp)) + 1;
  int mq = nq + 2 * pad_q, mp = np + 2 * pad_p;

  std::vector<Cd> buf(size_t(mq) * mp, Cd(0, 0));
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < np; ++j) buf[size_t(i + pad_q) * mp + (j + pad_p)] = f.values(i, j);

  fftw_plan fwd = fftw_plan_dft_2d(mq, mp, reinterpret_cast<fftw_complex*>(buf.data()),
                                   reinterpret_cast<fftw_complex*>(buf.data()), FFTW_FORWARD,
                                   FFTW_ESTIMATE);
  fftw_execute(fwd);
  fftw_destroy_plan(fwd);

  for (int i = 0; i < mq; ++i) {
    int ki = i <= mq / 2 ? i : i - mq;
    double kq = 2.0 * kPi * ki / (mq * f.grid.dq);
    for (int j = 0; j < mp; ++j) {
      int kj = j <= mp / 2 ? j : j - mp;
      double kp = 2.0 * kPi * kj / (mp * f.grid.dp);
      buf[size_t(i) * mp + j] *= std::exp(-t * (kq * kq + kp * kp));
    }
  }

  fftw_plan bwd = fftw_plan_dft_2d(mq, mp, reinterpret_cast<fftw_complex*>(buf.data()),
                                   reinterpret_cast<fftw_complex*>(buf.data()), FFTW_BACKWARD,
                                   FFTW_ESTIMATE);
  fftw_execute(bwd);
  fftw_destroy_plan(bwd);

  PhaseFunction out;
  out.grid = f.grid;
  out.values = RMat(nq, np);
  double scale = 1.0 / (double(mq) * mp);
  for (int i = 0; i < nq; ++i)
    for (int j = 0; j < np; ++j)
      out.values(i, j) = buf[size_t(i + pad_q) * mp + (j + pad_p)].real() * scale;
  return out;
}

AggregatedMeasure aggregate_to_measure(const PhaseFunction& f, int max_cells, double cutoff) {
  int nq = int(f.values.rows()), np = int(f.values.cols());
  int bq = std::max(1, (nq + max_cells - 1) / max_cells);
  int bp = std::max(1, (np + max_cells - 1) / max_cells);
  double cell = f.grid.dq * f.grid.dp;

  AggregatedMeasure out;
  double kept = 0.0, var_acc = 0.0, total = 0.0;
  for (int i0 = 0; i0 < nq; i0 += bq) {
    for (int j0 = 0; j0 < np; j0 += bp) {
      double mass = 0.0, mq = 0.0, mp2 = 0.0, m2 = 0.0;
      for (int i = i0; i < std::min(i0 + bq, nq); ++i)
        for (int j = j0; j < std::min(j0 + bp, np); ++j) {
          double w = std::max(0.0, f.values(i, j)) * cell;
          mass += w;
          mq += w * f.grid.qs(i);
          mp2 += w * f.grid.ps(j);
          m2 += w * (f.grid.qs(i) * f.grid.qs(i) + f.grid.ps(j) * f.grid.ps(j));
        }
      total += mass;
      if (mass <= cutoff) continue;
      double cq = mq / mass, cp = mp2 / mass;
      out.measure.points.push_back({cq, cp});
      out.measure.weights.push_back(mass);
      var_acc += m2 - mass * (cq * cq + cp * cp);
      kept += mass;
    }
  }
  out.dropped_mass = std::max(0.0, total - kept);
  out.dispersion_slack = std::sqrt(std::max(0.0, var_acc));
  // renormalize so downstream solvers see a probability measure
  if (kept > 0)
    for (double& w : out.measure.weights) w /= kept;
  return out;
}

void write_phase_function_csv(const PhaseFunction& f, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "q,p,value\n";
  for (int i = 0; i < f.values.rows(); ++i)
    for (int j = 0; j < f.values.cols(); ++j)
      os << f.grid.qs(i) << ',' << f.grid.ps(j) << ',' << f.values(i, j) << '\n';
}

}  // namespace qot
