#include "qot/density.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace qot {

DensityOperator make_density(const FockBasis& basis, Mat m, double trace_tol) {
  DensityOperator r;
  r.matrix = std::move(m);
  r.factor_dims = {basis.n_modes};
  r.hbar = basis.hbar;
  r.trace_tol = trace_tol;
  if (r.matrix.rows() != basis.n_modes || r.matrix.cols() != basis.n_modes)
    throw std::invalid_argument("make_density: matrix size does not match basis");
  return r;
}

DensityOperator pure_state(const StateVector& s) {
  Vec c = s.normalized().coeffs;
  DensityOperator r;
  r.matrix = c * c.adjoint();
  r.factor_dims = {s.basis->n_modes};
  r.hbar = s.basis->hbar;
  return r;
}

DensityOperator maximally_mixed(const FockBasis& basis, int n_levels) {
  if (n_levels < 1 || n_levels > basis.n_modes)
    throw std::invalid_argument("maximally_mixed: bad level count");
  Mat m = Mat::Zero(basis.n_modes, basis.n_modes);
  for (int k = 0; k < n_levels; ++k) m(k, k) = 1.0 / n_levels;
  return make_density(basis, std::move(m));
}

DensityDiagnostics validate(const DensityOperator& r) {
  DensityDiagnostics d;
  d.hermiticity_defect = hermiticity_defect(r.matrix);
  d.trace_defect = std::abs(r.matrix.trace().real() - 1.0) + std::abs(r.matrix.trace().imag());
  d.min_eigenvalue = min_eigenvalue(hermitize(r.matrix));
  double scale = r.matrix.norm();
  d.pass = true;
  if (d.hermiticity_defect > 1e-10 * std::max(1.0, scale)) {
    d.pass = false;
    d.failure = "hermiticity";
  } else if (d.min_eigenvalue < -1e-9 * std::max(1.0, scale)) {
    d.pass = false;
    d.failure = "psd";
  } else if (d.trace_defect > std::max(r.trace_tol, 1e-12)) {
    d.pass = false;
    d.failure = "trace";
  }
  return d;
}

DensityOperator clip_to_density(const DensityOperator& r) {
  DensityOperator out = r;
  out.matrix = project_psd(hermitize(r.matrix));
  double t = out.matrix.trace().real();
  if (t <= 0) throw std::runtime_error("clip_to_density: nonpositive trace");
  out.matrix /= t;
  return out;
}

OperatorNormReport norms(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  OperatorNormReport rep;
  rep.op_norm = s.size() ? s(0) : 0.0;
  rep.hs_norm = s.norm();
  rep.trace_norm = s.sum();
  return rep;
}

DensityOperator tensor(const DensityOperator& r, const DensityOperator& s) {
  DensityOperator out;
  out.matrix = kron(r.matrix, s.matrix);
  out.factor_dims = r.factor_dims;
  out.factor_dims.insert(out.factor_dims.end(), s.factor_dims.begin(), s.factor_dims.end());
  out.hbar = r.hbar;
  out.trace_tol = r.trace_tol + s.trace_tol;
  return out;
}

Mat partial_trace(const Mat& t, const std::vector<int>& dims, const std::vector<int>& keep) {
  int nf = int(dims.size());
  for (int k : keep)
    if (k < 0 || k >= nf) throw std::invalid_argument("partial_trace: bad index set");
  std::vector<int> drop;
  for (int i = 0; i < nf; ++i)
    if (std::find(keep.begin(), keep.end(), i) == keep.end()) drop.push_back(i);

  long keep_dim = 1, drop_dim = 1;
  for (int k : keep) keep_dim *= dims[k];
  for (int k : drop) drop_dim *= dims[k];

  // strides of each factor in the row-major composite index
  std::vector<long> stride(nf, 1);
  for (int i = nf - 2; i >= 0; --i) stride[i] = stride[i + 1] * dims[i + 1];

  auto composite = [&](const std::vector<int>& facs, const std::vector<int>& idx) {
    long c = 0;
    for (size_t j = 0; j < facs.size(); ++j) c += stride[facs[j]] * idx[j];
    return c;
  };
  auto unpack = [&](const std::vector<int>& facs, long flat, std::vector<int>& idx) {
    for (int j = int(facs.size()) - 1; j >= 0; --j) {
      idx[j] = int(flat % dims[facs[j]]);
      flat /= dims[facs[j]];
    }
  };

  Mat out = Mat::Zero(keep_dim, keep_dim);
  std::vector<int> ik(keep.size()), jk(keep.size()), id(drop.size());
  for (long i = 0; i < keep_dim; ++i) {
    unpack(keep, i, ik);
    long base_i = composite(keep, ik);
    for (long j = 0; j < keep_dim; ++j) {
      unpack(keep, j, jk);
      long base_j = composite(keep, jk);
      Cd acc = 0.0;
      for (long m = 0; m < drop_dim; ++m) {
        unpack(drop, m, id);
        long off = composite(drop, id);
        acc += t(base_i + off, base_j + off);
      }
      out(i, j) = acc;
    }
  }
  return out;
}

DensityOperator partial_trace(const DensityOperator& t, const std::vector<int>& keep) {
  DensityOperator out;
  out.matrix = partial_trace(t.matrix, t.factor_dims, keep);
  for (int k : keep) out.factor_dims.push_back(t.factor_dims[k]);
  out.hbar = t.hbar;
  out.trace_tol = t.trace_tol;
  return out;
}

DensityOperator marginal_k(const DensityOperator& r_n, int k) {
  if (k < 1 || k > r_n.n_factors()) throw std::invalid_argument("marginal_k: bad k");
  std::vector<int> keep(k);
  std::iota(keep.begin(), keep.end(), 0);
  return partial_trace(r_n, keep);
}

double energy(const FockBasis& basis, const DensityOperator& r) {
  Mat osc = basis.oscillator();
  double e = 0.0;
  int nf = r.n_factors();
  for (int j = 0; j < nf; ++j) {
    std::vector<int> keep{j};
    Mat rj = nf == 1 ? r.matrix : partial_trace(r.matrix, r.factor_dims, keep);
    e += (osc * rj).trace().real();
  }
  return e;
}

double rank_estimate_tol(const DensityOperator& r, double tol) {
  RVec ev = hermitian_eigenvalues(hermitize(r.matrix));
  int c = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev(i) > tol) ++c;
  return c;
}

bool is_rank_one(const DensityOperator& r, double tol) {
  RVec ev = hermitian_eigenvalues(hermitize(r.matrix));
  int n = int(ev.size());
  return ev(n - 1) > 0 && (n == 1 || std::abs(ev(n - 2)) <= tol);
}

Vec principal_vector(const DensityOperator& r) {
  HermitianEig e = hermitian_eig(hermitize(r.matrix));
  return e.vectors.col(e.vectors.cols() - 1);
}

}  // namespace qot
