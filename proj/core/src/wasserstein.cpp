#include "qot/wasserstein.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace qot {

std::vector<double> TransportPlan::row_sums(int m) const {
  std::vector<double> r(m, 0.0);
  for (const auto& e : entries) r[e.i] += e.mass;
  return r;
}

std::vector<double> TransportPlan::col_sums(int n) const {
  std::vector<double> c(n, 0.0);
  for (const auto& e : entries) c[e.j] += e.mass;
  return c;
}

namespace {

constexpr double kPivotTol = 1e-12;

// Transportation simplex with an explicit spanning-tree basis.
// Nodes 0..m-1 are sources, m..m+n-1 sinks; basic cells are tree edges.
class TransportSimplex {
 public:
  TransportSimplex(const std::vector<double>& supply, const std::vector<double>& demand,
                   const std::vector<std::vector<double>>& cost)
      : m_(int(supply.size())), n_(int(demand.size())), cost_(cost) {
    northwest_corner(supply, demand);
  }

  void solve() {
    const long max_pivots = 200L * (m_ + n_) * (m_ + n_) + 100000L;
    for (long it = 0; it < max_pivots; ++it) {
      compute_potentials();
      int ei = -1, ej = -1;
      // Bland: first cell in fixed scan order with negative reduced cost
      for (int i = 0; i < m_ && ei < 0; ++i)
        for (int j = 0; j < n_; ++j) {
          if (in_basis_(i, j)) continue;
          if (cost_[i][j] - u_[i] - v_[j] < -kPivotTol) {
            ei = i;
            ej = j;
            break;
          }
        }
      if (ei < 0) return;  // optimal
      pivot(ei, ej);
    }
    throw std::runtime_error("transportation simplex exceeded pivot cap");
  }

  std::vector<TransportPlan::Entry> plan() const {
    std::vector<TransportPlan::Entry> out;
    for (const auto& a : arcs_)
      if (a.alive && a.flow > 0.0) out.push_back({a.i, a.j, a.flow});
    return out;
  }

 private:
  struct Arc {
    int i = 0, j = 0;
    double flow = 0.0;
    bool alive = false;
  };

  int m_, n_;
  const std::vector<std::vector<double>>& cost_;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;  // node -> arc indices
  std::vector<double> u_, v_;
  Eigen::Matrix<signed char, Eigen::Dynamic, Eigen::Dynamic> basis_mark_;

  bool in_basis_(int i, int j) const { return basis_mark_(i, j) != 0; }

  void add_arc(int i, int j, double flow) {
    Arc a{i, j, flow, true};
    arcs_.push_back(a);
    int idx = int(arcs_.size()) - 1;
    adj_[i].push_back(idx);
    adj_[m_ + j].push_back(idx);
    basis_mark_(i, j) = 1;
  }

  void remove_arc(int idx) {
    Arc& a = arcs_[idx];
    a.alive = false;
    basis_mark_(a.i, a.j) = 0;
    auto& ra = adj_[a.i];
    ra.erase(std::find(ra.begin(), ra.end(), idx));
    auto& ca = adj_[m_ + a.j];
    ca.erase(std::find(ca.begin(), ca.end(), idx));
  }

  void northwest_corner(std::vector<double> supply, std::vector<double> demand) {
    adj_.assign(m_ + n_, {});
    basis_mark_.setZero(m_, n_);
    int i = 0, j = 0;
    while (i < m_ && j < n_) {
      double f = std::min(supply[i], demand[j]);
      add_arc(i, j, f);
      supply[i] -= f;
      demand[j] -= f;
      bool row_done = supply[i] <= kPivotTol;
      bool col_done = demand[j] <= kPivotTol;
      if (row_done && col_done) {
        // degenerate: close only one side, keep a zero basic cell next step
        if (i + 1 < m_)
          ++i;
        else
          ++j;
      } else if (row_done) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void compute_potentials() {
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<signed char> seen(m_ + n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int node = stack.back();
      stack.pop_back();
      for (int idx : adj_[node]) {
        const Arc& a = arcs_[idx];
        int other = (node < m_) ? m_ + a.j : a.i;
        if (seen[other]) continue;
        seen[other] = 1;
        if (node < m_)
          v_[a.j] = cost_[a.i][a.j] - u_[a.i];
        else
          u_[a.i] = cost_[a.i][a.j] - v_[a.j];
        stack.push_back(other);
      }
    }
  }

  // Unique tree path from source ei to sink ej.
  std::vector<int> tree_path(int ei, int ej) {
    std::vector<int> parent_arc(m_ + n_, -1), parent_node(m_ + n_, -1);
    std::vector<signed char> seen(m_ + n_, 0);
    std::vector<int> queue{ei};
    seen[ei] = 1;
    for (size_t h = 0; h < queue.size(); ++h) {
      int node = queue[h];
      if (node == m_ + ej) break;
      for (int idx : adj_[node]) {
        const Arc& a = arcs_[idx];
        int other = (node < m_) ? m_ + a.j : a.i;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_arc[other] = idx;
        parent_node[other] = node;
        queue.push_back(other);
      }
    }
    std::vector<int> path;
    int cur = m_ + ej;
    if (!seen[cur]) throw std::runtime_error("transportation basis is not connected");
    while (cur != ei) {
      path.push_back(parent_arc[cur]);
      cur = parent_node[cur];
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot(int ei, int ej) {
    std::vector<int> path = tree_path(ei, ej);
    // entering cell gets +theta; along the path from ei to ej, arcs leaving a
    // source node carry -theta, arcs entering a source node +theta
    double theta = std::numeric_limits<double>::infinity();
    int leave = -1;
    int node = ei;
    std::vector<signed char> sign(path.size());
    auto cell_less = [&](int a, int b) {
      return arcs_[a].i != arcs_[b].i ? arcs_[a].i < arcs_[b].i : arcs_[a].j < arcs_[b].j;
    };
    for (size_t k = 0; k < path.size(); ++k) {
      const Arc& a = arcs_[path[k]];
      bool forward = (node < m_);  // currently at a source, traversing (i -> j)
      sign[k] = forward ? -1 : +1;
      if (sign[k] < 0 &&
          (a.flow < theta || (a.flow == theta && (leave < 0 || cell_less(path[k], leave))))) {
        theta = a.flow;
        leave = path[k];
      }
      node = forward ? m_ + a.j : a.i;
    }
    if (leave < 0) throw std::runtime_error("pivot found no leaving arc");
    for (size_t k = 0; k < path.size(); ++k) {
      arcs_[path[k]].flow += sign[k] * theta;
      if (arcs_[path[k]].flow < 0.0) arcs_[path[k]].flow = 0.0;
    }
    remove_arc(leave);
    add_arc(ei, ej, theta);
  }
};

}  // namespace

W2Result w2_discrete(const PhaseMeasure& mu_in, const PhaseMeasure& nu_in) {
  // drop zero-weight atoms, keep index maps for the reported plan
  std::vector<int> mi, ni;
  std::vector<double> supply, demand;
  for (int i = 0; i < mu_in.size(); ++i)
    if (mu_in.weights[i] > 0.0) {
      mi.push_back(i);
      supply.push_back(mu_in.weights[i]);
    }
  for (int j = 0; j < nu_in.size(); ++j)
    if (nu_in.weights[j] > 0.0) {
      ni.push_back(j);
      demand.push_back(nu_in.weights[j]);
    }
  double sm = std::accumulate(supply.begin(), supply.end(), 0.0);
  double sn = std::accumulate(demand.begin(), demand.end(), 0.0);
  if (std::abs(sm - sn) > 1e-12)
    throw std::invalid_argument("w2_discrete: weight sums differ, problem infeasible");
  if (supply.empty()) throw std::invalid_argument("w2_discrete: empty measure");

  int m = int(supply.size()), n = int(demand.size());
  std::vector<std::vector<double>> cost(m, std::vector<double>(n));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      cost[i][j] = sq_dist(mu_in.points[mi[i]], nu_in.points[ni[j]]);

  TransportSimplex simplex(supply, demand, cost);
  simplex.solve();

  W2Result out;
  for (const auto& e : simplex.plan()) {
    out.plan.entries.push_back({mi[e.i], ni[e.j], e.mass});
    out.plan.cost += e.mass * cost[e.i][e.j];
  }
  out.plan.cost = std::max(0.0, out.plan.cost);
  out.w2 = std::sqrt(out.plan.cost);
  return out;
}

double w2_1d_quantile(const std::vector<double>& xs, const std::vector<double>& wxs,
                      const std::vector<double>& ys, const std::vector<double>& wys) {
  if (xs.size() != wxs.size() || ys.size() != wys.size())
    throw std::invalid_argument("w2_1d_quantile: size mismatch");
  std::vector<int> ox(xs.size()), oy(ys.size());
  std::iota(ox.begin(), ox.end(), 0);
  std::iota(oy.begin(), oy.end(), 0);
  std::sort(ox.begin(), ox.end(), [&](int a, int b) { return xs[a] < xs[b]; });
  std::sort(oy.begin(), oy.end(), [&](int a, int b) { return ys[a] < ys[b]; });

  double cost = 0.0;
  size_t i = 0, j = 0;
  double ri = wxs[ox[0]], rj = wys[oy[0]];
  while (i < ox.size() && j < oy.size()) {
    double step = std::min(ri, rj);
    double d = xs[ox[i]] - ys[oy[j]];
    cost += step * d * d;
    ri -= step;
    rj -= step;
    if (ri <= 1e-15 && ++i < ox.size()) ri = wxs[ox[i]];
    if (rj <= 1e-15 && ++j < oy.size()) rj = wys[oy[j]];
  }
  return std::sqrt(std::max(0.0, cost));
}

double w2_1d_quantile(const std::vector<double>& xs, const std::vector<double>& ys) {
  std::vector<double> wx(xs.size(), 1.0 / xs.size()), wy(ys.size(), 1.0 / ys.size());
  return w2_1d_quantile(xs, wx, ys, wy);
}

double w2_gaussian(const RVec& m1, const RMat& a1, const RVec& m2, const RMat& a2) {
  auto check_psd = [](const RMat& a) {
    if ((a - a.transpose()).norm() > 1e-10 * std::max(1.0, a.norm()))
      throw std::invalid_argument("w2_gaussian: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<RMat> es(a, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -1e-12 * std::max(1.0, a.norm()))
      throw std::invalid_argument("w2_gaussian: covariance not PSD");
  };
  check_psd(a1);
  check_psd(a2);
  RMat s1 = sqrt_psd(a1);
  RMat cross = sqrt_psd(RMat(s1 * a2 * s1));
  double tr = (a1 + a2).trace() - 2.0 * cross.trace();
  double v = (m1 - m2).squaredNorm() + std::max(0.0, tr);
  return std::sqrt(v);
}

CycleReport verify_cyclical_monotonicity(const PhaseMeasure& mu, const PhaseMeasure& nu,
                                         const TransportPlan& plan, double tol) {
  std::vector<TransportPlan::Entry> sup;
  for (const auto& e : plan.entries)
    if (e.mass > tol) sup.push_back(e);
  CycleReport rep;
  int k = int(sup.size());
  auto c = [&](int i, int j) { return sq_dist(mu.points[sup[i].i], nu.points[sup[j].j]); };
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      if (a == b) continue;
      double gain = c(a, a) + c(b, b) - c(a, b) - c(b, a);
      if (gain > rep.worst_violation) {
        rep.worst_violation = gain;
        rep.cycle = {a, b};
      }
    }
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      for (int d = 0; d < k; ++d) {
        if (a == b || b == d || a == d) continue;
        double gain = c(a, a) + c(b, b) + c(d, d) - c(a, b) - c(b, d) - c(d, a);
        if (gain > rep.worst_violation) {
          rep.worst_violation = gain;
          rep.cycle = {a, b, d};
        }
      }
  rep.pass = rep.worst_violation <= tol;
  return rep;
}

void write_plan_csv(const TransportPlan& plan, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  os << "i,j,mass\n";
  for (const auto& e : plan.entries) os << e.i << ',' << e.j << ',' << e.mass << '\n';
}

}  // namespace qot
