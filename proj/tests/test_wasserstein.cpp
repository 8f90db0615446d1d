#include <doctest.h>

#include "qot/rng.hpp"
#include "qot/wasserstein.hpp"

using namespace qot;

namespace {

PhaseMeasure random_cloud(int points, double radius, std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  PhaseMeasure m;
  double total = 0.0;
  for (int i = 0; i < points; ++i) {
    m.points.push_back({radius * (2 * rng.next_double() - 1), radius * (2 * rng.next_double() - 1)});
    double w = 0.1 + rng.next_double();
    m.weights.push_back(w);
    total += w;
  }
  for (auto& w : m.weights) w /= total;
  return m;
}

// exhaustive check of a 2x2 transportation problem: one free parameter
double brute_force_two_by_two(const PhaseMeasure& mu, const PhaseMeasure& nu) {
  double c00 = sq_dist(mu.points[0], nu.points[0]);
  double c01 = sq_dist(mu.points[0], nu.points[1]);
  double c10 = sq_dist(mu.points[1], nu.points[0]);
  double c11 = sq_dist(mu.points[1], nu.points[1]);
  double lo = std::max(0.0, mu.weights[0] - nu.weights[1]);
  double hi = std::min(mu.weights[0], nu.weights[0]);
  // cost is affine in t = pi_00, so the optimum is at an endpoint
  auto cost = [&](double t) {
    return t * c00 + (mu.weights[0] - t) * c01 + (nu.weights[0] - t) * c10 +
           (mu.weights[1] - nu.weights[0] + t) * c11;
  };
  return std::min(cost(lo), cost(hi));
}

}  // namespace

TEST_CASE("point masses: only one coupling") {
  PhaseMeasure mu = point_mass(0.3, -0.4);
  PhaseMeasure nu = point_mass(-0.7, 0.1);
  W2Result w = w2_discrete(mu, nu);
  CHECK(w.w2 == doctest::Approx(std::sqrt(sq_dist(mu.points[0], nu.points[0]))).epsilon(1e-14));
  CHECK(w.plan.entries.size() == 1);
}

TEST_CASE("identical measures have zero distance and diagonal plan") {
  PhaseMeasure mu = random_cloud(7, 1.0, 42, 0);
  W2Result w = w2_discrete(mu, mu);
  CHECK(w.w2 == doctest::Approx(0.0));
  for (const auto& e : w.plan.entries) CHECK(e.i == e.j);
}

TEST_CASE("proposition-4 geometry: aligned two-point supports") {
  double a = 0.5, b = 1.0;
  PhaseMeasure mu = two_point(-a, 0, 0.5, a, 0, 0.5);
  PhaseMeasure nu = two_point(-b, 0, 0.5, b, 0, 0.5);
  W2Result w = w2_discrete(mu, nu);
  CHECK(w.plan.cost == doctest::Approx((b - a) * (b - a)).epsilon(1e-13));
  CHECK(w.plan.cost == doctest::Approx(brute_force_two_by_two(mu, nu)).epsilon(1e-13));
  // plan sends +-a to +-b
  for (const auto& e : w.plan.entries)
    if (e.mass > 1e-12) CHECK(e.i == e.j);
}

TEST_CASE("LP agrees with the exhaustive 2x2 oracle on random instances") {
  for (int k = 0; k < 25; ++k) {
    PhaseMeasure mu = random_cloud(2, 1.5, 9, 2 * k);
    PhaseMeasure nu = random_cloud(2, 1.5, 9, 2 * k + 1);
    // make masses match
    double s = 0;
    for (double w : mu.weights) s += w;
    for (auto& w : mu.weights) w /= s;
    s = 0;
    for (double w : nu.weights) s += w;
    for (auto& w : nu.weights) w /= s;
    W2Result w2 = w2_discrete(mu, nu);
    CHECK(w2.plan.cost == doctest::Approx(brute_force_two_by_two(mu, nu)).epsilon(1e-12));
  }
}

TEST_CASE("feasibility of the returned plan") {
  PhaseMeasure mu = random_cloud(9, 1.0, 4, 0);
  PhaseMeasure nu = random_cloud(6, 1.0, 4, 1);
  W2Result w = w2_discrete(mu, nu);
  std::vector<double> rows = w.plan.row_sums(mu.size());
  std::vector<double> cols = w.plan.col_sums(nu.size());
  for (int i = 0; i < mu.size(); ++i) CHECK(rows[i] == doctest::Approx(mu.weights[i]).epsilon(1e-12));
  for (int j = 0; j < nu.size(); ++j) CHECK(cols[j] == doctest::Approx(nu.weights[j]).epsilon(1e-12));
  for (const auto& e : w.plan.entries) CHECK(e.mass >= 0.0);
}

TEST_CASE("mass mismatch is rejected") {
  PhaseMeasure mu = point_mass(0, 0);
  PhaseMeasure nu = point_mass(1, 0);
  nu.weights[0] = 0.9;
  CHECK_THROWS_AS(w2_discrete(mu, nu), std::invalid_argument);
}

TEST_CASE("zero-weight atoms are dropped") {
  PhaseMeasure mu, nu;
  mu.points = {{0, 0}, {5, 5}};
  mu.weights = {1.0, 0.0};
  nu.points = {{1, 0}};
  nu.weights = {1.0};
  W2Result w = w2_discrete(mu, nu);
  CHECK(w.w2 == doctest::Approx(1.0));
}

TEST_CASE("triangle inequality on random triples") {
  for (int k = 0; k < 50; ++k) {
    PhaseMeasure a = random_cloud(3 + k % 10, 1.0, 77, 3 * k);
    PhaseMeasure b = random_cloud(3 + (k + 4) % 10, 1.0, 77, 3 * k + 1);
    PhaseMeasure c = random_cloud(3 + (k + 7) % 10, 1.0, 77, 3 * k + 2);
    double ab = w2_discrete(a, b).w2;
    double bc = w2_discrete(b, c).w2;
    double ac = w2_discrete(a, c).w2;
    CHECK(ac <= ab + bc + 1e-9);
  }
}

TEST_CASE("kantorovich weak duality for sampled feasible dual pairs") {
  PhaseMeasure mu = random_cloud(6, 1.0, 13, 0);
  PhaseMeasure nu = random_cloud(5, 1.0, 13, 1);
  double primal = w2_discrete(mu, nu).plan.cost;
  CounterRng rng(13, 2);
  for (int trial = 0; trial < 40; ++trial) {
    // a(x) = min_j |x-y_j|^2 - b_j for random b: always feasible
    std::vector<double> b(nu.size());
    for (auto& v : b) v = 2.0 * rng.next_gaussian();
    double dual = 0.0;
    for (int i = 0; i < mu.size(); ++i) {
      double a = 1e300;
      for (int j = 0; j < nu.size(); ++j)
        a = std::min(a, sq_dist(mu.points[i], nu.points[j]) - b[j]);
      dual += mu.weights[i] * a;
    }
    for (int j = 0; j < nu.size(); ++j) dual += nu.weights[j] * b[j];
    CHECK(dual <= primal + 1e-10);
  }
}

TEST_CASE("1-d quantile oracle") {
  SUBCASE("translation of equal clouds") {
    std::vector<double> xs = {-1.0, -0.2, 0.5, 1.3};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(x + 0.7);
    CHECK(w2_1d_quantile(xs, ys) == doctest::Approx(0.7).epsilon(1e-13));
  }
  SUBCASE("matches the LP on equal-weight supports") {
    CounterRng rng(21, 0);
    for (int k = 0; k < 10; ++k) {
      int n = 5 + k;
      PhaseMeasure mu, nu;
      std::vector<double> xs, ys;
      for (int i = 0; i < n; ++i) {
        double x = rng.next_gaussian(), y = 0.4 + rng.next_gaussian();
        xs.push_back(x);
        ys.push_back(y);
        mu.points.push_back({x, 0.0});
        mu.weights.push_back(1.0 / n);
        nu.points.push_back({y, 0.0});
        nu.weights.push_back(1.0 / n);
      }
      CHECK(w2_1d_quantile(xs, ys) == doctest::Approx(w2_discrete(mu, nu).w2).epsilon(1e-10));
    }
  }
  SUBCASE("two-point unequal case agrees with the LP") {
    std::vector<double> xs = {-0.5, 0.5}, wx = {0.5, 0.5};
    std::vector<double> ys = {-1.0, 1.0}, wy = {0.5, 0.5};
    CHECK(w2_1d_quantile(xs, wx, ys, wy) == doctest::Approx(0.5).epsilon(1e-13));
  }
}

TEST_CASE("gaussian closed form") {
  SUBCASE("identical covariances reduce to the mean distance") {
    RVec m1(2), m2(2);
    m1 << 0, 0;
    m2 << 3, 4;
    RMat id = RMat::Identity(2, 2);
    CHECK(w2_gaussian(m1, id, m2, id) == doctest::Approx(5.0).epsilon(1e-13));
  }
  SUBCASE("scalar case") {
    RVec z = RVec::Zero(1);
    RMat a1 = RMat::Identity(1, 1), a2 = 4.0 * RMat::Identity(1, 1);
    CHECK(w2_gaussian(z, a1, z, a2) == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("non-PSD covariance rejected") {
    RVec z = RVec::Zero(1);
    RMat bad = -RMat::Identity(1, 1);
    CHECK_THROWS_AS(w2_gaussian(z, bad, z, bad), std::invalid_argument);
  }
}

TEST_CASE("cyclical monotonicity") {
  PhaseMeasure mu = two_point(-0.5, 0, 0.5, 0.5, 0, 0.5);
  PhaseMeasure nu = two_point(-1.0, 0, 0.5, 1.0, 0, 0.5);
  W2Result w = w2_discrete(mu, nu);
  CHECK(verify_cyclical_monotonicity(mu, nu, w.plan).pass);

  TransportPlan crossed;
  crossed.entries = {{0, 1, 0.5}, {1, 0, 0.5}};
  CycleReport rep = verify_cyclical_monotonicity(mu, nu, crossed);
  CHECK_FALSE(rep.pass);
  CHECK(rep.cycle.size() == 2);
  // swapping reduces the cost by 2 * 2 * (2a)(2b - ...) = 8ab per unit mass
  CHECK(rep.worst_violation == doctest::Approx(4.0 * 0.5 * 1.0 * 2.0).epsilon(1e-12));

  // self plan trivially monotone
  W2Result self = w2_discrete(mu, mu);
  CHECK(verify_cyclical_monotonicity(mu, mu, self.plan).pass);
}
