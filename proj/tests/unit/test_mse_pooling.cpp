#include <doctest.h>

#include <stdexcept>
#include <tuple>

#include <cmath>
#include <vector>

#include "clusterpool/mse_pooling.hpp"
#include "clusterpool/rng.hpp"

using namespace clusterpool;

namespace {

double rel_err(double got, double want) { return std::abs(got - want) / std::max(1.0, std::abs(want)); }

// Var(mu | mu + sigma/sqrt(N1) Z <= midpoint) for mu ~ U(a, b), by composite Simpson.
double gamma_oracle(double a, double b, double sigma, int n1) {
  const double m = 0.5 * (a + b), s = sigma / std::sqrt(static_cast<double>(n1));
  const int steps = 200000;
  const double h = (b - a) / steps;
  double w0 = 0, w1 = 0, w2 = 0;
  for (int i = 0; i <= steps; ++i) {
    const double mu = a + i * h;
    const double coef = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double p = 0.5 * std::erfc(-(m - mu) / s / std::sqrt(2.0));
    w0 += coef * p;
    w1 += coef * p * mu;
    w2 += coef * p * mu * mu;
  }
  const double mean = w1 / w0;
  return w2 / w0 - mean * mean;
}

}  // namespace

TEST_CASE("shrunken_decision examples and limits") {
  CHECK(shrunken_decision(0.0, 99.0, 3.5, 10) == 3.5);
  CHECK(shrunken_decision(kInf, 40.0, 3.5, 10) == 40.0);
  CHECK(shrunken_decision(10.0, 40.0, 30.0, 10) == doctest::Approx(35.0).epsilon(1e-15));
  CHECK_THROWS_AS(shrunken_decision(1.0, 0.0, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(shrunken_decision(-1.0, 0.0, 0.0, 3), std::invalid_argument);
}

TEST_CASE("shrunken_decision stays between sample mean and anchor") {
  Stream rng(11);
  for (int t = 0; t < 2000; ++t) {
    const double mean = rng.uniform(-50, 50), anchor = rng.uniform(-50, 50), alpha = rng.uniform(0, 100);
    const int n = 1 + static_cast<int>(rng.below(20));
    const double x = shrunken_decision(alpha, anchor, mean, n);
    CHECK(x >= std::min(mean, anchor) - 1e-12);
    CHECK(x <= std::max(mean, anchor) + 1e-12);
  }
}

TEST_CASE("apriori_params examples") {
  std::vector<MseProblemMoments> pair{{-1, 1}, {1, 1}};
  auto p = apriori_params(pair);
  CHECK(p.anchor_mean == 0.0);
  CHECK(p.alpha == 1.0);

  std::vector<MseProblemMoments> flat{{5, 1}, {5, 1}, {5, 1}};
  p = apriori_params(flat);
  CHECK(p.anchor_mean == 5.0);
  CHECK(p.alpha == kInf);

  std::vector<MseProblemMoments> spread{{0, 3}, {2, 3}, {4, 3}};
  p = apriori_params(spread);
  CHECK(p.anchor_mean == 2.0);
  CHECK(p.alpha == doctest::Approx(9.0 / 8.0).epsilon(1e-15));

  CHECK_THROWS_AS(apriori_params(spread, Groups{{0}, {}}), std::invalid_argument);
}

TEST_CASE("expected and SAA cost examples") {
  std::vector<MseProblemMoments> one{{0, 1}};
  CHECK(expected_cost_mse({1.0, 1.0}, one, 1) == doctest::Approx(1.5).epsilon(1e-15));

  std::vector<MseProblemMoments> m{{3, 4}};
  CHECK(saa_expected_cost(m, 10) == doctest::Approx(4.4).epsilon(1e-15));
  std::vector<MseProblemMoments> zero{{3, 0}};
  CHECK(saa_expected_cost(zero, 10) == 0.0);
  std::vector<MseProblemMoments> two{{0, 1}, {0, 3}};
  CHECK(saa_expected_cost(two, 2) == 6.0);

  std::vector<MseProblemMoments> mixed{{1, 2}, {4, 1}, {-2, 5}};
  CHECK(expected_cost_mse({0.0, 7.0}, mixed, 5) == doctest::Approx(saa_expected_cost(mixed, 5)).epsilon(1e-14));
  // alpha = inf: sum sigma^2 + sum (mu - mu0)^2 = 8 + (1 + 16 + 4)
  CHECK(expected_cost_mse({kInf, 0.0}, mixed, 5) == doctest::Approx(29.0).epsilon(1e-14));
}

TEST_CASE("a-priori alpha minimizes expected cost on a grid") {
  Stream rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<MseProblemMoments> m(8);
    for (auto& x : m) x = {rng.uniform(0, 20), rng.uniform(0.1, 10)};
    const auto p = apriori_params(m);
    const int n = 2 + static_cast<int>(rng.below(10));
    const double best = expected_cost_mse(p, m, n);
    for (double a = 0.0; a < 50.0; a += 0.25) CHECK(best <= expected_cost_mse({a, p.anchor_mean}, m, n) + 1e-10);
  }
}

TEST_CASE("pooling benefit identity") {
  Stream rng(9);
  for (int t = 0; t < 100; ++t) {
    std::vector<MseProblemMoments> m(6);
    double s2 = 0.0;
    for (auto& x : m) {
      x = {rng.uniform(-5, 5), rng.uniform(0.1, 4)};
      s2 += x.sigma2;
    }
    const int n = 1 + static_cast<int>(rng.below(15));
    const auto p = apriori_params(m);
    const double benefit = saa_expected_cost(m, n) - expected_cost_mse(p, m, n);
    CHECK(rel_err(benefit, (s2 / n) * p.alpha / (n + p.alpha)) < 1e-10);
  }
}

TEST_CASE("cost_decomposition reconciles") {
  const auto d = cost_decomposition({10.0, 3.0}, 3.0, 4.0, 10);
  CHECK(d.bias == 0.0);
  CHECK(d.variance_reduction == doctest::Approx(0.3).epsilon(1e-14));
  Stream rng(3);
  for (int t = 0; t < 500; ++t) {
    const double alpha = rng.uniform() < 0.1 ? kInf : rng.uniform(0, 30);
    const PoolingParams p{alpha, rng.uniform(-10, 10)};
    const MseProblemMoments m{rng.uniform(-10, 10), rng.uniform(0, 9)};
    const int n = 1 + static_cast<int>(rng.below(12));
    const auto c = cost_decomposition(p, m.mu, m.sigma2, n);
    const std::vector<MseProblemMoments> one{m};
    CHECK(rel_err(c.saa_cost + c.bias - c.variance_reduction, expected_cost_mse(p, one, n)) < 1e-12);
  }
}

TEST_CASE("data_driven_params examples") {
  std::vector<double> a{0, 2}, b{4, 6};
  std::vector<MseSampleStats> s{MseSampleStats::from_samples(a), MseSampleStats::from_samples(b)};
  auto p = data_driven_params(s);
  CHECK(p.anchor_mean == 3.0);
  CHECK(p.alpha == doctest::Approx(2.0 / 3.0).epsilon(1e-15));

  std::vector<double> c{1, 1};
  std::vector<MseSampleStats> same{MseSampleStats::from_samples(c), MseSampleStats::from_samples(c)};
  p = data_driven_params(same);
  CHECK(p.anchor_mean == 1.0);
  CHECK(p.alpha == kInf);

  std::vector<double> single{1};
  std::vector<MseSampleStats> bad{MseSampleStats::from_samples(single)};
  CHECK_FALSE(bad[0].sample_var.has_value());
  CHECK_THROWS_AS(data_driven_params(bad), std::invalid_argument);
  CHECK_THROWS_AS(data_driven_params(std::vector<MseSampleStats>{}), std::invalid_argument);
}

TEST_CASE("asymptotic_benefit") {
  TwoClusterDesign g{0, 1, 0, 1, 10, 1};
  auto r = asymptotic_benefit(g);
  CHECK(r.alpha_cluster_limit == doctest::Approx(4.0 * r.alpha_direct_limit).epsilon(1e-15));

  g.d = 2;
  r = asymptotic_benefit(g);
  CHECK(r.delta1 > 0.0);
  // 12/(1+6+12) = 12/19; delta1 = 1/(10 + 12/19) - 1/(9 + 48)
  CHECK(r.delta1 == doctest::Approx(1.0 / (10.0 + 12.0 / 19.0) - 1.0 / 57.0).epsilon(1e-14));
  CHECK(r.conditions_hold);

  double prev = -1e300;
  for (double d = 0.0; d <= 5.0; d += 0.05) {
    g.d = d;
    const double v = asymptotic_benefit(g).delta1;
    CHECK(v >= prev);
    prev = v;
  }

  TwoClusterDesign wide{0, 10, 1, 1, 10, 1};
  r = asymptotic_benefit(wide);
  CHECK(r.condition_undefined);
  CHECK_FALSE(r.conditions_hold);
  CHECK_THROWS_AS(asymptotic_benefit(TwoClusterDesign{1, 0, 0, 1, 10, 1}), std::invalid_argument);
}

TEST_CASE("no_benefit_function matches high-precision values") {
  // mpmath at 30 digits, closed form with N1 explicit.
  struct Row {
    double y;
    int n1;
    double L;
  };
  const Row rows[] = {{0.5, 1, -5.11425036025586}, {1, 2, -11.6498118849776}, {2, 5, -3.77325469914702},
                      {4, 1, -1.46574021942939}, {6, 2, -1.22270204093022}, {2, 2, -3.38036183397389}};
  for (const auto& r : rows) CHECK(rel_err(no_benefit_function(r.y, r.n1), r.L) < 1e-9);
  CHECK_THROWS_AS(no_benefit_function(0.0, 1), std::invalid_argument);
}

TEST_CASE("no_benefit_function is negative across the documented range") {
  for (double y : {0.5, 1.0, 2.0, 4.0, 6.0})
    for (int n1 : {1, 2, 3, 5, 7}) {
      CHECK(no_benefit_function(y, n1) < 0.0);
      CHECK(no_benefit_predicate(y, n1));
    }
  CHECK(no_benefit_predicate(6.5, 1));
}

TEST_CASE("derived no-benefit form equals the Gamma-based criterion") {
  const std::pair<double, double> frozen[] = {{0.5, -0.362915}, {1, -0.361770}, {2, -0.360771}, {4, -0.399816},
                                              {5, -0.450546},   {6, -0.513663}, {7, -0.578242}};
  for (auto [y, L] : frozen) CHECK(no_benefit_function_derived(y) == doctest::Approx(L).epsilon(2e-6));
  for (int n1 : {1, 3, 6}) {
    const double sigma = 2.0, a = 1.0;
    for (double y : {0.7, 1.5, 3.0, 5.5}) {
      const double b = a + y * sigma / std::sqrt(static_cast<double>(n1));
      const double g = gamma_within_cluster_d0(a, b, sigma, n1);
      const double want = sigma * sigma / (n1 * g) - 12.0 / (y * y) - 1.0;
      CHECK(rel_err(no_benefit_function_derived(y), want) < 1e-10);
    }
  }
}

TEST_CASE("gamma_within_cluster_d0") {
  CHECK(gamma_within_cluster_d0(0, 1, 1, 1) == doctest::Approx(0.0791250043247960639).epsilon(1e-13));
  CHECK(gamma_within_cluster_d0(0, 3, 1, 2) == doctest::Approx(0.398002339026926).epsilon(1e-12));
  CHECK(rel_err(gamma_within_cluster_d0(0, 1, 1, 1000000), 1.0 / 48.0) < 1e-4);
  for (auto [a, b, s, n] : {std::tuple{0.0, 1.0, 1.0, 1}, std::tuple{10.0, 20.0, 5.0, 3}, std::tuple{0.0, 4.0, 1.0, 7}})
    CHECK(std::abs(gamma_within_cluster_d0(a, b, s, n) - gamma_oracle(a, b, s, n)) < 1e-6);
  for (double w : {0.1, 1.0, 5.0, 20.0})
    for (int n : {1, 2, 5, 50}) CHECK(gamma_within_cluster_d0(0, w, 1.0, n) >= 0.0);
}

TEST_CASE("misclassification_bound") {
  CHECK(misclassification_bound(0, 1, 3, 1) == 0.25);
  CHECK(misclassification_bound(1, 1, 4, 1) == doctest::Approx(0.079327626965728526).epsilon(1e-14));
  double prev = 1.0;
  for (double d = 0.0; d < 3.0; d += 0.1) {
    const double v = misclassification_bound(d, 2, 3, 1.5);
    CHECK(v < prev);
    prev = v;
  }
}
