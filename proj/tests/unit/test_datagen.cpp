#include <doctest.h>

#include <stdexcept>
#include <tuple>

#include <cmath>
#include <set>
#include <sstream>

#include "clusterpool/datagen.hpp"
#include "clusterpool/rng.hpp"

using namespace clusterpool;

TEST_CASE("two-cluster generator intervals and determinism") {
  for (double d : {0.0, 0.5, 2.0}) {
    TwoClusterGenSpec spec{10, 20, d, CommonSigma{5}, 2000, 4, 1};
    const auto inst = gen_two_cluster(spec);
    const double mid = 15, shift = d * 10;
    for (std::size_t k = 0; k < spec.K; ++k) {
      const double mu = inst.truth[k].mu;
      if (inst.true_clusters.assignments[k] == 0) {
        CHECK(mu >= 10);
        CHECK(mu <= mid);
      } else {
        CHECK(mu >= mid + shift);
        CHECK(mu <= 20 + shift);
      }
      CHECK(inst.truth[k].sigma2 == 25.0);
      CHECK(inst.samples[k].size() == 4);
    }
    const auto again = gen_two_cluster(spec);
    CHECK(again.samples == inst.samples);
  }
  CHECK_THROWS_AS(gen_two_cluster(TwoClusterGenSpec{20, 10}), std::invalid_argument);
}

TEST_CASE("two-cluster mean moments at K = 1e5") {
  // Mixture of U(a, m) and U(m + s, b + s): mean m + s/2, variance (b-a)^2 (1 + 3d + 3d^2) / 12.
  for (double d : {0.0, 1.0}) {
    const double a = 10, b = 20, w = b - a;
    TwoClusterGenSpec spec{a, b, d, CommonSigma{1}, 100000, 2, 2};
    const auto inst = gen_two_cluster(spec);
    double s = 0, s2 = 0;
    for (const auto& m : inst.truth) {
      s += m.mu;
      s2 += m.mu * m.mu;
    }
    const double n = static_cast<double>(spec.K);
    const double mean = s / n, var = s2 / n - mean * mean;
    const double want_mean = 0.5 * (a + b + d * w);
    const double want_var = w * w * (1 + 3 * d + 3 * d * d) / 12.0;
    CHECK(std::abs(mean - want_mean) < 3 * std::sqrt(want_var / n));
    // SE of the sample variance from the fourth central moment, estimated in place.
    double m4 = 0;
    for (const auto& m : inst.truth) m4 += std::pow(m.mu - mean, 4);
    m4 /= n;
    CHECK(std::abs(var - want_var) < 3 * std::sqrt((m4 - var * var) / n));
  }
}

TEST_CASE("newsvendor generator") {
  NewsvendorGenSpec spec;
  spec.seed = 3;
  const auto inst = gen_newsvendor(spec);
  CHECK(spec.mu_low == 70.0);
  CHECK(spec.mu_high == 120.0);
  CHECK(spec.cv_mean == 0.2);
  CHECK(spec.K == 1000);
  CHECK(spec.N == 10);
  for (const auto& g : inst.truth) {
    CHECK(g.mu >= 70);
    CHECK(g.mu <= 120);
    CHECK(g.sigma == doctest::Approx(0.2 * g.mu).epsilon(1e-15));
  }
  spec.cv_sd = 0.5;
  for (const auto& g : gen_newsvendor(spec).truth) CHECK(g.sigma >= 0.0);
  CHECK(gen_newsvendor(spec).samples == gen_newsvendor(spec).samples);
}

TEST_CASE("sales CSV ingestion") {
  std::istringstream ok("problem_id,period,value\nsku1,3,5.5\nsku1,1,2\n\nsku2,1,0\nsku1,2,4\n");
  const auto data = read_sales_csv(ok);
  REQUIRE(data.problems.size() == 2);
  CHECK(data.problems[0].problem_id == "sku1");
  CHECK(data.problems[0].periods == std::vector<long long>{1, 2, 3});
  CHECK(data.problems[0].values == std::vector<double>{2, 4, 5.5});
  CHECK(data.problems[1].values == std::vector<double>{0});
  CHECK(data.warnings.empty());

  std::istringstream header_only("problem_id,period,value\n");
  const auto empty = read_sales_csv(header_only);
  CHECK(empty.problems.empty());
  CHECK(empty.warnings.size() == 1);

  auto error_line = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_sales_csv(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(error_line("problem_id,period,value\na,1,x\n") == 2);
  CHECK(error_line("problem_id,period,value\na,1,1\na,2\n") == 3);
  CHECK(error_line("problem_id,period,value\na,1,1\na,1,2\n") == 3);
  CHECK(error_line("problem_id,period,value\na,1,-1\n") == 2);
  CHECK(error_line("id,t,v\n") == 1);
}

TEST_CASE("subsample split") {
  std::vector<double> data(12);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] = static_cast<double>(i);
  const auto s = subsample_split(data, 10, 2, 42, 7);
  CHECK(s.train.clustering_samples.size() == 2);
  CHECK(s.train.pooling_samples.size() == 8);
  CHECK(s.test.size() == 2);
  std::multiset<double> all(s.test.begin(), s.test.end());
  for (double v : s.train.all_samples()) all.insert(v);
  CHECK(all == std::multiset<double>(data.begin(), data.end()));

  const auto z = subsample_split(data, 10, 0, 42, 7);
  CHECK(z.train.clustering_samples.empty());
  const auto again = subsample_split(data, 10, 2, 42, 7);
  CHECK(again.test == s.test);
  CHECK(again.train.pooling_samples == s.train.pooling_samples);
  CHECK_THROWS_AS(subsample_split(data, 13, 2, 42), std::invalid_argument);
}

TEST_CASE("stream utilities") {
  Stream a(5, {1, 2}), b(5, {1, 2}), c(5, {2, 1});
  CHECK(a.next_u64() == b.next_u64());
  CHECK(Stream(5, {1, 2}).next_u64() != c.next_u64());
  Stream r(9);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7);
  }
  const auto pick = r.sample_without_replacement(20, 20);
  CHECK(std::set<std::size_t>(pick.begin(), pick.end()).size() == 20);
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-14));
  CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-13));
}
