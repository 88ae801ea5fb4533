#include <doctest.h>

#include <stdexcept>
#include <tuple>

#include <numeric>

#include "clusterpool/benchmarks.hpp"
#include "clusterpool/datagen.hpp"
#include "clusterpool/rng.hpp"

using namespace clusterpool;

namespace {
const NewsvendorCost kNv{1.0, 19.0};
using Data = std::vector<std::vector<double>>;

Data gaussian_problems(const std::vector<double>& means, double sigma, std::size_t n, std::uint64_t seed) {
  Data d;
  for (std::size_t k = 0; k < means.size(); ++k) {
    Stream rng(seed, {k});
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal(means[k], sigma);
    d.push_back(v);
  }
  return d;
}
}  // namespace

TEST_CASE("SAA decisions") {
  const Data mse{{2, 4}};
  CHECK(saa_decisions(MseCost{}, mse) == std::vector<double>{3});
  std::vector<double> ten(10);
  std::iota(ten.begin(), ten.end(), 1.0);
  CHECK(saa_decisions(kNv, Data{ten}) == std::vector<double>{10});
  std::reverse(ten.begin(), ten.end());
  CHECK(saa_decisions(kNv, Data{ten}) == std::vector<double>{10});
  CHECK_THROWS_AS(saa_decisions(kNv, Data{{}}), std::invalid_argument);
}

TEST_CASE("aggregation modes") {
  const Data d{{0, 2}, {4, 6}};
  CHECK(aggregation_decisions(MseCost{}, d, NaiveAggregation{}) == std::vector<double>{3, 3});
  const auto singles = ClusterStructure::from_groups(2, {{0}, {1}});
  CHECK(aggregation_decisions(kNv, d, ClusterAggregation{singles}) == aggregation_decisions(kNv, d, NoAggregation{}));
  CHECK(aggregation_decisions(kNv, d, ClusterAggregation{ClusterStructure::single(2)}) ==
        aggregation_decisions(kNv, d, NaiveAggregation{}));
  const auto partial = ClusterStructure::from_groups(2, {{0}});
  CHECK_THROWS_AS(aggregation_decisions(kNv, d, ClusterAggregation{partial}), std::invalid_argument);
}

TEST_CASE("Welch test against a reference implementation") {
  // scipy.stats.ttest_ind(equal_var=False)
  const std::vector<double> x{1, 2, 3, 4}, y{2, 4, 6, 8, 10};
  const auto r = welch_test(x, y);
  CHECK(r.t == doctest::Approx(-2.2514363231593695).epsilon(1e-13));
  CHECK(r.p_value == doctest::Approx(0.06913359319239236).epsilon(1e-10));
  const auto s = welch_test(y, x);
  CHECK(s.p_value == doctest::Approx(r.p_value).epsilon(1e-15));
  CHECK(student_t_sf(1.7, 3.3) == doctest::Approx(0.08966163945354022).epsilon(1e-10));
  const std::vector<double> c{5, 5, 5};
  CHECK(welch_test(c, c).p_value == 1.0);
  CHECK_THROWS_AS(welch_test(std::vector<double>{1}, c), std::invalid_argument);
}

TEST_CASE("DAC mode selection") {
  const Data same(10, std::vector<double>{1, 2, 3, 4});
  auto r = dac_decisions(kNv, same, DacConfig{});
  CHECK(r.accept_fraction == 1.0);
  CHECK(r.mode == DacMode::Naive);
  CHECK(r.decisions == aggregation_decisions(kNv, same, NaiveAggregation{}));

  std::vector<double> spread(50);
  Stream rng(31);
  for (auto& m : spread) m = rng.uniform(0, 1000);
  const auto d = gaussian_problems(spread, 1.0, 10, 32);
  r = dac_decisions(kNv, d, DacConfig{});
  CHECK(r.accept_fraction < 0.4);
  CHECK(r.mode == DacMode::NoAggregation);
  CHECK(r.decisions == saa_decisions(kNv, d));
  CHECK(r.pairs_tested == 50 * 49 / 2);

  Data one_bad = same;
  one_bad[3] = {1};
  CHECK_THROWS_AS(dac_decisions(kNv, one_bad, DacConfig{}), std::invalid_argument);
  const DacConfig inverted{0.05, 0.3, 0.4};
  CHECK_THROWS_AS(inverted.validate(), std::invalid_argument);
}

TEST_CASE("DAC picks cluster-based aggregation in the two-cluster setting") {
  int cluster_based = 0;
  for (std::uint64_t r = 0; r < 100; ++r) {
    TwoClusterGenSpec spec{10, 20, 1, CommonSigma{5}, 200, 10, Stream::derive(33, {r})};
    const auto inst = gen_two_cluster(spec);
    const auto res = dac_decisions(MseCost{}, inst.samples, DacConfig{});
    cluster_based += res.mode == DacMode::ClusterBased;
    if (res.mode == DacMode::ClusterBased)
      CHECK(res.decisions == aggregation_decisions(MseCost{}, inst.samples, ClusterAggregation{res.clusters}));
  }
  CHECK(cluster_based > 50);
}

TEST_CASE("DAC accept fraction grows as the test size shrinks") {
  std::vector<double> means(30);
  Stream rng(34);
  for (auto& m : means) m = rng.uniform(0, 3);
  const auto d = gaussian_problems(means, 1.0, 8, 35);
  double prev = -1;
  for (double theta : {0.5, 0.2, 0.1, 0.05, 0.01, 0.001}) {
    DacConfig c;
    c.theta = theta;
    const double f = dac_accept_fraction(d, c);
    CHECK(f >= prev);
    prev = f;
  }
}

TEST_CASE("DAC pair subsampling is seeded and capped") {
  std::vector<double> means(200);
  Stream rng(36);
  for (auto& m : means) m = rng.uniform(0, 3);
  const auto d = gaussian_problems(means, 1.0, 5, 37);
  DacConfig c;
  c.max_pairs = 1000;
  c.seed = 5;
  std::size_t tested = 0;
  const double f1 = dac_accept_fraction(d, c, &tested);
  CHECK(tested == 1000);
  CHECK(dac_accept_fraction(d, c) == f1);
  c.max_pairs = 1000000;
  const double full = dac_accept_fraction(d, c, &tested);
  CHECK(tested == 200 * 199 / 2);
  CHECK(std::abs(full - f1) < 0.06);
}
