#include "clusterpool/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "clusterpool/numerics.hpp"
#include "clusterpool/rng.hpp"

namespace clusterpool {

void DacConfig::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("DAC: theta must lie in (0,1)");
  if (!(r_upper > 0.0 && r_upper <= 1.0)) throw std::invalid_argument("DAC: r_upper must lie in (0,1]");
  if (!(r_lower >= 0.0 && r_lower < 1.0)) throw std::invalid_argument("DAC: r_lower must lie in [0,1)");
  if (!(r_lower < r_upper)) throw std::invalid_argument("DAC: need r_lower < r_upper");
  if (max_pairs == 0) throw std::invalid_argument("DAC: max_pairs must be positive");
}

std::string to_string(DacMode m) {
  switch (m) {
    case DacMode::NoAggregation: return "NoAggregation";
    case DacMode::Naive: return "Naive";
    case DacMode::ClusterBased: return "ClusterBased";
  }
  return "?";
}

double saa_decision(const CostModel& model, std::span<const double> data) {
  if (data.empty()) throw std::invalid_argument("saa_decision: empty dataset");
  if (const auto* nv = std::get_if<NewsvendorCost>(&model))
    return problem_statistic(data, SampleQuantile{nv->critical_ratio()});
  return problem_statistic(data, SampleMean{});
}

std::vector<double> saa_decisions(const CostModel& model, std::span<const std::vector<double>> datasets) {
  std::vector<double> out;
  out.reserve(datasets.size());
  for (const auto& d : datasets) out.push_back(saa_decision(model, d));
  return out;
}

std::vector<double> aggregation_decisions(const CostModel& model, std::span<const std::vector<double>> datasets,
                                          const AggregationMode& mode) {
  if (std::holds_alternative<NoAggregation>(mode)) return saa_decisions(model, datasets);
  ClusterStructure cs = std::holds_alternative<NaiveAggregation>(mode)
                            ? ClusterStructure::single(datasets.size())
                            : std::get<ClusterAggregation>(mode).clusters;
  if (cs.assignments.size() != datasets.size()) throw std::invalid_argument("aggregation: partition size mismatch");
  for (int c : cs.assignments)
    if (c < 0) throw std::invalid_argument("aggregation: partition does not cover all problems");
  std::vector<double> out(datasets.size());
  for (const auto& group : cs.members()) {
    if (group.empty()) continue;
    std::vector<double> pooled;
    for (auto k : group) pooled.insert(pooled.end(), datasets[k].begin(), datasets[k].end());
    const double x = saa_decision(model, pooled);
    for (auto k : group) out[k] = x;
  }
  return out;
}

namespace {
struct Moments {
  double mean, var;
  double n;
};
Moments moments(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  const double m = s / static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, ss / static_cast<double>(x.size() - 1), static_cast<double>(x.size())};
}

WelchResult welch_from(const Moments& a, const Moments& b) {
  const double va = a.var / a.n, vb = b.var / b.n;
  const double se2 = va + vb;
  if (se2 == 0.0) return {0.0, kInf, a.mean == b.mean ? 1.0 : 0.0};
  const double t = (a.mean - b.mean) / std::sqrt(se2);
  const double df = se2 * se2 / (va * va / (a.n - 1.0) + vb * vb / (b.n - 1.0));
  return {t, df, std::min(1.0, 2.0 * student_t_sf(std::fabs(t), df))};
}
}  // namespace

WelchResult welch_test(std::span<const double> x, std::span<const double> y) {
  if (x.size() < 2 || y.size() < 2) throw std::invalid_argument("welch_test: need >= 2 samples per group");
  return welch_from(moments(x), moments(y));
}

ClusterStructure default_dac_clusters(std::span<const double> means) {
  std::vector<std::pair<std::size_t, double>> pairs(means.size());
  for (std::size_t k = 0; k < means.size(); ++k) pairs[k] = {k, means[k]};
  const auto split = clust_split(pairs);
  return ClusterStructure::from_groups(means.size(), {split.c1, split.c2});
}

double dac_accept_fraction(std::span<const std::vector<double>> datasets, const DacConfig& config,
                           std::size_t* pairs_tested) {
  config.validate();
  const std::size_t k = datasets.size();
  if (k < 2) throw std::invalid_argument("DAC: need at least two problems");
  std::vector<Moments> m;
  m.reserve(k);
  for (const auto& d : datasets) {
    if (d.size() < 2) throw std::invalid_argument("DAC: every problem needs >= 2 samples");
    m.push_back(moments(d));
  }
  const std::uint64_t total = static_cast<std::uint64_t>(k) * (k - 1) / 2;
  std::uint64_t accepted = 0, tested = 0;
  auto test = [&](std::size_t i, std::size_t j) {
    ++tested;
    if (welch_from(m[i], m[j]).p_value >= config.theta) ++accepted;
  };
  if (total <= config.max_pairs) {
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j) test(i, j);
  } else {
    // Floyd's sampling of distinct pair indices, then row/column decoding.
    Stream rng(config.seed, {0xDAC});
    std::unordered_set<std::uint64_t> chosen;
    std::vector<std::uint64_t> order;
    chosen.reserve(config.max_pairs * 2);
    for (std::uint64_t r = total - config.max_pairs; r < total; ++r) {
      std::uint64_t t = rng.below(r + 1);
      if (!chosen.insert(t).second) {
        chosen.insert(r);
        t = r;
      }
      order.push_back(t);
    }
    std::sort(order.begin(), order.end());
    std::size_t row = 0;
    std::uint64_t row_start = 0;
    for (std::uint64_t idx : order) {
      while (idx >= row_start + (k - 1 - row)) {
        row_start += k - 1 - row;
        ++row;
      }
      test(row, row + 1 + static_cast<std::size_t>(idx - row_start));
    }
  }
  if (pairs_tested) *pairs_tested = static_cast<std::size_t>(tested);
  return static_cast<double>(accepted) / static_cast<double>(tested);
}

DacResult dac_decisions(const CostModel& model, std::span<const std::vector<double>> datasets, const DacConfig& config,
                        const ClusterProvider& provider) {
  DacResult r;
  r.accept_fraction = dac_accept_fraction(datasets, config, &r.pairs_tested);
  if (r.accept_fraction >= config.r_upper) {
    r.mode = DacMode::Naive;
    r.decisions = aggregation_decisions(model, datasets, NaiveAggregation{});
  } else if (r.accept_fraction <= config.r_lower) {
    r.mode = DacMode::NoAggregation;
    r.decisions = saa_decisions(model, datasets);
  } else {
    r.mode = DacMode::ClusterBased;
    std::vector<double> means;
    means.reserve(datasets.size());
    for (const auto& d : datasets) means.push_back(problem_statistic(d, SampleMean{}));
    r.clusters = provider(means);
    r.decisions = aggregation_decisions(model, datasets, ClusterAggregation{r.clusters});
  }
  return r;
}

}  // namespace clusterpool
