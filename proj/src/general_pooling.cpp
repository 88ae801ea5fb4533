#include "clusterpool/general_pooling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "clusterpool/mse_pooling.hpp"

namespace clusterpool {

void validate(const CostModel& model) {
  if (const auto* nv = std::get_if<NewsvendorCost>(&model)) {
    if (!(nv->holding > 0.0 && nv->backorder > 0.0))
      throw std::invalid_argument("newsvendor costs must be positive");
  }
}

std::string cost_model_label(const CostModel& model) {
  if (const auto* nv = std::get_if<NewsvendorCost>(&model)) {
    std::ostringstream os;
    os.precision(6);
    os << nv->critical_ratio();
    return os.str();
  }
  return "mse";
}

EmpiricalAnchor EmpiricalAnchor::from_samples(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("EmpiricalAnchor: no samples");
  std::sort(samples.begin(), samples.end());
  double sum = 0.0;
  for (double v : samples) sum += v;
  EmpiricalAnchor a;
  a.mean = sum / static_cast<double>(samples.size());
  a.sorted = std::move(samples);
  return a;
}

void AlphaGrid::validate() const {
  if (values.empty()) throw std::invalid_argument("AlphaGrid: empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) throw std::invalid_argument("AlphaGrid: values must be >= 0");
    if (i > 0 && !(values[i] > values[i - 1])) throw std::invalid_argument("AlphaGrid: values must strictly increase");
  }
}

AlphaGrid AlphaGrid::default_grid() {
  AlphaGrid g;
  g.values.push_back(0.0);
  for (int i = 0; i <= 50; ++i) g.values.push_back(std::pow(10.0, -2.0 + 5.0 * i / 50.0));
  g.values.push_back(kInf);
  return g;
}

ProblemDataset ProblemDataset::split(std::size_t id, std::span<const double> samples, std::size_t n1) {
  if (n1 > samples.size()) throw std::invalid_argument("ProblemDataset::split: n1 exceeds sample count");
  ProblemDataset d;
  d.problem_id = id;
  d.clustering_samples.assign(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(n1));
  d.pooling_samples.assign(samples.begin() + static_cast<std::ptrdiff_t>(n1), samples.end());
  return d;
}

std::vector<double> ProblemDataset::all_samples() const {
  std::vector<double> v = clustering_samples;
  v.insert(v.end(), pooling_samples.begin(), pooling_samples.end());
  return v;
}

double cost(const CostModel& model, double x, double xi) {
  if (const auto* nv = std::get_if<NewsvendorCost>(&model))
    return nv->holding * std::max(x - xi, 0.0) + nv->backorder * std::max(xi - x, 0.0);
  return (x - xi) * (x - xi);
}

namespace {

double anchor_mean(const AnchorSpec& a) {
  return std::visit(
      [](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PointMass>) return v.value;
        else if constexpr (std::is_same_v<T, EmpiricalAnchor>) return v.mean;
        else return v.mu;
      },
      a);
}

// Smallest x with H(x) >= t under the anchor; +inf when no such x exists.
double anchor_quantile(const AnchorSpec& a, double t, double tol) {
  if (t > 1.0 + tol) return kInf;
  if (const auto* p = std::get_if<PointMass>(&a)) return p->value;
  if (const auto* e = std::get_if<EmpiricalAnchor>(&a)) {
    const double m = static_cast<double>(e->sorted.size());
    auto idx = static_cast<std::size_t>(std::max(1.0, std::ceil(t * m * (1.0 - 1e-12))));
    idx = std::min(idx, e->sorted.size());
    return e->sorted[idx - 1];
  }
  const auto& g = std::get<GaussianFit>(a);
  if (t >= 1.0) return kInf;
  // Bisection on the standardized CDF, to well under 1e-9 in x.
  double lo = -40.0, hi = 40.0;
  const double stop = 1e-10 / std::max(g.sigma, 1e-300);
  while (hi - lo > stop) {
    const double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) >= t) hi = mid;
    else lo = mid;
    if (mid == lo && mid == hi) break;
  }
  return g.mu + g.sigma * hi;
}

void validate_anchor(const AnchorSpec& a) {
  if (const auto* e = std::get_if<EmpiricalAnchor>(&a); e && e->sorted.empty())
    throw std::invalid_argument("Empirical anchor without samples");
  if (const auto* g = std::get_if<GaussianFit>(&a); g && !(g->sigma > 0.0))
    throw std::invalid_argument("GaussianFit anchor needs sigma > 0");
}

// Weighted s-quantile of the mixture of data (weight 1 each) and anchor (total weight alpha).
double newsvendor_solution(double s, double alpha, const AnchorSpec& anchor, std::span<const double> d) {
  const std::size_t n = d.size();
  if (alpha == kInf) return anchor_quantile(anchor, s, 0.0);
  const double target = s * (static_cast<double>(n) + alpha);
  const double tol = 1e-12 * std::max(1.0, target);
  for (std::size_t j = 0; j <= n; ++j) {
    const double lo = j == 0 ? -kInf : d[j - 1];
    const double hi = j == n ? kInf : d[j];
    const double need = target - static_cast<double>(j);
    if (need <= tol) return lo;
    if (alpha == 0.0) continue;
    const double x = anchor_quantile(anchor, need / alpha, tol);
    const double cand = std::max(lo, x);
    if (cand < hi) return cand;
  }
  // Unreachable for s < 1: the last segment always admits a solution.
  return d.empty() ? anchor_quantile(anchor, 1.0, 0.0) : d.back();
}

}  // namespace

double shrunken_solution_sorted(const CostModel& model, double alpha, const AnchorSpec& anchor,
                                std::span<const double> sorted) {
  if (!(alpha >= 0.0)) throw std::invalid_argument("shrunken_solution: alpha must be >= 0");
  validate_anchor(anchor);
  if (sorted.empty() && alpha == 0.0) throw std::invalid_argument("shrunken_solution: no data and no anchor mass");
  if (const auto* nv = std::get_if<NewsvendorCost>(&model))
    return newsvendor_solution(nv->critical_ratio(), alpha, anchor, sorted);
  if (sorted.empty()) return anchor_mean(anchor);
  double sum = 0.0;
  for (double v : sorted) sum += v;
  const int n = static_cast<int>(sorted.size());
  return shrunken_decision(alpha, anchor_mean(anchor), sum / n, n);
}

double shrunken_solution(const CostModel& model, double alpha, const AnchorSpec& anchor, std::span<const double> data) {
  if (std::holds_alternative<NewsvendorCost>(model)) {
    std::vector<double> s(data.begin(), data.end());
    std::sort(s.begin(), s.end());
    return shrunken_solution_sorted(model, alpha, anchor, s);
  }
  return shrunken_solution_sorted(model, alpha, anchor, data);
}

std::vector<double> loo_scores(const CostModel& model, std::span<const ProblemDataset> cluster_data,
                               const AnchorSpec& anchor, const AlphaGrid& grid, const LooOptions& opts) {
  if (cluster_data.empty()) throw std::invalid_argument("loo_select_alpha: empty cluster");
  grid.validate();
  validate_anchor(anchor);
  const bool newsvendor = std::holds_alternative<NewsvendorCost>(model);
  const double m_anchor = anchor_mean(anchor);

  std::vector<double> scores(grid.values.size(), 0.0);
  std::vector<double> sorted, rest;
  for (const auto& ds : cluster_data) {
    const std::size_t n = ds.pooling_samples.size();
    if (n < 2) continue;
    sorted = ds.pooling_samples;
    if (newsvendor) std::sort(sorted.begin(), sorted.end());
    double sum = 0.0;
    for (double v : sorted) sum += v;
    const double scale = opts.normalize_per_problem ? 1.0 / static_cast<double>(n) : 1.0;
    rest.resize(n - 1);
    for (std::size_t a = 0; a < grid.values.size(); ++a) {
      const double alpha = grid.values[a];
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double x;
        if (newsvendor) {
          std::copy(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(j), rest.begin());
          std::copy(sorted.begin() + static_cast<std::ptrdiff_t>(j) + 1, sorted.end(),
                    rest.begin() + static_cast<std::ptrdiff_t>(j));
          x = shrunken_solution_sorted(model, alpha, anchor, rest);
        } else {
          const int m = static_cast<int>(n - 1);
          x = shrunken_decision(alpha, m_anchor, (sum - sorted[j]) / m, m);
        }
        acc += cost(model, x, sorted[j]);
      }
      scores[a] += acc * scale;
    }
  }
  return scores;
}

static std::size_t argmin_first(const std::vector<double>& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] < v[best]) best = i;
  return best;
}

double loo_select_alpha(const CostModel& model, std::span<const ProblemDataset> cluster_data, const AnchorSpec& anchor,
                        const AlphaGrid& grid, const LooOptions& opts) {
  const auto scores = loo_scores(model, cluster_data, anchor, grid, opts);
  return grid.values[argmin_first(scores)];
}

ClusterStructure estimate_clusters(std::span<const ProblemDataset> datasets, const MetricSpec& metric,
                                   std::optional<std::size_t> k_min) {
  if (datasets.empty()) throw std::invalid_argument("estimate_clusters: no datasets");
  std::vector<double> stats(datasets.size());
  for (std::size_t k = 0; k < datasets.size(); ++k) {
    if (datasets[k].clustering_samples.empty())
      throw std::invalid_argument("estimate_clusters: problem without clustering samples");
    stats[k] = problem_statistic(datasets[k].clustering_samples, metric);
  }
  if (k_min) return bisect_cluster(stats, *k_min);
  std::vector<std::pair<std::size_t, double>> pairs(stats.size());
  for (std::size_t k = 0; k < stats.size(); ++k) pairs[k] = {k, stats[k]};
  const auto split = clust_split(pairs);
  return ClusterStructure::from_groups(datasets.size(), {split.c1, split.c2});
}

PoolingResult pool_within_clusters(const CostModel& model, std::span<const ProblemDataset> datasets,
                                   const ClusterStructure& clusters, const AnchorPolicy& anchor_policy,
                                   const AlphaGrid& grid, const LooOptions& loo) {
  validate(model);
  if (clusters.assignments.size() != datasets.size())
    throw std::invalid_argument("pool_within_clusters: structure does not match datasets");
  for (const auto& ds : datasets)
    if (ds.pooling_samples.empty()) throw std::invalid_argument("pool_within_clusters: problem without pooling data");
  const auto groups = clusters.members();
  if (const auto* fixed = std::get_if<FixedPerCluster>(&anchor_policy);
      fixed && fixed->anchors.size() != groups.size())
    throw std::invalid_argument("pool_within_clusters: one fixed anchor per cluster required");

  PoolingResult r;
  r.clusters = clusters;
  r.decisions.assign(datasets.size(), 0.0);
  r.cluster_alpha.assign(groups.size(), 0.0);
  std::vector<ProblemDataset> members;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    members.clear();
    std::vector<double> pooled;
    for (auto k : groups[c]) {
      members.push_back(datasets[k]);
      pooled.insert(pooled.end(), datasets[k].pooling_samples.begin(), datasets[k].pooling_samples.end());
    }
    AnchorSpec anchor = std::holds_alternative<EmpiricalAggregate>(anchor_policy)
                            ? AnchorSpec{EmpiricalAnchor::from_samples(std::move(pooled))}
                            : std::get<FixedPerCluster>(anchor_policy).anchors[c];
    const double alpha = loo_select_alpha(model, members, anchor, grid, loo);
    r.cluster_alpha[c] = alpha;
    for (auto k : groups[c]) r.decisions[k] = shrunken_solution(model, alpha, anchor, datasets[k].pooling_samples);
  }
  return r;
}

PoolingResult cluster_shrunken_saa(const CostModel& model, std::span<const ProblemDataset> datasets,
                                   const MetricSpec& metric, const AnchorPolicy& anchor_policy, const AlphaGrid& grid,
                                   const ClusterPoolingOptions& opts) {
  const auto clusters = estimate_clusters(datasets, metric, opts.k_min);
  return pool_within_clusters(model, datasets, clusters, anchor_policy, grid, opts.loo);
}

double oracle_alpha(const CostModel& model, std::span<const ProblemDataset> cluster_data, const AnchorSpec& anchor,
                    const AlphaGrid& grid, std::span<const Gaussian> true_dists) {
  if (cluster_data.size() != true_dists.size()) throw std::invalid_argument("oracle_alpha: mismatched lengths");
  if (cluster_data.empty()) throw std::invalid_argument("oracle_alpha: empty cluster");
  grid.validate();
  std::vector<std::vector<double>> sorted(cluster_data.size());
  for (std::size_t k = 0; k < cluster_data.size(); ++k) {
    sorted[k] = cluster_data[k].pooling_samples;
    std::sort(sorted[k].begin(), sorted[k].end());
  }
  std::vector<double> totals(grid.values.size(), 0.0);
  for (std::size_t a = 0; a < grid.values.size(); ++a)
    for (std::size_t k = 0; k < sorted.size(); ++k)
      totals[a] += true_expected_cost(model, shrunken_solution_sorted(model, grid.values[a], anchor, sorted[k]),
                                      true_dists[k]);
  return grid.values[argmin_first(totals)];
}

}  // namespace clusterpool
