#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "clusterpool/clustering.hpp"
#include "clusterpool/numerics.hpp"

namespace clusterpool {

struct MseCost {};
struct NewsvendorCost {
  double holding = 1.0;
  double backorder = 19.0;
  double critical_ratio() const { return backorder / (backorder + holding); }
};
using CostModel = std::variant<MseCost, NewsvendorCost>;

void validate(const CostModel& model);
std::string cost_model_label(const CostModel& model);

struct PointMass {
  double value = 0.0;
};
// Samples are kept sorted; mean is cached.
struct EmpiricalAnchor {
  std::vector<double> sorted;
  double mean = 0.0;
  static EmpiricalAnchor from_samples(std::vector<double> samples);
};
struct GaussianFit {
  double mu = 0.0;
  double sigma = 1.0;
};
using AnchorSpec = std::variant<PointMass, EmpiricalAnchor, GaussianFit>;

struct Gaussian {
  double mu = 0.0;
  double sigma = 0.0;
};

struct AlphaGrid {
  std::vector<double> values;
  void validate() const;
  // {0} U 51 log-spaced points on [1e-2, 1e3] U {+inf}
  static AlphaGrid default_grid();
};

struct ProblemDataset {
  std::size_t problem_id = 0;
  std::vector<double> clustering_samples;
  std::vector<double> pooling_samples;

  // First n1 samples go to clustering, the rest to pooling.
  static ProblemDataset split(std::size_t id, std::span<const double> samples, std::size_t n1);
  std::vector<double> all_samples() const;
};

double cost(const CostModel& model, double x, double xi);

// Minimizer of sum_j c(x, data_j) + alpha * E_anchor[c(x, xi)].
double shrunken_solution(const CostModel& model, double alpha, const AnchorSpec& anchor, std::span<const double> data);
// Same, with data already sorted ascending (newsvendor needs order statistics).
double shrunken_solution_sorted(const CostModel& model, double alpha, const AnchorSpec& anchor,
                                std::span<const double> sorted);

struct LooOptions {
  // Divide each problem's LOO sum by its sample count. Off reproduces the plain sum.
  bool normalize_per_problem = false;
};

// LOO score for every grid point, in grid order.
std::vector<double> loo_scores(const CostModel& model, std::span<const ProblemDataset> cluster_data,
                               const AnchorSpec& anchor, const AlphaGrid& grid, const LooOptions& opts = {});
double loo_select_alpha(const CostModel& model, std::span<const ProblemDataset> cluster_data, const AnchorSpec& anchor,
                        const AlphaGrid& grid, const LooOptions& opts = {});

struct FixedPerCluster {
  std::vector<AnchorSpec> anchors;
};
struct EmpiricalAggregate {};
using AnchorPolicy = std::variant<FixedPerCluster, EmpiricalAggregate>;

struct PoolingResult {
  ClusterStructure clusters;
  std::vector<double> decisions;      // by dataset position
  std::vector<double> cluster_alpha;  // by cluster id
};

struct ClusterPoolingOptions {
  std::optional<std::size_t> k_min;  // bisect clustering when set, single split otherwise
  LooOptions loo;
};

// Shrunken-SAA within each cluster of a given structure.
PoolingResult pool_within_clusters(const CostModel& model, std::span<const ProblemDataset> datasets,
                                   const ClusterStructure& clusters, const AnchorPolicy& anchor_policy,
                                   const AlphaGrid& grid, const LooOptions& loo = {});

ClusterStructure estimate_clusters(std::span<const ProblemDataset> datasets, const MetricSpec& metric,
                                   std::optional<std::size_t> k_min);

PoolingResult cluster_shrunken_saa(const CostModel& model, std::span<const ProblemDataset> datasets,
                                   const MetricSpec& metric, const AnchorPolicy& anchor_policy, const AlphaGrid& grid,
                                   const ClusterPoolingOptions& opts = {});

double oracle_alpha(const CostModel& model, std::span<const ProblemDataset> cluster_data, const AnchorSpec& anchor,
                    const AlphaGrid& grid, std::span<const Gaussian> true_dists);

// Closed-form E[c(x, xi)] for xi ~ N(mu, sigma^2).
double true_expected_cost(const CostModel& model, double x, const Gaussian& dist);

}  // namespace clusterpool
