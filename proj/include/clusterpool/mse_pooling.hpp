#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "clusterpool/numerics.hpp"

namespace clusterpool {

using Groups = std::vector<std::vector<std::size_t>>;

struct MseProblemMoments {
  double mu = 0.0;
  double sigma2 = 0.0;
};

struct MseSampleStats {
  double sample_mean = 0.0;
  std::optional<double> sample_var;  // absent when n < 2
  int n = 0;

  static MseSampleStats from_samples(std::span<const double> data);
};

struct PoolingParams {
  double alpha = 0.0;
  double anchor_mean = 0.0;
};

struct TwoClusterDesign {
  double a = 0.0;
  double b = 1.0;
  double d = 0.0;
  double sigma_bar2 = 1.0;
  int n_total = 10;
  int n_cluster = 1;

  void validate() const;
};

// Weight on the anchor, alpha/(n+alpha), with the alpha = inf limit.
inline double anchor_weight(double alpha, double n) { return alpha == kInf ? 1.0 : alpha / (n + alpha); }

double shrunken_decision(double alpha, double anchor_mean, double sample_mean, int n);

std::vector<PoolingParams> apriori_params(std::span<const MseProblemMoments> moments, const Groups& groups);
PoolingParams apriori_params(std::span<const MseProblemMoments> moments);

double expected_cost_mse(const PoolingParams& params, std::span<const MseProblemMoments> moments, int n);
double saa_expected_cost(std::span<const MseProblemMoments> moments, int n);

struct CostDecomposition {
  double saa_cost;
  double bias;
  double variance_reduction;
};
CostDecomposition cost_decomposition(const PoolingParams& params, double mu, double sigma2, int n);

PoolingParams data_driven_params(std::span<const MseSampleStats> stats);

struct AsymptoticBenefit {
  double alpha_direct_limit;
  double alpha_cluster_limit;
  double delta1;
  bool conditions_hold;
  bool condition_undefined;  // 12 - N1 (b-a)^2 / (4 sigma^2) <= 0
};
AsymptoticBenefit asymptotic_benefit(const TwoClusterDesign& design);

// No-benefit criterion L(y) in closed form, N1 explicit.
double no_benefit_function(double y_tilde, int n_cluster);
// Same criterion rebuilt from Gamma: sigma^2/(N1 Gamma) - 12/y^2 - 1. N1 drops out.
double no_benefit_function_derived(double y_tilde);
// True when estimated-cluster pooling cannot beat direct pooling at d = 0.
bool no_benefit_predicate(double y_tilde, int n_cluster);

// Limit within-cluster variance of the means for the estimated clusters at d = 0.
double gamma_within_cluster_d0(double a, double b, double sigma, int n_cluster);

double misclassification_bound(double d, double width, int n_cluster, double sigma_max);

}  // namespace clusterpool
