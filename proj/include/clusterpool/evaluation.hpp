#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "clusterpool/benchmarks.hpp"
#include "clusterpool/datagen.hpp"
#include "clusterpool/general_pooling.hpp"
#include "clusterpool/mse_pooling.hpp"

namespace clusterpool {

double relative_advantage(double z_saa, double z_method);

// ---- relative loss of LOO-selected alpha against the validation optimum ----

struct RelLossRow {
  std::size_t K;
  std::size_t replication;
  double relative_loss_pct;
  double alpha_hat;
  double alpha_star;
};

struct SingleAnchor {
  AnchorSpec anchor;
};
using RelLossAnchor = std::variant<EmpiricalAggregate, SingleAnchor>;

std::vector<RelLossRow> relative_loss_curve(std::span<const std::vector<double>> datasets, const CostModel& model,
                                            const RelLossAnchor& anchor_policy, const AlphaGrid& grid, std::size_t n2,
                                            std::span<const std::size_t> k_values, std::size_t replications,
                                            std::uint64_t seed, const LooOptions& loo = {});

// Median relative loss per K, in the order of k_values.
std::vector<double> median_relative_loss(std::span<const RelLossRow> rows, std::span<const std::size_t> k_values);

// ---- statistic and CV diagnostics ----

struct CvDiagnostic {
  double slope;
  double intercept;
  double t_stat;
  bool significant_at_95;
};
CvDiagnostic cv_homogeneity_diagnostic(std::span<const std::vector<double>> datasets);

struct StatisticBias {
  double mean_bias;
  double mean_bias_se;
  double quantile_bias;  // against the true level quantile
  double quantile_bias_se;
};
StatisticBias statistic_bias_diagnostic(const Gaussian& dist, std::size_t n1, double level, std::size_t replications,
                                        std::uint64_t seed);

// ---- limiting benefit of estimated-cluster pooling over direct pooling ----

struct SurfacePoint {
  int n1;
  double d;
  double direct_cost;   // per problem, a-priori parameters
  double cluster_cost;  // per problem, estimated clusters, a-priori parameters
  double delta;         // direct_cost - cluster_cost
  std::string method;   // "gamma" (d = 0 closed form) or "quadrature"
};

double direct_pooling_limit_cost(double a, double b, double sigma, int N, double d);
// Per-problem limit cost with estimated clusters, by adaptive Gauss-Kronrod.
double estimated_cluster_cost_quadrature(double a, double b, double sigma, int N, int n1, double d);
// Same at d = 0 via the Gamma closed form.
double estimated_cluster_cost_gamma(double a, double b, double sigma, int N, int n1);

std::vector<SurfacePoint> theoretical_benefit_surface(double a, double b, double sigma, int N,
                                                      std::span<const int> n1_values,
                                                      std::span<const double> d_values);

// ---- replicated experiments ----

struct SaaMethod {};
struct DirectPoolingMethod {};
struct ClusterPoolingMethod {
  MetricSpec metric = SampleMean{};
  std::optional<std::size_t> k_min;
  bool true_clusters = false;  // synthetic only; uses the generator's clusters and all samples for pooling
};
struct DacMethod {
  DacConfig config;
};
struct OracleMethod {
  MetricSpec metric = SampleMean{};
  std::optional<std::size_t> k_min;
};
using MethodSpec = std::variant<SaaMethod, DirectPoolingMethod, ClusterPoolingMethod, DacMethod, OracleMethod>;
std::string method_label(const MethodSpec& m);

// How MSE pooling picks (anchor, alpha). Newsvendor always uses LOO.
enum class MseAlphaMode { DataDriven, APriori, Loo };

struct RealDataSpec {
  std::string path;
  std::size_t n_train = 10;
};
using DataSource = std::variant<TwoClusterGenSpec, NewsvendorGenSpec, RealDataSpec>;

struct ExperimentConfig {
  DataSource source = NewsvendorGenSpec{};
  CostModel cost = NewsvendorCost{};
  std::vector<MethodSpec> methods;
  std::vector<std::size_t> n1_values{3};
  AlphaGrid grid = AlphaGrid::default_grid();
  std::size_t replications = 1;
  std::uint64_t master_seed = 0;
  MseAlphaMode mse_alpha = MseAlphaMode::DataDriven;
  LooOptions loo;
  // Same instance for every N1 value of a replication (common random numbers).
  bool common_instances = true;
  unsigned threads = 1;
  void validate() const;
};

struct ReportRow {
  std::string method;
  std::size_t replication = 0;
  std::size_t K = 0;
  std::size_t N = 0;
  std::size_t n1 = 0;
  std::string cost_model;
  double total_cost = 0.0;
  double rel_advantage_pct = 0.0;
  std::string detail;
  bool failed = false;
};

struct AggregateRow {
  std::string method;
  std::size_t K, N, n1;
  double mean_cost, se_cost, mean_rel_adv, se_rel_adv;
  std::size_t count;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<AggregateRow> aggregate() const;
  bool any_failed() const;
  std::vector<std::string> warnings;
};

ExperimentReport run_experiment(const ExperimentConfig& config);

void write_report_csv(std::ostream& os, const ExperimentReport& report);
void write_aggregate_csv(std::ostream& os, const ExperimentReport& report);

// Compact, locale-independent number formatting used by every CSV writer.
std::string fmt_num(double v, int digits = 12);

// Runs f(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& f);

}  // namespace clusterpool
