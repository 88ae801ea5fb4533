#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "clusterpool/clustering.hpp"
#include "clusterpool/general_pooling.hpp"

namespace clusterpool {

struct DacConfig {
  double theta = 0.05;
  double r_upper = 0.9;
  double r_lower = 0.4;
  std::size_t max_pairs = 100000;
  std::uint64_t seed = 0;  // drives pair subsampling
  void validate() const;
};

struct NoAggregation {};
struct NaiveAggregation {};
struct ClusterAggregation {
  ClusterStructure clusters;
};
using AggregationMode = std::variant<NoAggregation, NaiveAggregation, ClusterAggregation>;

// SAA decision on one sample: mean, or empirical critical quantile.
double saa_decision(const CostModel& model, std::span<const double> data);

// Benchmarks treat the whole sample of each dataset as training data.
std::vector<double> saa_decisions(const CostModel& model, std::span<const std::vector<double>> datasets);
std::vector<double> aggregation_decisions(const CostModel& model, std::span<const std::vector<double>> datasets,
                                          const AggregationMode& mode);

enum class DacMode { NoAggregation, Naive, ClusterBased };
std::string to_string(DacMode m);

struct WelchResult {
  double t;
  double df;
  double p_value;  // two-sided
};
WelchResult welch_test(std::span<const double> x, std::span<const double> y);

struct DacResult {
  std::vector<double> decisions;
  DacMode mode;
  double accept_fraction;
  std::size_t pairs_tested;
  ClusterStructure clusters;  // filled when mode is ClusterBased
};

// Receives full-sample means, returns a partition.
using ClusterProvider = std::function<ClusterStructure(std::span<const double>)>;
ClusterStructure default_dac_clusters(std::span<const double> means);

double dac_accept_fraction(std::span<const std::vector<double>> datasets, const DacConfig& config,
                           std::size_t* pairs_tested = nullptr);
DacResult dac_decisions(const CostModel& model, std::span<const std::vector<double>> datasets, const DacConfig& config,
                        const ClusterProvider& provider = default_dac_clusters);

}  // namespace clusterpool
