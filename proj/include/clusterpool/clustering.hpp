#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace clusterpool {

struct SampleMean {};
struct SampleQuantile {
  double level = 0.5;
};
using MetricSpec = std::variant<SampleMean, SampleQuantile>;

// Bisect tree stored flat; children index into ClusterStructure::tree.
struct SplitNode {
  std::optional<double> boundary;  // absent for leaves
  int left = -1;
  int right = -1;
  int cluster_id = -1;  // set on leaves
  std::size_t size = 0;
};

struct ClusterStructure {
  // assignments[k] is the cluster of problem k, or -1 if k was not clustered.
  std::vector<int> assignments;
  std::vector<SplitNode> tree;  // empty when no tree was built; tree[0] is the root

  int num_clusters() const;
  std::vector<std::vector<std::size_t>> members() const;
  static ClusterStructure single(std::size_t k);
  static ClusterStructure from_groups(std::size_t k, const std::vector<std::vector<std::size_t>>& groups);
};

struct SplitResult {
  std::vector<std::size_t> c1;
  std::vector<std::size_t> c2;
  double boundary;
};

// Rank ceil(level * n) of the sorted data; data must be sorted ascending.
double sorted_quantile(std::span<const double> sorted, double level);

double problem_statistic(std::span<const double> data, const MetricSpec& metric);

SplitResult clust_split(std::span<const std::pair<std::size_t, double>> stats);

// Clusters every index in `problems`; stats is indexed by problem id.
ClusterStructure bisect_cluster(std::span<const std::size_t> problems, std::span<const double> stats,
                                std::size_t k_min);
ClusterStructure bisect_cluster(std::span<const double> stats, std::size_t k_min);

void write_cluster_csv(std::ostream& os, const ClusterStructure& cs, std::span<const std::size_t> problem_ids = {});
void write_cluster_tree(std::ostream& os, const ClusterStructure& cs);

}  // namespace clusterpool
