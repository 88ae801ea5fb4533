#include "clusterpool/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace clusterpool {

int ClusterStructure::num_clusters() const {
  int m = -1;
  for (int c : assignments) m = std::max(m, c);
  return m + 1;
}

std::vector<std::vector<std::size_t>> ClusterStructure::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_clusters()));
  for (std::size_t k = 0; k < assignments.size(); ++k)
    if (assignments[k] >= 0) out[static_cast<std::size_t>(assignments[k])].push_back(k);
  return out;
}

ClusterStructure ClusterStructure::single(std::size_t k) {
  ClusterStructure cs;
  cs.assignments.assign(k, 0);
  return cs;
}

ClusterStructure ClusterStructure::from_groups(std::size_t k, const std::vector<std::vector<std::size_t>>& groups) {
  ClusterStructure cs;
  cs.assignments.assign(k, -1);
  int id = 0;
  for (const auto& g : groups) {
    if (g.empty()) continue;
    for (auto i : g) {
      if (i >= k || cs.assignments[i] != -1) throw std::invalid_argument("from_groups: not a partition");
      cs.assignments[i] = id;
    }
    ++id;
  }
  return cs;
}

double sorted_quantile(std::span<const double> sorted, double level) {
  if (sorted.empty()) throw std::invalid_argument("sorted_quantile: empty data");
  const double n = static_cast<double>(sorted.size());
  // Shave one part in 1e12 so that e.g. 0.9*10 does not round up to rank 10.
  auto rank = static_cast<std::size_t>(std::ceil(level * n * (1.0 - 1e-12)));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double problem_statistic(std::span<const double> data, const MetricSpec& metric) {
  if (data.empty()) throw std::invalid_argument("problem_statistic: empty data");
  if (const auto* q = std::get_if<SampleQuantile>(&metric)) {
    if (!(q->level > 0.0 && q->level < 1.0)) throw std::invalid_argument("problem_statistic: level outside (0,1)");
    std::vector<double> s(data.begin(), data.end());
    std::sort(s.begin(), s.end());
    return sorted_quantile(s, q->level);
  }
  double sum = 0.0;
  for (double v : data) sum += v;
  return sum / static_cast<double>(data.size());
}

namespace {

using Entry = std::pair<double, std::size_t>;  // (stat, problem index), kept sorted

// Mean over a sorted range; summation order is fixed by the sort, so the
// boundary does not depend on input order.
double range_mean(const std::vector<Entry>& e, std::size_t lo, std::size_t hi) {
  double sum = 0.0;
  for (std::size_t i = lo; i < hi; ++i) sum += e[i].first;
  return sum / static_cast<double>(hi - lo);
}

std::size_t split_point(const std::vector<Entry>& e, std::size_t lo, std::size_t hi, double boundary) {
  auto it = std::upper_bound(e.begin() + static_cast<std::ptrdiff_t>(lo), e.begin() + static_cast<std::ptrdiff_t>(hi),
                             boundary, [](double b, const Entry& x) { return b < x.first; });
  return static_cast<std::size_t>(it - e.begin());
}

std::vector<Entry> sorted_entries(std::span<const std::pair<std::size_t, double>> stats) {
  std::vector<Entry> e;
  e.reserve(stats.size());
  for (const auto& [k, v] : stats) {
    if (!std::isfinite(v)) throw std::invalid_argument("clustering: non-finite statistic");
    e.emplace_back(v, k);
  }
  std::sort(e.begin(), e.end());
  return e;
}

struct Bisector {
  const std::vector<Entry>& e;
  std::size_t k_min;
  ClusterStructure& cs;
  int next_id = 0;

  int build(std::size_t lo, std::size_t hi) {
    const int node = static_cast<int>(cs.tree.size());
    cs.tree.push_back(SplitNode{});
    cs.tree[node].size = hi - lo;
    const double boundary = range_mean(e, lo, hi);
    const std::size_t mid = split_point(e, lo, hi, boundary);
    if (std::min(mid - lo, hi - mid) < k_min || mid == hi) {
      const int id = next_id++;
      cs.tree[node].cluster_id = id;
      for (std::size_t i = lo; i < hi; ++i) cs.assignments[e[i].second] = id;
      return node;
    }
    cs.tree[node].boundary = boundary;
    const int l = build(lo, mid);
    const int r = build(mid, hi);
    cs.tree[node].left = l;
    cs.tree[node].right = r;
    return node;
  }
};

}  // namespace

SplitResult clust_split(std::span<const std::pair<std::size_t, double>> stats) {
  if (stats.empty()) throw std::invalid_argument("clust_split: empty input");
  const auto e = sorted_entries(stats);
  SplitResult r;
  r.boundary = range_mean(e, 0, e.size());
  const std::size_t mid = split_point(e, 0, e.size(), r.boundary);
  for (std::size_t i = 0; i < e.size(); ++i) (i < mid ? r.c1 : r.c2).push_back(e[i].second);
  std::sort(r.c1.begin(), r.c1.end());
  std::sort(r.c2.begin(), r.c2.end());
  return r;
}

ClusterStructure bisect_cluster(std::span<const std::size_t> problems, std::span<const double> stats,
                                std::size_t k_min) {
  if (problems.empty()) throw std::invalid_argument("bisect_cluster: empty problem set");
  if (k_min < 1) throw std::invalid_argument("bisect_cluster: k_min must be >= 1");
  std::vector<std::pair<std::size_t, double>> pairs;
  pairs.reserve(problems.size());
  for (auto k : problems) {
    if (k >= stats.size()) throw std::invalid_argument("bisect_cluster: index without statistic");
    pairs.emplace_back(k, stats[k]);
  }
  const auto e = sorted_entries(pairs);
  for (std::size_t i = 1; i < e.size(); ++i)
    if (e[i].second == e[i - 1].second && e[i].first == e[i - 1].first)
      throw std::invalid_argument("bisect_cluster: duplicate problem index");
  ClusterStructure cs;
  cs.assignments.assign(stats.size(), -1);
  Bisector b{e, k_min, cs};
  b.build(0, e.size());
  return cs;
}

ClusterStructure bisect_cluster(std::span<const double> stats, std::size_t k_min) {
  std::vector<std::size_t> all(stats.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  return bisect_cluster(all, stats, k_min);
}

void write_cluster_csv(std::ostream& os, const ClusterStructure& cs, std::span<const std::size_t> problem_ids) {
  os << "problem_id,cluster_id\n";
  for (std::size_t k = 0; k < cs.assignments.size(); ++k) {
    if (cs.assignments[k] < 0) continue;
    os << (problem_ids.empty() ? k : problem_ids[k]) << ',' << cs.assignments[k] << '\n';
  }
}

namespace {
void write_node(std::ostream& os, const ClusterStructure& cs, int node, int depth) {
  const auto& n = cs.tree[static_cast<std::size_t>(node)];
  os << std::string(static_cast<std::size_t>(2 * depth), ' ');
  if (n.boundary) {
    os << "node boundary=" << *n.boundary << " size=" << n.size << '\n';
    write_node(os, cs, n.left, depth + 1);
    write_node(os, cs, n.right, depth + 1);
  } else {
    os << "leaf cluster=" << n.cluster_id << " size=" << n.size << '\n';
  }
}
}  // namespace

void write_cluster_tree(std::ostream& os, const ClusterStructure& cs) {
  if (cs.tree.empty()) {
    const auto groups = cs.members();
    for (std::size_t c = 0; c < groups.size(); ++c) os << "leaf cluster=" << c << " size=" << groups[c].size() << '\n';
    return;
  }
  write_node(os, cs, 0, 0);
}

}  // namespace clusterpool
