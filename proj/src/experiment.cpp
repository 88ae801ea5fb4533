#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "clusterpool/evaluation.hpp"
#include "clusterpool/rng.hpp"

namespace clusterpool {

namespace {

std::string metric_label(const MetricSpec& m) {
  if (const auto* q = std::get_if<SampleQuantile>(&m)) return "quantile(" + fmt_num(q->level, 6) + ")";
  return "mean";
}

bool depends_on_n1(const MethodSpec& m) {
  if (const auto* c = std::get_if<ClusterPoolingMethod>(&m)) return !c->true_clusters;
  return std::holds_alternative<OracleMethod>(m);
}

// One replication's data for a given N1.
struct Instance {
  std::vector<std::vector<double>> train;  // full training sample per problem
  std::vector<ProblemDataset> split;       // first n1 for clustering, rest for pooling
  std::vector<Gaussian> truth;             // synthetic only
  std::vector<MseProblemMoments> moments;  // synthetic only
  std::optional<ClusterStructure> true_clusters;
  std::vector<std::vector<double>> test;  // real data only
  std::size_t N = 0;
};

struct SalesPool {
  std::vector<std::vector<double>> values;
};

Instance make_instance(const ExperimentConfig& cfg, const SalesPool& sales, std::uint64_t seed, std::size_t n1) {
  Instance inst;
  if (const auto* tc = std::get_if<TwoClusterGenSpec>(&cfg.source)) {
    auto spec = *tc;
    spec.seed = seed;
    auto g = gen_two_cluster(spec);
    inst.train = std::move(g.samples);
    inst.moments = g.truth;
    for (const auto& m : g.truth) inst.truth.push_back({m.mu, std::sqrt(m.sigma2)});
    inst.true_clusters = std::move(g.true_clusters);
    inst.N = spec.N;
  } else if (const auto* nv = std::get_if<NewsvendorGenSpec>(&cfg.source)) {
    auto spec = *nv;
    spec.seed = seed;
    auto g = gen_newsvendor(spec);
    inst.train = std::move(g.samples);
    inst.truth = std::move(g.truth);
    for (const auto& t : inst.truth) inst.moments.push_back({t.mu, t.sigma * t.sigma});
    inst.N = spec.N;
  } else {
    const auto& rd = std::get<RealDataSpec>(cfg.source);
    for (std::size_t k = 0; k < sales.values.size(); ++k) {
      auto s = subsample_split(sales.values[k], rd.n_train, 0, seed, k);
      inst.train.push_back(s.train.all_samples());
      inst.test.push_back(std::move(s.test));
    }
    inst.N = rd.n_train;
  }
  if (n1 > 0 && n1 >= inst.N) throw std::invalid_argument("N1 must be smaller than the per-problem sample count");
  inst.split = split_all(inst.train, n1);
  return inst;
}

double evaluate(const CostModel& model, const Instance& inst, const std::vector<double>& x) {
  double total = 0.0;
  if (!inst.truth.empty()) {
    for (std::size_t k = 0; k < x.size(); ++k) total += true_expected_cost(model, x[k], inst.truth[k]);
    return total;
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    double s = 0.0;
    for (double v : inst.test[k]) s += cost(model, x[k], v);
    total += s / static_cast<double>(inst.test[k].size());
  }
  return total;
}

std::string alpha_list(const std::vector<double>& alphas) {
  std::string s;
  for (std::size_t i = 0; i < alphas.size(); ++i) s += (i ? "|" : "") + fmt_num(alphas[i], 6);
  return s;
}

struct MethodOutcome {
  std::vector<double> decisions;
  std::string detail;
};

// MSE pooling with closed-form parameters inside each group.
MethodOutcome mse_closed_form(const ExperimentConfig& cfg, const Instance& inst, const Groups& groups,
                              const std::vector<std::vector<double>>& pooling) {
  MethodOutcome out;
  out.decisions.assign(pooling.size(), 0.0);
  std::vector<double> alphas;
  for (const auto& g : groups) {
    std::vector<MseSampleStats> stats;
    for (auto k : g) stats.push_back(MseSampleStats::from_samples(pooling[k]));
    PoolingParams p;
    if (cfg.mse_alpha == MseAlphaMode::APriori) {
      if (inst.moments.empty()) throw std::invalid_argument("a-priori parameters need known moments");
      std::vector<MseProblemMoments> m;
      for (auto k : g) m.push_back(inst.moments[k]);
      p = apriori_params(m);
    } else {
      p = data_driven_params(stats);
    }
    alphas.push_back(p.alpha);
    for (std::size_t i = 0; i < g.size(); ++i)
      out.decisions[g[i]] = shrunken_decision(p.alpha, p.anchor_mean, stats[i].sample_mean, stats[i].n);
  }
  out.detail = "clusters=" + std::to_string(groups.size()) + ";alpha=" + alpha_list(alphas);
  return out;
}

MethodOutcome pooled(const ExperimentConfig& cfg, const Instance& inst, const ClusterStructure& cs,
                     std::span<const ProblemDataset> data) {
  const bool closed_form = std::holds_alternative<MseCost>(cfg.cost) && cfg.mse_alpha != MseAlphaMode::Loo;
  if (closed_form) {
    std::vector<std::vector<double>> pooling;
    for (const auto& d : data) pooling.push_back(d.pooling_samples);
    return mse_closed_form(cfg, inst, cs.members(), pooling);
  }
  auto r = pool_within_clusters(cfg.cost, data, cs, EmpiricalAggregate{}, cfg.grid, cfg.loo);
  return {std::move(r.decisions),
          "clusters=" + std::to_string(r.cluster_alpha.size()) + ";alpha=" + alpha_list(r.cluster_alpha)};
}

MethodOutcome run_method(const ExperimentConfig& cfg, const MethodSpec& method, const Instance& inst,
                         std::uint64_t seed) {
  const std::size_t K = inst.train.size();
  if (std::holds_alternative<SaaMethod>(method)) return {saa_decisions(cfg.cost, inst.train), ""};

  if (std::holds_alternative<DirectPoolingMethod>(method)) {
    const auto full = split_all(inst.train, 0);
    return pooled(cfg, inst, ClusterStructure::single(K), full);
  }

  if (const auto* c = std::get_if<ClusterPoolingMethod>(&method)) {
    if (c->true_clusters) {
      if (!inst.true_clusters) throw std::invalid_argument("true clusters are only known for the two-cluster generator");
      const auto full = split_all(inst.train, 0);
      return pooled(cfg, inst, *inst.true_clusters, full);
    }
    const auto cs = estimate_clusters(inst.split, c->metric, c->k_min);
    return pooled(cfg, inst, cs, inst.split);
  }

  if (const auto* d = std::get_if<DacMethod>(&method)) {
    auto dc = d->config;
    dc.seed = seed;
    auto r = dac_decisions(cfg.cost, inst.train, dc);
    return {std::move(r.decisions), "mode=" + to_string(r.mode) + ";accept=" + fmt_num(r.accept_fraction, 6) +
                                        ";pairs=" + std::to_string(r.pairs_tested)};
  }

  const auto& o = std::get<OracleMethod>(method);
  if (inst.truth.empty()) throw std::invalid_argument("oracle shrinkage needs known distributions");
  const auto cs = estimate_clusters(inst.split, o.metric, o.k_min);
  MethodOutcome out;
  out.decisions.assign(K, 0.0);
  std::vector<double> alphas;
  for (const auto& g : cs.members()) {
    std::vector<ProblemDataset> members;
    std::vector<Gaussian> dists;
    std::vector<double> pooled_samples;
    for (auto k : g) {
      members.push_back(inst.split[k]);
      dists.push_back(inst.truth[k]);
      pooled_samples.insert(pooled_samples.end(), inst.split[k].pooling_samples.begin(),
                            inst.split[k].pooling_samples.end());
    }
    const AnchorSpec anchor = EmpiricalAnchor::from_samples(std::move(pooled_samples));
    const double alpha = oracle_alpha(cfg.cost, members, anchor, cfg.grid, dists);
    alphas.push_back(alpha);
    for (auto k : g) out.decisions[k] = shrunken_solution(cfg.cost, alpha, anchor, inst.split[k].pooling_samples);
  }
  out.detail = "clusters=" + std::to_string(alphas.size()) + ";alpha=" + alpha_list(alphas);
  return out;
}

}  // namespace

std::string method_label(const MethodSpec& m) {
  if (std::holds_alternative<SaaMethod>(m)) return "SAA";
  if (std::holds_alternative<DirectPoolingMethod>(m)) return "DirectPooling";
  if (const auto* c = std::get_if<ClusterPoolingMethod>(&m)) {
    if (c->true_clusters) return "ClusterPooling[true]";
    std::string s = "ClusterPooling[" + metric_label(c->metric);
    if (c->k_min) s += ";k_min=" + std::to_string(*c->k_min);
    return s + "]";
  }
  if (std::holds_alternative<DacMethod>(m)) return "DAC";
  const auto& o = std::get<OracleMethod>(m);
  std::string s = "Oracle[" + metric_label(o.metric);
  if (o.k_min) s += ";k_min=" + std::to_string(*o.k_min);
  return s + "]";
}

void ExperimentConfig::validate() const {
  clusterpool::validate(cost);
  if (methods.empty()) throw std::invalid_argument("config: at least one method required");
  if (replications < 1) throw std::invalid_argument("config: replications must be >= 1");
  if (n1_values.empty()) throw std::invalid_argument("config: n1 list is empty");
  grid.validate();
  std::visit([](const auto& s) {
    if constexpr (!std::is_same_v<std::decay_t<decltype(s)>, RealDataSpec>) s.validate();
  }, source);
  for (const auto& m : methods)
    if (const auto* d = std::get_if<DacMethod>(&m)) d->config.validate();
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentReport report;
  SalesPool sales;
  if (const auto* rd = std::get_if<RealDataSpec>(&cfg.source)) {
    auto data = read_sales_csv_file(rd->path);
    report.warnings = data.warnings;
    std::size_t dropped = 0;
    for (auto& p : data.problems) {
      if (p.values.size() < rd->n_train + 1) {
        ++dropped;
        continue;
      }
      sales.values.push_back(std::move(p.values));
    }
    if (dropped)
      report.warnings.push_back(std::to_string(dropped) + " problems with fewer than n_train+1 observations dropped");
    if (sales.values.size() < 2) throw std::invalid_argument("real data: fewer than two usable problems");
  }
  const std::string label = cost_model_label(cfg.cost);

  std::vector<std::vector<ReportRow>> per_rep(cfg.replications);
  parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) {
    auto& rows = per_rep[r];
    for (std::size_t b = 0; b < cfg.n1_values.size(); ++b) {
      const std::size_t n1 = cfg.n1_values[b];
      const std::uint64_t seed =
          cfg.common_instances ? Stream::derive(cfg.master_seed, {r}) : Stream::derive(cfg.master_seed, {r, n1});
      Instance inst;
      try {
        inst = make_instance(cfg, sales, seed, n1);
      } catch (const std::exception& e) {
        for (const auto& m : cfg.methods)
          rows.push_back({method_label(m), r, 0, 0, n1, label, std::nan(""), std::nan(""),
                          std::string("error: ") + e.what(), true});
        continue;
      }
      const double z_saa = evaluate(cfg.cost, inst, saa_decisions(cfg.cost, inst.train));
      for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const auto& m = cfg.methods[mi];
        const bool n1_free = !depends_on_n1(m);
        if (cfg.common_instances && n1_free && b > 0) continue;
        ReportRow row{method_label(m), r, inst.train.size(), inst.N, (cfg.common_instances && n1_free) ? 0 : n1,
                      label, 0.0, 0.0, "", false};
        try {
          const auto out = run_method(cfg, m, inst, Stream::derive(seed, {mi}));
          row.total_cost = evaluate(cfg.cost, inst, out.decisions);
          row.rel_advantage_pct = z_saa > 0.0 ? relative_advantage(z_saa, row.total_cost) : 0.0;
          row.detail = out.detail;
        } catch (const std::exception& e) {
          row.total_cost = row.rel_advantage_pct = std::nan("");
          row.detail = std::string("error: ") + e.what();
          row.failed = true;
        }
        rows.push_back(std::move(row));
      }
    }
  });
  for (auto& rows : per_rep)
    for (auto& row : rows) report.rows.push_back(std::move(row));
  return report;
}

bool ExperimentReport::any_failed() const {
  return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.failed; });
}

std::vector<AggregateRow> ExperimentReport::aggregate() const {
  using Key = std::tuple<std::string, std::size_t, std::size_t, std::size_t>;
  std::vector<Key> order;
  std::map<Key, std::vector<const ReportRow*>> groups;
  for (const auto& r : rows) {
    Key k{r.method, r.K, r.N, r.n1};
    auto [it, inserted] = groups.try_emplace(k);
    if (inserted) order.push_back(k);
    if (!r.failed) it->second.push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (const auto& k : order) {
    const auto& g = groups[k];
    AggregateRow a{std::get<0>(k), std::get<1>(k), std::get<2>(k), std::get<3>(k), std::nan(""), std::nan(""),
                   std::nan(""), std::nan(""), g.size()};
    if (!g.empty()) {
      auto stats = [&](auto field) {
        double m = 0.0;
        for (const auto* r : g) m += field(*r);
        m /= static_cast<double>(g.size());
        double ss = 0.0;
        for (const auto* r : g) ss += (field(*r) - m) * (field(*r) - m);
        const double se = g.size() > 1 ? std::sqrt(ss / static_cast<double>(g.size() - 1) / static_cast<double>(g.size())) : 0.0;
        return std::pair{m, se};
      };
      std::tie(a.mean_cost, a.se_cost) = stats([](const ReportRow& r) { return r.total_cost; });
      std::tie(a.mean_rel_adv, a.se_rel_adv) = stats([](const ReportRow& r) { return r.rel_advantage_pct; });
    }
    out.push_back(a);
  }
  return out;
}

namespace {
// Keeps free-text detail fields CSV-safe.
std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}
}  // namespace

void write_report_csv(std::ostream& os, const ExperimentReport& report) {
  os << "method,replication,K,N,n1,cost_model,total_cost,rel_advantage_pct,detail\n";
  for (const auto& r : report.rows)
    os << csv_field(r.method) << ',' << r.replication << ',' << r.K << ',' << r.N << ',' << r.n1 << ','
       << csv_field(r.cost_model) << ',' << fmt_num(r.total_cost) << ',' << fmt_num(r.rel_advantage_pct) << ','
       << csv_field(r.detail) << '\n';
}

void write_aggregate_csv(std::ostream& os, const ExperimentReport& report) {
  os << "method,K,N,n1,mean_cost,se_cost,mean_rel_adv,se_rel_adv\n";
  for (const auto& a : report.aggregate())
    os << csv_field(a.method) << ',' << a.K << ',' << a.N << ',' << a.n1 << ',' << fmt_num(a.mean_cost) << ','
       << fmt_num(a.se_cost) << ',' << fmt_num(a.mean_rel_adv) << ',' << fmt_num(a.se_rel_adv) << '\n';
}

}  // namespace clusterpool
