#include "clusterpool/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "clusterpool/datagen.hpp"
#include "clusterpool/rng.hpp"

namespace clusterpool {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kSubcommands = {"synth-mse", "synth-newsvendor", "real-data", "surface", "diagnose"};

std::vector<std::size_t> to_sizes(const std::vector<std::string>& items, const std::string& what) {
  std::vector<std::size_t> out;
  for (const auto& s : items) {
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(s, &pos);
      if (pos != s.size() || v < 0) throw std::invalid_argument(s);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw ConfigError(what + ": not a non-negative integer: " + s);
    }
  }
  return out;
}

std::vector<double> to_doubles(const std::vector<std::string>& items, const std::string& what) {
  std::vector<double> out;
  for (const auto& s : items) {
    if (s == "inf" || s == "+inf") {
      out.push_back(kInf);
      continue;
    }
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError(what + ": not a number: " + s);
    }
  }
  return out;
}

std::size_t get_size(Config& c, const std::string& sec, const std::string& key, std::int64_t def) {
  const auto v = c.get_int(sec, key, def);
  if (v < 0) throw ConfigError("[" + sec + "] " + key + " must be >= 0");
  return static_cast<std::size_t>(v);
}

CostModel read_cost(Config& c, bool newsvendor_default) {
  const auto type = c.get_string("cost", "type", newsvendor_default ? "newsvendor" : "mse");
  if (type == "mse") return MseCost{};
  if (type != "newsvendor") throw ConfigError("[cost] type must be mse or newsvendor");
  return NewsvendorCost{c.get_double("cost", "holding", 1.0), c.get_double("cost", "backorder", 19.0)};
}

AlphaGrid read_grid(Config& c) {
  const auto items = c.get_list("experiment", "grid", {"default"});
  if (items.size() == 1 && items[0] == "default") return AlphaGrid::default_grid();
  AlphaGrid g{to_doubles(items, "[experiment] grid")};
  return g;
}

MetricSpec read_metric(const std::string& name, double level) {
  if (name == "mean") return SampleMean{};
  if (name == "quantile") return SampleQuantile{level};
  throw ConfigError("unknown metric '" + name + "' (mean or quantile)");
}

std::vector<MethodSpec> read_methods(Config& c, const CostModel& cost) {
  const double default_level =
      std::holds_alternative<NewsvendorCost>(cost) ? std::get<NewsvendorCost>(cost).critical_ratio() : 0.5;
  const double level = c.get_double("experiment", "quantile_level", default_level);
  const auto k_min_raw = get_size(c, "experiment", "k_min", 0);
  const std::optional<std::size_t> k_min = k_min_raw ? std::optional<std::size_t>(k_min_raw) : std::nullopt;
  DacConfig dac;
  dac.theta = c.get_double("dac", "theta", dac.theta);
  dac.r_upper = c.get_double("dac", "r_upper", dac.r_upper);
  dac.r_lower = c.get_double("dac", "r_lower", dac.r_lower);
  dac.max_pairs = get_size(c, "dac", "max_pairs", static_cast<std::int64_t>(dac.max_pairs));

  std::vector<MethodSpec> out;
  for (const auto& token : c.get_list("experiment", "methods", {"saa", "direct", "cluster"})) {
    const auto colon = token.find(':');
    const std::string name = token.substr(0, colon);
    const std::string metric = colon == std::string::npos ? "mean" : token.substr(colon + 1);
    if (name == "saa") out.push_back(SaaMethod{});
    else if (name == "direct") out.push_back(DirectPoolingMethod{});
    else if (name == "cluster") out.push_back(ClusterPoolingMethod{read_metric(metric, level), k_min, false});
    else if (name == "cluster-true") out.push_back(ClusterPoolingMethod{SampleMean{}, std::nullopt, true});
    else if (name == "dac") out.push_back(DacMethod{dac});
    else if (name == "oracle") out.push_back(OracleMethod{read_metric(metric, level), k_min});
    else throw ConfigError("unknown method '" + token + "'");
  }
  return out;
}

MseAlphaMode read_mse_mode(Config& c) {
  const auto m = c.get_string("experiment", "mse_alpha", "data-driven");
  if (m == "data-driven") return MseAlphaMode::DataDriven;
  if (m == "apriori") return MseAlphaMode::APriori;
  if (m == "loo") return MseAlphaMode::Loo;
  throw ConfigError("[experiment] mse_alpha must be data-driven, apriori or loo");
}

TwoClusterGenSpec read_two_cluster(Config& c) {
  TwoClusterGenSpec s;
  s.a = c.get_double("generator", "a", s.a);
  s.b = c.get_double("generator", "b", s.b);
  s.d = c.get_double("generator", "d", s.d);
  s.sigma = CommonSigma{c.get_double("generator", "sigma", 5.0)};
  s.K = get_size(c, "generator", "K", 1000);
  s.N = get_size(c, "generator", "N", 10);
  return s;
}

NewsvendorGenSpec read_newsvendor(Config& c) {
  NewsvendorGenSpec s;
  s.mu_low = c.get_double("generator", "mu_low", s.mu_low);
  s.mu_high = c.get_double("generator", "mu_high", s.mu_high);
  s.cv_mean = c.get_double("generator", "cv_mean", s.cv_mean);
  s.cv_sd = c.get_double("generator", "cv_sd", s.cv_sd);
  s.K = get_size(c, "generator", "K", 1000);
  s.N = get_size(c, "generator", "N", 10);
  return s;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << content;
}

template <class F>
void write_with(const fs::path& p, F&& f) {
  std::ostringstream os;
  f(os);
  write_file(p, os.str());
}

void write_manifest(const fs::path& dir, const std::string& sub, const Config& cfg,
                    const std::vector<std::string>& files, const std::vector<std::string>& warnings) {
  std::ostringstream os;
  os << "subcommand = " << sub << "\n\n# resolved configuration\n" << cfg.dump() << "\n# outputs\n";
  for (const auto& f : files) os << f << '\n';
  if (!warnings.empty()) {
    os << "\n# warnings\n";
    for (const auto& w : warnings) os << w << '\n';
  }
  write_file(dir / "manifest.txt", os.str());
}

// Per-problem bias/variance decomposition at a-priori parameters, replication 0.
void write_decomposition(std::ostream& os, const TwoClusterGenSpec& spec, std::uint64_t seed) {
  auto s = spec;
  s.seed = seed;
  const auto inst = gen_two_cluster(s);
  const int n = static_cast<int>(s.N);
  os << "problem_id,mu,grouping,cluster,alpha,anchor,saa_cost,bias,variance_reduction,net_benefit\n";
  const Groups all{[&] {
    std::vector<std::size_t> v(inst.truth.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = k;
    return v;
  }()};
  for (const auto& [name, groups] : {std::pair{std::string("direct"), all},
                                     std::pair{std::string("true_clusters"), inst.true_clusters.members()}}) {
    const auto params = apriori_params(inst.truth, groups);
    for (std::size_t g = 0; g < groups.size(); ++g)
      for (auto k : groups[g]) {
        const auto d = cost_decomposition(params[g], inst.truth[k].mu, inst.truth[k].sigma2, n);
        os << k << ',' << fmt_num(inst.truth[k].mu) << ',' << name << ',' << g << ',' << fmt_num(params[g].alpha)
           << ',' << fmt_num(params[g].anchor_mean) << ',' << fmt_num(d.saa_cost) << ',' << fmt_num(d.bias) << ','
           << fmt_num(d.variance_reduction) << ',' << fmt_num(d.variance_reduction - d.bias) << '\n';
      }
  }
}

// Instance, truth, clusters and decisions of replication 0 for the first cluster method.
std::vector<std::string> dump_instance(const fs::path& dir, const ExperimentConfig& exp) {
  std::vector<std::vector<double>> samples;
  std::vector<Gaussian> truth;
  std::vector<int> true_cluster;
  const std::uint64_t seed = Stream::derive(exp.master_seed, {0});
  if (const auto* tc = std::get_if<TwoClusterGenSpec>(&exp.source)) {
    auto s = *tc;
    s.seed = seed;
    auto g = gen_two_cluster(s);
    samples = std::move(g.samples);
    for (const auto& m : g.truth) truth.push_back({m.mu, std::sqrt(m.sigma2)});
    true_cluster = g.true_clusters.assignments;
  } else if (const auto* nv = std::get_if<NewsvendorGenSpec>(&exp.source)) {
    auto s = *nv;
    s.seed = seed;
    auto g = gen_newsvendor(s);
    samples = std::move(g.samples);
    truth = std::move(g.truth);
  } else {
    return {};
  }
  write_with(dir / "instance.csv", [&](std::ostream& os) { write_sales_csv(os, samples); });
  write_with(dir / "truth.csv", [&](std::ostream& os) { write_truth_csv(os, truth, true_cluster); });
  std::vector<std::string> files{"instance.csv", "truth.csv"};

  const ClusterPoolingMethod* cm = nullptr;
  for (const auto& m : exp.methods)
    if (const auto* c = std::get_if<ClusterPoolingMethod>(&m); c && !c->true_clusters && !cm) cm = c;
  if (!cm) return files;
  const auto data = split_all(samples, exp.n1_values.front());
  const auto cs = estimate_clusters(data, cm->metric, cm->k_min);
  std::vector<double> decisions(data.size()), alphas;
  if (std::holds_alternative<MseCost>(exp.cost) && exp.mse_alpha != MseAlphaMode::Loo) {
    for (const auto& g : cs.members()) {
      std::vector<MseSampleStats> stats;
      std::vector<MseProblemMoments> moments;
      for (auto k : g) {
        stats.push_back(MseSampleStats::from_samples(data[k].pooling_samples));
        moments.push_back({truth[k].mu, truth[k].sigma * truth[k].sigma});
      }
      const auto p = exp.mse_alpha == MseAlphaMode::APriori ? apriori_params(moments) : data_driven_params(stats);
      alphas.push_back(p.alpha);
      for (std::size_t i = 0; i < g.size(); ++i)
        decisions[g[i]] = shrunken_decision(p.alpha, p.anchor_mean, stats[i].sample_mean, stats[i].n);
    }
  } else {
    auto r = pool_within_clusters(exp.cost, data, cs, EmpiricalAggregate{}, exp.grid, exp.loo);
    decisions = std::move(r.decisions);
    alphas = std::move(r.cluster_alpha);
  }
  write_with(dir / "clusters.csv", [&](std::ostream& os) { write_cluster_csv(os, cs); });
  write_with(dir / "cluster_tree.txt", [&](std::ostream& os) { write_cluster_tree(os, cs); });
  write_with(dir / "decisions.csv", [&](std::ostream& os) {
    os << "problem_id,cluster_id,alpha,decision\n";
    for (std::size_t k = 0; k < decisions.size(); ++k) {
      const int c = cs.assignments[k];
      os << k << ',' << c << ',' << fmt_num(alphas[static_cast<std::size_t>(c)]) << ',' << fmt_num(decisions[k])
         << '\n';
    }
  });
  files.insert(files.end(), {"clusters.csv", "cluster_tree.txt", "decisions.csv"});
  return files;
}

std::vector<std::vector<double>> relloss_population(const ExperimentConfig& exp, Config& c) {
  if (const auto* nv = std::get_if<NewsvendorGenSpec>(&exp.source)) {
    auto s = *nv;
    s.K = get_size(c, "relloss", "pool_K", static_cast<std::int64_t>(s.K));
    s.seed = Stream::derive(exp.master_seed, {0x5EED});
    return gen_newsvendor(s).samples;
  }
  if (const auto* rd = std::get_if<RealDataSpec>(&exp.source)) {
    // One random training window per problem.
    auto data = read_sales_csv_file(rd->path);
    std::vector<std::vector<double>> out;
    for (std::size_t k = 0; k < data.problems.size(); ++k) {
      const auto& v = data.problems[k].values;
      if (v.size() < rd->n_train) continue;
      out.push_back(subsample_split(v, rd->n_train, 0, exp.master_seed, k).train.all_samples());
    }
    return out;
  }
  throw ConfigError("relloss mode needs a newsvendor generator or real data");
}

int run_experiment_command(const std::string& sub, Config& cfg, const fs::path& dir, std::ostream& log,
                           unsigned threads) {
  auto exp = experiment_from_config(cfg, sub);
  exp.threads = threads;
  const auto mode = sub == "synth-mse" ? std::string("compare") : cfg.get_string("experiment", "mode", "compare");
  if (mode == "relloss") {
    const auto k_values = to_sizes(cfg.get_list("relloss", "k_values", {"10", "50", "150", "400"}), "k_values");
    const auto n2 = get_size(cfg, "relloss", "n2", 3);
    const auto reps = get_size(cfg, "relloss", "replications", static_cast<std::int64_t>(exp.replications));
    auto pop = relloss_population(exp, cfg);
    cfg.require_all_consumed();
    const auto rows = relative_loss_curve(pop, exp.cost, EmpiricalAggregate{}, exp.grid, n2, k_values, reps,
                                          exp.master_seed, exp.loo);
    write_with(dir / "relloss.csv", [&](std::ostream& os) {
      os << "K,replication,relative_loss_pct,alpha_hat,alpha_star\n";
      for (const auto& r : rows)
        os << r.K << ',' << r.replication << ',' << fmt_num(r.relative_loss_pct) << ',' << fmt_num(r.alpha_hat)
           << ',' << fmt_num(r.alpha_star) << '\n';
    });
    const auto med = median_relative_loss(rows, k_values);
    write_with(dir / "relloss_summary.csv", [&](std::ostream& os) {
      os << "K,median_relative_loss_pct\n";
      for (std::size_t i = 0; i < k_values.size(); ++i) os << k_values[i] << ',' << fmt_num(med[i]) << '\n';
    });
    write_manifest(dir, sub, cfg, {"relloss.csv", "relloss_summary.csv"}, {});
    log << "wrote relative-loss curve for " << k_values.size() << " K values\n";
    return kExitOk;
  }
  if (mode != "compare") throw ConfigError("[experiment] mode must be compare or relloss");
  const bool dump = cfg.get_bool("output", "dump_instance", false);
  const bool decomposition = sub == "synth-mse" && cfg.get_bool("output", "decomposition", false);
  cfg.require_all_consumed();

  std::vector<std::string> files{"report.csv", "aggregate.csv"};
  ExperimentReport report;
  int code = kExitOk;
  try {
    report = run_experiment(exp);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_with(dir / "report.csv", [&](std::ostream& os) { write_report_csv(os, report); });
  write_with(dir / "aggregate.csv", [&](std::ostream& os) { write_aggregate_csv(os, report); });
  if (decomposition) {
    write_with(dir / "decomposition.csv", [&](std::ostream& os) {
      write_decomposition(os, std::get<TwoClusterGenSpec>(exp.source), Stream::derive(exp.master_seed, {0}));
    });
    files.push_back("decomposition.csv");
  }
  if (dump) {
    const auto extra = dump_instance(dir, exp);
    files.insert(files.end(), extra.begin(), extra.end());
  }
  write_manifest(dir, sub, cfg, files, report.warnings);
  for (const auto& a : report.aggregate())
    log << a.method << " n1=" << a.n1 << " mean_cost=" << fmt_num(a.mean_cost, 6)
        << " rel_adv=" << fmt_num(a.mean_rel_adv, 4) << "% (se " << fmt_num(a.se_rel_adv, 3) << ")\n";
  if (report.any_failed()) {
    for (const auto& r : report.rows)
      if (r.failed) {
        log << "method failure: " << r.method << " replication " << r.replication << ": " << r.detail << '\n';
        break;
      }
    code = kExitRuntime;
  }
  return code;
}

int run_surface(Config& cfg, const fs::path& dir, std::ostream& log) {
  const double a = cfg.get_double("surface", "a", 10.0);
  const double b = cfg.get_double("surface", "b", 20.0);
  const double sigma = cfg.get_double("surface", "sigma", 5.0);
  const auto N = static_cast<int>(cfg.get_int("surface", "N", 10));
  std::vector<int> n1;
  for (auto v : to_sizes(cfg.get_list("surface", "n1", {"1", "2", "3", "4", "5", "6", "7"}), "[surface] n1"))
    n1.push_back(static_cast<int>(v));
  const auto d = to_doubles(cfg.get_list("surface", "d", {"0", "0.5", "1", "2"}), "[surface] d");
  cfg.require_all_consumed();
  std::vector<SurfacePoint> pts;
  try {
    pts = theoretical_benefit_surface(a, b, sigma, N, n1, d);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_with(dir / "surface.csv", [&](std::ostream& os) {
    os << "n1,d,direct_cost,cluster_cost,delta,method,y_tilde,no_benefit_predicted\n";
    for (const auto& p : pts) {
      const double y = std::sqrt(static_cast<double>(p.n1)) * (b - a) / sigma;
      os << p.n1 << ',' << fmt_num(p.d) << ',' << fmt_num(p.direct_cost) << ',' << fmt_num(p.cluster_cost) << ','
         << fmt_num(p.delta) << ',' << p.method << ',' << fmt_num(y) << ','
         << (p.d == 0.0 ? (no_benefit_predicate(y, p.n1) ? "true" : "false") : "") << '\n';
    }
  });
  write_manifest(dir, "surface", cfg, {"surface.csv"}, {});
  log << "wrote " << pts.size() << " surface points\n";
  return kExitOk;
}

int run_diagnose(Config& cfg, const fs::path& dir, std::ostream& log) {
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("experiment", "seed", 1));
  const Gaussian dist{cfg.get_double("diagnose", "mu", 95.0), cfg.get_double("diagnose", "sigma", 19.0)};
  const auto n1 = get_size(cfg, "diagnose", "n1", 5);
  const double level = cfg.get_double("diagnose", "level", 0.95);
  const auto reps = get_size(cfg, "diagnose", "replications", 10000);
  auto pop_spec = read_newsvendor(cfg);
  cfg.require_all_consumed();
  pop_spec.seed = Stream::derive(seed, {0xC0});
  StatisticBias bias{};
  CvDiagnostic cv{};
  try {
    bias = statistic_bias_diagnostic(dist, n1, level, reps, Stream::derive(seed, {0xB1A5}));
    cv = cv_homogeneity_diagnostic(gen_newsvendor(pop_spec).samples);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_with(dir / "diagnose.csv", [&](std::ostream& os) {
    os << "quantity,value\n"
       << "mean_statistic_bias," << fmt_num(bias.mean_bias) << '\n'
       << "mean_statistic_bias_se," << fmt_num(bias.mean_bias_se) << '\n'
       << "quantile_statistic_bias," << fmt_num(bias.quantile_bias) << '\n'
       << "quantile_statistic_bias_se," << fmt_num(bias.quantile_bias_se) << '\n'
       << "ols_slope," << fmt_num(cv.slope) << '\n'
       << "ols_intercept," << fmt_num(cv.intercept) << '\n'
       << "ols_t_stat," << fmt_num(cv.t_stat) << '\n'
       << "ols_significant_95," << (cv.significant_at_95 ? "true" : "false") << '\n';
  });
  write_manifest(dir, "diagnose", cfg, {"diagnose.csv"}, {});
  log << "mean bias " << fmt_num(bias.mean_bias, 4) << " (se " << fmt_num(bias.mean_bias_se, 3) << "), quantile bias "
      << fmt_num(bias.quantile_bias, 4) << " (se " << fmt_num(bias.quantile_bias_se, 3) << "), OLS slope "
      << fmt_num(cv.slope, 4) << '\n';
  return kExitOk;
}

}  // namespace

ExperimentConfig experiment_from_config(Config& c, const std::string& sub) {
  ExperimentConfig e;
  if (sub == "synth-mse") {
    e.source = read_two_cluster(c);
    e.cost = read_cost(c, false);
  } else if (sub == "synth-newsvendor") {
    e.source = read_newsvendor(c);
    e.cost = read_cost(c, true);
  } else if (sub == "real-data") {
    RealDataSpec rd;
    rd.path = c.get_string("data", "path", "");
    if (rd.path.empty()) throw ConfigError("[data] path is required");
    rd.n_train = get_size(c, "data", "n_train", 10);
    e.source = rd;
    e.cost = read_cost(c, true);
  } else {
    throw ConfigError("subcommand '" + sub + "' does not run experiments");
  }
  e.replications = get_size(c, "experiment", "replications", 1);
  e.master_seed = static_cast<std::uint64_t>(c.get_int("experiment", "seed", 1));
  e.n1_values = to_sizes(c.get_list("experiment", "n1", {"3"}), "[experiment] n1");
  e.methods = read_methods(c, e.cost);
  e.grid = read_grid(c);
  e.mse_alpha = read_mse_mode(c);
  e.loo.normalize_per_problem = c.get_bool("experiment", "normalize_loo", false);
  e.common_instances = c.get_bool("experiment", "common_instances", true);
  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return e;
}

int run_subcommand(const std::string& sub, Config& cfg, const std::string& out_dir, std::ostream& log,
                   unsigned threads) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  if (sub == "surface") return run_surface(cfg, dir, log);
  if (sub == "diagnose") return run_diagnose(cfg, dir, log);
  return run_experiment_command(sub, cfg, dir, log, threads);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cluster-based data pooling experiments", "clusterpool"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "results";
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  for (const auto& name : kSubcommands) {
    auto* sub = app.add_subcommand(name, "run the " + name + " workflow");
    sub->add_option("--config", config_path, "config file")->required();
    sub->add_option("--out", out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "override [experiment] seed");
    sub->add_option("--threads", threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  }
  auto full_help = [&] {
    out << app.help();
    for (auto* s : app.get_subcommands({})) out << '\n' << s->help();
  };
  if (args.size() >= 2 && (args[1] == "--help" || args[1] == "-h")) {
    full_help();
    return kExitOk;
  }
  if (args.size() >= 2 && args[1][0] != '-' &&
      std::find(kSubcommands.begin(), kSubcommands.end(), args[1]) == kSubcommands.end()) {
    err << "unknown subcommand '" << args[1] << "'\n";
    full_help();
    return kExitUsage;
  }
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    for (auto* s : app.get_subcommands()) out << s->help();
    if (app.get_subcommands().empty()) full_help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    full_help();
    return kExitUsage;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  try {
    Config cfg = Config::load(config_path);
    if (seed) cfg.set("experiment", "seed", std::to_string(*seed));
    return run_subcommand(sub, cfg, out_dir, out, threads);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace clusterpool
