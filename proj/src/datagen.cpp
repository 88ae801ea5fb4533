#include "clusterpool/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "clusterpool/rng.hpp"

namespace clusterpool {

void TwoClusterGenSpec::validate() const {
  if (!(b > a && a >= 0.0)) throw std::invalid_argument("two-cluster spec: need b > a >= 0");
  if (!(d >= 0.0)) throw std::invalid_argument("two-cluster spec: need d >= 0");
  if (K < 2 || N < 2) throw std::invalid_argument("two-cluster spec: need K >= 2 and N >= 2");
  if (const auto* p = std::get_if<PerProblemSigma>(&sigma)) {
    if (p->sigma.size() != K) throw std::invalid_argument("two-cluster spec: one sigma per problem required");
    for (double s : p->sigma)
      if (!(s >= 0.0)) throw std::invalid_argument("two-cluster spec: sigma must be >= 0");
  } else if (!(std::get<CommonSigma>(sigma).sigma >= 0.0)) {
    throw std::invalid_argument("two-cluster spec: sigma must be >= 0");
  }
}

void NewsvendorGenSpec::validate() const {
  if (!(mu_high > mu_low && mu_low > 0.0)) throw std::invalid_argument("newsvendor spec: need mu_high > mu_low > 0");
  if (!(cv_sd >= 0.0)) throw std::invalid_argument("newsvendor spec: cv_sd must be >= 0");
  if (K < 1 || N < 1) throw std::invalid_argument("newsvendor spec: need K, N >= 1");
}

TwoClusterInstance gen_two_cluster(const TwoClusterGenSpec& spec) {
  spec.validate();
  TwoClusterInstance inst;
  inst.samples.resize(spec.K);
  inst.truth.resize(spec.K);
  std::vector<std::vector<std::size_t>> groups(2);
  const double mid = 0.5 * (spec.a + spec.b);
  const double shift = spec.d * (spec.b - spec.a);
  for (std::size_t k = 0; k < spec.K; ++k) {
    Stream rng(spec.seed, {k});
    const bool second = rng.uniform() >= 0.5;
    const double mu = second ? rng.uniform(mid + shift, spec.b + shift) : rng.uniform(spec.a, mid);
    const double sigma = std::holds_alternative<CommonSigma>(spec.sigma)
                             ? std::get<CommonSigma>(spec.sigma).sigma
                             : std::get<PerProblemSigma>(spec.sigma).sigma[k];
    inst.truth[k] = {mu, sigma * sigma};
    auto& s = inst.samples[k];
    s.resize(spec.N);
    for (auto& v : s) v = rng.normal(mu, sigma);
    groups[second ? 1 : 0].push_back(k);
  }
  inst.true_clusters = ClusterStructure::from_groups(spec.K, groups);
  return inst;
}

NewsvendorInstance gen_newsvendor(const NewsvendorGenSpec& spec) {
  spec.validate();
  NewsvendorInstance inst;
  inst.samples.resize(spec.K);
  inst.truth.resize(spec.K);
  for (std::size_t k = 0; k < spec.K; ++k) {
    Stream rng(spec.seed, {k});
    const double mu = rng.uniform(spec.mu_low, spec.mu_high);
    // Draw the CV even when cv_sd = 0 so the stream layout does not depend on it.
    const double z = normal_quantile(rng.uniform());
    const double cv = std::max(spec.cv_mean + spec.cv_sd * z, 0.0);
    const double sigma = cv * mu;
    inst.truth[k] = {mu, sigma};
    auto& s = inst.samples[k];
    s.resize(spec.N);
    for (auto& v : s) v = rng.normal(mu, sigma);
  }
  return inst;
}

std::vector<ProblemDataset> split_all(std::span<const std::vector<double>> samples, std::size_t n1) {
  std::vector<ProblemDataset> out;
  out.reserve(samples.size());
  for (std::size_t k = 0; k < samples.size(); ++k) out.push_back(ProblemDataset::split(k, samples[k], n1));
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(',', start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

SalesData read_sales_csv(std::istream& in) {
  SalesData data;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::map<long long, double>> rows;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto f = split_commas(t);
    if (!header_seen) {
      if (f.size() != 3 || f[0] != "problem_id" || f[1] != "period" || f[2] != "value")
        throw ParseError(lineno, "expected header 'problem_id,period,value'");
      header_seen = true;
      continue;
    }
    if (f.size() != 3) throw ParseError(lineno, "expected 3 fields");
    if (f[0].empty()) throw ParseError(lineno, "empty problem_id");
    long long period = 0;
    double value = 0.0;
    if (!parse_number(f[1], period)) throw ParseError(lineno, "period is not an integer");
    if (!parse_number(f[2], value) || !std::isfinite(value)) throw ParseError(lineno, "value is not a number");
    if (value < 0.0) throw ParseError(lineno, "value is negative");
    const std::string id(f[0]);
    auto [it, inserted] = index.emplace(id, rows.size());
    if (inserted) {
      rows.emplace_back();
      data.problems.push_back(SalesProblem{id, {}, {}});
    }
    if (!rows[it->second].emplace(period, value).second)
      throw ParseError(lineno, "duplicate (problem_id, period) = (" + id + ", " + std::to_string(period) + ")");
  }
  if (!header_seen) throw ParseError(lineno + 1, "missing header");
  for (std::size_t p = 0; p < rows.size(); ++p) {
    for (const auto& [period, value] : rows[p]) {
      data.problems[p].periods.push_back(period);
      data.problems[p].values.push_back(value);
    }
  }
  if (data.problems.empty()) data.warnings.push_back("no data rows: empty dataset");
  return data;
}

SalesData read_sales_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_sales_csv(in);
}

std::vector<ProblemDataset> load_sales_csv(const std::string& path, std::size_t n1, std::vector<std::string>* warnings) {
  auto data = read_sales_csv_file(path);
  std::vector<ProblemDataset> out;
  for (std::size_t p = 0; p < data.problems.size(); ++p) {
    const auto& v = data.problems[p].values;
    auto ds = ProblemDataset::split(p, v, std::min(n1, v.size()));
    if (v.size() < n1 + 1)
      data.warnings.push_back("problem " + data.problems[p].problem_id + " has " + std::to_string(v.size()) +
                              " rows; pooling set empty");
    out.push_back(std::move(ds));
  }
  if (warnings) *warnings = std::move(data.warnings);
  return out;
}

TrainTestSplit subsample_split(std::span<const double> data, std::size_t n_train, std::size_t n1, std::uint64_t seed,
                               std::size_t problem_id) {
  if (n_train == 0) throw std::invalid_argument("subsample_split: n_train must be positive");
  if (n_train > data.size()) throw std::invalid_argument("subsample_split: n_train exceeds available data");
  if (n1 >= n_train) throw std::invalid_argument("subsample_split: need n1 < n_train");
  Stream rng(seed, {problem_id});
  const auto perm = rng.sample_without_replacement(data.size(), data.size());
  std::vector<double> train(n_train);
  for (std::size_t i = 0; i < n_train; ++i) train[i] = data[perm[i]];
  TrainTestSplit r;
  r.train = ProblemDataset::split(problem_id, train, n1);
  r.test.reserve(data.size() - n_train);
  for (std::size_t i = n_train; i < data.size(); ++i) r.test.push_back(data[perm[i]]);
  return r;
}

void write_sales_csv(std::ostream& os, std::span<const std::vector<double>> samples) {
  os << "problem_id,period,value\n" << std::setprecision(17);
  for (std::size_t k = 0; k < samples.size(); ++k)
    for (std::size_t j = 0; j < samples[k].size(); ++j) os << k << ',' << j << ',' << samples[k][j] << '\n';
}

void write_truth_csv(std::ostream& os, std::span<const Gaussian> truth, std::span<const int> true_cluster) {
  os << "problem_id,mu,sigma,true_cluster\n" << std::setprecision(17);
  for (std::size_t k = 0; k < truth.size(); ++k)
    os << k << ',' << truth[k].mu << ',' << truth[k].sigma << ','
       << (k < true_cluster.size() ? true_cluster[k] : -1) << '\n';
}

}  // namespace clusterpool
