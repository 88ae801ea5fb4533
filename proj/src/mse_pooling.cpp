#include "clusterpool/mse_pooling.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace clusterpool {

MseSampleStats MseSampleStats::from_samples(std::span<const double> data) {
  if (data.empty()) throw std::invalid_argument("MseSampleStats: empty data");
  MseSampleStats s;
  s.n = static_cast<int>(data.size());
  double sum = 0.0;
  for (double v : data) sum += v;
  s.sample_mean = sum / s.n;
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : data) ss += (v - s.sample_mean) * (v - s.sample_mean);
    s.sample_var = ss / (s.n - 1);
  }
  return s;
}

void TwoClusterDesign::validate() const {
  if (!(b > a && a >= 0.0)) throw std::invalid_argument("TwoClusterDesign: need b > a >= 0");
  if (!(d >= 0.0)) throw std::invalid_argument("TwoClusterDesign: need d >= 0");
  if (!(sigma_bar2 > 0.0)) throw std::invalid_argument("TwoClusterDesign: need sigma_bar2 > 0");
  if (n_cluster < 1 || n_cluster >= n_total) throw std::invalid_argument("TwoClusterDesign: need 1 <= N1 < N");
}

double shrunken_decision(double alpha, double anchor_mean, double sample_mean, int n) {
  if (n <= 0) throw std::invalid_argument("shrunken_decision: n must be positive");
  if (!(alpha >= 0.0)) throw std::invalid_argument("shrunken_decision: alpha must be >= 0");
  if (alpha == kInf) return anchor_mean;
  // Same as the weighted average, but exact when sample_mean == anchor_mean.
  return sample_mean + (alpha / (n + alpha)) * (anchor_mean - sample_mean);
}

static PoolingParams apriori_group(std::span<const MseProblemMoments> moments, const std::vector<std::size_t>& g) {
  if (g.empty()) throw std::invalid_argument("apriori_params: empty group");
  double mu_sum = 0.0;
  for (auto k : g) mu_sum += moments[k].mu;
  const double anchor = mu_sum / static_cast<double>(g.size());
  double num = 0.0, den = 0.0;
  for (auto k : g) {
    if (moments[k].sigma2 < 0.0) throw std::invalid_argument("apriori_params: negative variance");
    num += moments[k].sigma2;
    den += (moments[k].mu - anchor) * (moments[k].mu - anchor);
  }
  return {den == 0.0 ? kInf : num / den, anchor};
}

std::vector<PoolingParams> apriori_params(std::span<const MseProblemMoments> moments, const Groups& groups) {
  std::vector<PoolingParams> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    for (auto k : g)
      if (k >= moments.size()) throw std::invalid_argument("apriori_params: index out of range");
    out.push_back(apriori_group(moments, g));
  }
  return out;
}

PoolingParams apriori_params(std::span<const MseProblemMoments> moments) {
  std::vector<std::size_t> all(moments.size());
  for (std::size_t k = 0; k < all.size(); ++k) all[k] = k;
  return apriori_group(moments, all);
}

double expected_cost_mse(const PoolingParams& p, std::span<const MseProblemMoments> moments, int n) {
  if (n <= 0) throw std::invalid_argument("expected_cost_mse: n must be positive");
  const double w = anchor_weight(p.alpha, n);
  const double v = 1.0 - w;
  double total = 0.0;
  for (const auto& m : moments) {
    const double dev = m.mu - p.anchor_mean;
    total += m.sigma2 + w * w * dev * dev + v * v * m.sigma2 / n;
  }
  return total;
}

double saa_expected_cost(std::span<const MseProblemMoments> moments, int n) {
  if (n <= 0) throw std::invalid_argument("saa_expected_cost: n must be positive");
  double total = 0.0;
  for (const auto& m : moments) total += m.sigma2 * (1.0 + 1.0 / n);
  return total;
}

CostDecomposition cost_decomposition(const PoolingParams& p, double mu, double sigma2, int n) {
  if (n <= 0) throw std::invalid_argument("cost_decomposition: n must be positive");
  const double w = anchor_weight(p.alpha, n);
  const double v = 1.0 - w;
  const double dev = w * (mu - p.anchor_mean);
  return {sigma2 / n + sigma2, dev * dev, (1.0 - v * v) * sigma2 / n};
}

PoolingParams data_driven_params(std::span<const MseSampleStats> stats) {
  if (stats.empty()) throw std::invalid_argument("data_driven_params: empty sequence");
  const int n = stats.front().n;
  if (n < 2) throw std::invalid_argument("data_driven_params: need n >= 2");
  double mean_sum = 0.0;
  for (const auto& s : stats) {
    if (s.n != n || !s.sample_var) throw std::invalid_argument("data_driven_params: problems must share n >= 2");
    mean_sum += s.sample_mean;
  }
  const double anchor = mean_sum / static_cast<double>(stats.size());
  double var_sum = 0.0, disp = 0.0;
  for (const auto& s : stats) {
    var_sum += *s.sample_var;
    disp += (anchor - s.sample_mean) * (anchor - s.sample_mean);
  }
  const double den = disp - var_sum / n;
  return {den <= 0.0 ? kInf : var_sum / den, anchor};
}

AsymptoticBenefit asymptotic_benefit(const TwoClusterDesign& g) {
  g.validate();
  const double w2 = (g.b - g.a) * (g.b - g.a);
  AsymptoticBenefit r{};
  r.alpha_direct_limit = 12.0 * g.sigma_bar2 / (w2 * (1.0 + 3.0 * g.d + 3.0 * g.d * g.d));
  r.alpha_cluster_limit = 48.0 * g.sigma_bar2 / w2;
  r.delta1 = g.sigma_bar2 * (1.0 / (g.n_total + r.alpha_direct_limit) -
                             1.0 / (g.n_total - g.n_cluster + r.alpha_cluster_limit));
  const double inner = 12.0 - g.n_cluster * w2 / (4.0 * g.sigma_bar2);
  if (inner <= 0.0) {
    r.condition_undefined = true;
    r.conditions_hold = false;
    return r;
  }
  const bool c1 = std::sqrt(g.sigma_bar2) / std::sqrt(static_cast<double>(g.n_cluster)) >= (g.b - g.a) / 6.0;
  const bool c2 = g.d >= std::sqrt(1.0 / inner - 1.0 / 12.0) - 0.5;
  r.conditions_hold = c1 && c2;
  return r;
}

double no_benefit_function(double y, int n1) {
  if (!(y > 0.0)) throw std::invalid_argument("no_benefit_function: y must be > 0");
  if (n1 < 1) throw std::invalid_argument("no_benefit_function: N1 must be positive");
  using std::numbers::pi;
  const double e = std::erf(y / (2.0 * std::numbers::sqrt2));
  const double em = std::erf(-y / (2.0 * std::numbers::sqrt2));
  const double rn = std::sqrt(static_cast<double>(n1));
  const double bracket = y * y * (4.0 + 3.0 * e * e) / 48.0 - 2.0 * std::exp(-y * y / 4.0) / pi -
                         std::exp(-y * y / 8.0) * std::sqrt(2.0 / pi) * e * rn * (y * y - 4.0) / y +
                         2.0 * em * em * (y * y * n1 - 2.0) / (y * y);
  return 1.0 / bracket - 12.0 / (y * y) - 1.0;
}

double no_benefit_function_derived(double y) {
  if (!(y > 0.0)) throw std::invalid_argument("no_benefit_function_derived: y must be > 0");
  using std::numbers::pi;
  const double e = std::erf(y / (2.0 * std::numbers::sqrt2));
  const double y2 = y * y;
  // N1 * Gamma / sigma^2 expressed through y alone.
  const double bracket = y2 * (4.0 - 3.0 * e * e) / 48.0 + e * e * (y2 - 2.0) / (2.0 * y2) -
                         e * (y2 - 4.0) * std::exp(-y2 / 8.0) / (2.0 * std::sqrt(2.0 * pi) * y) -
                         std::exp(-y2 / 4.0) / (2.0 * pi);
  return 1.0 / bracket - 12.0 / y2 - 1.0;
}

bool no_benefit_predicate(double y, int n1) { return y > 6.0 || no_benefit_function(y, n1) < 0.0; }

double gamma_within_cluster_d0(double a, double b, double sigma, int n1) {
  if (!(b > a)) throw std::invalid_argument("gamma_within_cluster_d0: need b > a");
  if (!(sigma > 0.0)) throw std::invalid_argument("gamma_within_cluster_d0: need sigma > 0");
  if (n1 < 1) throw std::invalid_argument("gamma_within_cluster_d0: N1 must be positive");
  using std::numbers::pi;
  const double w = b - a, w2 = w * w, s2 = sigma * sigma, n = n1;
  const double e = std::erf(w * std::sqrt(n) / (2.0 * std::numbers::sqrt2 * sigma));
  return w2 * (4.0 - 3.0 * e * e) / 48.0 + s2 * e * e * (w2 * n - 2.0 * s2) / (2.0 * w2 * n * n) -
         e * sigma * (w2 * n - 4.0 * s2) * std::exp(-w2 * n / (8.0 * s2)) /
             (std::sqrt(8.0 * pi) * w * std::pow(n, 1.5)) -
         s2 * std::exp(-w2 * n / (4.0 * s2)) / (2.0 * pi * n);
}

double misclassification_bound(double d, double width, int n1, double sigma_max) {
  if (!(width > 0.0)) throw std::invalid_argument("misclassification_bound: width must be > 0");
  if (!(sigma_max > 0.0)) throw std::invalid_argument("misclassification_bound: sigma_max must be > 0");
  if (n1 < 1) throw std::invalid_argument("misclassification_bound: N1 must be positive");
  return 0.25 * std::erfc(width * d * std::sqrt(static_cast<double>(n1)) / (2.0 * std::numbers::sqrt2 * sigma_max));
}

}  // namespace clusterpool
