#include "clusterpool/evaluation.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "clusterpool/rng.hpp"

namespace clusterpool {

std::string fmt_num(double v, int digits) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& f) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lk(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double true_expected_cost(const CostModel& model, double x, const Gaussian& dist) {
  if (!(dist.sigma >= 0.0)) throw std::invalid_argument("true_expected_cost: sigma must be >= 0");
  if (const auto* nv = std::get_if<NewsvendorCost>(&model)) {
    if (dist.sigma == 0.0) return nv->holding * std::max(x - dist.mu, 0.0) + nv->backorder * std::max(dist.mu - x, 0.0);
    const double z = (x - dist.mu) / dist.sigma;
    return nv->holding * (x - dist.mu) + (nv->holding + nv->backorder) * dist.sigma * standard_normal_loss(z);
  }
  return (x - dist.mu) * (x - dist.mu) + dist.sigma * dist.sigma;
}

double relative_advantage(double z_saa, double z_method) {
  if (!(z_saa > 0.0)) throw std::invalid_argument("relative_advantage: z_saa must be > 0");
  return (z_saa - z_method) / z_saa * 100.0;
}

// ---------------------------------------------------------------- relative loss

std::vector<RelLossRow> relative_loss_curve(std::span<const std::vector<double>> datasets, const CostModel& model,
                                            const RelLossAnchor& anchor_policy, const AlphaGrid& grid, std::size_t n2,
                                            std::span<const std::size_t> k_values, std::size_t replications,
                                            std::uint64_t seed, const LooOptions& loo) {
  grid.validate();
  if (n2 == 0) throw std::invalid_argument("relative_loss_curve: n2 must be positive");
  for (const auto& d : datasets)
    if (d.size() < n2 + 2) throw std::invalid_argument("relative_loss_curve: each dataset needs >= n2 + 2 samples");
  for (auto k : k_values)
    if (k == 0 || k > datasets.size()) throw std::invalid_argument("relative_loss_curve: K outside [1, #datasets]");

  std::vector<RelLossRow> rows;
  for (auto K : k_values) {
    for (std::size_t r = 0; r < replications; ++r) {
      Stream rng(seed, {K, r});
      const auto chosen = rng.sample_without_replacement(datasets.size(), K);
      std::vector<ProblemDataset> fit(K);
      std::vector<std::vector<double>> val(K);
      std::vector<double> pooled;
      for (std::size_t i = 0; i < K; ++i) {
        const auto& d = datasets[chosen[i]];
        const auto perm = rng.sample_without_replacement(d.size(), d.size());
        fit[i].problem_id = chosen[i];
        for (std::size_t j = 0; j < d.size(); ++j) (j < n2 ? val[i] : fit[i].pooling_samples).push_back(d[perm[j]]);
        pooled.insert(pooled.end(), fit[i].pooling_samples.begin(), fit[i].pooling_samples.end());
      }
      const AnchorSpec anchor = std::holds_alternative<EmpiricalAggregate>(anchor_policy)
                                    ? AnchorSpec{EmpiricalAnchor::from_samples(std::move(pooled))}
                                    : std::get<SingleAnchor>(anchor_policy).anchor;
      const double alpha_hat = loo_select_alpha(model, fit, anchor, grid, loo);
      std::vector<double> z(grid.values.size(), 0.0);
      for (std::size_t a = 0; a < grid.values.size(); ++a)
        for (std::size_t i = 0; i < K; ++i) {
          const double x = shrunken_solution(model, grid.values[a], anchor, fit[i].pooling_samples);
          for (double v : val[i]) z[a] += cost(model, x, v);
        }
      std::size_t best = 0, picked = 0;
      for (std::size_t a = 0; a < z.size(); ++a) {
        if (z[a] < z[best]) best = a;
        if (grid.values[a] == alpha_hat) picked = a;
      }
      const double loss = z[best] > 0.0 ? (z[picked] - z[best]) / z[best] * 100.0 : 0.0;
      rows.push_back({K, r, loss, alpha_hat, grid.values[best]});
    }
  }
  return rows;
}

std::vector<double> median_relative_loss(std::span<const RelLossRow> rows, std::span<const std::size_t> k_values) {
  std::vector<double> out;
  for (auto K : k_values) {
    std::vector<double> v;
    for (const auto& r : rows)
      if (r.K == K) v.push_back(r.relative_loss_pct);
    if (v.empty()) {
      out.push_back(std::nan(""));
      continue;
    }
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    out.push_back(m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]));
  }
  return out;
}

// ---------------------------------------------------------------- diagnostics

CvDiagnostic cv_homogeneity_diagnostic(std::span<const std::vector<double>> datasets) {
  if (datasets.size() < 3) throw std::invalid_argument("cv_homogeneity_diagnostic: need >= 3 problems");
  std::vector<double> x, y;
  for (const auto& d : datasets) {
    const auto s = MseSampleStats::from_samples(d);
    if (!s.sample_var) throw std::invalid_argument("cv_homogeneity_diagnostic: need >= 2 samples per problem");
    x.push_back(s.sample_mean);
    y.push_back(std::sqrt(*s.sample_var));
  }
  const double m = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("cv_homogeneity_diagnostic: all sample means equal");
  CvDiagnostic r{};
  r.slope = sxy / sxx;
  r.intercept = my - r.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - r.intercept - r.slope * x[i];
    ssr += e * e;
  }
  const double se = std::sqrt(ssr / (m - 2.0) / sxx);
  r.t_stat = se > 0.0 ? r.slope / se : (r.slope == 0.0 ? 0.0 : std::copysign(kInf, r.slope));
  r.significant_at_95 = 2.0 * student_t_sf(std::fabs(r.t_stat), m - 2.0) < 0.05;
  return r;
}

StatisticBias statistic_bias_diagnostic(const Gaussian& dist, std::size_t n1, double level, std::size_t replications,
                                        std::uint64_t seed) {
  if (n1 == 0 || replications < 2) throw std::invalid_argument("statistic_bias_diagnostic: need n1 >= 1, reps >= 2");
  const double true_q = dist.mu + dist.sigma * normal_quantile(level);
  std::vector<double> mb(replications), qb(replications);
  std::vector<double> s(n1);
  for (std::size_t r = 0; r < replications; ++r) {
    Stream rng(seed, {r});
    for (auto& v : s) v = rng.normal(dist.mu, dist.sigma);
    mb[r] = problem_statistic(s, SampleMean{}) - dist.mu;
    qb[r] = problem_statistic(s, SampleQuantile{level}) - true_q;
  }
  auto mean_se = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::pair{m, std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()))};
  };
  const auto [m1, s1] = mean_se(mb);
  const auto [m2, s2] = mean_se(qb);
  return {m1, s1, m2, s2};
}

// ---------------------------------------------------------------- benefit surface

double direct_pooling_limit_cost(double a, double b, double sigma, int N, double d) {
  const double s2 = sigma * sigma;
  const double alpha = 12.0 * s2 / ((b - a) * (b - a) * (1.0 + 3.0 * d + 3.0 * d * d));
  return s2 * (1.0 + 1.0 / (N + alpha));
}

namespace {
// Per-cluster limit cost sigma^2 (1 + 1/(n + sigma^2/Gamma)), with Gamma = 0 meaning alpha = inf.
double cluster_term(double s2, int n, double gamma) {
  if (gamma <= 0.0) return s2;
  return s2 * (1.0 + 1.0 / (n + s2 / gamma));
}
}  // namespace

double estimated_cluster_cost_gamma(double a, double b, double sigma, int N, int n1) {
  if (n1 < 1 || n1 >= N) throw std::invalid_argument("estimated_cluster_cost_gamma: need 1 <= N1 < N");
  return cluster_term(sigma * sigma, N - n1, gamma_within_cluster_d0(a, b, sigma, n1));
}

double estimated_cluster_cost_quadrature(double a, double b, double sigma, int N, int n1, double d) {
  if (!(b > a) || !(sigma > 0.0) || !(d >= 0.0)) throw std::invalid_argument("surface: invalid design");
  if (n1 < 1 || n1 >= N) throw std::invalid_argument("surface: need 1 <= N1 < N");
  const double mid = 0.5 * (a + b);
  const double shift = d * (b - a);
  const double lo2 = mid + shift, hi2 = b + shift;
  const double dens = 0.5 / (mid - a);  // each half has mass 1/2 over an interval of width (b-a)/2
  const double boundary = 0.5 * (0.5 * (a + mid) + 0.5 * (lo2 + hi2));
  const double scale = std::sqrt(static_cast<double>(n1)) / sigma;
  // Moments of mu restricted to the estimated upper cluster, weighted by P(classified upper | mu).
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto integrate = [&](auto&& f, double lo, double hi) { return GK::integrate(f, lo, hi, 15, 1e-12); };
  auto moments = [&](bool upper) {
    double m[3] = {0, 0, 0};
    for (int p = 0; p < 3; ++p) {
      auto f = [&](double mu) {
        const double pu = normal_cdf((mu - boundary) * scale);
        return dens * (upper ? pu : 1.0 - pu) * std::pow(mu - boundary, p);
      };
      m[p] = integrate(f, a, mid) + integrate(f, lo2, hi2);
    }
    return std::array<double, 3>{m[0], m[1], m[2]};
  };
  const double s2 = sigma * sigma;
  double total = 0.0;
  for (bool upper : {false, true}) {
    const auto m = moments(upper);
    if (m[0] <= 0.0) continue;
    const double mean = m[1] / m[0];
    const double gamma = std::max(m[2] / m[0] - mean * mean, 0.0);
    total += m[0] * cluster_term(s2, N - n1, gamma);
  }
  return total;
}

std::vector<SurfacePoint> theoretical_benefit_surface(double a, double b, double sigma, int N,
                                                      std::span<const int> n1_values,
                                                      std::span<const double> d_values) {
  std::vector<SurfacePoint> out;
  for (int n1 : n1_values) {
    for (double d : d_values) {
      TwoClusterDesign{a, b, d, sigma * sigma, N, n1}.validate();
      SurfacePoint p{};
      p.n1 = n1;
      p.d = d;
      p.direct_cost = direct_pooling_limit_cost(a, b, sigma, N, d);
      if (d == 0.0) {
        p.cluster_cost = estimated_cluster_cost_gamma(a, b, sigma, N, n1);
        p.method = "gamma";
      } else {
        p.cluster_cost = estimated_cluster_cost_quadrature(a, b, sigma, N, n1, d);
        p.method = "quadrature";
      }
      p.delta = p.direct_cost - p.cluster_cost;
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace clusterpool
