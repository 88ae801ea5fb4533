#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace clusterpool {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Wichura's AS241 (PPND16); relative accuracy about 1e-16 on (0,1).
double normal_quantile(double p);

// E[(Z - z)^+] for standard normal Z.
inline double standard_normal_loss(double z) {
  return normal_pdf(z) - z * (1.0 - normal_cdf(z));
}

// Survival function of Student's t with real-valued degrees of freedom.
double student_t_sf(double t, double df);

}  // namespace clusterpool
