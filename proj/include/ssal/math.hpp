#pragma once

#include <cmath>
#include <numbers>

namespace ssal::math {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

/// Logistic function, evaluated on the branch that cannot overflow.
inline double sigmoid(double a) {
  if (a >= 0.0) {
    return 1.0 / (1.0 + std::exp(-a));
  }
  const double e = std::exp(a);
  return e / (1.0 + e);
}

/// log(1 + exp(a)) without overflow.
inline double log1p_exp(double a) {
  if (a > 0.0) {
    return a + std::log1p(std::exp(-a));
  }
  return std::log1p(std::exp(a));
}

/// log sigmoid(a) = -log(1 + exp(-a)).
inline double log_sigmoid(double a) { return -log1p_exp(-a); }

/// Bernoulli log-mass y*log(mu) + (1-y)*log(1-mu) with mu = sigmoid(a).
inline double bernoulli_logit_lpmf(int y, double a) { return y != 0 ? log_sigmoid(a) : log_sigmoid(-a); }

inline double log_sum_exp(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double normal_log_pdf(double x, double mean, double var) {
  const double z = x - mean;
  return -kLogSqrt2Pi - 0.5 * std::log(var) - 0.5 * z * z / var;
}

inline double std_normal_log_pdf(double z) { return -kLogSqrt2Pi - 0.5 * z * z; }

inline double std_normal_pdf(double z) { return std::exp(std_normal_log_pdf(z)); }

/// Standard normal CDF.
inline double Phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// log Phi(z), accurate in the far lower tail.
double log_Phi(double z);

/// d/dz log Phi(z) = phi(z) / Phi(z) (inverse Mills ratio).
double d_log_Phi(double z);

/// Standard normal quantile; p must lie in (0, 1).
double Phi_inv(double p);

}  // namespace ssal::math
