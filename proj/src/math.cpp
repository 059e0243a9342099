#include "ssal/math.hpp"

#include <boost/math/special_functions/erf.hpp>

namespace ssal::math {

double log_Phi(double z) {
  if (z > -20.0) {
    return std::log(Phi(z));
  }
  // Asymptotic series of the Mills ratio.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - kLogSqrt2Pi + std::log(series);
}

double d_log_Phi(double z) {
  if (z > -20.0) {
    return std::exp(std_normal_log_pdf(z) - std::log(Phi(z)));
  }
  const double z2 = z * z;
  // phi/Phi ~ -z / (1 - 1/z^2 + 3/z^4 - ...)
  return -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
}

double Phi_inv(double p) { return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p); }

}  // namespace ssal::math
