#pragma once

#include <Eigen/Dense>

namespace ssal {

/// Differentiable log-density over an unconstrained real vector. Both
/// samplers and the variational fitter consume this interface.
class LogDensity {
 public:
  virtual ~LogDensity() = default;

  [[nodiscard]] virtual Eigen::Index dim() const = 0;
  [[nodiscard]] virtual double log_density(const Eigen::VectorXd& z) const = 0;
  /// Returns the log-density and writes its gradient into `grad`.
  virtual double log_density_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const = 0;
};

}  // namespace ssal
