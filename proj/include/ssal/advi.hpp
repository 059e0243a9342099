#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "ssal/log_density.hpp"
#include "ssal/rng.hpp"

namespace ssal {

/// Full-rank Gaussian q(zeta) = N(mu, L L').
struct VariationalState {
  Eigen::VectorXd mu;
  Eigen::MatrixXd L;  // lower triangular, positive diagonal

  /// mu = 0, L = I.
  static VariationalState standard(Eigen::Index dim);
  [[nodiscard]] Eigen::Index dim() const { return mu.size(); }
  [[nodiscard]] Eigen::MatrixXd covariance() const { return L * L.transpose(); }
  /// Throws InputError on shape mismatch, a non-triangular L or a
  /// non-positive diagonal.
  void validate() const;
};

enum class StepSchedule {
  kConstant,      // s^i = step_size
  kRobbinsMonro,  // s^i = step_size * i^-decay
  kAdaptive,      // step_size * i^(-1/2 + 1e-16) / (1 + sqrt(s_i)), s_i an EWMA of squared gradients
};

struct AdviConfig {
  std::size_t mc_draws = 8;
  StepSchedule schedule = StepSchedule::kConstant;
  double step_size = 0.01;
  double decay = 0.6;
  double adaptive_weight = 0.1;
  std::size_t max_iters = 10000;
  std::size_t min_iters = 0;
  double elbo_tol = 1e-4;
  std::size_t elbo_window = 10;
  std::size_t elbo_eval_draws = 100;
  std::size_t elbo_every = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Entropy of q: dim (1 + log 2 pi) / 2 + sum log L_ii.
double gaussian_entropy(const VariationalState& state);

/// ELBO with the given standard-normal draws (one per column).
double elbo_estimate(const LogDensity& target, const VariationalState& state, const Eigen::MatrixXd& xi);
double elbo_estimate(const LogDensity& target, const VariationalState& state, std::size_t n_draws, Rng& rng);

struct ElboGradient {
  Eigen::VectorXd mu;
  Eigen::MatrixXd L;
};

/// Reparameterization gradients of the ELBO with the given draws:
/// d/dmu = mean g, d/dL = lower(mean g xi') + diag(1 / L_ii).
ElboGradient elbo_gradients(const LogDensity& target, const VariationalState& state, const Eigen::MatrixXd& xi);
ElboGradient elbo_gradients(const LogDensity& target, const VariationalState& state, std::size_t n_draws, Rng& rng);

struct AdviResult {
  VariationalState state;
  std::vector<double> elbo_trace;            // one entry per evaluation
  std::vector<std::size_t> elbo_iterations;  // iteration index of each entry
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t gradient_evaluations = 0;
};

/// Called before every ascent iteration with its index (imputation hook).
using BeforeIteration = std::function<void(std::size_t iteration)>;

/// Stochastic gradient ascent from `init` until the relative change of the
/// windowed ELBO mean drops below elbo_tol or max_iters is reached. Throws
/// EngineError if the ELBO or a gradient turns non-finite.
AdviResult advi_fit(const LogDensity& target, const VariationalState& init, const AdviConfig& config,
                    const BeforeIteration& before = {});

/// n draws zeta = mu + L xi, one per row.
Eigen::MatrixXd draw_variational_posterior(const VariationalState& state, std::size_t n, Rng& rng);

/// Matrix of independent standard normals (rows x cols).
Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);

}  // namespace ssal
