#include "ssal/advi.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ssal/errors.hpp"

namespace ssal {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;
constexpr double kMinDiagonal = 1e-6;

[[noreturn]] void non_finite(const char* what, std::size_t iteration) {
  std::ostringstream msg;
  msg << "ADVI " << what << " became non-finite at iteration " << iteration;
  throw EngineError(msg.str());
}

}  // namespace

VariationalState VariationalState::standard(Eigen::Index dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Identity(dim, dim)};
}

void VariationalState::validate() const {
  if (L.rows() != mu.size() || L.cols() != mu.size()) throw InputError("variational factor has the wrong shape");
  if (!L.isLowerTriangular()) throw InputError("variational factor is not lower triangular");
  if (!(L.diagonal().array() > 0.0).all()) throw InputError("variational factor has a non-positive diagonal");
}

void AdviConfig::validate() const {
  if (mc_draws == 0) throw ConfigError("advi.mc_draws must be positive");
  if (!(step_size > 0.0)) throw ConfigError("advi.step_size must be positive");
  if (!(decay > 0.0)) throw ConfigError("advi.decay must be positive");
  if (!(adaptive_weight > 0.0 && adaptive_weight <= 1.0)) throw ConfigError("advi.adaptive_weight must be in (0, 1]");
  if (!(elbo_tol > 0.0)) throw ConfigError("advi.elbo_tol must be positive");
  if (elbo_window == 0) throw ConfigError("advi.elbo_window must be positive");
  if (elbo_eval_draws == 0) throw ConfigError("advi.elbo_eval_draws must be positive");
  if (elbo_every == 0) throw ConfigError("advi.elbo_every must be positive");
}

Eigen::MatrixXd standard_normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = rng.normal();
  }
  return out;
}

double gaussian_entropy(const VariationalState& state) {
  return 0.5 * static_cast<double>(state.dim()) * (1.0 + kLog2Pi) + state.L.diagonal().array().log().sum();
}

double elbo_estimate(const LogDensity& target, const VariationalState& state, const Eigen::MatrixXd& xi) {
  double sum = 0.0;
  for (Eigen::Index s = 0; s < xi.cols(); ++s) {
    sum += target.log_density(state.mu + state.L.triangularView<Eigen::Lower>() * xi.col(s));
  }
  return sum / static_cast<double>(xi.cols()) + gaussian_entropy(state);
}

double elbo_estimate(const LogDensity& target, const VariationalState& state, std::size_t n_draws, Rng& rng) {
  return elbo_estimate(target, state, standard_normal_matrix(state.dim(), static_cast<Eigen::Index>(n_draws), rng));
}

ElboGradient elbo_gradients(const LogDensity& target, const VariationalState& state, const Eigen::MatrixXd& xi) {
  const Eigen::Index dim = state.dim();
  ElboGradient out{Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim)};
  Eigen::VectorXd g;
  for (Eigen::Index s = 0; s < xi.cols(); ++s) {
    const Eigen::VectorXd z = state.mu + state.L.triangularView<Eigen::Lower>() * xi.col(s);
    target.log_density_gradient(z, g);
    out.mu += g;
    out.L.noalias() += g * xi.col(s).transpose();
  }
  const double inv = 1.0 / static_cast<double>(xi.cols());
  out.mu *= inv;
  out.L = (out.L * inv).triangularView<Eigen::Lower>();
  out.L.diagonal().array() += state.L.diagonal().array().inverse();
  return out;
}

ElboGradient elbo_gradients(const LogDensity& target, const VariationalState& state, std::size_t n_draws, Rng& rng) {
  return elbo_gradients(target, state, standard_normal_matrix(state.dim(), static_cast<Eigen::Index>(n_draws), rng));
}

AdviResult advi_fit(const LogDensity& target, const VariationalState& init, const AdviConfig& config,
                    const BeforeIteration& before) {
  config.validate();
  init.validate();
  if (init.dim() != target.dim()) throw InputError("initial variational state has the wrong dimension");
  const Eigen::Index dim = init.dim();
  Rng root(config.seed);
  Rng grad_rng = root.split(0);
  Rng eval_rng = root.split(1);
  // One fixed batch for the trace keeps successive evaluations comparable.
  const Eigen::MatrixXd eval_xi =
      standard_normal_matrix(dim, static_cast<Eigen::Index>(config.elbo_eval_draws), eval_rng);

  AdviResult result;
  result.state = init;
  VariationalState& q = result.state;
  Eigen::VectorXd s_mu;
  Eigen::MatrixXd s_L;
  double previous_window = std::numeric_limits<double>::quiet_NaN();
  double window_sum = 0.0;
  std::size_t window_count = 0;

  for (std::size_t it = 1; it <= config.max_iters; ++it) {
    if (before) before(it - 1);
    const ElboGradient grad = elbo_gradients(target, q, config.mc_draws, grad_rng);
    result.gradient_evaluations += config.mc_draws;
    if (!grad.mu.allFinite() || !grad.L.allFinite()) non_finite("gradient", it);

    const double i = static_cast<double>(it);
    switch (config.schedule) {
      case StepSchedule::kConstant:
        q.mu += config.step_size * grad.mu;
        q.L += config.step_size * grad.L;
        break;
      case StepSchedule::kRobbinsMonro: {
        const double s = config.step_size * std::pow(i, -config.decay);
        q.mu += s * grad.mu;
        q.L += s * grad.L;
        break;
      }
      case StepSchedule::kAdaptive: {
        const double a = config.adaptive_weight;
        if (it == 1) {
          s_mu = grad.mu.array().square();
          s_L = grad.L.array().square();
        } else {
          s_mu = a * grad.mu.array().square() + (1.0 - a) * s_mu.array();
          s_L = a * grad.L.array().square() + (1.0 - a) * s_L.array();
        }
        const double base = config.step_size * std::pow(i, -0.5 + 1e-16);
        q.mu.array() += base * grad.mu.array() / (1.0 + s_mu.array().sqrt());
        q.L.array() += base * grad.L.array() / (1.0 + s_L.array().sqrt());
        break;
      }
    }
    q.L.diagonal() = q.L.diagonal().cwiseMax(kMinDiagonal);
    result.iterations = it;

    if (it % config.elbo_every != 0) continue;
    const double elbo = elbo_estimate(target, q, eval_xi);
    if (std::isnan(elbo)) non_finite("ELBO", it);
    result.elbo_trace.push_back(elbo);
    result.elbo_iterations.push_back(it);
    window_sum += elbo;
    if (++window_count < config.elbo_window) continue;
    const double current_window = window_sum / static_cast<double>(window_count);
    window_sum = 0.0;
    window_count = 0;
    if (std::isfinite(previous_window) && std::isfinite(current_window) && it >= config.min_iters) {
      const double rel = std::abs(current_window - previous_window) / std::abs(previous_window);
      if (rel < config.elbo_tol) {
        result.converged = true;
        break;
      }
    }
    previous_window = current_window;
  }
  return result;
}

Eigen::MatrixXd draw_variational_posterior(const VariationalState& state, std::size_t n, Rng& rng) {
  const Eigen::MatrixXd xi = standard_normal_matrix(state.dim(), static_cast<Eigen::Index>(n), rng);
  Eigen::MatrixXd draws = state.L.triangularView<Eigen::Lower>() * xi;
  draws.colwise() += state.mu;
  return draws.transpose();
}

}  // namespace ssal
