#include "ssal/nuts.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ssal/errors.hpp"
#include "ssal/log.hpp"

namespace ssal {

namespace {

double kinetic(const Eigen::VectorXd& p, const NutsConfig& config) {
  if (config.mass_diag.size() == 0) return 0.5 * p.squaredNorm();
  return 0.5 * (p.array().square() / config.mass_diag.array()).sum();
}

Eigen::VectorXd draw_momentum(Eigen::Index dim, const NutsConfig& config, Rng& rng) {
  Eigen::VectorXd p(dim);
  for (Eigen::Index i = 0; i < dim; ++i) p(i) = rng.normal();
  if (config.mass_diag.size() != 0) p.array() *= config.mass_diag.array().sqrt();
  return p;
}

/// Neither end is moving back toward the other.
bool no_u_turn(const HmcPoint& minus, const HmcPoint& plus) {
  const Eigen::VectorXd span = plus.zeta - minus.zeta;
  return span.dot(minus.p) >= 0.0 && span.dot(plus.p) >= 0.0;
}

}  // namespace

void NutsConfig::validate(Eigen::Index dim) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("nuts.epsilon must be positive");
  if (max_depth < 0) throw ConfigError("nuts.max_depth must be nonnegative");
  if (mass_diag.size() != 0) {
    if (mass_diag.size() != dim) throw ConfigError("nuts.mass_diag has the wrong length");
    if (!(mass_diag.array() > 0.0).all()) throw ConfigError("nuts.mass_diag must be positive");
  }
  if (!(max_energy_error > 0.0)) throw ConfigError("nuts.max_energy_error must be positive");
  if (halving_window == 0) throw ConfigError("nuts.halving_window must be positive");
}

HmcPoint make_point(const LogDensity& target, Eigen::VectorXd zeta) {
  HmcPoint point;
  point.zeta = std::move(zeta);
  point.p = Eigen::VectorXd::Zero(point.zeta.size());
  point.logp = target.log_density_gradient(point.zeta, point.grad);
  point.divergent = !std::isfinite(point.logp) || !point.grad.allFinite();
  return point;
}

double hamiltonian(const HmcPoint& point, const NutsConfig& config) { return -point.logp + kinetic(point.p, config); }

HmcPoint leapfrog(const LogDensity& target, const HmcPoint& point, int direction, double epsilon,
                  const NutsConfig& config) {
  const double h = static_cast<double>(direction) * epsilon;
  HmcPoint next;
  next.p = point.p + 0.5 * h * point.grad;
  if (config.mass_diag.size() == 0) {
    next.zeta = point.zeta + h * next.p;
  } else {
    next.zeta = point.zeta + h * (next.p.array() / config.mass_diag.array()).matrix();
  }
  next.logp = target.log_density_gradient(next.zeta, next.grad);
  if (!std::isfinite(next.logp) || !next.grad.allFinite()) {
    next.divergent = true;
    next.logp = -std::numeric_limits<double>::infinity();
    return next;
  }
  next.p += 0.5 * h * next.grad;
  return next;
}

Subtree build_trajectory(const LogDensity& target, const HmcPoint& point, double log_u, int direction, int depth,
                         double epsilon, const NutsConfig& config, Rng& rng) {
  if (depth == 0) {
    Subtree tree;
    HmcPoint next = leapfrog(target, point, direction, epsilon, config);
    tree.steps = 1;
    const double neg_h = next.divergent ? -std::numeric_limits<double>::infinity() : -hamiltonian(next, config);
    tree.n_valid = log_u <= neg_h ? 1 : 0;
    tree.divergent = next.divergent || !(neg_h > log_u - config.max_energy_error);
    tree.keep_going = !tree.divergent;
    tree.minus = next;
    tree.plus = next;
    tree.candidate = std::move(next);
    return tree;
  }
  Subtree tree = build_trajectory(target, point, log_u, direction, depth - 1, epsilon, config, rng);
  if (!tree.keep_going) return tree;
  const HmcPoint& edge = direction < 0 ? tree.minus : tree.plus;
  Subtree outer = build_trajectory(target, edge, log_u, direction, depth - 1, epsilon, config, rng);
  tree.steps += outer.steps;
  if (direction < 0) {
    tree.minus = std::move(outer.minus);
  } else {
    tree.plus = std::move(outer.plus);
  }
  const std::size_t total = tree.n_valid + outer.n_valid;
  if (outer.n_valid > 0 && rng.uniform() * static_cast<double>(total) < static_cast<double>(outer.n_valid)) {
    tree.candidate = std::move(outer.candidate);
  }
  tree.n_valid = total;
  tree.divergent = outer.divergent;
  tree.keep_going = outer.keep_going && no_u_turn(tree.minus, tree.plus);
  return tree;
}

HmcPoint nuts_draw(const LogDensity& target, const HmcPoint& current, double epsilon, const NutsConfig& config,
                   Rng& rng, DrawInfo* info) {
  HmcPoint start = current;
  start.divergent = false;
  start.p = draw_momentum(start.zeta.size(), config, rng);
  const double log_u = std::log(rng.uniform()) - hamiltonian(start, config);

  HmcPoint minus = start;
  HmcPoint plus = start;
  HmcPoint selected = start;
  std::size_t n_valid = 1;
  bool keep_going = true;
  DrawInfo local;
  int depth = 0;
  while (keep_going && depth < config.max_depth) {
    const int direction = rng.uniform() < 0.5 ? -1 : 1;
    Subtree tree = direction < 0 ? build_trajectory(target, minus, log_u, -1, depth, epsilon, config, rng)
                                 : build_trajectory(target, plus, log_u, 1, depth, epsilon, config, rng);
    local.steps += tree.steps;
    if (direction < 0) {
      minus = tree.minus;
    } else {
      plus = tree.plus;
    }
    if (tree.divergent) local.divergent = true;
    if (tree.keep_going) {
      const std::size_t total = n_valid + tree.n_valid;
      if (tree.n_valid > 0 && rng.uniform() * static_cast<double>(total) < static_cast<double>(tree.n_valid)) {
        selected = tree.candidate;
        local.moved = true;
      }
      n_valid = total;
    }
    ++depth;
    keep_going = tree.keep_going && no_u_turn(minus, plus);
  }
  local.depth = depth;
  if (info != nullptr) *info = local;
  selected.divergent = !std::isfinite(selected.logp);
  return selected;
}

ChainResult run_chain(const LogDensity& target, const Eigen::VectorXd& init, const NutsConfig& config,
                      const BeforeTransition& before) {
  config.validate(target.dim());
  if (init.size() != target.dim()) throw InputError("initial point has the wrong dimension");
  Rng rng(config.seed);
  ChainResult result;
  result.draws.resize(static_cast<Eigen::Index>(config.draws), target.dim());
  double epsilon = config.epsilon;
  HmcPoint point = make_point(target, init);
  if (point.divergent && !before) throw EngineError("log density is not finite at the initial point");

  std::size_t window_divergences = 0;
  double depth_sum = 0.0;
  double steps_sum = 0.0;
  std::size_t moves = 0;
  const std::size_t total = config.warmup + config.draws;
  for (std::size_t it = 0; it < total; ++it) {
    if (before) {
      before(it);
      point = make_point(target, point.zeta);
    }
    if (!std::isfinite(point.logp)) {
      std::ostringstream msg;
      msg << "log density is not finite at the current state (iteration " << it << ")";
      throw EngineError(msg.str());
    }
    DrawInfo info;
    point = nuts_draw(target, point, epsilon, config, rng, &info);
    result.diagnostics.gradient_evaluations += info.steps;
    const bool warmup = it < config.warmup;
    if (warmup) {
      if (info.divergent) {
        ++result.diagnostics.warmup_divergences;
        ++window_divergences;
      }
      if (config.halve_on_divergence && (it + 1) % config.halving_window == 0) {
        const double rate = static_cast<double>(window_divergences) / static_cast<double>(config.halving_window);
        if (rate > 0.2) epsilon *= 0.5;
        window_divergences = 0;
      }
      continue;
    }
    const auto row = static_cast<Eigen::Index>(it - config.warmup);
    result.draws.row(row) = point.zeta.transpose();
    if (info.divergent) ++result.diagnostics.divergences;
    depth_sum += info.depth;
    steps_sum += static_cast<double>(info.steps);
    moves += info.moved ? 1 : 0;
  }
  auto& diag = result.diagnostics;
  diag.epsilon = epsilon;
  if (config.draws > 0) {
    const auto n = static_cast<double>(config.draws);
    diag.mean_depth = depth_sum / n;
    diag.mean_steps = steps_sum / n;
    diag.move_rate = static_cast<double>(moves) / n;
    if (static_cast<double>(diag.divergences) > 0.1 * n) {
      std::ostringstream msg;
      msg << diag.divergences << " of " << config.draws << " post-warmup transitions diverged; consider a smaller epsilon";
      diag.warnings.push_back(msg.str());
      warn(msg.str());
    }
  }
  return result;
}

}  // namespace ssal
