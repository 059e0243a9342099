#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ssal/log_density.hpp"
#include "ssal/rng.hpp"

namespace ssal {

/// Position, momentum and the cached log-density and gradient at the position.
struct HmcPoint {
  Eigen::VectorXd zeta;
  Eigen::VectorXd p;
  double logp = 0.0;
  Eigen::VectorXd grad;
  bool divergent = false;
};

struct NutsConfig {
  double epsilon = 0.05;
  Eigen::VectorXd mass_diag;  // empty means identity
  int max_depth = 10;
  std::size_t warmup = 500;
  std::size_t draws = 1000;
  std::uint64_t seed = 1;
  double max_energy_error = 1000.0;
  // Halve epsilon after a warmup window whose divergence rate exceeds 20%.
  bool halve_on_divergence = false;
  std::size_t halving_window = 50;

  void validate(Eigen::Index dim) const;
};

/// Evaluates the density at zeta and returns a point with zero momentum.
HmcPoint make_point(const LogDensity& target, Eigen::VectorXd zeta);

/// -logp + p' M^-1 p / 2.
double hamiltonian(const HmcPoint& point, const NutsConfig& config);

/// One leapfrog step of size direction * epsilon. A non-finite log-density or
/// gradient marks the returned point divergent.
HmcPoint leapfrog(const LogDensity& target, const HmcPoint& point, int direction, double epsilon,
                  const NutsConfig& config);

/// Result of building a subtree of 2^depth leapfrog steps.
struct Subtree {
  HmcPoint minus;      // leftmost state
  HmcPoint plus;       // rightmost state
  HmcPoint candidate;  // uniform draw from the valid states
  std::size_t n_valid = 0;
  bool keep_going = true;  // no U-turn and no divergence inside
  bool divergent = false;
  std::size_t steps = 0;
};

/// Recursive doubling from `point` in `direction`; `log_u` is the log slice
/// variable. States with log_u <= -H are candidates. The subtree stops on a
/// U-turn between its end points or on an energy error above
/// config.max_energy_error.
Subtree build_trajectory(const LogDensity& target, const HmcPoint& point, double log_u, int direction, int depth,
                         double epsilon, const NutsConfig& config, Rng& rng);

struct DrawInfo {
  int depth = 0;
  std::size_t steps = 0;
  bool divergent = false;
  bool moved = false;
};

/// One NUTS transition: fresh momentum, slice draw, doubling until a U-turn
/// or max_depth, then a uniform pick among the candidates.
HmcPoint nuts_draw(const LogDensity& target, const HmcPoint& current, double epsilon, const NutsConfig& config,
                   Rng& rng, DrawInfo* info = nullptr);

struct ChainDiagnostics {
  std::size_t divergences = 0;  // post-warmup
  std::size_t warmup_divergences = 0;
  double mean_depth = 0.0;
  double mean_steps = 0.0;
  double move_rate = 0.0;
  double epsilon = 0.0;         // final step size
  std::size_t gradient_evaluations = 0;
  std::vector<std::string> warnings;
};

struct ChainResult {
  Eigen::MatrixXd draws;  // draws x dim, in zeta space
  ChainDiagnostics diagnostics;
};

/// Called before every transition (warmup and sampling) with the iteration
/// index; used to refresh imputed outcomes. The target's density may change
/// there, so the current point is re-evaluated afterwards.
using BeforeTransition = std::function<void(std::size_t iteration)>;

ChainResult run_chain(const LogDensity& target, const Eigen::VectorXd& init, const NutsConfig& config,
                      const BeforeTransition& before = {});

}  // namespace ssal
