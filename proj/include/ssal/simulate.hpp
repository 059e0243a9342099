#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ssal/data.hpp"
#include "ssal/lattice.hpp"
#include "ssal/params.hpp"
#include "ssal/rng.hpp"

namespace ssal {

enum class MissingnessKind { kNone, kMcar, kNonignorable };

struct MissingnessConfig {
  MissingnessKind kind = MissingnessKind::kNone;
  std::size_t mcar_count = 0;
  Eigen::Vector3d gamma = Eigen::Vector3d::Zero();
  std::size_t sweeps = 2000;
};

struct MultisliceConfig {
  std::size_t donors = 4;
  std::size_t slices_per_donor = 6;
  std::vector<double> sigma2{0.4};  // one value per donor, or a single shared value
  double rho = 0.1;
  CorrelationStructure structure = CorrelationStructure::kExchangeable;

  [[nodiscard]] double sigma2_for(std::size_t donor) const;
};

struct SimConfig {
  std::size_t m = 30;
  std::size_t d = 20;
  Eigen::VectorXd beta_true;
  double eta_true = 1.6;
  std::size_t gibbs_sweeps = 2000;
  std::uint64_t seed = 1;
  double delta = 1.0;
  MissingnessConfig missingness;
  std::optional<MultisliceConfig> multislice;

  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// beta = (1, 2, 3, -4, -5, 0, ..., 0) padded with zeros to length d.
Eigen::VectorXd simulation_beta(std::size_t d = 20);

/// 30 x 30, d = 20, simulation beta, eta = 1.6, no missingness.
SimConfig default_sim_config();

/// A simulated dataset with its generating parameters. `complete` holds the
/// full outcome vectors (including spots later marked missing).
struct SimulatedStudy {
  SimConfig config;
  StudyData study;
  ModelParams truth;
  Outcomes complete;
};

/// n x d matrix of independent standard normals.
Eigen::MatrixXd simulate_covariates(std::size_t n, std::size_t d, Rng& rng);

/// Gibbs sampler for the autologistic field: Bernoulli(0.5) start, then
/// `sweeps` raster-order sweeps; returns the final state. `offset` is added to
/// every linear predictor (the slice random effect). `on_sweep`, if set, sees
/// the state after every sweep.
using SweepObserver = std::function<void(std::size_t sweep, const std::vector<int>& state)>;
std::vector<int> gibbs_simulate_outcomes(const Eigen::VectorXd& beta, double eta, const Eigen::MatrixXd& x,
                                         const NeighborGraph& graph, std::size_t sweeps, Rng& rng,
                                         double offset = 0.0, const SweepObserver& on_sweep = {});

/// Marks `count` interior spots missing, uniformly without replacement.
std::vector<std::uint8_t> mask_mcar(std::size_t count, const NeighborGraph& graph, Rng& rng);

/// Gibbs sampler for the observation field R under the propensity model
/// P(R_i = 1) = sigmoid(g0 + g1 y_i + g2 mean_{N(i)} r_j).
std::vector<std::uint8_t> gibbs_simulate_missing(const Eigen::Vector3d& gamma, const std::vector<int>& y,
                                                 const NeighborGraph& graph, std::size_t sweeps, Rng& rng);

/// Single-slice or multi-slice simulation per the config.
SimulatedStudy simulate(const SimConfig& config);

/// Multi-slice simulation; the config must carry a MultisliceConfig.
SimulatedStudy simulate_multislice(const SimConfig& config);

/// Named configurations: sim1-eta{0.4,1.6,2.8}, sim2 (and sim2-s<sigma2>-r<rho>
/// for each grid point), sim3-{mcar10,mcar30,nonign1,nonign2}.
SimConfig preset(const std::string& name);
std::vector<std::string> preset_names();

/// The (sigma2, rho) grid of the multi-slice design as printed, which repeats
/// {0.1, 0.4}, and the de-duplicated grid with {0.4, 0.4} in its place.
std::vector<std::pair<double, double>> sim2_grid_literal();
std::vector<std::pair<double, double>> sim2_grid_corrected();

}  // namespace ssal
