#include "ssal/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <sstream>

#include "ssal/errors.hpp"
#include "ssal/math.hpp"
#include "ssal/model.hpp"

namespace ssal {

namespace {

constexpr std::uint64_t kStreamCovariates = 0;
constexpr std::uint64_t kStreamOutcomes = 1;
constexpr std::uint64_t kStreamMissing = 2;
constexpr std::uint64_t kStreamRandomEffects = 1u << 20;

std::string format_value(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

SliceData simulate_slice(const SimConfig& config, const SpotGrid& grid, std::shared_ptr<const NeighborGraph> graph,
                         double offset, Rng rng, std::vector<int>& complete) {
  SliceData slice;
  slice.grid = grid;
  slice.graph = std::move(graph);
  Rng cov_rng = rng.split(kStreamCovariates);
  Rng y_rng = rng.split(kStreamOutcomes);
  Rng r_rng = rng.split(kStreamMissing);
  slice.x = simulate_covariates(grid.size(), config.d, cov_rng);
  complete = gibbs_simulate_outcomes(config.beta_true, config.eta_true, slice.x, *slice.graph, config.gibbs_sweeps,
                                     y_rng, offset);
  switch (config.missingness.kind) {
    case MissingnessKind::kNone:
      slice.r.assign(grid.size(), 1);
      break;
    case MissingnessKind::kMcar:
      slice.r = mask_mcar(config.missingness.mcar_count, *slice.graph, r_rng);
      break;
    case MissingnessKind::kNonignorable:
      slice.r = gibbs_simulate_missing(config.missingness.gamma, complete, *slice.graph, config.missingness.sweeps,
                                       r_rng);
      break;
  }
  slice.y = complete;
  for (std::size_t i = 0; i < slice.y.size(); ++i) {
    if (slice.r[i] == 0) slice.y[i] = -1;
  }
  return slice;
}

ModelParams truth_for(const SimConfig& config) {
  ModelParams p;
  p.eta = config.eta_true;
  p.beta = config.beta_true;
  p.tau2 = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(config.d));
  p.w = static_cast<double>((config.beta_true.array() != 0.0).count()) / static_cast<double>(std::max<std::size_t>(config.d, 1));
  p.gamma = config.missingness.gamma;
  return p;
}

}  // namespace

double MultisliceConfig::sigma2_for(std::size_t donor) const {
  if (sigma2.empty()) throw ConfigError("multislice.sigma2 must not be empty");
  return sigma2.size() == 1 ? sigma2.front() : sigma2.at(donor);
}

void SimConfig::validate() const {
  if (m == 0) throw ConfigError("lattice side m must be positive");
  if (gibbs_sweeps < 1) throw ConfigError("gibbs_sweeps must be at least 1");
  if (static_cast<std::size_t>(beta_true.size()) != d) {
    throw ConfigError("beta_true has " + std::to_string(beta_true.size()) + " entries but d = " + std::to_string(d));
  }
  if (!(eta_true >= 0.0)) throw ConfigError("eta_true must be nonnegative");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (missingness.kind == MissingnessKind::kNonignorable && missingness.sweeps < 1) {
    throw ConfigError("missingness.sweeps must be at least 1");
  }
  if (multislice) {
    const auto& ms = *multislice;
    if (ms.donors == 0 || ms.slices_per_donor == 0) throw ConfigError("multislice needs donors and slices >= 1");
    if (ms.sigma2.size() != 1 && ms.sigma2.size() != ms.donors) {
      throw ConfigError("multislice.sigma2 needs 1 or " + std::to_string(ms.donors) + " values");
    }
    for (double s : ms.sigma2) {
      if (!(s >= 0.0)) throw ConfigError("multislice.sigma2 must be nonnegative");
    }
  }
}

Eigen::VectorXd simulation_beta(std::size_t d) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  const double head[5] = {1.0, 2.0, 3.0, -4.0, -5.0};
  for (std::size_t k = 0; k < std::min<std::size_t>(d, 5); ++k) beta(static_cast<Eigen::Index>(k)) = head[k];
  return beta;
}

SimConfig default_sim_config() {
  SimConfig c;
  c.beta_true = simulation_beta(c.d);
  return c;
}

Eigen::MatrixXd simulate_covariates(std::size_t n, std::size_t d, Rng& rng) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  // Row-major fill so that the draw order matches spot order.
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) = rng.normal();
  }
  return x;
}

std::vector<int> gibbs_simulate_outcomes(const Eigen::VectorXd& beta, double eta, const Eigen::MatrixXd& x,
                                         const NeighborGraph& graph, std::size_t sweeps, Rng& rng, double offset,
                                         const SweepObserver& on_sweep) {
  const std::size_t n = graph.size();
  if (static_cast<std::size_t>(x.rows()) != n || x.cols() != beta.size()) {
    throw InputError("covariates, coefficients and graph disagree in shape");
  }
  const Eigen::VectorXd xb = (x * beta).array() + offset;
  std::vector<int> y(n);
  for (auto& v : y) v = rng.bernoulli(0.5) ? 1 : 0;
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = xb(static_cast<Eigen::Index>(i)) + eta * graph.neighbor_mean(i, y);
      y[i] = rng.bernoulli(math::sigmoid(a)) ? 1 : 0;
    }
    if (on_sweep) on_sweep(sweep, y);
  }
  return y;
}

std::vector<std::uint8_t> mask_mcar(std::size_t count, const NeighborGraph& graph, Rng& rng) {
  std::vector<std::size_t> pool = interior_spots(graph);
  if (count > pool.size()) {
    throw ConfigError("cannot mask " + std::to_string(count) + " spots: only " + std::to_string(pool.size()) +
                      " interior spots");
  }
  std::vector<std::uint8_t> r(graph.size(), 1);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.below(pool.size() - k));
    std::swap(pool[k], pool[j]);
    r[pool[k]] = 0;
  }
  return r;
}

std::vector<std::uint8_t> gibbs_simulate_missing(const Eigen::Vector3d& gamma, const std::vector<int>& y,
                                                 const NeighborGraph& graph, std::size_t sweeps, Rng& rng) {
  const std::size_t n = graph.size();
  if (y.size() != n) throw InputError("outcome vector does not match the graph");
  std::vector<std::uint8_t> r(n);
  for (auto& v : r) v = rng.bernoulli(0.5) ? 1 : 0;
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      const double a = gamma(0) + gamma(1) * y[i] + gamma(2) * graph.neighbor_mean(i, r);
      r[i] = rng.bernoulli(math::sigmoid(a)) ? 1 : 0;
    }
  }
  return r;
}

SimulatedStudy simulate(const SimConfig& config) {
  if (config.multislice) return simulate_multislice(config);
  config.validate();
  SimulatedStudy out;
  out.config = config;
  const SpotGrid grid = square_lattice(config.m);
  auto graph = std::make_shared<const NeighborGraph>(build_neighbor_graph(grid, config.delta));
  const Rng base(config.seed);
  out.complete.resize(1);
  out.study.slices.push_back(simulate_slice(config, grid, graph, 0.0, base.split(0), out.complete[0]));
  out.study.covariate_names.clear();
  for (std::size_t k = 0; k < config.d; ++k) out.study.covariate_names.push_back("x" + std::to_string(k + 1));
  out.truth = truth_for(config);
  return out;
}

SimulatedStudy simulate_multislice(const SimConfig& config) {
  config.validate();
  if (!config.multislice) throw ConfigError("simulate_multislice needs a multislice configuration");
  const MultisliceConfig& ms = *config.multislice;
  const auto G = static_cast<Eigen::Index>(ms.slices_per_donor);
  const auto C = static_cast<Eigen::Index>(ms.donors);

  const Eigen::MatrixXd R = correlation_matrix(ms.structure, ms.rho, ms.slices_per_donor);
  const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(R).matrixL();
  Rng u_rng = Rng(config.seed).split(kStreamRandomEffects);
  Eigen::MatrixXd U(C, G);
  Eigen::VectorXd sigma2(C);
  for (Eigen::Index c = 0; c < C; ++c) {
    sigma2(c) = ms.sigma2_for(static_cast<std::size_t>(c));
    Eigen::VectorXd z(G);
    for (Eigen::Index g = 0; g < G; ++g) z(g) = u_rng.normal();
    U.row(c) = (std::sqrt(sigma2(c)) * (L * z)).transpose();
  }

  SimulatedStudy out;
  out.config = config;
  out.study.donors = ms.donors;
  out.study.slices_per_donor = ms.slices_per_donor;
  out.study.structure = ms.structure;
  for (std::size_t k = 0; k < config.d; ++k) out.study.covariate_names.push_back("x" + std::to_string(k + 1));
  const SpotGrid grid = square_lattice(config.m);
  auto graph = std::make_shared<const NeighborGraph>(build_neighbor_graph(grid, config.delta));
  const Rng base(config.seed);
  out.complete.resize(static_cast<std::size_t>(C * G));
  for (Eigen::Index c = 0; c < C; ++c) {
    for (Eigen::Index g = 0; g < G; ++g) {
      const auto s = static_cast<std::size_t>(c * G + g);
      SliceData slice = simulate_slice(config, grid, graph, U(c, g), base.split(s), out.complete[s]);
      slice.donor = static_cast<std::size_t>(c);
      slice.position = static_cast<std::size_t>(g);
      slice.donor_id = static_cast<int>(c + 1);
      slice.slice_id = static_cast<int>(g + 1);
      out.study.slices.push_back(std::move(slice));
    }
  }
  out.truth = truth_for(config);
  out.truth.U = U;
  out.truth.sigma2 = sigma2;
  out.truth.rho = ms.rho;
  return out;
}

std::vector<std::pair<double, double>> sim2_grid_literal() { return {{0.1, 0.1}, {0.1, 0.4}, {0.4, 0.1}, {0.1, 0.4}}; }

std::vector<std::pair<double, double>> sim2_grid_corrected() { return {{0.1, 0.1}, {0.1, 0.4}, {0.4, 0.1}, {0.4, 0.4}}; }

std::vector<std::string> preset_names() {
  std::vector<std::string> names{"sim1-eta0.4", "sim1-eta1.6", "sim1-eta2.8", "sim2"};
  for (const auto& [s2, rho] : sim2_grid_corrected()) {
    names.push_back("sim2-s" + format_value(s2) + "-r" + format_value(rho));
  }
  for (const char* n : {"sim3-mcar10", "sim3-mcar30", "sim3-nonign1", "sim3-nonign2"}) names.emplace_back(n);
  return names;
}

SimConfig preset(const std::string& name) {
  SimConfig c = default_sim_config();
  if (name == "sim1-eta0.4") {
    c.eta_true = 0.4;
  } else if (name == "sim1-eta1.6") {
    c.eta_true = 1.6;
  } else if (name == "sim1-eta2.8") {
    c.eta_true = 2.8;
  } else if (name == "sim2" || name.rfind("sim2-s", 0) == 0) {
    MultisliceConfig ms;
    if (name != "sim2") {
      bool found = false;
      for (const auto& [s2, rho] : sim2_grid_corrected()) {
        if (name == "sim2-s" + format_value(s2) + "-r" + format_value(rho)) {
          ms.sigma2 = {s2};
          ms.rho = rho;
          found = true;
        }
      }
      if (!found) throw ConfigError("unknown preset '" + name + "'");
    }
    c.multislice = ms;
  } else if (name == "sim3-mcar10" || name == "sim3-mcar30") {
    c.missingness.kind = MissingnessKind::kMcar;
    c.missingness.mcar_count = name == "sim3-mcar10" ? 10 : 30;
  } else if (name == "sim3-nonign1") {
    c.missingness.kind = MissingnessKind::kNonignorable;
    c.missingness.gamma = Eigen::Vector3d(-6.0, 1.0, 4.0);
  } else if (name == "sim3-nonign2") {
    c.missingness.kind = MissingnessKind::kNonignorable;
    c.missingness.gamma = Eigen::Vector3d(-5.0, 1.0, 1.6);
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  return c;
}

}  // namespace ssal
