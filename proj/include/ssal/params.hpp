#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace ssal {

enum class CorrelationStructure { kExchangeable, kAutoregressive };

/// Prior hyperparameters. Defaults follow the single-slice simulation design;
/// b3..b6 and the gamma prior scale are this library's choices.
struct Hyperparams {
  double c1 = 8.0;        // eta ~ Uniform(0, c1)
  double v0 = 1e-6;       // spike variance scale
  double b1 = 5.0;        // tau_k^-2 ~ Gamma(b1, rate b2)
  double b2 = 50.0;
  double b3 = 5.0;        // sigma_c^-2 ~ Gamma(b3, rate b4)
  double b4 = 50.0;
  double b5 = 0.0;        // rho ~ Uniform(b5, b6)
  double b6 = 1.0;
  double delta = 1.0;     // neighbor radius
  double gamma_prior_sd = 10.0;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
};

/// Which parameters enter the model and which are held fixed.
struct ModelVariant {
  std::size_t d = 0;
  std::optional<double> fixed_eta;  // eta frozen (0 gives the non-spatial model)
  std::optional<double> fixed_w;
  bool multislice = false;
  std::size_t donors = 1;
  std::size_t slices_per_donor = 1;
  CorrelationStructure structure = CorrelationStructure::kExchangeable;
  bool nonignorable = false;
};

/// theta in its natural support.
struct ModelParams {
  double eta = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd tau2;
  double w = 0.5;
  Eigen::MatrixXd U;       // donors x slices_per_donor; empty for one slice
  Eigen::VectorXd sigma2;  // per donor
  double rho = 0.0;
  Eigen::Vector3d gamma = Eigen::Vector3d::Zero();

  /// Spike-and-slab responsibility of the slab for coefficient k.
  [[nodiscard]] double inclusion(std::size_t k, double v0) const;
};

/// Positions of each block inside the unconstrained vector zeta = T(theta).
class ParamLayout {
 public:
  ParamLayout() = default;
  explicit ParamLayout(const ModelVariant& variant);

  [[nodiscard]] const ModelVariant& variant() const { return variant_; }
  [[nodiscard]] Eigen::Index dim() const { return dim_; }

  [[nodiscard]] bool has_eta() const { return eta_ >= 0; }
  [[nodiscard]] bool has_w() const { return w_ >= 0; }
  [[nodiscard]] bool has_random_effects() const { return u_ >= 0; }
  [[nodiscard]] bool has_gamma() const { return gamma_ >= 0; }

  [[nodiscard]] Eigen::Index eta() const { return eta_; }
  [[nodiscard]] Eigen::Index beta() const { return beta_; }
  [[nodiscard]] Eigen::Index tau2() const { return tau2_; }
  [[nodiscard]] Eigen::Index w() const { return w_; }
  [[nodiscard]] Eigen::Index u() const { return u_; }
  [[nodiscard]] Eigen::Index u(std::size_t donor, std::size_t slice) const {
    return u_ + static_cast<Eigen::Index>(donor * variant_.slices_per_donor + slice);
  }
  [[nodiscard]] Eigen::Index sigma2() const { return sigma2_; }
  [[nodiscard]] Eigen::Index rho() const { return rho_; }
  [[nodiscard]] Eigen::Index gamma() const { return gamma_; }

  /// Names of the zeta coordinates (which are also the theta coordinates).
  [[nodiscard]] std::vector<std::string> names(const std::vector<std::string>& covariates = {}) const;

 private:
  ModelVariant variant_;
  Eigen::Index dim_ = 0;
  Eigen::Index eta_ = -1, beta_ = 0, tau2_ = 0, w_ = -1, u_ = -1, sigma2_ = -1, rho_ = -1, gamma_ = -1;
};

/// Flatten theta into layout order (no transform).
Eigen::VectorXd flatten(const ModelParams& params, const ParamLayout& layout);

/// Inverse of flatten; fixed eta and w come from the layout's variant.
ModelParams unflatten(const Eigen::VectorXd& theta, const ParamLayout& layout);

/// Default starting point inside the support: eta = c1/4, beta = 0,
/// tau2 = b2/(b1+1), w = 0.5, U = 0, sigma2 = b4/(b3+1), rho mid-range.
ModelParams default_params(const ModelVariant& variant, const Hyperparams& hyper);

}  // namespace ssal
