#pragma once

#include <Eigen/Dense>
#include <span>

#include "ssal/data.hpp"
#include "ssal/log_density.hpp"
#include "ssal/params.hpp"

namespace ssal {

// The outcome model is the autologistic pseudo-likelihood: the product over
// observed spots of Bernoulli(mu_i) with
//   logit(mu_i) = beta' x_i + (eta / |N(i)|) sum_{j in N(i)} y_j [+ U_cg].
// The joint field's normalizing constant is intractable and never computed.

/// Linear predictor of spot i given the current outcome vector.
double linear_predictor(const ModelParams& params, const SliceData& slice, std::size_t i,
                        std::span<const int> current_y);

/// mu_i in (0, 1). Throws InputError if i is out of range.
double conditional_mean(const ModelParams& params, const SliceData& slice, std::size_t i,
                        std::span<const int> current_y);

/// logit P(R_i = 1) = g0 + g1 y_i + (g2 / |N(i)|) sum_{j in N(i)} r_j, with
/// R_i = 1 meaning spot i is observed.
double missing_propensity(const Eigen::Vector3d& gamma, const SliceData& slice, std::size_t i,
                          std::span<const int> current_y, std::span<const std::uint8_t> current_r);

/// Sum over observed spots of the Bernoulli log-mass. Throws StateError if a
/// missing spot's neighbor outcomes are not filled (value outside {0, 1}).
double log_pseudo_likelihood(const ModelParams& params, const SliceData& slice, std::span<const int> current_y);
double log_pseudo_likelihood(const ModelParams& params, const StudyData& study, const Outcomes& outcomes);

/// Log-likelihood of the observation indicators under the propensity model,
/// summed over every spot (outcomes at missing spots come from `outcomes`).
double log_missingness_likelihood(const Eigen::Vector3d& gamma, const StudyData& study, const Outcomes& outcomes);

/// Log prior density of theta; -infinity outside the support.
double log_prior(const ModelParams& params, const Hyperparams& hyper, const ModelVariant& variant);

/// Slice correlation matrix: exchangeable (rho off the diagonal) or
/// autoregressive (rho^|s-t|). Throws ConfigError if not positive definite.
Eigen::MatrixXd correlation_matrix(CorrelationStructure structure, double rho, std::size_t slices);

/// Boundary value used when eta, w or rho sits exactly on its support edge.
inline constexpr double kProbitClamp = 8.0;

Eigen::VectorXd transform(const ModelParams& params, const Hyperparams& hyper, const ParamLayout& layout);
ModelParams untransform(const Eigen::VectorXd& zeta, const Hyperparams& hyper, const ParamLayout& layout);

/// log |det J_{T^-1}(zeta)|; T^-1 is coordinatewise so J is diagonal.
double log_abs_det_jacobian(const Eigen::VectorXd& zeta, const Hyperparams& hyper, const ParamLayout& layout);

/// log f(y | x, T^-1(zeta)) + log pi(T^-1(zeta)) + log |det J|, plus the
/// missingness log-likelihood for nonignorable variants.
double log_joint(const Eigen::VectorXd& zeta, const StudyData& study, const Outcomes& outcomes,
                 const Hyperparams& hyper, const ParamLayout& layout);

/// Analytic gradient of log_joint with respect to zeta.
Eigen::VectorXd grad_log_joint(const Eigen::VectorXd& zeta, const StudyData& study, const Outcomes& outcomes,
                               const Hyperparams& hyper, const ParamLayout& layout);

/// log_joint bound to a study. The outcome buffer is owned here and replaced
/// by the imputation loop between engine steps.
class Posterior final : public LogDensity {
 public:
  Posterior(const StudyData& study, Hyperparams hyper, const ModelVariant& variant);

  [[nodiscard]] Eigen::Index dim() const override { return layout_.dim(); }
  [[nodiscard]] double log_density(const Eigen::VectorXd& z) const override;
  double log_density_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const override;

  [[nodiscard]] const StudyData& study() const { return *study_; }
  [[nodiscard]] const Hyperparams& hyper() const { return hyper_; }
  [[nodiscard]] const ParamLayout& layout() const { return layout_; }
  [[nodiscard]] const Outcomes& outcomes() const { return outcomes_; }
  Outcomes& mutable_outcomes() { return outcomes_; }
  void set_outcomes(Outcomes outcomes) { outcomes_ = std::move(outcomes); }

 private:
  const StudyData* study_;
  Hyperparams hyper_;
  ParamLayout layout_;
  Outcomes outcomes_;
};

}  // namespace ssal
