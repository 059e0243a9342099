#include "ssal/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <string>

#include "ssal/errors.hpp"
#include "ssal/log.hpp"
#include "ssal/math.hpp"

namespace ssal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

double random_effect(const ModelParams& params, const SliceData& slice) {
  if (params.U.size() == 0) return 0.0;
  return params.U(static_cast<Eigen::Index>(slice.donor), static_cast<Eigen::Index>(slice.position));
}

void check_outcomes(const SliceData& slice, std::span<const int> current_y) {
  if (current_y.size() != slice.size()) {
    throw InputError("outcome vector has " + std::to_string(current_y.size()) + " entries, slice has " +
                     std::to_string(slice.size()));
  }
  for (std::size_t i = 0; i < current_y.size(); ++i) {
    if (current_y[i] != 0 && current_y[i] != 1) {
      throw StateError("outcome at spot " + std::to_string(i) + (slice.observed(i) ? "" : " (missing, not imputed)") +
                       " is not 0 or 1");
    }
  }
}

/// Derivative of the correlation matrix with respect to rho.
Eigen::MatrixXd correlation_derivative(CorrelationStructure structure, double rho, std::size_t slices) {
  const auto G = static_cast<Eigen::Index>(slices);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(G, G);
  for (Eigen::Index s = 0; s < G; ++s) {
    for (Eigen::Index t = 0; t < G; ++t) {
      if (s == t) continue;
      if (structure == CorrelationStructure::kExchangeable) {
        out(s, t) = 1.0;
      } else {
        const auto lag = static_cast<double>(std::abs(s - t));
        out(s, t) = lag * std::pow(rho, lag - 1.0);
      }
    }
  }
  return out;
}

double inverse_gamma_log_pdf(double x, double shape, double rate) {
  return shape * std::log(rate) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - rate / x;
}

/// Unconstrained image of a value in [lo, hi] via the probit of its rescaling.
double probit_of(double value, double lo, double hi, const char* name) {
  const double p = (value - lo) / (hi - lo);
  if (p <= 0.0 || p >= 1.0) {
    warn(std::string(name) + " on the boundary of its support; clamping its transform to +/-" +
         std::to_string(kProbitClamp));
    return p <= 0.0 ? -kProbitClamp : kProbitClamp;
  }
  return std::clamp(math::Phi_inv(p), -kProbitClamp, kProbitClamp);
}

/// Shared evaluation of log_joint and (optionally) its gradient.
double evaluate(const Eigen::VectorXd& zeta, const StudyData& study, const Outcomes& outcomes,
                const Hyperparams& h, const ParamLayout& layout, Eigen::VectorXd* grad) {
  const ModelVariant& v = layout.variant();
  const auto d = static_cast<Eigen::Index>(v.d);
  if (zeta.size() != layout.dim()) {
    throw InputError("zeta has dimension " + std::to_string(zeta.size()) + ", expected " +
                     std::to_string(layout.dim()));
  }
  if (outcomes.size() != study.slices.size()) {
    throw InputError("outcome buffer does not match the number of slices");
  }
  if (grad != nullptr) {
    grad->setZero(layout.dim());
  }

  // Decode theta.
  const double z_eta = layout.has_eta() ? zeta(layout.eta()) : 0.0;
  const double eta = layout.has_eta() ? h.c1 * math::Phi(z_eta) : *v.fixed_eta;
  const auto beta = zeta.segment(layout.beta(), d);
  const auto z_tau = zeta.segment(layout.tau2(), d);
  double log_w = 0.0;
  double log_1mw = 0.0;
  double z_w = 0.0;
  if (layout.has_w()) {
    z_w = zeta(layout.w());
    log_w = math::log_Phi(z_w);
    log_1mw = math::log_Phi(-z_w);
  } else {
    log_w = std::log(*v.fixed_w);
    log_1mw = std::log1p(-*v.fixed_w);
  }

  double total = 0.0;
  double d_eta = 0.0;  // d/d eta in theta space
  Eigen::VectorXd d_beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd d_u;
  if (layout.has_random_effects()) d_u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(v.donors * v.slices_per_donor));
  Eigen::Vector3d d_gamma = Eigen::Vector3d::Zero();

  // Pseudo-likelihood over observed spots.
  for (std::size_t s = 0; s < study.slices.size(); ++s) {
    const SliceData& slice = study.slices[s];
    const auto& y = outcomes[s];
    check_outcomes(slice, y);
    const NeighborGraph& graph = *slice.graph;
    const double u = layout.has_random_effects() ? zeta(layout.u(slice.donor, slice.position)) : 0.0;
    const Eigen::VectorXd xb = slice.x * beta;
    Eigen::VectorXd resid = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(slice.size()));
    double d_u_slice = 0.0;
    for (std::size_t i = 0; i < slice.size(); ++i) {
      if (!slice.observed(i)) continue;
      const double autocov = graph.neighbor_mean(i, y);
      const double a = xb(static_cast<Eigen::Index>(i)) + eta * autocov + u;
      total += math::bernoulli_logit_lpmf(y[i], a);
      if (grad != nullptr) {
        const double e = static_cast<double>(y[i]) - math::sigmoid(a);
        resid(static_cast<Eigen::Index>(i)) = e;
        d_eta += e * autocov;
        d_u_slice += e;
      }
    }
    if (grad != nullptr) {
      d_beta.noalias() += slice.x.transpose() * resid;
      if (layout.has_random_effects()) d_u(layout.u(slice.donor, slice.position) - layout.u()) += d_u_slice;
    }

    if (layout.has_gamma()) {
      const Eigen::Vector3d gamma = zeta.segment<3>(layout.gamma());
      for (std::size_t i = 0; i < slice.size(); ++i) {
        const double t = graph.neighbor_mean(i, slice.r);
        const double b = gamma(0) + gamma(1) * y[i] + gamma(2) * t;
        total += math::bernoulli_logit_lpmf(slice.r[i], b);
        if (grad != nullptr) {
          const double e = static_cast<double>(slice.r[i]) - math::sigmoid(b);
          d_gamma += e * Eigen::Vector3d(1.0, static_cast<double>(y[i]), t);
        }
      }
    }
  }

  // eta: uniform prior and probit Jacobian.
  if (layout.has_eta()) {
    total += math::std_normal_log_pdf(z_eta);  // prior 1/c1 cancels the Jacobian factor c1
    if (grad != nullptr) {
      (*grad)(layout.eta()) = d_eta * h.c1 * math::std_normal_pdf(z_eta) - z_eta;
    }
  }

  // Spike-and-slab mixture on beta_k with inverse-gamma slab variance.
  const double d_log_w = layout.has_w() ? math::d_log_Phi(z_w) : 0.0;
  const double d_log_1mw = layout.has_w() ? -math::d_log_Phi(-z_w) : 0.0;
  double d_zw = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    const double b = beta(k);
    const double tau2 = std::exp(z_tau(k));
    const double spike_var = h.v0 * tau2;
    const double spike = log_1mw + math::normal_log_pdf(b, 0.0, spike_var);
    const double slab = log_w + math::normal_log_pdf(b, 0.0, tau2);
    const double lse = math::log_sum_exp(spike, slab);
    total += lse + inverse_gamma_log_pdf(tau2, h.b1, h.b2) + z_tau(k);
    if (grad != nullptr) {
      const double resp = std::exp(slab - lse);
      const double b2 = b * b;
      (*grad)(layout.beta() + k) = d_beta(k) - (1.0 - resp) * b / spike_var - resp * b / tau2;
      (*grad)(layout.tau2() + k) = (1.0 - resp) * (-0.5 + 0.5 * b2 / spike_var) + resp * (-0.5 + 0.5 * b2 / tau2) -
                                   (h.b1 + 1.0) + h.b2 / tau2 + 1.0;
      d_zw += (1.0 - resp) * d_log_1mw + resp * d_log_w;
    }
  }
  if (layout.has_w()) {
    total += math::std_normal_log_pdf(z_w);
    if (grad != nullptr) (*grad)(layout.w()) = d_zw - z_w;
  }

  // Random effects U_c ~ MVN(0, sigma_c^2 R(rho)).
  if (layout.has_random_effects()) {
    const auto G = static_cast<Eigen::Index>(v.slices_per_donor);
    const double z_rho = zeta(layout.rho());
    const double width = h.b6 - h.b5;
    const double rho = h.b5 + width * math::Phi(z_rho);
    Eigen::MatrixXd R;
    try {
      R = correlation_matrix(v.structure, rho, v.slices_per_donor);
    } catch (const ConfigError&) {
      if (grad != nullptr) grad->setZero();
      return kNegInf;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(R);
    const Eigen::MatrixXd R_inv = llt.solve(Eigen::MatrixXd::Identity(G, G));
    const double log_det_R = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    const Eigen::MatrixXd dR = correlation_derivative(v.structure, rho, v.slices_per_donor);
    const double trace_term = (R_inv * dR).trace();
    double d_rho = 0.0;
    for (std::size_t c = 0; c < v.donors; ++c) {
      const auto ci = static_cast<Eigen::Index>(c);
      const Eigen::VectorXd u_c = zeta.segment(layout.u(c, 0), G);
      const double z_s = zeta(layout.sigma2() + ci);
      const double sigma2 = std::exp(z_s);
      const Eigen::VectorXd a = R_inv * u_c;
      const double quad = u_c.dot(a);
      total += -0.5 * static_cast<double>(G) * (kLog2Pi + z_s) - 0.5 * log_det_R - 0.5 * quad / sigma2;
      total += inverse_gamma_log_pdf(sigma2, h.b3, h.b4) + z_s;
      if (grad != nullptr) {
        grad->segment(layout.u(c, 0), G) = d_u.segment(layout.u(c, 0) - layout.u(), G) - a / sigma2;
        (*grad)(layout.sigma2() + ci) =
            -0.5 * static_cast<double>(G) + 0.5 * quad / sigma2 - (h.b3 + 1.0) + h.b4 / sigma2 + 1.0;
        d_rho += -0.5 * trace_term + 0.5 * a.dot(dR * a) / sigma2;
      }
    }
    total += math::std_normal_log_pdf(z_rho);
    if (grad != nullptr) {
      (*grad)(layout.rho()) = d_rho * width * math::std_normal_pdf(z_rho) - z_rho;
    }
  }

  if (layout.has_gamma()) {
    const double var = h.gamma_prior_sd * h.gamma_prior_sd;
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double g = zeta(layout.gamma() + j);
      total += math::normal_log_pdf(g, 0.0, var);
      if (grad != nullptr) (*grad)(layout.gamma() + j) = d_gamma(j) - g / var;
    }
  }
  return total;
}

}  // namespace

double linear_predictor(const ModelParams& params, const SliceData& slice, std::size_t i,
                        std::span<const int> current_y) {
  if (i >= slice.size()) {
    throw InputError("spot index " + std::to_string(i) + " out of range for a slice of " +
                     std::to_string(slice.size()) + " spots");
  }
  const double xb = slice.x.row(static_cast<Eigen::Index>(i)).dot(params.beta);
  return xb + params.eta * slice.graph->neighbor_mean(i, current_y) + random_effect(params, slice);
}

double conditional_mean(const ModelParams& params, const SliceData& slice, std::size_t i,
                        std::span<const int> current_y) {
  return math::sigmoid(linear_predictor(params, slice, i, current_y));
}

double missing_propensity(const Eigen::Vector3d& gamma, const SliceData& slice, std::size_t i,
                          std::span<const int> current_y, std::span<const std::uint8_t> current_r) {
  if (i >= slice.size()) {
    throw InputError("spot index " + std::to_string(i) + " out of range");
  }
  const double t = slice.graph->neighbor_mean(i, current_r);
  return math::sigmoid(gamma(0) + gamma(1) * current_y[i] + gamma(2) * t);
}

double log_pseudo_likelihood(const ModelParams& params, const SliceData& slice, std::span<const int> current_y) {
  check_outcomes(slice, current_y);
  const Eigen::VectorXd xb = slice.x * params.beta;
  const double u = random_effect(params, slice);
  double total = 0.0;
  for (std::size_t i = 0; i < slice.size(); ++i) {
    if (!slice.observed(i)) continue;
    const double a = xb(static_cast<Eigen::Index>(i)) + params.eta * slice.graph->neighbor_mean(i, current_y) + u;
    total += math::bernoulli_logit_lpmf(current_y[i], a);
  }
  return total;
}

double log_pseudo_likelihood(const ModelParams& params, const StudyData& study, const Outcomes& outcomes) {
  double total = 0.0;
  for (std::size_t s = 0; s < study.slices.size(); ++s) {
    total += log_pseudo_likelihood(params, study.slices[s], outcomes[s]);
  }
  return total;
}

double log_missingness_likelihood(const Eigen::Vector3d& gamma, const StudyData& study, const Outcomes& outcomes) {
  double total = 0.0;
  for (std::size_t s = 0; s < study.slices.size(); ++s) {
    const SliceData& slice = study.slices[s];
    for (std::size_t i = 0; i < slice.size(); ++i) {
      const double t = slice.graph->neighbor_mean(i, slice.r);
      total += math::bernoulli_logit_lpmf(slice.r[i], gamma(0) + gamma(1) * outcomes[s][i] + gamma(2) * t);
    }
  }
  return total;
}

double log_prior(const ModelParams& p, const Hyperparams& h, const ModelVariant& v) {
  const auto d = static_cast<Eigen::Index>(v.d);
  double total = 0.0;
  if (!v.fixed_eta) {
    if (!(p.eta >= 0.0 && p.eta <= h.c1)) return kNegInf;
    total -= std::log(h.c1);
  }
  if (!(p.w >= 0.0 && p.w <= 1.0)) return kNegInf;
  const double log_w = std::log(p.w);
  const double log_1mw = std::log1p(-p.w);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double tau2 = p.tau2(k);
    if (!(tau2 > 0.0)) return kNegInf;
    const double spike = log_1mw + math::normal_log_pdf(p.beta(k), 0.0, h.v0 * tau2);
    const double slab = log_w + math::normal_log_pdf(p.beta(k), 0.0, tau2);
    total += math::log_sum_exp(spike, slab) + inverse_gamma_log_pdf(tau2, h.b1, h.b2);
  }
  if (v.multislice) {
    if (!(p.rho >= h.b5 && p.rho <= h.b6)) return kNegInf;
    Eigen::MatrixXd R;
    try {
      R = correlation_matrix(v.structure, p.rho, v.slices_per_donor);
    } catch (const ConfigError&) {
      return kNegInf;
    }
    const auto G = static_cast<Eigen::Index>(v.slices_per_donor);
    const Eigen::LLT<Eigen::MatrixXd> llt(R);
    const double log_det_R = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    for (std::size_t c = 0; c < v.donors; ++c) {
      const double sigma2 = p.sigma2(static_cast<Eigen::Index>(c));
      if (!(sigma2 > 0.0)) return kNegInf;
      const Eigen::VectorXd u_c = p.U.row(static_cast<Eigen::Index>(c)).transpose();
      const double quad = u_c.dot(llt.solve(u_c));
      total += -0.5 * static_cast<double>(G) * (kLog2Pi + std::log(sigma2)) - 0.5 * log_det_R - 0.5 * quad / sigma2;
      total += inverse_gamma_log_pdf(sigma2, h.b3, h.b4);
    }
    total -= std::log(h.b6 - h.b5);
  }
  if (v.nonignorable) {
    const double var = h.gamma_prior_sd * h.gamma_prior_sd;
    for (Eigen::Index j = 0; j < 3; ++j) total += math::normal_log_pdf(p.gamma(j), 0.0, var);
  }
  return total;
}

Eigen::MatrixXd correlation_matrix(CorrelationStructure structure, double rho, std::size_t slices) {
  if (slices == 0) throw ConfigError("correlation matrix needs at least one slice");
  const auto G = static_cast<Eigen::Index>(slices);
  Eigen::MatrixXd R(G, G);
  for (Eigen::Index s = 0; s < G; ++s) {
    for (Eigen::Index t = 0; t < G; ++t) {
      if (s == t) {
        R(s, t) = 1.0;
      } else if (structure == CorrelationStructure::kExchangeable) {
        R(s, t) = rho;
      } else {
        R(s, t) = std::pow(rho, static_cast<double>(std::abs(s - t)));
      }
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success || !std::isfinite(rho)) {
    std::ostringstream msg;
    msg << "correlation matrix is not positive definite (structure="
        << (structure == CorrelationStructure::kExchangeable ? "exchangeable" : "autoregressive") << ", rho=" << rho
        << ", G=" << slices << ")";
    throw ConfigError(msg.str());
  }
  return R;
}

Eigen::VectorXd transform(const ModelParams& p, const Hyperparams& h, const ParamLayout& layout) {
  const ModelVariant& v = layout.variant();
  const auto d = static_cast<Eigen::Index>(v.d);
  Eigen::VectorXd zeta(layout.dim());
  if (layout.has_eta()) zeta(layout.eta()) = probit_of(p.eta, 0.0, h.c1, "eta");
  zeta.segment(layout.beta(), d) = p.beta;
  zeta.segment(layout.tau2(), d) = p.tau2.array().log().matrix();
  if (layout.has_w()) zeta(layout.w()) = probit_of(p.w, 0.0, 1.0, "w");
  if (layout.has_random_effects()) {
    for (std::size_t c = 0; c < v.donors; ++c) {
      for (std::size_t g = 0; g < v.slices_per_donor; ++g) {
        zeta(layout.u(c, g)) = p.U(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(g));
      }
    }
    zeta.segment(layout.sigma2(), static_cast<Eigen::Index>(v.donors)) = p.sigma2.array().log().matrix();
    zeta(layout.rho()) = probit_of(p.rho, h.b5, h.b6, "rho");
  }
  if (layout.has_gamma()) zeta.segment<3>(layout.gamma()) = p.gamma;
  return zeta;
}

ModelParams untransform(const Eigen::VectorXd& zeta, const Hyperparams& h, const ParamLayout& layout) {
  const ModelVariant& v = layout.variant();
  const auto d = static_cast<Eigen::Index>(v.d);
  if (zeta.size() != layout.dim()) throw InputError("zeta has the wrong dimension for this layout");
  ModelParams p;
  p.eta = layout.has_eta() ? h.c1 * math::Phi(zeta(layout.eta())) : *v.fixed_eta;
  p.beta = zeta.segment(layout.beta(), d);
  p.tau2 = zeta.segment(layout.tau2(), d).array().exp().matrix();
  p.w = layout.has_w() ? math::Phi(zeta(layout.w())) : *v.fixed_w;
  if (layout.has_random_effects()) {
    const auto C = static_cast<Eigen::Index>(v.donors);
    const auto G = static_cast<Eigen::Index>(v.slices_per_donor);
    p.U.resize(C, G);
    for (Eigen::Index c = 0; c < C; ++c) {
      for (Eigen::Index g = 0; g < G; ++g) {
        p.U(c, g) = zeta(layout.u(static_cast<std::size_t>(c), static_cast<std::size_t>(g)));
      }
    }
    p.sigma2 = zeta.segment(layout.sigma2(), C).array().exp().matrix();
    p.rho = h.b5 + (h.b6 - h.b5) * math::Phi(zeta(layout.rho()));
  }
  if (layout.has_gamma()) p.gamma = zeta.segment<3>(layout.gamma());
  return p;
}

double log_abs_det_jacobian(const Eigen::VectorXd& zeta, const Hyperparams& h, const ParamLayout& layout) {
  const ModelVariant& v = layout.variant();
  double total = 0.0;
  if (layout.has_eta()) total += std::log(h.c1) + math::std_normal_log_pdf(zeta(layout.eta()));
  total += zeta.segment(layout.tau2(), static_cast<Eigen::Index>(v.d)).sum();
  if (layout.has_w()) total += math::std_normal_log_pdf(zeta(layout.w()));
  if (layout.has_random_effects()) {
    total += zeta.segment(layout.sigma2(), static_cast<Eigen::Index>(v.donors)).sum();
    total += std::log(h.b6 - h.b5) + math::std_normal_log_pdf(zeta(layout.rho()));
  }
  return total;
}

double log_joint(const Eigen::VectorXd& zeta, const StudyData& study, const Outcomes& outcomes,
                 const Hyperparams& hyper, const ParamLayout& layout) {
  return evaluate(zeta, study, outcomes, hyper, layout, nullptr);
}

Eigen::VectorXd grad_log_joint(const Eigen::VectorXd& zeta, const StudyData& study, const Outcomes& outcomes,
                               const Hyperparams& hyper, const ParamLayout& layout) {
  Eigen::VectorXd grad;
  evaluate(zeta, study, outcomes, hyper, layout, &grad);
  return grad;
}

Posterior::Posterior(const StudyData& study, Hyperparams hyper, const ModelVariant& variant)
    : study_(&study), hyper_(hyper), layout_(variant), outcomes_(initial_outcomes(study)) {
  hyper_.validate();
  if (variant.d != study.d()) throw InputError("model variant and study disagree on the covariate dimension");
}

double Posterior::log_density(const Eigen::VectorXd& z) const {
  return evaluate(z, *study_, outcomes_, hyper_, layout_, nullptr);
}

double Posterior::log_density_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const {
  return evaluate(z, *study_, outcomes_, hyper_, layout_, &grad);
}

}  // namespace ssal
