#include "ssal/params.hpp"

#include <cmath>
#include <string>

#include "ssal/errors.hpp"
#include "ssal/math.hpp"

namespace ssal {

void Hyperparams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("invalid hyperparameter: ") + what);
  };
  require(c1 > 0.0, "c1 must be > 0");
  require(v0 > 0.0 && v0 < 1.0, "v0 must lie in (0, 1)");
  require(b1 > 0.0 && b2 > 0.0, "b1 and b2 must be > 0");
  require(b3 > 0.0 && b4 > 0.0, "b3 and b4 must be > 0");
  require(b5 < b6, "b5 must be < b6");
  require(delta > 0.0, "delta must be > 0");
  require(gamma_prior_sd > 0.0, "gamma_prior_sd must be > 0");
}

double ModelParams::inclusion(std::size_t k, double v0) const {
  const double b = beta(static_cast<Eigen::Index>(k));
  const double t = tau2(static_cast<Eigen::Index>(k));
  const double slab = std::log(w) + math::normal_log_pdf(b, 0.0, t);
  const double spike = std::log1p(-w) + math::normal_log_pdf(b, 0.0, v0 * t);
  return std::exp(slab - math::log_sum_exp(slab, spike));
}

ParamLayout::ParamLayout(const ModelVariant& variant) : variant_(variant) {
  const auto d = static_cast<Eigen::Index>(variant.d);
  Eigen::Index next = 0;
  if (!variant.fixed_eta) eta_ = next++;
  beta_ = next;
  next += d;
  tau2_ = next;
  next += d;
  if (!variant.fixed_w) w_ = next++;
  if (variant.multislice) {
    u_ = next;
    next += static_cast<Eigen::Index>(variant.donors * variant.slices_per_donor);
    sigma2_ = next;
    next += static_cast<Eigen::Index>(variant.donors);
    rho_ = next++;
  }
  if (variant.nonignorable) {
    gamma_ = next;
    next += 3;
  }
  dim_ = next;
}

std::vector<std::string> ParamLayout::names(const std::vector<std::string>& covariates) const {
  std::vector<std::string> out(static_cast<std::size_t>(dim_));
  auto at = [&](Eigen::Index i) -> std::string& { return out[static_cast<std::size_t>(i)]; };
  if (has_eta()) at(eta_) = "eta";
  for (std::size_t k = 0; k < variant_.d; ++k) {
    const std::string label = k < covariates.size() ? covariates[k] : std::to_string(k + 1);
    at(beta_ + static_cast<Eigen::Index>(k)) = "beta[" + label + "]";
    at(tau2_ + static_cast<Eigen::Index>(k)) = "tau2[" + label + "]";
  }
  if (has_w()) at(w_) = "w";
  if (has_random_effects()) {
    for (std::size_t c = 0; c < variant_.donors; ++c) {
      for (std::size_t g = 0; g < variant_.slices_per_donor; ++g) {
        at(u(c, g)) = "U[" + std::to_string(c + 1) + "," + std::to_string(g + 1) + "]";
      }
      at(sigma2_ + static_cast<Eigen::Index>(c)) = "sigma2[" + std::to_string(c + 1) + "]";
    }
    at(rho_) = "rho";
  }
  if (has_gamma()) {
    at(gamma_) = "gamma0";
    at(gamma_ + 1) = "gamma1";
    at(gamma_ + 2) = "gamma2";
  }
  return out;
}

Eigen::VectorXd flatten(const ModelParams& p, const ParamLayout& layout) {
  const auto& v = layout.variant();
  const auto d = static_cast<Eigen::Index>(v.d);
  Eigen::VectorXd out(layout.dim());
  if (layout.has_eta()) out(layout.eta()) = p.eta;
  out.segment(layout.beta(), d) = p.beta;
  out.segment(layout.tau2(), d) = p.tau2;
  if (layout.has_w()) out(layout.w()) = p.w;
  if (layout.has_random_effects()) {
    for (std::size_t c = 0; c < v.donors; ++c) {
      for (std::size_t g = 0; g < v.slices_per_donor; ++g) {
        out(layout.u(c, g)) = p.U(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(g));
      }
    }
    out.segment(layout.sigma2(), static_cast<Eigen::Index>(v.donors)) = p.sigma2;
    out(layout.rho()) = p.rho;
  }
  if (layout.has_gamma()) out.segment<3>(layout.gamma()) = p.gamma;
  return out;
}

ModelParams unflatten(const Eigen::VectorXd& theta, const ParamLayout& layout) {
  const auto& v = layout.variant();
  if (theta.size() != layout.dim()) throw InputError("theta has the wrong dimension for this layout");
  const auto d = static_cast<Eigen::Index>(v.d);
  ModelParams p;
  p.eta = layout.has_eta() ? theta(layout.eta()) : *v.fixed_eta;
  p.beta = theta.segment(layout.beta(), d);
  p.tau2 = theta.segment(layout.tau2(), d);
  p.w = layout.has_w() ? theta(layout.w()) : *v.fixed_w;
  if (layout.has_random_effects()) {
    p.U.resize(static_cast<Eigen::Index>(v.donors), static_cast<Eigen::Index>(v.slices_per_donor));
    for (std::size_t c = 0; c < v.donors; ++c) {
      for (std::size_t g = 0; g < v.slices_per_donor; ++g) {
        p.U(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(g)) = theta(layout.u(c, g));
      }
    }
    p.sigma2 = theta.segment(layout.sigma2(), static_cast<Eigen::Index>(v.donors));
    p.rho = theta(layout.rho());
  }
  if (layout.has_gamma()) p.gamma = theta.segment<3>(layout.gamma());
  return p;
}

ModelParams default_params(const ModelVariant& v, const Hyperparams& h) {
  ModelParams p;
  const auto d = static_cast<Eigen::Index>(v.d);
  p.eta = v.fixed_eta.value_or(h.c1 / 4.0);
  p.beta = Eigen::VectorXd::Zero(d);
  p.tau2 = Eigen::VectorXd::Constant(d, h.b2 / (h.b1 + 1.0));
  p.w = v.fixed_w.value_or(0.5);
  if (v.multislice) {
    p.U = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(v.donors), static_cast<Eigen::Index>(v.slices_per_donor));
    p.sigma2 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(v.donors), h.b4 / (h.b3 + 1.0));
    p.rho = 0.5 * (h.b5 + h.b6);
  }
  return p;
}

}  // namespace ssal
