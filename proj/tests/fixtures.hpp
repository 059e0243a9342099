#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include <algorithm>
#include <cmath>

#include "ssal/data.hpp"
#include "ssal/log_density.hpp"
#include "ssal/lattice.hpp"
#include "ssal/params.hpp"
#include "ssal/rng.hpp"

namespace fixtures {

/// m x m slice with standard-normal covariates, random outcomes and a few
/// missing spots.
inline ssal::SliceData random_slice(std::size_t m, std::size_t d, ssal::Rng& rng, double missing_rate = 0.1) {
  ssal::SliceData s;
  s.grid = ssal::square_lattice(m);
  s.graph = std::make_shared<const ssal::NeighborGraph>(ssal::build_neighbor_graph(s.grid, 1.0));
  const std::size_t n = s.grid.size();
  s.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < s.x.size(); ++i) s.x.data()[i] = rng.normal();
  s.y.resize(n);
  s.r.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.y[i] = rng.bernoulli(0.5) ? 1 : 0;
    s.r[i] = rng.bernoulli(missing_rate) ? 0 : 1;
  }
  return s;
}

inline ssal::StudyData random_study(std::size_t donors, std::size_t slices_per_donor, std::size_t m, std::size_t d,
                                    ssal::Rng& rng, ssal::CorrelationStructure structure, double missing_rate = 0.1) {
  ssal::StudyData study;
  study.donors = donors;
  study.slices_per_donor = slices_per_donor;
  study.structure = structure;
  for (std::size_t c = 0; c < donors; ++c) {
    for (std::size_t g = 0; g < slices_per_donor; ++g) {
      auto s = random_slice(m, d, rng, missing_rate);
      s.donor = c;
      s.position = g;
      s.donor_id = static_cast<int>(c);
      s.slice_id = static_cast<int>(g);
      study.slices.push_back(std::move(s));
    }
  }
  return study;
}

/// Outcomes with missing spots filled by coin flips.
inline ssal::Outcomes filled_outcomes(const ssal::StudyData& study, ssal::Rng& rng) {
  auto out = ssal::initial_outcomes(study);
  for (std::size_t s = 0; s < study.slices.size(); ++s) {
    for (std::size_t i = 0; i < out[s].size(); ++i) {
      if (!study.slices[s].observed(i)) out[s][i] = rng.bernoulli(0.5) ? 1 : 0;
    }
  }
  return out;
}

inline Eigen::VectorXd random_vector(Eigen::Index dim, ssal::Rng& rng, double scale = 1.0) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = scale * rng.normal();
  return v;
}

/// Largest componentwise |a - b| / max(1, |a|, |b|).
inline double max_rel_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({1.0, std::abs(a(i)), std::abs(b(i))});
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

/// Fourth-order central difference (stencil -2h, -h, h, 2h).
template <typename F>
Eigen::VectorXd central_difference(F&& f, const Eigen::VectorXd& x, double h = 1e-5) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  auto at = [&](Eigen::Index i, double offset) {
    xp(i) = x(i) + offset;
    const double v = f(xp);
    xp(i) = x(i);
    return v;
  };
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    g(i) = (8.0 * (at(i, h) - at(i, -h)) - (at(i, 2.0 * h) - at(i, -2.0 * h))) / (12.0 * h);
  }
  return g;
}

}  // namespace fixtures

namespace fixtures {

/// Zero-mean Gaussian log-density with the given precision matrix.
class GaussianTarget final : public ssal::LogDensity {
 public:
  explicit GaussianTarget(Eigen::MatrixXd precision) : precision_(std::move(precision)) {}
  static GaussianTarget standard(Eigen::Index dim) { return GaussianTarget(Eigen::MatrixXd::Identity(dim, dim)); }

  [[nodiscard]] Eigen::Index dim() const override { return precision_.rows(); }
  [[nodiscard]] double log_density(const Eigen::VectorXd& z) const override { return -0.5 * z.dot(precision_ * z); }
  double log_density_gradient(const Eigen::VectorXd& z, Eigen::VectorXd& grad) const override {
    grad = -precision_ * z;
    return log_density(z);
  }

 private:
  Eigen::MatrixXd precision_;
};

/// Two-sided Kolmogorov-Smirnov statistic against the standard normal CDF.
inline double ks_statistic_normal(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const auto n = static_cast<double>(sample.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = 0.5 * std::erfc(-sample[i] / std::sqrt(2.0));
    worst = std::max({worst, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
  }
  return worst;
}

}  // namespace fixtures

namespace fixtures {

/// n spots with one standard-normal covariate and y ~ Bernoulli(sigmoid(beta x)).
inline ssal::StudyData logistic_study(std::size_t n, const Eigen::VectorXd& beta, std::uint64_t seed) {
  ssal::Rng rng(seed);
  ssal::SliceData s;
  for (std::size_t i = 0; i < n; ++i) s.grid.positions.push_back({static_cast<double>(i), 0.0});
  s.graph = std::make_shared<const ssal::NeighborGraph>(ssal::build_neighbor_graph(s.grid, 1.0));
  s.x.resize(static_cast<Eigen::Index>(n), beta.size());
  for (Eigen::Index i = 0; i < s.x.size(); ++i) s.x.data()[i] = rng.normal();
  const Eigen::VectorXd a = s.x * beta;
  for (std::size_t i = 0; i < n; ++i) {
    s.y.push_back(rng.uniform() < 1.0 / (1.0 + std::exp(-a(static_cast<Eigen::Index>(i)))) ? 1 : 0);
    s.r.push_back(1);
  }
  return ssal::single_slice_study(std::move(s));
}

/// Posterior mean of a single logistic coefficient under beta | tau2 ~
/// N(0, tau2), tau2 ~ InvGamma(a, b), by trapezoid quadrature of the
/// Student-t marginal prior (b + beta^2 / 2)^-(a + 1/2) times the likelihood.
inline double logistic_posterior_mean(const Eigen::VectorXd& x, const std::vector<int>& y, double a, double b) {
  const int grid = 40001;
  const double lo = -6.0, hi = 6.0, step = (hi - lo) / (grid - 1);
  std::vector<double> logf(grid);
  double top = -INFINITY;
  for (int g = 0; g < grid; ++g) {
    const double beta = lo + g * step;
    double lp = -(a + 0.5) * std::log(b + 0.5 * beta * beta);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double eta = beta * x(i);
      // log sigmoid(+-eta) written out independently of the library.
      const double s = y[static_cast<std::size_t>(i)] == 1 ? eta : -eta;
      lp += s > 0 ? -std::log1p(std::exp(-s)) : s - std::log1p(std::exp(s));
    }
    logf[static_cast<std::size_t>(g)] = lp;
    top = std::max(top, lp);
  }
  double mass = 0.0, first = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double wgt = (g == 0 || g == grid - 1) ? 0.5 : 1.0;
    const double f = wgt * std::exp(logf[static_cast<std::size_t>(g)] - top);
    mass += f;
    first += f * (lo + g * step);
  }
  return first / mass;
}

}  // namespace fixtures
