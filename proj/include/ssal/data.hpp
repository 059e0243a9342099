#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ssal/lattice.hpp"
#include "ssal/params.hpp"

namespace ssal {

/// One tissue slice. Spots with r[i] == 0 are missing: their outcome is
/// unobserved and their covariate row is never read.
struct SliceData {
  Eigen::MatrixXd x;                // n x d
  std::vector<int> y;               // 0/1 where observed
  std::vector<std::uint8_t> r;      // 1 observed, 0 missing
  SpotGrid grid;
  std::shared_ptr<const NeighborGraph> graph;
  int donor_id = 0;                 // label from the input
  int slice_id = 0;
  std::size_t donor = 0;            // dense index into the donor axis
  std::size_t position = 0;         // dense index of the slice within its donor
  std::vector<std::string> spot_ids;  // labels from the input; empty means 0..n-1

  [[nodiscard]] std::size_t size() const { return y.size(); }
  [[nodiscard]] std::size_t d() const { return static_cast<std::size_t>(x.cols()); }
  [[nodiscard]] bool observed(std::size_t i) const { return r[i] != 0; }
  [[nodiscard]] std::vector<std::size_t> missing() const;
  [[nodiscard]] std::size_t missing_count() const;
  [[nodiscard]] std::string spot_id(std::size_t i) const;

  /// Fraction of observed spots with y = 1 (0.5 when nothing is observed).
  [[nodiscard]] double observed_prevalence() const;

  /// Throws InputError on inconsistent dimensions or non-binary outcomes.
  void validate() const;
};

struct StudyData {
  std::vector<SliceData> slices;
  std::size_t donors = 1;
  std::size_t slices_per_donor = 1;
  CorrelationStructure structure = CorrelationStructure::kExchangeable;
  std::vector<std::string> covariate_names;
  bool padded = false;  // donors may contribute fewer than slices_per_donor slices

  [[nodiscard]] std::size_t d() const { return slices.empty() ? 0 : slices.front().d(); }
  [[nodiscard]] std::size_t total_spots() const;
  [[nodiscard]] std::size_t total_missing() const;

  /// Checks per-slice consistency, a common covariate dimension, and that
  /// every donor contributes exactly slices_per_donor slices (at most that
  /// many when padded) at distinct positions.
  void validate() const;
};

/// Wrap one slice as a single-donor, single-slice study.
StudyData single_slice_study(SliceData slice, std::vector<std::string> covariate_names = {});

/// Current outcome vectors, one per slice: observed values where r = 1 and
/// the caller's imputations elsewhere.
using Outcomes = std::vector<std::vector<int>>;

/// Observed outcomes with missing entries set to `fill`.
Outcomes initial_outcomes(const StudyData& study, int fill = 0);

/// The ModelVariant matching a study's shape.
ModelVariant variant_for(const StudyData& study, bool multislice, bool nonignorable);

}  // namespace ssal
