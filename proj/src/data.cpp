#include "ssal/data.hpp"

#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <string>

#include "ssal/errors.hpp"

namespace ssal {

std::vector<std::size_t> SliceData::missing() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] == 0) out.push_back(i);
  }
  return out;
}

std::size_t SliceData::missing_count() const {
  std::size_t count = 0;
  for (auto v : r) count += v == 0 ? 1 : 0;
  return count;
}

std::string SliceData::spot_id(std::size_t i) const {
  return spot_ids.empty() ? std::to_string(i) : spot_ids.at(i);
}

double SliceData::observed_prevalence() const {
  std::size_t obs = 0;
  std::size_t ones = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (r[i] != 0) {
      ++obs;
      ones += y[i] == 1 ? 1 : 0;
    }
  }
  return obs == 0 ? 0.5 : static_cast<double>(ones) / static_cast<double>(obs);
}

void SliceData::validate() const {
  const std::string where = "slice (donor " + std::to_string(donor_id) + ", slice " + std::to_string(slice_id) + ")";
  const std::size_t n = y.size();
  if (r.size() != n || static_cast<std::size_t>(x.rows()) != n) {
    throw InputError(where + ": outcome, indicator and covariate row counts differ");
  }
  if (!graph || graph->size() != n) {
    throw InputError(where + ": neighbor graph does not match the spot count");
  }
  if (grid.size() != n) {
    throw InputError(where + ": coordinate count does not match the spot count");
  }
  if (!spot_ids.empty() && spot_ids.size() != n) {
    throw InputError(where + ": spot id count does not match the spot count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] > 1) throw InputError(where + ": observation indicator must be 0 or 1");
    if (r[i] == 1) {
      if (y[i] != 0 && y[i] != 1) {
        throw InputError(where + ": outcome at spot " + std::to_string(i) + " is not binary");
      }
      for (Eigen::Index k = 0; k < x.cols(); ++k) {
        if (!std::isfinite(x(static_cast<Eigen::Index>(i), k))) {
          throw InputError(where + ": non-finite covariate at spot " + std::to_string(i));
        }
      }
    }
  }
}

std::size_t StudyData::total_spots() const {
  std::size_t n = 0;
  for (const auto& s : slices) n += s.size();
  return n;
}

std::size_t StudyData::total_missing() const {
  std::size_t n = 0;
  for (const auto& s : slices) n += s.missing_count();
  return n;
}

void StudyData::validate() const {
  if (slices.empty()) throw InputError("study has no slices");
  const std::size_t dim = d();
  std::map<std::size_t, std::size_t> per_donor;
  std::set<std::pair<std::size_t, std::size_t>> cells;
  for (const auto& s : slices) {
    s.validate();
    if (s.d() != dim) throw InputError("slices disagree on the number of covariates");
    if (s.donor >= donors || s.position >= slices_per_donor) {
      throw InputError("slice (donor " + std::to_string(s.donor_id) + ", slice " + std::to_string(s.slice_id) +
                       ") has an index outside the donor/slice grid");
    }
    if (!cells.emplace(s.donor, s.position).second) {
      throw InputError("two slices share donor index " + std::to_string(s.donor) + " and position " +
                       std::to_string(s.position));
    }
    ++per_donor[s.donor];
  }
  if (per_donor.size() != donors) throw InputError("some donors contribute no slices");
  for (const auto& [donor, count] : per_donor) {
    if (padded ? count > slices_per_donor : count != slices_per_donor) {
      throw InputError("donor index " + std::to_string(donor) + " has " + std::to_string(count) +
                       " slices; every donor must contribute the same number (" + std::to_string(slices_per_donor) +
                       ")");
    }
  }
  if (!covariate_names.empty() && covariate_names.size() != dim) {
    throw InputError("covariate name count does not match the covariate dimension");
  }
}

StudyData single_slice_study(SliceData slice, std::vector<std::string> covariate_names) {
  StudyData study;
  slice.donor = 0;
  slice.position = 0;
  study.slices.push_back(std::move(slice));
  study.covariate_names = std::move(covariate_names);
  return study;
}

Outcomes initial_outcomes(const StudyData& study, int fill) {
  Outcomes out;
  out.reserve(study.slices.size());
  for (const auto& s : study.slices) {
    std::vector<int> y = s.y;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (s.r[i] == 0) y[i] = fill;
    }
    out.push_back(std::move(y));
  }
  return out;
}

ModelVariant variant_for(const StudyData& study, bool multislice, bool nonignorable) {
  ModelVariant v;
  v.d = study.d();
  v.multislice = multislice;
  v.donors = multislice ? study.donors : 1;
  v.slices_per_donor = multislice ? study.slices_per_donor : 1;
  v.structure = study.structure;
  v.nonignorable = nonignorable;
  return v;
}

}  // namespace ssal
