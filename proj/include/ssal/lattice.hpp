#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace ssal {

using Position = std::array<double, 2>;

/// Spot locations; spot ids are the contiguous indices 0..n-1.
struct SpotGrid {
  std::vector<Position> positions;

  [[nodiscard]] std::size_t size() const { return positions.size(); }
};

/// m x m unit lattice in row-major order; spot i sits at (i / m, i % m).
SpotGrid square_lattice(std::size_t rows, std::size_t cols);
inline SpotGrid square_lattice(std::size_t m) { return square_lattice(m, m); }

/// Symmetric, irreflexive radius graph over spots. Immutable once built.
class NeighborGraph {
 public:
  NeighborGraph() = default;
  NeighborGraph(double delta, std::vector<std::vector<std::size_t>> adjacency);

  [[nodiscard]] double delta() const { return delta_; }
  [[nodiscard]] std::size_t size() const { return adjacency_.size(); }
  [[nodiscard]] const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
  [[nodiscard]] std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }
  [[nodiscard]] std::size_t max_degree() const;
  [[nodiscard]] const std::vector<std::vector<std::size_t>>& adjacency() const { return adjacency_; }

  /// Mean of values[j] over j in N(i); 0 for an isolated spot (empty sum).
  template <typename Values>
  [[nodiscard]] double neighbor_mean(std::size_t i, const Values& values) const {
    const auto& nb = adjacency_[i];
    if (nb.empty()) {
      return 0.0;
    }
    double sum = 0.0;
    for (std::size_t j : nb) {
      sum += static_cast<double>(values[j]);
    }
    return sum / static_cast<double>(nb.size());
  }

 private:
  double delta_ = 1.0;
  std::vector<std::vector<std::size_t>> adjacency_;
};

enum class NeighborSearch { kAuto, kExact, kBinned };

/// Threshold above which kAuto switches from pairwise comparison to binning.
inline constexpr std::size_t kExactSearchLimit = 10000;

/// j is a neighbor of i iff i != j and ||s_i - s_j||_2 <= delta.
/// Throws ConfigError for delta <= 0 and InputError for an empty grid or a
/// non-finite coordinate.
NeighborGraph build_neighbor_graph(const SpotGrid& grid, double delta,
                                   NeighborSearch search = NeighborSearch::kAuto);

/// Spots whose degree equals the graph's maximum degree. On a regular lattice
/// these are the spots off the periphery; for irregular clouds this is a
/// heuristic.
std::vector<std::size_t> interior_spots(const NeighborGraph& graph);

}  // namespace ssal
