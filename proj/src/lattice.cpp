#include "ssal/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

#include "ssal/errors.hpp"

namespace ssal {

SpotGrid square_lattice(std::size_t rows, std::size_t cols) {
  SpotGrid grid;
  grid.positions.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      grid.positions.push_back({static_cast<double>(r), static_cast<double>(c)});
    }
  }
  return grid;
}

NeighborGraph::NeighborGraph(double delta, std::vector<std::vector<std::size_t>> adjacency)
    : delta_(delta), adjacency_(std::move(adjacency)) {}

std::size_t NeighborGraph::max_degree() const {
  std::size_t best = 0;
  for (const auto& nb : adjacency_) {
    best = std::max(best, nb.size());
  }
  return best;
}

namespace {

bool within(const Position& a, const Position& b, double delta2) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return dx * dx + dy * dy <= delta2;
}

std::vector<std::vector<std::size_t>> exact_search(const SpotGrid& grid, double delta) {
  const std::size_t n = grid.size();
  const double delta2 = delta * delta;
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (within(grid.positions[i], grid.positions[j], delta2)) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  for (auto& nb : adj) {
    std::sort(nb.begin(), nb.end());
  }
  return adj;
}

std::vector<std::vector<std::size_t>> binned_search(const SpotGrid& grid, double delta) {
  const std::size_t n = grid.size();
  const double delta2 = delta * delta;
  auto cell_of = [delta](double v) { return static_cast<long long>(std::floor(v / delta)); };
  auto key = [](long long cx, long long cy) {
    return (static_cast<unsigned long long>(cx) << 32) ^ static_cast<unsigned long long>(cy & 0xffffffffLL);
  };
  std::unordered_map<unsigned long long, std::vector<std::size_t>> bins;
  for (std::size_t i = 0; i < n; ++i) {
    bins[key(cell_of(grid.positions[i][0]), cell_of(grid.positions[i][1]))].push_back(i);
  }
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    const long long cx = cell_of(grid.positions[i][0]);
    const long long cy = cell_of(grid.positions[i][1]);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        const auto it = bins.find(key(cx + dx, cy + dy));
        if (it == bins.end()) continue;
        for (std::size_t j : it->second) {
          if (j != i && within(grid.positions[i], grid.positions[j], delta2)) {
            adj[i].push_back(j);
          }
        }
      }
    }
    std::sort(adj[i].begin(), adj[i].end());
  }
  return adj;
}

}  // namespace

NeighborGraph build_neighbor_graph(const SpotGrid& grid, double delta, NeighborSearch search) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ConfigError("neighbor radius delta must be positive and finite, got " + std::to_string(delta));
  }
  if (grid.size() == 0) {
    throw InputError("cannot build a neighbor graph over an empty spot grid");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid.positions[i][0]) || !std::isfinite(grid.positions[i][1])) {
      throw InputError("spot " + std::to_string(i) + " has a non-finite coordinate");
    }
  }
  if (search == NeighborSearch::kAuto) {
    search = grid.size() <= kExactSearchLimit ? NeighborSearch::kExact : NeighborSearch::kBinned;
  }
  auto adj = search == NeighborSearch::kExact ? exact_search(grid, delta) : binned_search(grid, delta);
  return NeighborGraph(delta, std::move(adj));
}

std::vector<std::size_t> interior_spots(const NeighborGraph& graph) {
  const std::size_t top = graph.max_degree();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (graph.degree(i) == top) {
      out.push_back(i);
    }
  }
  return out;
}

}  // namespace ssal
