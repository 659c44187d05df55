#ifndef TBGCN_GENERATORS_HPP
#define TBGCN_GENERATORS_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "tbgcn/graph.hpp"

namespace tbgcn {

/// Seeded synthetic network families. Same parameters + same seed always
/// yield the identical edge set.
namespace generators {

/// Default RGG radius, calibrated so the n=1000 mean edge count lands near
/// 14.2k on the unit disc.
inline constexpr double kDefaultRggRadius = 0.1755;

/// Default RGG radius for the tree+RGG overlay (total near 2.4k edges at
/// n=1000, branching 10).
inline constexpr double kDefaultTreeRggRadius = 0.0533;

/// Watts-Strogatz ring lattice of even degree k with rewiring probability p.
/// Edge count is exactly n*k/2.
Graph gen_ws(int n, int k, double p, std::uint64_t seed);

/// Preferential attachment: each new node attaches m edges to existing nodes
/// with probability proportional to degree. Edge count m*(n-m).
Graph gen_pa(int n, int m, std::uint64_t seed);

/// Stochastic block model: intra-block pairs connect with p_in, inter-block
/// with p_out, independently.
Graph gen_sbm(const std::vector<int>& block_sizes, double p_in, double p_out,
              std::uint64_t seed);

/// Random geometric graph: n points uniform in the unit disc, edge iff
/// distance < radius. Coordinates optionally returned through `points`.
Graph gen_rgg(int n, double radius, std::uint64_t seed,
              std::vector<std::array<double, 2>>* points = nullptr);

/// Complete b-ary tree truncated at n nodes, breadth-first numbering.
/// Deterministic, no seed.
Graph gen_tree(int n, int branching);

/// Tree edges plus 2-D grid adjacency over a seeded random injection of
/// grid cells into node ids.
Graph gen_tree_lattice(int n, int branching, std::pair<int, int> grid_dims,
                       std::uint64_t seed);

/// Union of gen_tree and gen_rgg edge sets on the same node ids.
Graph gen_tree_rgg(int n, int branching, double radius, std::uint64_t seed);

}  // namespace generators

}  // namespace tbgcn

#endif  // TBGCN_GENERATORS_HPP
