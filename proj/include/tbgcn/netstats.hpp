#ifndef TBGCN_NETSTATS_HPP
#define TBGCN_NETSTATS_HPP

#include <map>
#include <optional>

#include "tbgcn/graph.hpp"

namespace tbgcn::netstats {

/// Degree assortativity: Pearson correlation of endpoint degrees over both
/// orientations of every edge. Empty optional when the endpoint-degree
/// variance is zero (e.g. regular graphs); throws data_error on an empty
/// edge set.
std::optional<double> assortativity(const Graph& g);

/// N(k): mean over nodes of degree k of the mean degree of their neighbors.
/// Defined only for degrees k >= 1 that occur in the graph.
std::map<int, double> nk_curve(const Graph& g);

/// Exact degree -> node count histogram.
std::map<int, int> degree_histogram(const Graph& g);

}  // namespace tbgcn::netstats

#endif  // TBGCN_NETSTATS_HPP
