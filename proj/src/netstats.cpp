#include "tbgcn/netstats.hpp"

#include <cmath>

namespace tbgcn::netstats {

std::optional<double> assortativity(const Graph& g) {
    if (g.num_edges() == 0) throw data_error("assortativity: graph has no edges");
    // Over both orientations the two marginals coincide, so a single mean
    // and variance suffice.
    double sum = 0.0, sum_sq = 0.0, sum_xy = 0.0;
    const double m2 = 2.0 * g.num_edges();
    for (auto [u, v] : g.edges()) {
        const double du = g.degree(u), dv = g.degree(v);
        sum += du + dv;
        sum_sq += du * du + dv * dv;
        sum_xy += 2.0 * du * dv;
    }
    const double mean = sum / m2;
    const double var = sum_sq / m2 - mean * mean;
    if (var <= 1e-12 * (1.0 + mean * mean)) return std::nullopt;
    const double cov = sum_xy / m2 - mean * mean;
    return cov / var;
}

std::map<int, double> nk_curve(const Graph& g) {
    std::map<int, double> acc;   // degree -> sum of mean neighbor degrees
    std::map<int, int> counts;
    for (int u = 0; u < g.num_nodes(); ++u) {
        const int k = g.degree(u);
        if (k == 0) continue;
        double nbr_sum = 0.0;
        for (int v : g.adjacency()[u]) nbr_sum += g.degree(v);
        acc[k] += nbr_sum / k;
        counts[k] += 1;
    }
    std::map<int, double> curve;
    for (auto [k, total] : acc) curve[k] = total / counts[k];
    return curve;
}

std::map<int, int> degree_histogram(const Graph& g) {
    std::map<int, int> hist;
    for (int u = 0; u < g.num_nodes(); ++u) hist[g.degree(u)] += 1;
    return hist;
}

}  // namespace tbgcn::netstats
