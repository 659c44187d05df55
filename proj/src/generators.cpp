#include "tbgcn/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

namespace tbgcn::generators {

namespace {

int rand_int(std::mt19937_64& rng, int n) {
    return static_cast<int>(std::uniform_int_distribution<int>(0, n - 1)(rng));
}

}  // namespace

Graph gen_ws(int n, int k, double p, std::uint64_t seed) {
    if (k >= n) throw std::invalid_argument("gen_ws: k must be < n");
    if (k < 0 || k % 2 != 0) throw std::invalid_argument("gen_ws: k must be even and >= 0");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("gen_ws: p must be in [0,1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::set<Edge> edges;
    auto norm = [](int u, int v) { return u < v ? Edge{u, v} : Edge{v, u}; };
    for (int j = 1; j <= k / 2; ++j)
        for (int i = 0; i < n; ++i) edges.insert(norm(i, (i + j) % n));
    // Rewire the clockwise endpoint of each lattice edge; keep the edge if a
    // free target cannot be found (node nearly saturated).
    for (int j = 1; j <= k / 2; ++j) {
        for (int i = 0; i < n; ++i) {
            if (unif(rng) >= p) continue;
            const Edge old = norm(i, (i + j) % n);
            if (!edges.count(old)) continue;
            for (int attempt = 0; attempt < 100; ++attempt) {
                const int w = rand_int(rng, n);
                if (w == i) continue;
                const Edge cand = norm(i, w);
                if (edges.count(cand)) continue;
                edges.erase(old);
                edges.insert(cand);
                break;
            }
        }
    }
    return Graph(n, {edges.begin(), edges.end()});
}

Graph gen_pa(int n, int m, std::uint64_t seed) {
    if (m <= 0 || m >= n) throw std::invalid_argument("gen_pa: need 0 < m < n");
    std::mt19937_64 rng(seed);
    std::vector<Edge> edges;
    // repeated-endpoint list: sampling an entry is degree-proportional sampling
    std::vector<int> endpoints;
    for (int v = m; v < n; ++v) {
        std::set<int> targets;
        if (v == m) {
            for (int t = 0; t < m; ++t) targets.insert(t);
        } else {
            while (static_cast<int>(targets.size()) < m) {
                targets.insert(endpoints[rand_int(rng, static_cast<int>(endpoints.size()))]);
            }
        }
        for (int t : targets) {
            edges.emplace_back(t, v);
            endpoints.push_back(t);
            endpoints.push_back(v);
        }
    }
    return Graph(n, edges);
}

Graph gen_sbm(const std::vector<int>& block_sizes, double p_in, double p_out,
              std::uint64_t seed) {
    if (p_in < 0.0 || p_in > 1.0 || p_out < 0.0 || p_out > 1.0) {
        throw std::invalid_argument("gen_sbm: probabilities must be in [0,1]");
    }
    const int n = std::accumulate(block_sizes.begin(), block_sizes.end(), 0);
    std::vector<int> block(n);
    std::vector<int> labels(n);
    int node = 0;
    for (std::size_t b = 0; b < block_sizes.size(); ++b) {
        if (block_sizes[b] <= 0) throw std::invalid_argument("gen_sbm: block sizes must be positive");
        for (int i = 0; i < block_sizes[b]; ++i, ++node) {
            block[node] = static_cast<int>(b);
            labels[node] = static_cast<int>(b);
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const double p = block[u] == block[v] ? p_in : p_out;
            if (unif(rng) < p) edges.emplace_back(u, v);
        }
    }
    return Graph(n, edges, std::nullopt, labels);
}

Graph gen_rgg(int n, double radius, std::uint64_t seed,
              std::vector<std::array<double, 2>>* points) {
    if (radius <= 0.0) throw std::invalid_argument("gen_rgg: radius must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::array<double, 2>> pts(n);
    for (auto& p : pts) {
        const double r = std::sqrt(unif(rng));
        const double theta = 2.0 * M_PI * unif(rng);
        p = {r * std::cos(theta), r * std::sin(theta)};
    }
    const double r2 = radius * radius;
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const double dx = pts[u][0] - pts[v][0];
            const double dy = pts[u][1] - pts[v][1];
            if (dx * dx + dy * dy < r2) edges.emplace_back(u, v);
        }
    }
    if (points) *points = std::move(pts);
    return Graph(n, edges);
}

Graph gen_tree(int n, int branching) {
    if (branching < 1) throw std::invalid_argument("gen_tree: branching must be >= 1");
    std::vector<Edge> edges;
    for (int i = 1; i < n; ++i) edges.emplace_back((i - 1) / branching, i);
    return Graph(n, edges);
}

Graph gen_tree_lattice(int n, int branching, std::pair<int, int> grid_dims,
                       std::uint64_t seed) {
    const auto [gx, gy] = grid_dims;
    if (gx < 1 || gy < 1) throw std::invalid_argument("gen_tree_lattice: grid dims must be >= 1");
    if (gx * gy > n) throw std::invalid_argument("gen_tree_lattice: grid larger than node count");
    std::vector<Edge> edges = gen_tree(n, branching).edges();
    // seeded random injection of grid cells into node ids
    std::vector<int> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    auto cell = [&](int i, int j) { return ids[i * gy + j]; };
    for (int i = 0; i < gx; ++i) {
        for (int j = 0; j < gy; ++j) {
            if (i + 1 < gx) edges.emplace_back(cell(i, j), cell(i + 1, j));
            if (j + 1 < gy) edges.emplace_back(cell(i, j), cell(i, j + 1));
        }
    }
    return Graph(n, edges);
}

Graph gen_tree_rgg(int n, int branching, double radius, std::uint64_t seed) {
    std::vector<Edge> edges = gen_tree(n, branching).edges();
    const auto rgg = gen_rgg(n, radius, seed);
    edges.insert(edges.end(), rgg.edges().begin(), rgg.edges().end());
    return Graph(n, edges);
}

}  // namespace tbgcn::generators
