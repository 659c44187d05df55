#include "tbgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace tbgcn {

Graph::Graph(int num_nodes, const std::vector<Edge>& edge_list,
             std::optional<std::vector<std::vector<double>>> features,
             std::optional<std::vector<int>> labels)
    : num_nodes_(num_nodes), features_(std::move(features)), labels_(std::move(labels)) {
    if (num_nodes < 0) throw data_error("Graph: negative node count");
    std::set<Edge> dedup;
    for (std::size_t i = 0; i < edge_list.size(); ++i) {
        auto [u, v] = edge_list[i];
        if (u < 0 || u >= num_nodes || v < 0 || v >= num_nodes) {
            throw data_error("Graph: edge entry " + std::to_string(i) + " (" +
                             std::to_string(u) + "," + std::to_string(v) +
                             ") has endpoint outside [0," + std::to_string(num_nodes) + ")");
        }
        if (u == v) continue;
        if (u > v) std::swap(u, v);
        dedup.emplace(u, v);
    }
    edges_.assign(dedup.begin(), dedup.end());
    adj_.resize(num_nodes);
    for (auto [u, v] : edges_) {
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    for (auto& nbrs : adj_) std::sort(nbrs.begin(), nbrs.end());

    if (features_ && static_cast<int>(features_->size()) != num_nodes) {
        throw data_error("Graph: feature row count " + std::to_string(features_->size()) +
                         " != node count " + std::to_string(num_nodes));
    }
    if (features_ && !features_->empty()) {
        const std::size_t d = features_->front().size();
        for (const auto& row : *features_) {
            if (row.size() != d) throw data_error("Graph: ragged feature rows");
        }
    }
    if (labels_) {
        if (static_cast<int>(labels_->size()) != num_nodes) {
            throw data_error("Graph: label count " + std::to_string(labels_->size()) +
                             " != node count " + std::to_string(num_nodes));
        }
        for (int c : *labels_) {
            if (c < 0) throw data_error("Graph: negative class id");
            num_classes_ = std::max(num_classes_, c + 1);
        }
    }
}

bool Graph::has_edge(int u, int v) const {
    if (u == v) return false;
    const auto& nbrs = adj_[u].size() <= adj_[v].size() ? adj_[u] : adj_[v];
    const int target = adj_[u].size() <= adj_[v].size() ? v : u;
    return std::binary_search(nbrs.begin(), nbrs.end(), target);
}

Graph build_graph(int num_nodes, const std::vector<Edge>& edge_list,
                  std::optional<std::vector<std::vector<double>>> features,
                  std::optional<std::vector<int>> labels) {
    return Graph(num_nodes, edge_list, std::move(features), std::move(labels));
}

TensorPtr one_hot_features(const Graph& g) {
    const int n = g.num_nodes();
    auto x = make_tensor(n, n);
    for (int i = 0; i < n; ++i) x->at(i, i) = 1.0;
    return x;
}

TensorPtr feature_tensor(const Graph& g) {
    if (!g.has_features()) return nullptr;
    const auto& f = g.features();
    const int n = g.num_nodes();
    const int d = f.empty() ? 0 : static_cast<int>(f.front().size());
    auto x = make_tensor(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x->at(i, j) = f[i][j];
    return x;
}

TensorPtr aggregation_matrix(const Graph& g) {
    const int n = g.num_nodes();
    auto a = make_tensor(n, n);
    std::vector<double> dinv(n);
    for (int i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(1.0 + g.degree(i));
    for (int i = 0; i < n; ++i) a->at(i, i) = dinv[i] * dinv[i];
    for (auto [u, v] : g.edges()) {
        const double w = dinv[u] * dinv[v];
        a->at(u, v) = w;
        a->at(v, u) = w;
    }
    return a;
}

std::vector<Edge> read_edge_list(const std::string& path, int* max_id_seen) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open edge list: " + path);
    std::vector<Edge> edges;
    std::string line;
    int line_no = 0, max_id = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        long long u, v;
        if (!(ls >> u >> v) || u < 0 || v < 0) {
            throw data_error(path + ":" + std::to_string(line_no) +
                             ": expected two nonnegative integers");
        }
        std::string rest;
        if (ls >> rest) {
            throw data_error(path + ":" + std::to_string(line_no) + ": trailing content");
        }
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
        max_id = std::max<long long>(max_id, std::max(u, v));
    }
    if (max_id_seen) *max_id_seen = max_id;
    return edges;
}

void write_edge_list(const std::string& path, const Graph& g) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write edge list: " + path);
    for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

namespace {

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open csv: " + path);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

}  // namespace

std::vector<std::vector<double>> read_feature_csv(const std::string& path, int num_nodes) {
    auto rows = read_csv(path);
    std::vector<std::vector<double>> features(num_nodes);
    std::vector<bool> seen(num_nodes, false);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() < 2) throw data_error(path + ": row " + std::to_string(r) + " too short");
        const int id = std::stoi(cells[0]);
        if (id < 0 || id >= num_nodes || seen[id]) {
            throw data_error(path + ": bad or duplicate node id " + cells[0]);
        }
        seen[id] = true;
        std::vector<double> f;
        for (std::size_t c = 1; c < cells.size(); ++c) f.push_back(std::stod(cells[c]));
        features[id] = std::move(f);
    }
    for (int i = 0; i < num_nodes; ++i) {
        if (!seen[i]) throw data_error(path + ": missing features for node " + std::to_string(i));
    }
    return features;
}

std::vector<int> read_label_csv(const std::string& path, int num_nodes) {
    auto rows = read_csv(path);
    std::vector<int> labels(num_nodes, -1);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() != 2) throw data_error(path + ": row " + std::to_string(r) +
                                                " must be node_id,class_id");
        const int id = std::stoi(cells[0]);
        if (id < 0 || id >= num_nodes || labels[id] >= 0) {
            throw data_error(path + ": bad or duplicate node id " + cells[0]);
        }
        labels[id] = std::stoi(cells[1]);
    }
    for (int i = 0; i < num_nodes; ++i) {
        if (labels[i] < 0) throw data_error(path + ": missing label for node " + std::to_string(i));
    }
    return labels;
}

Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::string& label_path, int num_nodes) {
    int max_id = -1;
    auto edges = read_edge_list(edge_path, &max_id);
    const int n = num_nodes >= 0 ? num_nodes : max_id + 1;
    std::optional<std::vector<std::vector<double>>> features;
    std::optional<std::vector<int>> labels;
    if (!feature_path.empty()) features = read_feature_csv(feature_path, n);
    if (!label_path.empty()) labels = read_label_csv(label_path, n);
    return Graph(n, edges, std::move(features), std::move(labels));
}

}  // namespace tbgcn
