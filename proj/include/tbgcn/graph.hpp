#ifndef TBGCN_GRAPH_HPP
#define TBGCN_GRAPH_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tbgcn/tensor.hpp"

namespace tbgcn {

/// Raised on malformed input data (files, edge lists, labels).
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

using Edge = std::pair<int, int>;  // stored with first < second

/// Immutable undirected graph with optional node features and labels.
/// No self-loops, no duplicate edges, no edge weights.
class Graph {
public:
    Graph(int num_nodes, const std::vector<Edge>& edge_list,
          std::optional<std::vector<std::vector<double>>> features = std::nullopt,
          std::optional<std::vector<int>> labels = std::nullopt);

    int num_nodes() const { return num_nodes_; }
    int num_edges() const { return static_cast<int>(edges_.size()); }
    const std::vector<Edge>& edges() const { return edges_; }
    const std::vector<std::vector<int>>& adjacency() const { return adj_; }
    int degree(int u) const { return static_cast<int>(adj_[u].size()); }
    bool has_edge(int u, int v) const;

    bool has_features() const { return features_.has_value(); }
    const std::vector<std::vector<double>>& features() const { return *features_; }
    bool has_labels() const { return labels_.has_value(); }
    const std::vector<int>& labels() const { return *labels_; }
    int num_classes() const { return num_classes_; }

private:
    int num_nodes_;
    std::vector<Edge> edges_;               // sorted, u < v
    std::vector<std::vector<int>> adj_;     // sorted neighbor lists
    std::optional<std::vector<std::vector<double>>> features_;
    std::optional<std::vector<int>> labels_;
    int num_classes_ = 0;
};

/// Builds a graph from a raw edge list. Duplicates and self-loops are
/// silently dropped; out-of-range endpoints are rejected with the offending
/// entry index.
Graph build_graph(int num_nodes, const std::vector<Edge>& edge_list,
                  std::optional<std::vector<std::vector<double>>> features = std::nullopt,
                  std::optional<std::vector<int>> labels = std::nullopt);

/// N x N identity-patterned feature matrix (row i is the one-hot vector of i).
TensorPtr one_hot_features(const Graph& g);

/// Feature matrix as a tensor, or nullptr when the graph has none.
TensorPtr feature_tensor(const Graph& g);

/// Symmetric normalization D^{-1/2}(A+I)D^{-1/2} of the self-loop-augmented
/// adjacency matrix, dense N x N.
TensorPtr aggregation_matrix(const Graph& g);

// --- file I/O ---------------------------------------------------------------

/// Reads a whitespace-separated edge list ("u v" per line, '#' comments).
/// Errors carry the offending line number.
std::vector<Edge> read_edge_list(const std::string& path, int* max_id_seen = nullptr);
void write_edge_list(const std::string& path, const Graph& g);

/// CSV: node_id,f1,f2,...  Rows may arrive in any order; every node in
/// [0, num_nodes) must appear exactly once.
std::vector<std::vector<double>> read_feature_csv(const std::string& path, int num_nodes);

/// CSV: node_id,class_id. Missing nodes are rejected.
std::vector<int> read_label_csv(const std::string& path, int num_nodes);

/// Loads a graph from an edge list plus optional feature/label CSVs.
/// Node count is 1 + max id unless explicitly given.
Graph load_graph(const std::string& edge_path,
                 const std::string& feature_path = "",
                 const std::string& label_path = "",
                 int num_nodes = -1);

}  // namespace tbgcn

#endif  // TBGCN_GRAPH_HPP
