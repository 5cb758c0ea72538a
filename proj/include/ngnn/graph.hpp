#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace ngnn {

using NodeId = int;
/// Undirected edge, always stored normalized as (min, max).
using Edge = std::pair<NodeId, NodeId>;
using FeatureMatrix = Eigen::MatrixXd;
using EdgeFeatureMap = std::map<Edge, std::vector<double>>;

/// Immutable undirected simple graph with optional node and edge features.
/// Adjacency is kept in CSR form with neighbor lists sorted ascending.
class Graph {
public:
    Graph() = default;

    /// Validates and normalizes the input: each (u, v) becomes (min, max),
    /// duplicates are dropped. Throws InvalidInput on out-of-range endpoints,
    /// self-loops, or feature shape mismatches.
    static Graph build(int num_nodes, std::vector<Edge> edges,
                       std::optional<FeatureMatrix> node_features = std::nullopt,
                       std::optional<EdgeFeatureMap> edge_features = std::nullopt);

    int num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    /// Sorted, normalized edge list.
    const std::vector<Edge>& edges() const { return edges_; }

    std::span<const NodeId> neighbors(NodeId v) const {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    int degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
    int max_degree() const;
    bool has_edge(NodeId u, NodeId v) const;

    const std::optional<FeatureMatrix>& node_features() const { return node_features_; }
    const std::optional<EdgeFeatureMap>& edge_features() const { return edge_features_; }
    /// Width of node feature rows, 0 when absent.
    int node_feature_width() const {
        return node_features_ ? static_cast<int>(node_features_->cols()) : 0;
    }

    /// Structural and feature equality.
    friend bool operator==(const Graph& a, const Graph& b);

private:
    friend Graph make_graph_trusted(int, std::vector<Edge>, std::optional<FeatureMatrix>);
    void build_adjacency();

    int num_nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<int> offsets_{0};
    std::vector<NodeId> adjacency_;
    std::optional<FeatureMatrix> node_features_;
    std::optional<EdgeFeatureMap> edge_features_;
};

/// Skips validation: edges must already be normalized, sorted and unique.
/// Used on hot paths that construct graphs known to be valid.
Graph make_graph_trusted(int num_nodes, std::vector<Edge> sorted_edges,
                         std::optional<FeatureMatrix> node_features = std::nullopt);

/// Bijection on [0, n); node i maps to mapping[i].
class Permutation {
public:
    explicit Permutation(std::vector<NodeId> mapping);
    static Permutation identity(int n);
    static Permutation random(int n, std::uint64_t seed);

    int size() const { return static_cast<int>(mapping_.size()); }
    NodeId operator[](NodeId i) const { return mapping_[i]; }
    const std::vector<NodeId>& mapping() const { return mapping_; }

private:
    std::vector<NodeId> mapping_;
};

enum class Builtin { two_triangles, hexagon };

Graph builtin(Builtin which);
/// Accepts "two_triangles" or "hexagon"; throws InvalidInput otherwise.
Graph builtin(std::string_view name);

Graph cycle(int k);
/// (two disjoint k-cycles, one 2k-cycle). Requires k >= 3.
std::pair<Graph, Graph> cycle_pair(int k);
Graph path(int n);
Graph complete(int n);

/// Uniform simple r-regular graph from the pairing model; the whole pairing
/// is redrawn whenever it produces a self-loop or a repeated edge.
Graph random_regular(int n, int r, std::uint64_t seed);

/// Erdos-Renyi G(n, p) graph.
Graph random_gnp(int n, double p, std::uint64_t seed);

Graph permute_graph(const Graph& g, const Permutation& p);

/// Exhaustive backtracking isomorphism check on structure only. Graphs of
/// different size return false; more than 10 nodes throws InvalidInput.
bool brute_force_isomorphic(const Graph& a, const Graph& b);

/// Hop distances from source; -1 for unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, NodeId source);
/// Largest finite eccentricity over all nodes.
int diameter(const Graph& g);
bool is_connected(const Graph& g);

/// Edge-list text: "n m", m lines "u v", optional "F f" block of n rows.
Graph parse_graph(std::string_view text);
std::string serialize_graph(const Graph& g);
Graph read_graph_file(const std::string& path);
void write_graph_file(const std::string& path, const Graph& g);

} // namespace ngnn
