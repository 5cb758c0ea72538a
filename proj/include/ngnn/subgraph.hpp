#pragma once

#include <vector>

#include <Eigen/Dense>

#include "ngnn/graph.hpp"

namespace ngnn {

/// Induced h-hop ball around a root. Local nodes are ordered by
/// (distance to root, original id), so the root is always local node 0.
struct RootedSubgraph {
    std::vector<NodeId> origin_nodes;
    NodeId root_local = 0;
    Graph graph;
    std::vector<int> dist_to_root;
    int height = 0;

    int size() const { return graph.num_nodes(); }
};

/// Edge configuration between hop sets Q^k and Q^{k+1} of a root:
/// counts[i-1] is the number of Q^{k+1} nodes with exactly i edges into Q^k.
struct EdgeConfiguration {
    int k = 0;
    std::vector<int> counts;

    friend bool operator==(const EdgeConfiguration&, const EdgeConfiguration&) = default;
};

enum class BaseFeaturePolicy { keep_original, constant_one };

/// Per-subgraph distance encoding appended to the base node features.
struct DEConfig {
    bool use_spd = false;
    bool use_resistance = false;
    BaseFeaturePolicy base = BaseFeaturePolicy::keep_original;

    /// Width of the encoded rows for a graph whose node-feature width is
    /// base_width (0 = featureless) and an extraction height.
    int width(int base_width, int height) const;
};

RootedSubgraph extract_rooted(const Graph& g, NodeId root, int height);

/// Reusable BFS workspace for extracting many balls from one graph.
/// Not thread-safe; use one per worker.
class SubgraphExtractor {
public:
    explicit SubgraphExtractor(const Graph& g);
    RootedSubgraph extract(NodeId root, int height);

private:
    const Graph& graph_;
    std::vector<int> local_of_;  // -1 when not in the current ball
    std::vector<NodeId> touched_;
};

/// Effective resistance from the root to every local node, using the
/// Laplacian pseudoinverse from a symmetric eigendecomposition
/// (eigenvalues below 1e-10 treated as zero).
std::vector<double> resistance_vector(const RootedSubgraph& sub);

/// Base features (original rows, or a ones column), then optionally a
/// one-hot SPD block of width height+2 and a raw resistance column.
Eigen::MatrixXd distance_encoding(const RootedSubgraph& sub, const DEConfig& cfg);

EdgeConfiguration edge_configuration(const Graph& g, NodeId v, int k);

} // namespace ngnn
