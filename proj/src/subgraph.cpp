#include "ngnn/subgraph.hpp"

#include <algorithm>

#include "ngnn/errors.hpp"

namespace ngnn {

int DEConfig::width(int base_width, int height) const {
    int w = (base == BaseFeaturePolicy::keep_original && base_width > 0) ? base_width : 1;
    if (use_spd) w += height + 2;
    if (use_resistance) w += 1;
    return w;
}

SubgraphExtractor::SubgraphExtractor(const Graph& g)
    : graph_(g), local_of_(g.num_nodes(), -1) {}

RootedSubgraph SubgraphExtractor::extract(NodeId root, int height) {
    if (root < 0 || root >= graph_.num_nodes()) throw InvalidInput("root out of range");
    if (height < 0) throw InvalidInput("height must be >= 0");

    RootedSubgraph sub;
    sub.height = height;
    auto& nodes = sub.origin_nodes;
    auto& dist = sub.dist_to_root;
    nodes.push_back(root);
    dist.push_back(0);
    local_of_[root] = 0;
    touched_.assign(1, root);

    // Layer-by-layer BFS; each new layer is sorted by original id.
    std::size_t layer_begin = 0;
    for (int d = 1; d <= height && layer_begin < nodes.size(); ++d) {
        const std::size_t layer_end = nodes.size();
        for (std::size_t i = layer_begin; i < layer_end; ++i)
            for (NodeId w : graph_.neighbors(nodes[i]))
                if (local_of_[w] < 0) {
                    local_of_[w] = 0;
                    touched_.push_back(w);
                    nodes.push_back(w);
                }
        std::sort(nodes.begin() + layer_end, nodes.end());
        dist.resize(nodes.size(), d);
        layer_begin = layer_end;
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) local_of_[nodes[i]] = static_cast<int>(i);

    std::vector<Edge> edges;
    std::vector<NodeId> nb;
    for (std::size_t a = 0; a < nodes.size(); ++a) {
        nb.clear();
        for (NodeId w : graph_.neighbors(nodes[a])) {
            const int b = local_of_[w];
            if (b > static_cast<int>(a)) nb.push_back(b);
        }
        std::sort(nb.begin(), nb.end());
        for (NodeId b : nb) edges.emplace_back(static_cast<NodeId>(a), b);
    }

    std::optional<FeatureMatrix> features;
    if (const auto& f = graph_.node_features()) {
        features = FeatureMatrix(nodes.size(), f->cols());
        for (std::size_t i = 0; i < nodes.size(); ++i) features->row(i) = f->row(nodes[i]);
    }
    sub.graph = make_graph_trusted(static_cast<int>(nodes.size()), std::move(edges), std::move(features));

    for (NodeId w : touched_) local_of_[w] = -1;
    return sub;
}

RootedSubgraph extract_rooted(const Graph& g, NodeId root, int height) {
    SubgraphExtractor ex(g);
    return ex.extract(root, height);
}

std::vector<double> resistance_vector(const RootedSubgraph& sub) {
    const int n = sub.size();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
    for (const auto& [u, v] : sub.graph.edges()) {
        lap(u, u) += 1;
        lap(v, v) += 1;
        lap(u, v) -= 1;
        lap(v, u) -= 1;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
    const Eigen::VectorXd& vals = eig.eigenvalues();
    const Eigen::MatrixXd& vecs = eig.eigenvectors();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        if (vals[i] > 1e-10) inv[i] = 1.0 / vals[i];
    const Eigen::MatrixXd pinv = vecs * inv.asDiagonal() * vecs.transpose();

    const int r = sub.root_local;
    std::vector<double> out(n, 0.0);
    for (int u = 0; u < n; ++u) {
        if (u == r) continue;
        out[u] = std::max(0.0, pinv(r, r) + pinv(u, u) - 2 * pinv(r, u));
    }
    return out;
}

Eigen::MatrixXd distance_encoding(const RootedSubgraph& sub, const DEConfig& cfg) {
    const int n = sub.size();
    const int base_width = sub.graph.node_feature_width();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, cfg.width(base_width, sub.height));
    int col = 0;
    if (cfg.base == BaseFeaturePolicy::keep_original && base_width > 0) {
        out.leftCols(base_width) = *sub.graph.node_features();
        col = base_width;
    } else {
        out.col(0).setOnes();
        col = 1;
    }
    if (cfg.use_spd) {
        for (int i = 0; i < n; ++i) {
            const int d = sub.dist_to_root[i];
            out(i, col + (d <= sub.height ? d : sub.height + 1)) = 1.0;
        }
        col += sub.height + 2;
    }
    if (cfg.use_resistance) {
        const auto res = resistance_vector(sub);
        for (int i = 0; i < n; ++i) out(i, col) = res[i];
    }
    return out;
}

EdgeConfiguration edge_configuration(const Graph& g, NodeId v, int k) {
    if (v < 0 || v >= g.num_nodes()) throw InvalidInput("node out of range");
    if (k < 0) throw InvalidInput("k must be >= 0");
    const auto dist = bfs_distances(g, v);
    EdgeConfiguration cfg;
    cfg.k = k;
    for (NodeId u = 0; u < g.num_nodes(); ++u) {
        if (dist[u] != k + 1) continue;
        int back = 0;
        for (NodeId w : g.neighbors(u)) back += dist[w] == k;
        if (static_cast<int>(cfg.counts.size()) < back) cfg.counts.resize(back, 0);
        ++cfg.counts[back - 1];
    }
    return cfg;
}

} // namespace ngnn
