#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngnn/graph.hpp"
#include "ngnn/subgraph.hpp"

namespace ngnn {

enum class SubgraphPool { mean, sum, center };
enum class GraphPool { mean, sum };
enum class Mode { nested, plain };

struct NGNNConfig {
    int height = 1;
    /// Message-passing layers; h + 1 is the usual choice.
    int layers = 2;
    int hidden_dim = 32;
    SubgraphPool subgraph_pool = SubgraphPool::mean;
    GraphPool graph_pool = GraphPool::mean;
    DEConfig de;
    Mode mode = Mode::nested;

    /// Throws InvalidInput when a field is out of range.
    void validate() const;
    /// Width of the first layer's input for graphs with the given node
    /// feature width (0 = featureless).
    int input_width(int base_width) const;
};

std::string to_string(SubgraphPool p);
std::string to_string(GraphPool p);
std::string to_string(Mode m);
SubgraphPool parse_subgraph_pool(const std::string& s);
GraphPool parse_graph_pool(const std::string& s);
Mode parse_mode(const std::string& s);

/// One GIN layer: h_v <- W2 relu(W1 ((1 + eps) h_v + sum_u h_u) + b1) + b2.
struct GinLayer {
    double epsilon = 0.0;
    Eigen::MatrixXd w1;  // hidden x in
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // hidden x hidden
    Eigen::VectorXd b2;

    int in_dim() const { return static_cast<int>(w1.cols()); }
    int out_dim() const { return static_cast<int>(w2.rows()); }
};

/// Weights shared by every rooted subgraph (nested) or by the whole graph (plain).
struct ModelParams {
    std::vector<GinLayer> layers;

    int input_width() const { return layers.empty() ? 0 : layers.front().in_dim(); }
    int output_width() const { return layers.empty() ? 0 : layers.back().out_dim(); }
    std::size_t num_scalars() const;
    bool all_finite() const;
    /// Throws InvalidInput unless the layer shapes chain and match cfg.
    void check_shapes(const NGNNConfig& cfg, int input_width) const;

    /// Flat view in a fixed order: per layer eps, w1, b1, w2, b2.
    Eigen::VectorXd flatten() const;
    void assign_flat(const Eigen::VectorXd& flat);
    ModelParams zeros_like() const;
};

struct GraphEmbedding {
    Eigen::MatrixXd node_reps;
    Eigen::VectorXd graph_rep;
};

struct SubgraphOutput {
    Eigen::MatrixXd node_reps;
    Eigen::VectorXd rep;
};

/// Uniform Glorot init for weights and biases, eps = 0. base_width is the
/// node-feature width of the graphs the model will see (0 = featureless).
ModelParams init_params(const NGNNConfig& cfg, std::uint64_t seed, int base_width = 0);

/// Intermediate values kept for the backward pass.
struct LayerCache {
    Eigen::MatrixXd input;
    Eigen::MatrixXd agg;
    Eigen::MatrixXd pre;
};

Eigen::MatrixXd message_pass(const Graph& g, const Eigen::MatrixXd& feats, const GinLayer& layer,
                             LayerCache* cache = nullptr);

/// Accumulates parameter gradients into grad and returns d(loss)/d(input).
Eigen::MatrixXd message_pass_backward(const Graph& g, const GinLayer& layer, const LayerCache& cache,
                                      const Eigen::MatrixXd& d_out, GinLayer& grad);

/// Ones column when the graph has no node features.
Eigen::MatrixXd base_features(const Graph& g);

/// Runs all layers on feats; caches is filled when non-null.
Eigen::MatrixXd run_layers(const Graph& g, Eigen::MatrixXd feats, const ModelParams& params,
                           std::vector<LayerCache>* caches = nullptr);

Eigen::VectorXd pool_subgraph(const Eigen::MatrixXd& node_reps, SubgraphPool pool, int root_local = 0);
Eigen::VectorXd pool_graph(const Eigen::MatrixXd& node_reps, GraphPool pool);

SubgraphOutput base_forward(const RootedSubgraph& sub, const ModelParams& params, const NGNNConfig& cfg);

GraphEmbedding forward(const Graph& g, const ModelParams& params, const NGNNConfig& cfg);

inline constexpr double kDefaultTolerance = 1e-6;

/// true iff ||a - b|| > tol * max(1, ||a||, ||b||).
bool reps_distinguish(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol = kDefaultTolerance);

} // namespace ngnn
