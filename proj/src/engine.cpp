#include "ngnn/engine.hpp"

#include <algorithm>
#include <cmath>

#include "ngnn/errors.hpp"
#include "ngnn/parallel.hpp"
#include "ngnn/rng.hpp"

namespace ngnn {

void NGNNConfig::validate() const {
    if (height < 0) throw InvalidInput("height must be >= 0");
    if (layers < 1) throw InvalidInput("layers must be >= 1");
    if (hidden_dim < 1) throw InvalidInput("hidden_dim must be >= 1");
}

int NGNNConfig::input_width(int base_width) const {
    if (mode == Mode::plain) return std::max(1, base_width);
    return de.width(base_width, height);
}

std::string to_string(SubgraphPool p) {
    switch (p) {
    case SubgraphPool::mean: return "mean";
    case SubgraphPool::sum: return "sum";
    case SubgraphPool::center: return "center";
    }
    return "?";
}

std::string to_string(GraphPool p) { return p == GraphPool::mean ? "mean" : "sum"; }
std::string to_string(Mode m) { return m == Mode::nested ? "nested" : "plain"; }

SubgraphPool parse_subgraph_pool(const std::string& s) {
    if (s == "mean") return SubgraphPool::mean;
    if (s == "sum") return SubgraphPool::sum;
    if (s == "center") return SubgraphPool::center;
    throw InvalidInput("unknown subgraph pool: " + s);
}

GraphPool parse_graph_pool(const std::string& s) {
    if (s == "mean") return GraphPool::mean;
    if (s == "sum") return GraphPool::sum;
    throw InvalidInput("unknown graph pool: " + s);
}

Mode parse_mode(const std::string& s) {
    if (s == "nested") return Mode::nested;
    if (s == "plain") return Mode::plain;
    throw InvalidInput("unknown mode: " + s);
}

std::size_t ModelParams::num_scalars() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += 1 + l.w1.size() + l.b1.size() + l.w2.size() + l.b2.size();
    return n;
}

bool ModelParams::all_finite() const {
    for (const auto& l : layers)
        if (!std::isfinite(l.epsilon) || !l.w1.allFinite() || !l.b1.allFinite() || !l.w2.allFinite() ||
            !l.b2.allFinite())
            return false;
    return true;
}

void ModelParams::check_shapes(const NGNNConfig& cfg, int input_width) const {
    if (static_cast<int>(layers.size()) != cfg.layers)
        throw InvalidInput("model has " + std::to_string(layers.size()) + " layers, config expects " +
                           std::to_string(cfg.layers));
    int in = input_width;
    for (const auto& l : layers) {
        if (l.w1.cols() != in || l.w1.rows() != cfg.hidden_dim || l.b1.size() != cfg.hidden_dim ||
            l.w2.rows() != cfg.hidden_dim || l.w2.cols() != cfg.hidden_dim || l.b2.size() != cfg.hidden_dim)
            throw InvalidInput("parameter shapes do not chain (expected input width " + std::to_string(in) +
                               ")");
        in = cfg.hidden_dim;
    }
}

Eigen::VectorXd ModelParams::flatten() const {
    Eigen::VectorXd flat(num_scalars());
    Eigen::Index at = 0;
    auto put = [&](const auto& m) {
        flat.segment(at, m.size()) = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
        at += m.size();
    };
    for (const auto& l : layers) {
        flat[at++] = l.epsilon;
        put(l.w1);
        put(l.b1);
        put(l.w2);
        put(l.b2);
    }
    return flat;
}

void ModelParams::assign_flat(const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != num_scalars()) throw InvalidInput("flat parameter size mismatch");
    Eigen::Index at = 0;
    auto get = [&](auto& m) {
        Eigen::Map<Eigen::VectorXd>(m.data(), m.size()) = flat.segment(at, m.size());
        at += m.size();
    };
    for (auto& l : layers) {
        l.epsilon = flat[at++];
        get(l.w1);
        get(l.b1);
        get(l.w2);
        get(l.b2);
    }
}

ModelParams ModelParams::zeros_like() const {
    ModelParams z = *this;
    for (auto& l : z.layers) {
        l.epsilon = 0;
        l.w1.setZero();
        l.b1.setZero();
        l.w2.setZero();
        l.b2.setZero();
    }
    return z;
}

ModelParams init_params(const NGNNConfig& cfg, std::uint64_t seed, int base_width) {
    cfg.validate();
    Rng rng(seed);
    auto fill = [&](auto& m, int fan_in, int fan_out) {
        const double a = std::sqrt(6.0 / (fan_in + fan_out));
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
    };
    ModelParams p;
    int in = cfg.input_width(base_width);
    const int hid = cfg.hidden_dim;
    for (int t = 0; t < cfg.layers; ++t) {
        GinLayer l;
        l.w1.resize(hid, in);
        l.b1.resize(hid);
        l.w2.resize(hid, hid);
        l.b2.resize(hid);
        fill(l.w1, in, hid);
        fill(l.b1, in, hid);
        fill(l.w2, hid, hid);
        fill(l.b2, hid, hid);
        p.layers.push_back(std::move(l));
        in = hid;
    }
    return p;
}

Eigen::MatrixXd message_pass(const Graph& g, const Eigen::MatrixXd& feats, const GinLayer& layer,
                             LayerCache* cache) {
    if (feats.rows() != g.num_nodes()) throw InvalidInput("feature rows do not match node count");
    if (feats.cols() != layer.in_dim()) throw InvalidInput("feature width does not match layer input");
    Eigen::MatrixXd agg = (1.0 + layer.epsilon) * feats;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        for (NodeId u : g.neighbors(v)) agg.row(v) += feats.row(u);
    Eigen::MatrixXd pre = agg * layer.w1.transpose();
    pre.rowwise() += layer.b1.transpose();
    Eigen::MatrixXd out = pre.cwiseMax(0.0) * layer.w2.transpose();
    out.rowwise() += layer.b2.transpose();
    if (cache) {
        cache->input = feats;
        cache->agg = std::move(agg);
        cache->pre = std::move(pre);
    }
    return out;
}

Eigen::MatrixXd message_pass_backward(const Graph& g, const GinLayer& layer, const LayerCache& cache,
                                      const Eigen::MatrixXd& d_out, GinLayer& grad) {
    const Eigen::MatrixXd hidden = cache.pre.cwiseMax(0.0);
    grad.w2.noalias() += d_out.transpose() * hidden;
    grad.b2 += d_out.colwise().sum().transpose();
    Eigen::MatrixXd d_pre = d_out * layer.w2;
    d_pre = d_pre.cwiseProduct((cache.pre.array() > 0.0).cast<double>().matrix());
    grad.w1.noalias() += d_pre.transpose() * cache.agg;
    grad.b1 += d_pre.colwise().sum().transpose();
    const Eigen::MatrixXd d_agg = d_pre * layer.w1;
    grad.epsilon += d_agg.cwiseProduct(cache.input).sum();
    Eigen::MatrixXd d_in = (1.0 + layer.epsilon) * d_agg;
    for (NodeId v = 0; v < g.num_nodes(); ++v)
        for (NodeId u : g.neighbors(v)) d_in.row(u) += d_agg.row(v);
    return d_in;
}

Eigen::MatrixXd base_features(const Graph& g) {
    if (g.node_features() && g.node_feature_width() > 0) return *g.node_features();
    return Eigen::MatrixXd::Ones(g.num_nodes(), 1);
}

Eigen::MatrixXd run_layers(const Graph& g, Eigen::MatrixXd feats, const ModelParams& params,
                           std::vector<LayerCache>* caches) {
    if (caches) caches->resize(params.layers.size());
    for (std::size_t t = 0; t < params.layers.size(); ++t)
        feats = message_pass(g, feats, params.layers[t], caches ? &(*caches)[t] : nullptr);
    return feats;
}

Eigen::VectorXd pool_subgraph(const Eigen::MatrixXd& node_reps, SubgraphPool pool, int root_local) {
    switch (pool) {
    case SubgraphPool::center: return node_reps.row(root_local).transpose();
    case SubgraphPool::sum: return node_reps.colwise().sum().transpose();
    case SubgraphPool::mean: return node_reps.colwise().sum().transpose() / static_cast<double>(node_reps.rows());
    }
    throw InvalidInput("unknown subgraph pool");
}

Eigen::VectorXd pool_graph(const Eigen::MatrixXd& node_reps, GraphPool pool) {
    Eigen::VectorXd s = node_reps.colwise().sum().transpose();
    if (pool == GraphPool::mean && node_reps.rows() > 0) s /= static_cast<double>(node_reps.rows());
    return s;
}

SubgraphOutput base_forward(const RootedSubgraph& sub, const ModelParams& params, const NGNNConfig& cfg) {
    SubgraphOutput out;
    out.node_reps = run_layers(sub.graph, distance_encoding(sub, cfg.de), params);
    out.rep = pool_subgraph(out.node_reps, cfg.subgraph_pool, sub.root_local);
    return out;
}

GraphEmbedding forward(const Graph& g, const ModelParams& params, const NGNNConfig& cfg) {
    cfg.validate();
    if (g.edge_features()) throw Unsupported("edge features are not used by the GIN layer");
    params.check_shapes(cfg, cfg.input_width(g.node_feature_width()));

    GraphEmbedding emb;
    if (cfg.mode == Mode::plain) {
        emb.node_reps = run_layers(g, base_features(g), params);
    } else {
        const int n = g.num_nodes();
        emb.node_reps.resize(n, cfg.hidden_dim);
        const std::size_t chunks = std::min<std::size_t>(worker_count(), std::max(1, n));
        parallel_for(chunks, [&](std::size_t c) {
            SubgraphExtractor extractor(g);
            const std::size_t begin = n * c / chunks, end = n * (c + 1) / chunks;
            for (std::size_t v = begin; v < end; ++v) {
                const auto sub = extractor.extract(static_cast<NodeId>(v), cfg.height);
                emb.node_reps.row(v) = base_forward(sub, params, cfg).rep.transpose();
            }
        });
    }
    emb.graph_rep = pool_graph(emb.node_reps, cfg.graph_pool);
    return emb;
}

bool reps_distinguish(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
    if (a.size() != b.size()) throw InvalidInput("representation lengths differ");
    if (!(tol > 0)) throw InvalidInput("tolerance must be positive");
    const double scale = std::max({1.0, a.norm(), b.norm()});
    return (a - b).norm() > tol * scale;
}

} // namespace ngnn
