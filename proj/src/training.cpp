#include "ngnn/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"

#include "ngnn/errors.hpp"
#include "ngnn/parallel.hpp"
#include "ngnn/rng.hpp"
#include "ngnn/wl.hpp"

namespace ngnn {

namespace {

struct LinkLoss {
    double loss;
    double dz;  // d loss / d logit
};

LinkLoss link_loss(double z, double y, TaskKind kind) {
    if (kind == TaskKind::scalar_regression) return {(z - y) * (z - y), 2.0 * (z - y)};
    // softplus(z) - y z, evaluated stably.
    const double loss = std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
    const double sig = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
    return {loss, sig - y};
}

double logit(const Eigen::VectorXd& rep, const Head& head) { return head.weight.dot(rep) + head.bias; }

void add_into(ModelParams& acc, const ModelParams& g) {
    for (std::size_t t = 0; t < acc.layers.size(); ++t) {
        auto& a = acc.layers[t];
        const auto& b = g.layers[t];
        a.epsilon += b.epsilon;
        a.w1 += b.w1;
        a.b1 += b.b1;
        a.w2 += b.w2;
        a.b2 += b.b2;
    }
}

void scale(ModelParams& p, double s) {
    for (auto& l : p.layers) {
        l.epsilon *= s;
        l.w1 *= s;
        l.b1 *= s;
        l.w2 *= s;
        l.b2 *= s;
    }
}

void backprop_layers(const Graph& g, const ModelParams& params, const std::vector<LayerCache>& caches,
                     Eigen::MatrixXd d, ModelParams& grad) {
    for (std::size_t t = params.layers.size(); t-- > 0;)
        d = message_pass_backward(g, params.layers[t], caches[t], d, grad.layers[t]);
}

// Forward pass of one graph that keeps every layer cache for backward_graph.
struct GraphTape {
    int num_nodes = 0;
    std::vector<RootedSubgraph> subgraphs;            // nested mode, one per root
    std::vector<std::vector<LayerCache>> caches;      // per subgraph (or one entry in plain mode)
    Eigen::VectorXd graph_rep;
};

GraphTape forward_with_tape(const Graph& g, const ModelParams& params, const NGNNConfig& cfg) {
    cfg.validate();
    if (g.edge_features()) throw Unsupported("edge features are not used by the GIN layer");
    params.check_shapes(cfg, cfg.input_width(g.node_feature_width()));
    GraphTape tape;
    const int n = g.num_nodes();
    tape.num_nodes = n;
    Eigen::MatrixXd node_reps;
    if (cfg.mode == Mode::plain) {
        tape.caches.resize(1);
        node_reps = run_layers(g, base_features(g), params, &tape.caches[0]);
    } else {
        node_reps.resize(n, cfg.hidden_dim);
        tape.caches.resize(n);
        SubgraphExtractor extractor(g);
        for (NodeId v = 0; v < n; ++v) {
            tape.subgraphs.push_back(extractor.extract(v, cfg.height));
            const auto& sub = tape.subgraphs.back();
            const Eigen::MatrixXd reps = run_layers(sub.graph, distance_encoding(sub, cfg.de), params, &tape.caches[v]);
            node_reps.row(v) = pool_subgraph(reps, cfg.subgraph_pool, sub.root_local).transpose();
        }
    }
    tape.graph_rep = pool_graph(node_reps, cfg.graph_pool);
    return tape;
}

// Accumulates d loss / d params for one graph given d loss / d graph_rep.
void backward_graph(const Graph& g, const GraphTape& tape, const ModelParams& params, const NGNNConfig& cfg,
                    const Eigen::VectorXd& d_graph_rep, ModelParams& grad) {
    const int n = tape.num_nodes;
    if (n == 0) return;
    const Eigen::RowVectorXd d_node =
        d_graph_rep.transpose() / (cfg.graph_pool == GraphPool::mean ? static_cast<double>(n) : 1.0);

    if (cfg.mode == Mode::plain) {
        backprop_layers(g, params, tape.caches[0], d_node.replicate(n, 1), grad);
        return;
    }
    for (NodeId v = 0; v < n; ++v) {
        const auto& sub = tape.subgraphs[v];
        const int c = sub.size();
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(c, cfg.hidden_dim);
        switch (cfg.subgraph_pool) {
        case SubgraphPool::mean: d.rowwise() = d_node / static_cast<double>(c); break;
        case SubgraphPool::sum: d.rowwise() = d_node; break;
        case SubgraphPool::center: d.row(sub.root_local) = d_node; break;
        }
        backprop_layers(sub.graph, params, tape.caches[v], std::move(d), grad);
    }
}

// Sign pattern of every ReLU pre-activation visited by a batch forward.
std::vector<bool> activation_pattern(const ModelParams& params, std::span<const Sample> batch,
                                     const NGNNConfig& cfg) {
    std::vector<bool> bits;
    std::vector<LayerCache> caches;
    auto record = [&] {
        for (const auto& c : caches)
            for (Eigen::Index i = 0; i < c.pre.size(); ++i) bits.push_back(c.pre.data()[i] > 0.0);
    };
    for (const auto& s : batch) {
        if (cfg.mode == Mode::plain) {
            run_layers(s.graph, base_features(s.graph), params, &caches);
            record();
            continue;
        }
        SubgraphExtractor extractor(s.graph);
        for (NodeId v = 0; v < s.graph.num_nodes(); ++v) {
            const auto sub = extractor.extract(v, cfg.height);
            run_layers(sub.graph, distance_encoding(sub, cfg.de), params, &caches);
            record();
        }
    }
    return bits;
}

Eigen::VectorXd flatten_all(const ModelParams& p, const Head& h) {
    Eigen::VectorXd base = p.flatten();
    Eigen::VectorXd out(base.size() + h.weight.size() + 1);
    out << base, h.weight, h.bias;
    return out;
}

void assign_all(ModelParams& p, Head& h, const Eigen::VectorXd& flat) {
    const auto np = static_cast<Eigen::Index>(p.num_scalars());
    p.assign_flat(flat.head(np));
    h.weight = flat.segment(np, h.weight.size());
    h.bias = flat[flat.size() - 1];
}

} // namespace

Head zero_head(int width) { return {Eigen::VectorXd::Zero(width), 0.0}; }

Task make_exp_analog(const std::vector<int>& k_values, int copies, std::uint64_t seed) {
    if (k_values.empty()) throw InvalidInput("k_values must not be empty");
    if (copies < 1) throw InvalidInput("copies must be >= 1");
    for (int k : k_values)
        if (k < 3) throw InvalidInput("every k must be >= 3");

    Task task;
    task.kind = TaskKind::binary_classification;
    Rng rng(seed);
    const int test_copies = copies >= 2 ? std::max(1, static_cast<int>(std::lround(0.2 * copies))) : 0;
    for (int k : k_values) {
        const auto [two_cycles, long_cycle] = cycle_pair(k);
        if (wl_distinguish(two_cycles, long_cycle))
            throw std::logic_error("cycle_pair graphs unexpectedly 1-WL-distinguishable");
        std::vector<int> order(copies);
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(std::span<int>(order));
        for (int c = 0; c < copies; ++c) {
            const bool is_test = std::find(order.begin(), order.begin() + test_copies, c) != order.begin() + test_copies;
            for (int label = 0; label < 2; ++label) {
                const Graph& base = label == 0 ? two_cycles : long_cycle;
                const auto perm = Permutation::random(base.num_nodes(), rng.next());
                (is_test ? task.test : task.train).push_back(task.dataset.size());
                task.dataset.push_back({permute_graph(base, perm), static_cast<double>(label)});
            }
        }
    }
    return task;
}

Task make_triangle_count_task(int num_graphs, int n, double p, std::uint64_t seed) {
    if (num_graphs < 1 || n < 1) throw InvalidInput("need at least one graph and one node");
    Task task;
    task.kind = TaskKind::scalar_regression;
    Rng rng(seed);
    for (int i = 0; i < num_graphs; ++i) {
        Graph g = random_gnp(n, p, rng.next());
        int triangles = 0;
        for (const auto& [u, v] : g.edges())
            for (NodeId w : g.neighbors(v))
                if (w > v && g.has_edge(u, w)) ++triangles;
        task.dataset.push_back({std::move(g), static_cast<double>(triangles)});
    }
    std::vector<std::size_t> idx(num_graphs);
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_test = static_cast<std::size_t>(std::lround(0.2 * num_graphs));
    task.test.assign(idx.begin(), idx.begin() + n_test);
    task.train.assign(idx.begin() + n_test, idx.end());
    std::sort(task.train.begin(), task.train.end());
    std::sort(task.test.begin(), task.test.end());
    return task;
}

double batch_loss(const ModelParams& params, std::span<const Sample> batch, const NGNNConfig& cfg,
                  const Head& head, TaskKind kind) {
    if (batch.empty()) throw InvalidInput("batch must be non-empty");
    std::vector<double> losses(batch.size());
    parallel_for(batch.size(), [&](std::size_t i) {
        const auto emb = forward(batch[i].graph, params, cfg);
        losses[i] = link_loss(logit(emb.graph_rep, head), batch[i].label, kind).loss;
    });
    double total = 0.0;
    for (double l : losses) total += l;
    return total / static_cast<double>(batch.size());
}

LossGrad loss_and_grad(const ModelParams& params, std::span<const Sample> batch, const NGNNConfig& cfg,
                       const Head& head, TaskKind kind) {
    if (batch.empty()) throw InvalidInput("batch must be non-empty");
    const std::size_t b = batch.size();
    std::vector<double> losses(b);
    std::vector<ModelParams> grads(b, params.zeros_like());
    std::vector<Head> head_grads(b, zero_head(static_cast<int>(head.weight.size())));

    parallel_for(b, [&](std::size_t i) {
        const Graph& g = batch[i].graph;
        const auto tape = forward_with_tape(g, params, cfg);
        const auto [loss, dz] = link_loss(logit(tape.graph_rep, head), batch[i].label, kind);
        losses[i] = loss;
        head_grads[i].weight = dz * tape.graph_rep;
        head_grads[i].bias = dz;
        backward_graph(g, tape, params, cfg, dz * head.weight, grads[i]);
    });

    LossGrad out{0.0, params.zeros_like(), zero_head(static_cast<int>(head.weight.size()))};
    for (std::size_t i = 0; i < b; ++i) {
        out.loss += losses[i];
        add_into(out.grad, grads[i]);
        out.grad_head.weight += head_grads[i].weight;
        out.grad_head.bias += head_grads[i].bias;
    }
    const double inv = 1.0 / static_cast<double>(b);
    out.loss *= inv;
    scale(out.grad, inv);
    out.grad_head.weight *= inv;
    out.grad_head.bias *= inv;
    if (!std::isfinite(out.loss)) throw Divergence("non-finite loss");
    return out;
}

double grad_check(const ModelParams& params, std::span<const Sample> batch, const NGNNConfig& cfg,
                  const Head& head, TaskKind kind, int probe_count, double eps, std::uint64_t seed) {
    if (!(eps > 0.0 && eps <= 1e-2)) throw InvalidInput("eps must be in (0, 1e-2]");
    if (probe_count < 1) throw InvalidInput("probe_count must be >= 1");

    const auto analytic = loss_and_grad(params, batch, cfg, head, kind);
    const Eigen::VectorXd theta = flatten_all(params, head);
    const Eigen::VectorXd grad = flatten_all(analytic.grad, analytic.grad_head);

    Rng rng(seed);
    ModelParams p = params;
    Head h = head;
    auto loss_at = [&](Eigen::Index i, double delta) {
        Eigen::VectorXd t = theta;
        t[i] += delta;
        assign_all(p, h, t);
        return batch_loss(p, batch, cfg, h, kind);
    };
    auto pattern_at = [&](Eigen::Index i, double delta) {
        Eigen::VectorXd t = theta;
        t[i] += delta;
        assign_all(p, h, t);
        return activation_pattern(p, batch, cfg);
    };

    double worst = 0.0;
    int done = 0;
    const int max_draws = 50 * probe_count;
    for (int draws = 0; done < probe_count && draws < max_draws; ++draws) {
        const auto i = static_cast<Eigen::Index>(rng.below(theta.size()));
        if (pattern_at(i, eps) != pattern_at(i, -eps)) continue;
        const double numeric = (loss_at(i, eps) - loss_at(i, -eps)) / (2.0 * eps);
        const double denom = std::max({std::abs(grad[i]), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(grad[i] - numeric) / denom);
        ++done;
    }
    if (done < probe_count) throw std::runtime_error("grad_check: too many probes straddle a ReLU kink");
    return worst;
}

double evaluate(const Task& task, std::span<const std::size_t> indices, const ModelParams& params,
                const Head& head, const NGNNConfig& cfg) {
    if (indices.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::vector<double> score(indices.size());
    parallel_for(indices.size(), [&](std::size_t i) {
        const auto& s = task.dataset[indices[i]];
        const double z = logit(forward(s.graph, params, cfg).graph_rep, head);
        score[i] = task.kind == TaskKind::binary_classification ? ((z > 0.0) == (s.label > 0.5) ? 1.0 : 0.0)
                                                                : std::abs(z - s.label);
    });
    double total = 0.0;
    for (double s : score) total += s;
    return total / static_cast<double>(indices.size());
}

TrainResult train(const Task& task, const NGNNConfig& cfg, const Hyper& hyper) {
    if (!(hyper.lr >= 0.0) || hyper.epochs < 1 || hyper.batch_size < 1)
        throw InvalidInput("learning rate must be >= 0, epochs and batch size positive");
    if (task.train.empty()) throw InvalidInput("empty training split");
    const int base_width = task.dataset[task.train.front()].graph.node_feature_width();

    TrainResult out;
    out.params = init_params(cfg, derive_seed(hyper.seed, 1), base_width);
    {
        Rng head_rng(derive_seed(hyper.seed, 2));
        const double a = std::sqrt(6.0 / (cfg.hidden_dim + 1));
        out.head = zero_head(cfg.hidden_dim);
        for (Eigen::Index i = 0; i < out.head.weight.size(); ++i) out.head.weight[i] = head_rng.uniform(-a, a);
    }
    auto& report = out.report;
    report.hyper = hyper;
    report.config = cfg;
    report.metric_name = task.kind == TaskKind::binary_classification ? "accuracy" : "mae";

    Rng rng(derive_seed(hyper.seed, 3));
    std::vector<std::size_t> order = task.train;
    std::vector<Sample> batch;
    for (int epoch = 0; epoch < hyper.epochs && !report.diverged; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const std::size_t end = std::min(order.size(), start + hyper.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(task.dataset[order[i]]);
            LossGrad lg;
            try {
                lg = loss_and_grad(out.params, batch, cfg, out.head, task.kind);
            } catch (const Divergence&) {
                report.diverged = true;
                break;
            }
            epoch_loss += lg.loss * static_cast<double>(end - start);
            if (hyper.lr == 0.0) continue;
            out.params.assign_flat(out.params.flatten() - hyper.lr * lg.grad.flatten());
            out.head.weight -= hyper.lr * lg.grad_head.weight;
            out.head.bias -= hyper.lr * lg.grad_head.bias;
        }
        if (report.diverged) break;
        report.loss_curve.push_back(epoch_loss / static_cast<double>(order.size()));
        report.epochs = epoch + 1;
    }
    report.test_metric = evaluate(task, task.test, out.params, out.head, cfg);
    return out;
}

std::string TrainReport::to_json() const {
    nlohmann::json j;
    j["loss_curve"] = loss_curve;
    j["test_metric"] = std::isfinite(test_metric) ? nlohmann::json(test_metric) : nlohmann::json(nullptr);
    j["metric"] = metric_name;
    j["epochs"] = epochs;
    j["diverged"] = diverged;
    j["hyper"] = {{"lr", hyper.lr}, {"epochs", hyper.epochs}, {"batch_size", hyper.batch_size}, {"seed", hyper.seed}};
    j["config"] = {{"mode", to_string(config.mode)},
                   {"height", config.height},
                   {"layers", config.layers},
                   {"hidden_dim", config.hidden_dim},
                   {"subgraph_pool", to_string(config.subgraph_pool)},
                   {"graph_pool", to_string(config.graph_pool)},
                   {"de_spd", config.de.use_spd},
                   {"de_resistance", config.de.use_resistance}};
    return j.dump(2) + "\n";
}

} // namespace ngnn
