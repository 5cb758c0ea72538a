#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngnn/engine.hpp"
#include "ngnn/graph.hpp"

namespace ngnn {

enum class TaskKind { binary_classification, scalar_regression };

struct Sample {
    Graph graph;
    double label = 0.0;
};

struct Task {
    TaskKind kind = TaskKind::binary_classification;
    std::vector<Sample> dataset;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// For each k, `copies` randomly relabeled instances of both cycle_pair(k)
/// graphs (label 0 = two k-cycles, label 1 = one 2k-cycle). Pairs are split
/// 80/20 per k, keeping both graphs of a pair on the same side so every
/// split stays label-balanced.
Task make_exp_analog(const std::vector<int>& k_values, int copies, std::uint64_t seed);

/// G(n, p) graphs labeled with their triangle count.
Task make_triangle_count_task(int num_graphs, int n, double p, std::uint64_t seed);

/// Linear readout on the graph representation.
struct Head {
    Eigen::VectorXd weight;
    double bias = 0.0;
};

Head zero_head(int width);

struct LossGrad {
    double loss = 0.0;
    ModelParams grad;
    Head grad_head;
};

/// Mean sigmoid cross-entropy (classification) or squared error
/// (regression) over the batch.
double batch_loss(const ModelParams& params, std::span<const Sample> batch, const NGNNConfig& cfg,
                  const Head& head, TaskKind kind);

/// Loss plus reverse-mode gradients for all layer weights, epsilons and
/// the head. Throws Divergence on a non-finite loss.
LossGrad loss_and_grad(const ModelParams& params, std::span<const Sample> batch, const NGNNConfig& cfg,
                       const Head& head, TaskKind kind);

/// Worst relative error |analytic - numeric| / max(|analytic|, |numeric|, 1e-6)
/// over probe_count random scalars, using central differences. Probes whose
/// +-eps perturbation flips any ReLU are redrawn.
double grad_check(const ModelParams& params, std::span<const Sample> batch, const NGNNConfig& cfg,
                  const Head& head, TaskKind kind, int probe_count, double eps, std::uint64_t seed = 0);

struct Hyper {
    double lr = 0.01;
    int epochs = 100;
    int batch_size = 8;
    std::uint64_t seed = 0;
};

struct TrainReport {
    std::vector<double> loss_curve;
    /// Accuracy for classification, MAE for regression; NaN with an empty test split.
    double test_metric = 0.0;
    std::string metric_name;
    int epochs = 0;
    bool diverged = false;
    Hyper hyper;
    NGNNConfig config;

    std::string to_json() const;
};

struct TrainResult {
    ModelParams params;
    Head head;
    TrainReport report;
};

/// Fixed-lr SGD over shuffled mini-batches; deterministic given hyper.seed.
TrainResult train(const Task& task, const NGNNConfig& cfg, const Hyper& hyper);

/// Accuracy or MAE of a model on the given dataset indices.
double evaluate(const Task& task, std::span<const std::size_t> indices, const ModelParams& params,
                const Head& head, const NGNNConfig& cfg);

} // namespace ngnn
