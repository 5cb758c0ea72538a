#include "doctest.h"

#include "ngnn/engine.hpp"
#include "ngnn/errors.hpp"
#include "ngnn/graph.hpp"
#include "ngnn/parallel.hpp"

using namespace ngnn;

namespace {

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max({1.0, a.norm(), b.norm()});
}

NGNNConfig nested(int h, int t, SubgraphPool pool = SubgraphPool::mean) {
    NGNNConfig cfg;
    cfg.mode = Mode::nested;
    cfg.height = h;
    cfg.layers = t;
    cfg.hidden_dim = 8;
    cfg.subgraph_pool = pool;
    return cfg;
}

NGNNConfig plain(int t) {
    NGNNConfig cfg;
    cfg.mode = Mode::plain;
    cfg.layers = t;
    cfg.hidden_dim = 8;
    return cfg;
}

std::vector<Graph> corpus() {
    std::vector<Graph> gs{builtin(Builtin::two_triangles), builtin(Builtin::hexagon), complete(4), path(6)};
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
        gs.push_back(random_gnp(10, 0.3, seed));
        gs.push_back(random_regular(12, 3, seed));
    }
    return gs;
}

} // namespace

TEST_CASE("init_params") {
    auto cfg = nested(2, 3);
    cfg.de.use_spd = true;
    const auto a = init_params(cfg, 5), b = init_params(cfg, 5), c = init_params(cfg, 6);
    CHECK(a.flatten() == b.flatten());
    CHECK(a.flatten() != c.flatten());
    REQUIRE(a.layers.size() == 3);
    CHECK(a.input_width() == 1 + 4);
    CHECK(a.layers[1].in_dim() == 8);
    CHECK(a.output_width() == 8);
    for (const auto& l : a.layers) CHECK(l.epsilon == 0.0);
    const double bound = std::sqrt(6.0 / (5 + 8));
    CHECK(a.layers[0].w1.cwiseAbs().maxCoeff() <= bound);
    CHECK(a.all_finite());
    CHECK_NOTHROW(a.check_shapes(cfg, 5));
    CHECK_THROWS_AS(a.check_shapes(cfg, 4), InvalidInput);

    auto flat = a.flatten();
    auto copy = a.zeros_like();
    copy.assign_flat(flat);
    CHECK(copy.flatten() == flat);
    CHECK(a.num_scalars() == static_cast<std::size_t>(flat.size()));
}

TEST_CASE("message_pass") {
    const auto cfg = plain(1);
    const auto params = init_params(cfg, 3);
    const auto& layer = params.layers[0];
    auto mlp = [&](const Eigen::MatrixXd& x) {
        Eigen::MatrixXd pre = x * layer.w1.transpose();
        pre.rowwise() += layer.b1.transpose();
        Eigen::MatrixXd out = pre.cwiseMax(0.0) * layer.w2.transpose();
        out.rowwise() += layer.b2.transpose();
        return out;
    };

    const auto empty = Graph::build(3, {});
    Eigen::MatrixXd x(3, 1);
    x << 0.5, -1.0, 2.0;
    CHECK((message_pass(empty, x, layer) - mlp(x)).norm() < 1e-14);

    const auto two = Graph::build(2, {});
    const auto same = message_pass(two, Eigen::MatrixXd::Constant(2, 1, 0.7), layer);
    CHECK(same.row(0) == same.row(1));

    const auto hex = message_pass(cycle(6), Eigen::MatrixXd::Ones(6, 1), layer);
    for (int v = 1; v < 6; ++v) CHECK(hex.row(v) == hex.row(0));
    CHECK((hex.row(0) - mlp(Eigen::MatrixXd::Constant(1, 1, 3.0)).row(0)).norm() < 1e-14);

    GinLayer eps_layer = layer;
    eps_layer.epsilon = 0.5;
    const auto p = path(2);
    Eigen::MatrixXd y(2, 1);
    y << 1.0, 4.0;
    Eigen::MatrixXd agg(2, 1);
    agg << 1.5 * 1.0 + 4.0, 1.5 * 4.0 + 1.0;
    CHECK((message_pass(p, y, eps_layer) - mlp(agg)).norm() < 1e-12);

    CHECK_THROWS_AS(message_pass(p, Eigen::MatrixXd::Ones(3, 1), layer), InvalidInput);
    CHECK_THROWS_AS(message_pass(p, Eigen::MatrixXd::Ones(2, 2), layer), InvalidInput);
}

TEST_CASE("base_forward pooling") {
    for (auto pool : {SubgraphPool::mean, SubgraphPool::sum, SubgraphPool::center}) {
        const auto cfg = nested(2, 2, pool);
        const auto params = init_params(cfg, 1);
        const auto single = extract_rooted(path(1), 0, 2);
        const auto out = base_forward(single, params, cfg);
        CHECK(out.rep == out.node_reps.row(0).transpose());
    }

    const auto sub = extract_rooted(path(3), 1, 1);
    REQUIRE(sub.size() == 3);
    auto cfg = nested(1, 2, SubgraphPool::mean);
    const auto params = init_params(cfg, 9);
    const auto mean = base_forward(sub, params, cfg).rep;
    cfg.subgraph_pool = SubgraphPool::sum;
    const auto sum = base_forward(sub, params, cfg).rep;
    CHECK(rel_diff(sum, 3.0 * mean) <= 1e-12);
    cfg.subgraph_pool = SubgraphPool::center;
    const auto center = base_forward(sub, params, cfg);
    CHECK(center.rep == center.node_reps.row(0).transpose());
}

TEST_CASE("closed and open triangles separate under one layer") {
    const auto cfg = nested(1, 1);
    const auto closed = extract_rooted(builtin(Builtin::two_triangles), 0, 1);
    const auto open = extract_rooted(builtin(Builtin::hexagon), 0, 1);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto params = init_params(cfg, seed);
        CHECK(reps_distinguish(base_forward(closed, params, cfg).rep, base_forward(open, params, cfg).rep));
    }
}

TEST_CASE("plain vs nested on the two-triangle / hexagon pair") {
    const auto tt = builtin(Builtin::two_triangles), hex = builtin(Builtin::hexagon);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto pc = plain(3);
        const auto pp = init_params(pc, seed);
        CHECK(rel_diff(forward(tt, pp, pc).graph_rep, forward(hex, pp, pc).graph_rep) <= 1e-15);

        const auto nc = nested(1, 1);
        const auto np = init_params(nc, seed);
        CHECK(reps_distinguish(forward(tt, np, nc).graph_rep, forward(hex, np, nc).graph_rep));
    }
}

TEST_CASE("forward is permutation invariant (property)") {
    for (const auto& g : corpus()) {
        for (auto cfg : {nested(2, 3), nested(1, 2, SubgraphPool::center), plain(3)}) {
            cfg.de.use_spd = cfg.mode == Mode::nested;
            cfg.de.use_resistance = cfg.mode == Mode::nested;
            const auto params = init_params(cfg, 42);
            const auto ref = forward(g, params, cfg).graph_rep;
            for (std::uint64_t s = 0; s < 5; ++s) {
                const auto pg = permute_graph(g, Permutation::random(g.num_nodes(), s));
                CHECK(rel_diff(forward(pg, params, cfg).graph_rep, ref) <= 1e-9);
            }
        }
    }
}

TEST_CASE("isomorphic graphs are never separated (property)") {
    const auto cfg = nested(2, 2);
    const auto params = init_params(cfg, 8);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto a = random_gnp(8, 0.35, seed);
        const auto b = seed % 2 ? permute_graph(a, Permutation::random(8, seed)) : random_gnp(8, 0.35, seed + 100);
        if (brute_force_isomorphic(a, b))
            CHECK_FALSE(reps_distinguish(forward(a, params, cfg).graph_rep, forward(b, params, cfg).graph_rep, 1e-9));
    }
}

TEST_CASE("whole-component collapse") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto g = random_regular(20, 3, seed);
        REQUIRE(is_connected(g));
        const auto cfg = nested(diameter(g), 1);
        const auto emb = forward(g, init_params(cfg, seed), cfg);
        for (int v = 1; v < g.num_nodes(); ++v)
            CHECK(rel_diff(emb.node_reps.row(v).transpose(), emb.node_reps.row(0).transpose()) <= 1e-9);
    }
}

TEST_CASE("plain message passing is blind on regular graphs") {
    const auto cfg = plain(3);
    const auto params = init_params(cfg, 2);
    const auto a = forward(random_regular(24, 3, 1), params, cfg);
    const auto b = forward(random_regular(24, 3, 2), params, cfg);
    for (int v = 0; v < 24; ++v) {
        CHECK(rel_diff(a.node_reps.row(v).transpose(), b.node_reps.row(0).transpose()) <= 1e-9);
        CHECK(rel_diff(a.node_reps.row(v).transpose(), a.node_reps.row(0).transpose()) <= 1e-9);
    }
    CHECK_FALSE(reps_distinguish(a.graph_rep, b.graph_rep));
}

TEST_CASE("graph pooling sum equals n times mean") {
    for (const auto& g : corpus()) {
        auto cfg = nested(1, 2);
        const auto params = init_params(cfg, 4);
        cfg.graph_pool = GraphPool::mean;
        const auto mean = forward(g, params, cfg).graph_rep;
        cfg.graph_pool = GraphPool::sum;
        const auto sum = forward(g, params, cfg).graph_rep;
        CHECK(rel_diff(sum, g.num_nodes() * mean) <= 1e-12);
    }
}

TEST_CASE("forward is identical across worker counts") {
    const auto g = random_regular(60, 3, 3);
    const auto cfg = nested(2, 2);
    const auto params = init_params(cfg, 1);
    Eigen::MatrixXd one, four;
    {
        ScopedWorkerOverride w(1);
        one = forward(g, params, cfg).node_reps;
    }
    {
        ScopedWorkerOverride w(4);
        four = forward(g, params, cfg).node_reps;
    }
    CHECK(one == four);
}

TEST_CASE("forward rejects mismatched inputs") {
    const auto cfg = nested(1, 2);
    const auto params = init_params(cfg, 0);
    const auto ef = Graph::build(2, {{0, 1}}, std::nullopt, EdgeFeatureMap{{{0, 1}, {1.0}}});
    CHECK_THROWS_AS(forward(ef, params, cfg), Unsupported);
    const auto featured = Graph::build(2, {{0, 1}}, FeatureMatrix::Ones(2, 3));
    CHECK_THROWS_AS(forward(featured, params, cfg), InvalidInput);
    CHECK_NOTHROW(forward(featured, init_params(cfg, 0, 3), cfg));
    auto bad = cfg;
    bad.layers = 3;
    CHECK_THROWS_AS(forward(path(3), params, bad), InvalidInput);
    bad = cfg;
    bad.hidden_dim = 0;
    CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("reps_distinguish") {
    Eigen::VectorXd x(3);
    x << 1, 2, 3;
    CHECK_FALSE(reps_distinguish(x, x, 1e-3));
    CHECK(reps_distinguish(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Unit(3, 0), 1e-6));
    Eigen::VectorXd big = 1e8 * x, nudged = big;
    nudged[0] += 1.0;  // relative change ~3e-9
    CHECK_FALSE(reps_distinguish(big, nudged, 1e-6));
    CHECK_THROWS_AS(reps_distinguish(x, Eigen::VectorXd::Zero(2)), InvalidInput);
    CHECK_THROWS_AS(reps_distinguish(x, x, 0.0), InvalidInput);

    const auto cfg = plain(2);
    const auto params = init_params(cfg, 5);
    CHECK_FALSE(reps_distinguish(forward(random_regular(30, 3, 1), params, cfg).graph_rep,
                                 forward(random_regular(30, 3, 9), params, cfg).graph_rep));
}
