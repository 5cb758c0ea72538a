#include "ngnn/experiments.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <charconv>
#include <cmath>
#include <numeric>

#include "json.hpp"

#include "ngnn/errors.hpp"
#include "ngnn/parallel.hpp"
#include "ngnn/rng.hpp"
#include "ngnn/subgraph.hpp"

namespace ngnn {

namespace {

std::string fmt(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

constexpr std::uint64_t kGraphStream = 0x67726170ULL;
constexpr std::uint64_t kParamStream = 0x70617261ULL;

} // namespace

HeightBounds theoretical_heights(int n, int r) {
    if (r < 3) throw InvalidInput("theoretical_heights requires r >= 3");
    if (n < 2) throw InvalidInput("theoretical_heights requires n >= 2");
    const double ratio = std::log(static_cast<double>(n)) / std::log(static_cast<double>(r - 1));
    return {0.5 * ratio, ratio};
}

void SimGrid::validate() const {
    if (n_values.empty() || h_values.empty()) throw InvalidInput("grid needs at least one n and one h");
    if (r < 1 || graphs_per_n < 2 || layers < 1 || hidden_dim < 1 || !(tol > 0))
        throw InvalidInput("grid parameters must be positive and graphs_per_n >= 2");
    for (int n : n_values) {
        if (n < 1) throw InvalidInput("n must be positive");
        if ((static_cast<long long>(n) * r) % 2 != 0)
            throw InvalidInput("n*r must be even (n=" + std::to_string(n) + ")");
        if (r >= n) throw InvalidInput("r must be < n (n=" + std::to_string(n) + ")");
    }
    for (int h : h_values)
        if (h < 1) throw InvalidInput("h must be positive");
}

std::string ExperimentReport::to_csv(bool include_timing) const {
    std::string out = "n,h,frac_indist_node_pairs,frac_indist_graph_pairs,h_lower,h_upper,seconds\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n) + "," + std::to_string(r.h) + "," + fmt(r.frac_indist_node_pairs) + "," +
               fmt(r.frac_indist_graph_pairs) + "," + fmt(r.h_lower) + "," + fmt(r.h_upper) + "," +
               fmt(include_timing ? r.seconds : 0.0) + "\n";
    }
    return out;
}

std::string ExperimentReport::meta_json() const {
    nlohmann::json j;
    j["n_values"] = grid.n_values;
    j["h_values"] = grid.h_values;
    j["r"] = grid.r;
    j["graphs_per_n"] = grid.graphs_per_n;
    j["layers"] = grid.layers;
    j["hidden_dim"] = grid.hidden_dim;
    j["seed"] = grid.seed;
    j["tol"] = grid.tol;
    j["subgraph_pool"] = "mean";
    j["graph_pool"] = "mean";
    j["node_features"] = "constant_one";
    j["distance_encoding"] = false;
    j["rows"] = rows.size();
    return j.dump(2) + "\n";
}

const SimRow* ExperimentReport::find(int n, int h) const {
    for (const auto& r : rows)
        if (r.n == n && r.h == h) return &r;
    return nullptr;
}

std::vector<Graph> sample_regular_graphs(const SimGrid& grid, int n) {
    std::vector<Graph> graphs;
    graphs.reserve(grid.graphs_per_n);
    for (int i = 0; i < grid.graphs_per_n; ++i)
        graphs.push_back(random_regular(
            n, grid.r, derive_seed(grid.seed ^ kGraphStream, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(i))));
    return graphs;
}

std::uint64_t count_indistinguishable_pairs(const Eigen::MatrixXd& reps, double tol) {
    const auto rows = static_cast<std::size_t>(reps.rows());
    const auto dim = reps.cols();
    if (rows < 2) return 0;

    // Collapse bit-identical rows, then compare distinct rows within a
    // window on the first coordinate: |a0 - b0| <= ||a - b|| bounds the
    // search because the threshold never exceeds tol * max(1, max norm).
    auto bits = [&](std::size_t i, Eigen::Index c) { return std::bit_cast<std::uint64_t>(reps(i, c)); };
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            const double x = reps(a, c), y = reps(b, c);
            if (x != y) return x < y;
            if (bits(a, c) != bits(b, c)) return bits(a, c) < bits(b, c);
        }
        return false;
    });
    std::vector<std::size_t> unique_rows;
    std::vector<std::uint64_t> counts;
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t r = order[i];
        bool same = !unique_rows.empty();
        if (same)
            for (Eigen::Index c = 0; c < dim && same; ++c) same = bits(r, c) == bits(unique_rows.back(), c);
        if (same) {
            ++counts.back();
        } else {
            unique_rows.push_back(r);
            counts.push_back(1);
        }
    }

    std::uint64_t total = 0;
    double max_norm = 1.0;
    for (std::size_t u = 0; u < unique_rows.size(); ++u) {
        total += counts[u] * (counts[u] - 1) / 2;
        max_norm = std::max(max_norm, reps.row(unique_rows[u]).norm());
    }
    // unique_rows are sorted by first coordinate.
    const double window = tol * max_norm;
    for (std::size_t a = 0; a < unique_rows.size(); ++a) {
        const Eigen::VectorXd va = reps.row(unique_rows[a]).transpose();
        for (std::size_t b = a + 1; b < unique_rows.size(); ++b) {
            if (reps(unique_rows[b], 0) - va[0] > window) break;
            if (!reps_distinguish(va, reps.row(unique_rows[b]).transpose(), tol)) total += counts[a] * counts[b];
        }
    }
    return total;
}

ExperimentReport simulate(const SimGrid& grid) {
    grid.validate();
    ExperimentReport report;
    report.grid = grid;

    NGNNConfig cfg;
    cfg.mode = Mode::nested;
    cfg.layers = grid.layers;
    cfg.hidden_dim = grid.hidden_dim;
    cfg.subgraph_pool = SubgraphPool::mean;
    cfg.graph_pool = GraphPool::mean;
    cfg.de = DEConfig{};

    for (int n : grid.n_values) {
        const auto graphs = sample_regular_graphs(grid, n);
        const auto bounds = grid.r >= 3 && n >= 2 ? theoretical_heights(n, grid.r) : HeightBounds{};
        const std::size_t g_count = graphs.size();
        for (int h : grid.h_values) {
            const auto start = std::chrono::steady_clock::now();
            cfg.height = h;
            const auto params = init_params(
                cfg, derive_seed(grid.seed ^ kParamStream, static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(h)));

            Eigen::MatrixXd all_nodes(static_cast<Eigen::Index>(g_count) * n, grid.hidden_dim);
            std::vector<Eigen::VectorXd> graph_reps(g_count);
            std::uint64_t within = 0;
            for (std::size_t i = 0; i < g_count; ++i) {
                const auto emb = forward(graphs[i], params, cfg);
                all_nodes.middleRows(static_cast<Eigen::Index>(i) * n, n) = emb.node_reps;
                graph_reps[i] = emb.graph_rep;
                within += count_indistinguishable_pairs(emb.node_reps, grid.tol);
            }
            const std::uint64_t cross = count_indistinguishable_pairs(all_nodes, grid.tol) - within;

            std::uint64_t graph_pairs_indist = 0;
            for (std::size_t a = 0; a < g_count; ++a)
                for (std::size_t b = a + 1; b < g_count; ++b)
                    graph_pairs_indist += !reps_distinguish(graph_reps[a], graph_reps[b], grid.tol);

            SimRow row;
            row.n = n;
            row.h = h;
            const double graph_pairs = g_count * (g_count - 1) / 2.0;
            const double node_pairs = graph_pairs * static_cast<double>(n) * n;
            row.frac_indist_node_pairs = node_pairs > 0 ? static_cast<double>(cross) / node_pairs : 0.0;
            row.frac_indist_graph_pairs = graph_pairs > 0 ? static_cast<double>(graph_pairs_indist) / graph_pairs : 0.0;
            row.h_lower = bounds.lower;
            row.h_upper = bounds.upper;
            row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            report.rows.push_back(row);
        }
    }
    return report;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InvalidInput("fit_slope needs two or more points");
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw InvalidInput("fit_slope: x values are all equal");
    return sxy / sxx;
}

std::string BenchReport::to_csv() const {
    std::string out = "n,c,d,visited_nodes,seconds\n";
    for (const auto& r : rows)
        out += std::to_string(r.n) + "," + std::to_string(r.max_subgraph_nodes) + "," + std::to_string(r.max_degree) +
               "," + std::to_string(r.visited_nodes) + "," + fmt(r.seconds) + "\n";
    out += "# slope," + fmt(slope) + "\n";
    return out;
}

BenchReport bench_scaling(const std::vector<int>& n_values, int r, int height, int layers, std::uint64_t seed,
                          int repeats) {
    if (repeats < 1) throw InvalidInput("repeats must be >= 1");
    if (n_values.size() < 2) throw InvalidInput("bench needs at least two n values");
    BenchReport report;
    report.r = r;
    report.height = height;
    report.layers = layers;

    NGNNConfig cfg;
    cfg.height = height;
    cfg.layers = layers;
    cfg.mode = Mode::nested;
    const auto params = init_params(cfg, derive_seed(seed, kParamStream));

    const ScopedWorkerOverride single_thread(1);
    std::vector<double> xs, ys;
    for (int n : n_values) {
        const Graph g = random_regular(n, r, derive_seed(seed ^ kGraphStream, static_cast<std::uint64_t>(n)));
        BenchRow row;
        row.n = n;
        row.max_degree = g.max_degree();
        SubgraphExtractor ex(g);
        for (NodeId v = 0; v < n; ++v) {
            const int c = ex.extract(v, height).size();
            row.max_subgraph_nodes = std::max(row.max_subgraph_nodes, c);
            row.visited_nodes += static_cast<std::uint64_t>(c);
        }
        double best = INFINITY;
        for (int rep = 0; rep < repeats; ++rep) {
            const auto start = std::chrono::steady_clock::now();
            const auto emb = forward(g, params, cfg);
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (!emb.graph_rep.allFinite()) throw std::runtime_error("non-finite forward output");
            best = std::min(best, s);
        }
        row.seconds = best;
        report.rows.push_back(row);
        xs.push_back(std::log(static_cast<double>(n) * row.max_subgraph_nodes * std::max(1, row.max_degree)));
        ys.push_back(std::log(best));
    }
    if (xs.size() >= 2) report.slope = fit_slope(xs, ys);
    return report;
}

} // namespace ngnn
