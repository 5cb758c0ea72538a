#include "ngnn/cli.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "ngnn/engine.hpp"
#include "ngnn/errors.hpp"
#include "ngnn/experiments.hpp"
#include "ngnn/graph.hpp"
#include "ngnn/subgraph.hpp"
#include "ngnn/training.hpp"
#include "ngnn/wl.hpp"

namespace ngnn {

namespace {

std::string fmt(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

std::string hex(std::uint64_t h) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// Writes to path, or to out when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << text;
}

DEConfig parse_de(const std::string& spec) {
    DEConfig de;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item == "spd") de.use_spd = true;
        else if (item == "resistance") de.use_resistance = true;
        else if (item == "none" || item.empty()) continue;
        else throw InvalidInput("unknown distance encoding: " + item);
    }
    return de;
}

struct ModelOptions {
    std::string mode = "nested";
    int height = 1;
    int layers = 2;
    int hidden = 32;
    std::string pool = "mean";
    std::string graph_pool = "mean";
    std::string de = "none";

    void add_to(CLI::App* app) {
        app->add_option("--mode", mode, "nested | plain")->check(CLI::IsMember({"nested", "plain"}));
        app->add_option("--height", height, "rooted subgraph height h")->check(CLI::NonNegativeNumber);
        app->add_option("--layers", layers, "message passing layers T")->check(CLI::PositiveNumber);
        app->add_option("--hidden", hidden, "hidden width")->check(CLI::PositiveNumber);
        app->add_option("--pool", pool, "subgraph pooling: mean | sum | center")
            ->check(CLI::IsMember({"mean", "sum", "center"}));
        app->add_option("--graph-pool", graph_pool, "graph pooling: mean | sum")
            ->check(CLI::IsMember({"mean", "sum"}));
        app->add_option("--de", de, "distance encoding: none | spd | resistance | spd,resistance");
    }

    NGNNConfig config() const {
        NGNNConfig cfg;
        cfg.mode = parse_mode(mode);
        cfg.height = height;
        cfg.layers = layers;
        cfg.hidden_dim = hidden;
        cfg.subgraph_pool = parse_subgraph_pool(pool);
        cfg.graph_pool = parse_graph_pool(graph_pool);
        cfg.de = parse_de(de);
        cfg.validate();
        return cfg;
    }
};

std::string row_csv(const Eigen::VectorXd& v) {
    std::string s;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += fmt(v[i]);
    }
    return s;
}

} // namespace

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    auto to_int = [&](const std::string& s) {
        int v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
            throw InvalidInput("malformed integer list: " + text);
        return v;
    };
    while (std::getline(ss, item, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(to_int(item));
            continue;
        }
        const int lo = to_int(item.substr(0, dots)), hi = to_int(item.substr(dots + 2));
        if (hi < lo) throw InvalidInput("empty range: " + item);
        for (int v = lo; v <= hi; ++v) out.push_back(v);
    }
    if (out.empty()) throw InvalidInput("empty integer list");
    return out;
}

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nested GNN and 1-WL toolkit", "ngnn"};
    app.require_subcommand(1);

    // wl
    std::string wl_a, wl_b;
    int wl_iters = 0;
    auto* wl = app.add_subcommand("wl", "1-WL comparison of two edge-list graphs");
    wl->add_option("--a", wl_a, "first graph file")->required();
    wl->add_option("--b", wl_b, "second graph file")->required();
    wl->add_option("--iters", wl_iters, "refinement rounds (default: until stable)")->check(CLI::PositiveNumber);

    // extract
    std::string ex_graph, ex_de = "none", ex_out;
    int ex_root = 0, ex_height = 1;
    auto* extract = app.add_subcommand("extract", "rooted subgraph with distance encoding");
    extract->add_option("--graph", ex_graph, "graph file")->required();
    extract->add_option("--root", ex_root, "root node")->required();
    extract->add_option("--height", ex_height, "height h")->required()->check(CLI::NonNegativeNumber);
    extract->add_option("--de", ex_de, "spd,resistance");
    extract->add_option("--out", ex_out, "output file (default stdout)");

    // forward
    std::string fw_graph, fw_out;
    std::uint64_t fw_seed = 0;
    bool fw_nodes = false;
    ModelOptions fw_model;
    auto* fwd = app.add_subcommand("forward", "untrained model forward pass");
    fwd->add_option("--graph", fw_graph, "graph file")->required();
    fw_model.add_to(fwd);
    fwd->add_option("--seed", fw_seed, "parameter seed");
    fwd->add_flag("--nodes", fw_nodes, "also print per-node representations");
    fwd->add_option("--out", fw_out, "output file (default stdout)");

    // train
    std::string tr_task = "exp-analog", tr_ks = "3..10", tr_out;
    int tr_copies = 5;
    Hyper tr_hyper;
    tr_hyper.lr = 0.01;
    tr_hyper.epochs = 100;
    tr_hyper.batch_size = 8;
    ModelOptions tr_model;
    auto* trn = app.add_subcommand("train", "train on a synthetic task");
    trn->add_option("--task", tr_task, "exp-analog | triangles")->check(CLI::IsMember({"exp-analog", "triangles"}));
    trn->add_option("--ks", tr_ks, "cycle lengths, e.g. 3..10");
    trn->add_option("--copies", tr_copies, "relabeled copies per pair")->check(CLI::PositiveNumber);
    tr_model.add_to(trn);
    trn->add_option("--lr", tr_hyper.lr, "learning rate")->check(CLI::NonNegativeNumber);
    trn->add_option("--epochs", tr_hyper.epochs, "epochs")->check(CLI::PositiveNumber);
    trn->add_option("--batch-size", tr_hyper.batch_size, "mini-batch size")->check(CLI::PositiveNumber);
    trn->add_option("--seed", tr_hyper.seed, "seed");
    trn->add_option("--out", tr_out, "report JSON path (default stdout)");

    // simulate
    SimGrid grid;
    std::string sim_ns, sim_hs, sim_out;
    bool sim_timing = false;
    auto* sim = app.add_subcommand("simulate", "regular-graph discrimination grid");
    sim->add_option("--r", grid.r, "degree")->check(CLI::PositiveNumber);
    sim->add_option("--ns", sim_ns, "node counts, e.g. 10,20,40");
    sim->add_option("--hs", sim_hs, "heights, e.g. 1..10");
    sim->add_option("--graphs", grid.graphs_per_n, "graphs per n")->check(CLI::PositiveNumber);
    sim->add_option("--layers", grid.layers, "message passing layers")->check(CLI::PositiveNumber);
    sim->add_option("--hidden", grid.hidden_dim, "hidden width")->check(CLI::PositiveNumber);
    sim->add_option("--tol", grid.tol, "relative distinguishability tolerance")->check(CLI::PositiveNumber);
    sim->add_option("--seed", grid.seed, "seed");
    sim->add_option("--out", sim_out, "CSV path; metadata goes to <out>.meta.json")->required();
    sim->add_flag("--timing", sim_timing, "fill the seconds column with wall-clock times");

    // bench
    std::string bn_ns = "100,200,400,800,1600", bn_out;
    int bn_r = 3, bn_height = 3, bn_layers = 4, bn_repeats = 3;
    std::uint64_t bn_seed = 0;
    auto* bench = app.add_subcommand("bench", "forward-pass scaling benchmark");
    bench->add_option("--ns", bn_ns, "node counts");
    bench->add_option("--r", bn_r, "degree")->check(CLI::PositiveNumber);
    bench->add_option("--height", bn_height, "height h")->check(CLI::NonNegativeNumber);
    bench->add_option("--layers", bn_layers, "layers T")->check(CLI::PositiveNumber);
    bench->add_option("--repeats", bn_repeats, "timed repeats per n")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bn_seed, "seed");
    bench->add_option("--out", bn_out, "CSV path (default stdout)");

    // generate
    std::string gen_builtin, gen_out;
    int gen_n = 0, gen_r = 3, gen_cycle_pair = 0, gen_which = 0;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("generate", "write a generated graph in edge-list format");
    auto* gen_b = gen->add_option("--builtin", gen_builtin, "two_triangles | hexagon");
    auto* gen_reg = gen->add_option("--regular", gen_n, "random regular graph with this many nodes");
    auto* gen_cp = gen->add_option("--cycle-pair", gen_cycle_pair, "k for the cycle pair");
    gen_b->excludes(gen_reg)->excludes(gen_cp);
    gen_reg->excludes(gen_cp);
    gen->add_option("--degree", gen_r, "degree for --regular");
    gen->add_option("--which", gen_which, "0 = two k-cycles, 1 = one 2k-cycle")->check(CLI::Range(0, 1));
    gen->add_option("--seed", gen_seed, "seed for --regular");
    gen->add_option("--out", gen_out, "output file (default stdout)");

    std::vector<std::string> argv_store{"ngnn"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 2;
    }

    try {
        if (wl->parsed()) {
            const Graph a = read_graph_file(wl_a), b = read_graph_file(wl_b);
            std::uint64_t ha, hb;
            if (wl_iters > 0) {
                ha = wl_hash(a, wl_iters);
                hb = wl_hash(b, wl_iters);
            } else {
                const int iters = std::max(a.num_nodes(), b.num_nodes()) + 1;
                ha = wl_hash(a, iters);
                hb = wl_hash(b, iters);
            }
            const bool differ = a.num_nodes() != b.num_nodes() || ha != hb;
            out << (differ ? "distinguishable" : "indistinguishable") << "\n";
            out << "hash_a " << hex(ha) << "\nhash_b " << hex(hb) << "\n";
        } else if (extract->parsed()) {
            const Graph g = read_graph_file(ex_graph);
            const auto sub = extract_rooted(g, ex_root, ex_height);
            const DEConfig de = parse_de(ex_de);
            const Eigen::MatrixXd enc = distance_encoding(sub, de);
            std::string text = serialize_graph(sub.graph);
            text += "local,origin,dist";
            for (Eigen::Index c = 0; c < enc.cols(); ++c) text += ",de" + std::to_string(c);
            text += "\n";
            for (int i = 0; i < sub.size(); ++i) {
                text += std::to_string(i) + "," + std::to_string(sub.origin_nodes[i]) + "," +
                        std::to_string(sub.dist_to_root[i]) + "," + row_csv(enc.row(i).transpose()) + "\n";
            }
            emit(ex_out, text, out);
        } else if (fwd->parsed()) {
            const Graph g = read_graph_file(fw_graph);
            const NGNNConfig cfg = fw_model.config();
            const auto params = init_params(cfg, fw_seed, g.node_feature_width());
            const auto emb = forward(g, params, cfg);
            std::string text = row_csv(emb.graph_rep) + "\n";
            if (fw_nodes)
                for (int v = 0; v < g.num_nodes(); ++v)
                    text += std::to_string(v) + "," + row_csv(emb.node_reps.row(v).transpose()) + "\n";
            emit(fw_out, text, out);
        } else if (trn->parsed()) {
            const NGNNConfig cfg = tr_model.config();
            const Task task = tr_task == "exp-analog" ? make_exp_analog(parse_int_list(tr_ks), tr_copies, tr_hyper.seed)
                                                      : make_triangle_count_task(50, 12, 0.3, tr_hyper.seed);
            const auto result = train(task, cfg, tr_hyper);
            emit(tr_out, result.report.to_json(), out);
            if (!tr_out.empty())
                err << result.report.metric_name << " " << fmt(result.report.test_metric) << "\n";
            if (result.report.diverged) {
                err << "training diverged\n";
                return 1;
            }
        } else if (sim->parsed()) {
            if (!sim_ns.empty()) grid.n_values = parse_int_list(sim_ns);
            if (!sim_hs.empty()) grid.h_values = parse_int_list(sim_hs);
            const auto report = simulate(grid);
            emit(sim_out, report.to_csv(sim_timing), out);
            emit(sim_out + ".meta.json", report.meta_json(), out);
            for (const auto& r : report.rows)
                err << "n=" << r.n << " h=" << r.h << " node=" << fmt(r.frac_indist_node_pairs)
                    << " graph=" << fmt(r.frac_indist_graph_pairs) << " " << fmt(r.seconds) << "s\n";
        } else if (bench->parsed()) {
            const auto report = bench_scaling(parse_int_list(bn_ns), bn_r, bn_height, bn_layers, bn_seed, bn_repeats);
            emit(bn_out, report.to_csv(), out);
        } else if (gen->parsed()) {
            Graph g;
            if (!gen_builtin.empty()) g = builtin(gen_builtin);
            else if (gen_n > 0) g = random_regular(gen_n, gen_r, gen_seed);
            else if (gen_cycle_pair > 0) {
                auto pair = cycle_pair(gen_cycle_pair);
                g = gen_which == 0 ? pair.first : pair.second;
            } else {
                err << "error: generate needs --builtin, --regular or --cycle-pair\n" << gen->help();
                return 2;
            }
            emit(gen_out, serialize_graph(g), out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace ngnn
