#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ngnn/engine.hpp"
#include "ngnn/errors.hpp"
#include "ngnn/experiments.hpp"
#include "ngnn/graph.hpp"
#include "ngnn/subgraph.hpp"
#include "ngnn/training.hpp"
#include "ngnn/wl.hpp"

namespace py = pybind11;
using namespace ngnn;

namespace {

Graph make_graph(int n, const std::vector<Edge>& edges, std::optional<FeatureMatrix> features) {
    return Graph::build(n, edges, std::move(features));
}

} // namespace

PYBIND11_MODULE(_ngnn, m) {
    m.doc() = "Nested GNN and 1-WL toolkit";

    py::register_exception<Unsupported>(m, "Unsupported", PyExc_NotImplementedError);
    py::register_exception<Divergence>(m, "Divergence", PyExc_ArithmeticError);

    py::class_<Graph>(m, "Graph")
        .def(py::init(&make_graph), py::arg("num_nodes"), py::arg("edges"), py::arg("features") = std::nullopt)
        .def_property_readonly("num_nodes", &Graph::num_nodes)
        .def_property_readonly("num_edges", &Graph::num_edges)
        .def_property_readonly("edges", &Graph::edges)
        .def_property_readonly("features", &Graph::node_features)
        .def("neighbors", [](const Graph& g, NodeId v) {
            if (v < 0 || v >= g.num_nodes()) throw InvalidInput("node out of range");
            const auto s = g.neighbors(v);
            return std::vector<NodeId>(s.begin(), s.end());
        })
        .def("degree", [](const Graph& g, NodeId v) {
            if (v < 0 || v >= g.num_nodes()) throw InvalidInput("node out of range");
            return g.degree(v);
        })
        .def("has_edge", &Graph::has_edge)
        .def("__eq__", [](const Graph& a, const Graph& b) { return a == b; })
        .def("__repr__", [](const Graph& g) {
            return "Graph(num_nodes=" + std::to_string(g.num_nodes()) + ", num_edges=" + std::to_string(g.num_edges()) + ")";
        });

    m.def("builtin", py::overload_cast<std::string_view>(&builtin), py::arg("name"));
    m.def("cycle", &cycle, py::arg("k"));
    m.def("cycle_pair", &cycle_pair, py::arg("k"));
    m.def("path", &path, py::arg("n"));
    m.def("complete", &complete, py::arg("n"));
    m.def("random_regular", &random_regular, py::arg("n"), py::arg("r"), py::arg("seed"));
    m.def("random_gnp", &random_gnp, py::arg("n"), py::arg("p"), py::arg("seed"));
    m.def("permute_graph", [](const Graph& g, std::vector<NodeId> mapping) {
        return permute_graph(g, Permutation(std::move(mapping)));
    }, py::arg("graph"), py::arg("mapping"));
    m.def("random_permutation", [](int n, std::uint64_t seed) { return Permutation::random(n, seed).mapping(); },
          py::arg("n"), py::arg("seed"));
    m.def("brute_force_isomorphic", &brute_force_isomorphic);
    m.def("bfs_distances", &bfs_distances, py::arg("graph"), py::arg("source"));
    m.def("diameter", &diameter);
    m.def("is_connected", &is_connected);
    m.def("parse_graph", &parse_graph, py::arg("text"));
    m.def("serialize_graph", &serialize_graph);

    m.def("wl_colors", [](const Graph& g, int max_iters) {
        std::vector<std::vector<int>> out;
        for (const auto& round : wl_refine(g, max_iters).rounds) out.push_back(round.colors);
        return out;
    }, py::arg("graph"), py::arg("max_iters"));
    m.def("wl_hash", &wl_hash, py::arg("graph"), py::arg("iters"));
    m.def("wl_distinguish", &wl_distinguish);

    py::class_<RootedSubgraph>(m, "RootedSubgraph")
        .def_readonly("origin_nodes", &RootedSubgraph::origin_nodes)
        .def_readonly("graph", &RootedSubgraph::graph)
        .def_readonly("dist_to_root", &RootedSubgraph::dist_to_root)
        .def_readonly("height", &RootedSubgraph::height)
        .def("__len__", &RootedSubgraph::size);

    py::class_<DEConfig>(m, "DEConfig")
        .def(py::init([](bool spd, bool resistance) {
            DEConfig de;
            de.use_spd = spd;
            de.use_resistance = resistance;
            return de;
        }), py::arg("spd") = false, py::arg("resistance") = false)
        .def_readwrite("use_spd", &DEConfig::use_spd)
        .def_readwrite("use_resistance", &DEConfig::use_resistance);

    m.def("extract_rooted", &extract_rooted, py::arg("graph"), py::arg("root"), py::arg("height"));
    m.def("resistance_vector", &resistance_vector);
    m.def("distance_encoding", &distance_encoding, py::arg("subgraph"), py::arg("de"));
    m.def("edge_configuration", [](const Graph& g, NodeId v, int k) { return edge_configuration(g, v, k).counts; },
          py::arg("graph"), py::arg("v"), py::arg("k"));

    py::class_<NGNNConfig>(m, "NGNNConfig")
        .def(py::init([](const std::string& mode, int height, int layers, int hidden_dim, const std::string& pool,
                         const std::string& graph_pool, const DEConfig& de) {
            NGNNConfig cfg;
            cfg.mode = parse_mode(mode);
            cfg.height = height;
            cfg.layers = layers;
            cfg.hidden_dim = hidden_dim;
            cfg.subgraph_pool = parse_subgraph_pool(pool);
            cfg.graph_pool = parse_graph_pool(graph_pool);
            cfg.de = de;
            cfg.validate();
            return cfg;
        }), py::arg("mode") = "nested", py::arg("height") = 1, py::arg("layers") = 2, py::arg("hidden_dim") = 32,
            py::arg("pool") = "mean", py::arg("graph_pool") = "mean", py::arg("de") = DEConfig{})
        .def_property_readonly("mode", [](const NGNNConfig& c) { return to_string(c.mode); })
        .def_readonly("height", &NGNNConfig::height)
        .def_readonly("layers", &NGNNConfig::layers)
        .def_readonly("hidden_dim", &NGNNConfig::hidden_dim)
        .def_property_readonly("pool", [](const NGNNConfig& c) { return to_string(c.subgraph_pool); })
        .def_property_readonly("graph_pool", [](const NGNNConfig& c) { return to_string(c.graph_pool); })
        .def("input_width", &NGNNConfig::input_width, py::arg("base_width") = 0);

    py::class_<ModelParams>(m, "ModelParams")
        .def_property_readonly("num_layers", [](const ModelParams& p) { return p.layers.size(); })
        .def_property_readonly("num_scalars", &ModelParams::num_scalars)
        .def("flatten", &ModelParams::flatten)
        .def("assign_flat", &ModelParams::assign_flat);

    m.def("init_params", &init_params, py::arg("config"), py::arg("seed"), py::arg("base_width") = 0);
    m.def("forward", [](const Graph& g, const ModelParams& params, const NGNNConfig& cfg) {
        auto emb = forward(g, params, cfg);
        return py::make_tuple(std::move(emb.graph_rep), std::move(emb.node_reps));
    }, py::arg("graph"), py::arg("params"), py::arg("config"),
       "Returns (graph_rep, node_reps).");
    m.def("reps_distinguish", &reps_distinguish, py::arg("a"), py::arg("b"), py::arg("tol") = kDefaultTolerance);

    py::class_<Task>(m, "Task")
        .def_property_readonly("graphs", [](const Task& t) {
            std::vector<Graph> out;
            for (const auto& s : t.dataset) out.push_back(s.graph);
            return out;
        })
        .def_property_readonly("labels", [](const Task& t) {
            std::vector<double> out;
            for (const auto& s : t.dataset) out.push_back(s.label);
            return out;
        })
        .def_readonly("train", &Task::train)
        .def_readonly("test", &Task::test);

    m.def("make_exp_analog", &make_exp_analog, py::arg("ks"), py::arg("copies"), py::arg("seed") = 0);
    m.def("make_triangle_count_task", &make_triangle_count_task, py::arg("num_graphs"), py::arg("n"), py::arg("p"),
          py::arg("seed") = 0);
    m.def("train", [](const Task& task, const NGNNConfig& cfg, double lr, int epochs, int batch_size,
                      std::uint64_t seed) {
        Hyper h;
        h.lr = lr;
        h.epochs = epochs;
        h.batch_size = batch_size;
        h.seed = seed;
        return py::module_::import("json").attr("loads")(train(task, cfg, h).report.to_json());
    }, py::arg("task"), py::arg("config"), py::arg("lr") = 0.01, py::arg("epochs") = 100, py::arg("batch_size") = 8,
       py::arg("seed") = 0, "Trains a model and returns the report as a dict.");

    m.def("theoretical_heights", [](int n, int r) {
        const auto h = theoretical_heights(n, r);
        return py::make_tuple(h.lower, h.upper);
    }, py::arg("n"), py::arg("r"));
    m.def("simulate", [](std::vector<int> ns, std::vector<int> hs, int r, int graphs_per_n, int layers,
                         int hidden_dim, std::uint64_t seed, double tol) {
        SimGrid grid;
        grid.n_values = std::move(ns);
        grid.h_values = std::move(hs);
        grid.r = r;
        grid.graphs_per_n = graphs_per_n;
        grid.layers = layers;
        grid.hidden_dim = hidden_dim;
        grid.seed = seed;
        grid.tol = tol;
        py::list rows;
        for (const auto& row : simulate(grid).rows) {
            py::dict d;
            d["n"] = row.n;
            d["h"] = row.h;
            d["frac_indist_node_pairs"] = row.frac_indist_node_pairs;
            d["frac_indist_graph_pairs"] = row.frac_indist_graph_pairs;
            d["h_lower"] = row.h_lower;
            d["h_upper"] = row.h_upper;
            rows.append(d);
        }
        return rows;
    }, py::arg("ns"), py::arg("hs"), py::arg("r") = 3, py::arg("graphs_per_n") = 100, py::arg("layers") = 1,
       py::arg("hidden_dim") = 16, py::arg("seed") = 0, py::arg("tol") = kDefaultTolerance);
}
