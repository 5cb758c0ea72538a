#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ngnn/engine.hpp"

namespace ngnn {

struct HeightBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// lower = 0.5 log n / log(r-1), upper = log n / log(r-1). Requires r >= 3, n >= 2.
HeightBounds theoretical_heights(int n, int r);

/// Regular-graph discrimination grid: per n, graphs_per_n random r-regular
/// graphs with constant features; per (n, h) cell one untrained nested GIN.
struct SimGrid {
    std::vector<int> n_values{10, 20, 40, 80, 160, 320, 640, 1280};
    std::vector<int> h_values{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    int r = 3;
    int graphs_per_n = 100;
    int layers = 1;
    int hidden_dim = 16;
    std::uint64_t seed = 0;
    double tol = kDefaultTolerance;

    void validate() const;
};

struct SimRow {
    int n = 0;
    int h = 0;
    double frac_indist_node_pairs = 0.0;
    double frac_indist_graph_pairs = 0.0;
    double h_lower = 0.0;
    double h_upper = 0.0;
    double seconds = 0.0;
};

struct ExperimentReport {
    SimGrid grid;
    std::vector<SimRow> rows;

    /// Header: n,h,frac_indist_node_pairs,frac_indist_graph_pairs,h_lower,h_upper,seconds.
    /// The seconds column is written as 0 unless include_timing is set, so
    /// that repeated runs produce identical files.
    std::string to_csv(bool include_timing = false) const;
    std::string meta_json() const;
    const SimRow* find(int n, int h) const;
};

/// The graphs sampled for one n of the grid (shared by all h).
std::vector<Graph> sample_regular_graphs(const SimGrid& grid, int n);

ExperimentReport simulate(const SimGrid& grid);

/// Unordered pairs among the rows of reps with reps_distinguish == false.
std::uint64_t count_indistinguishable_pairs(const Eigen::MatrixXd& reps, double tol);

struct BenchRow {
    int n = 0;
    int max_subgraph_nodes = 0;  // c
    int max_degree = 0;          // d
    std::uint64_t visited_nodes = 0;
    double seconds = 0.0;
};

struct BenchReport {
    int r = 0;
    int height = 0;
    int layers = 0;
    std::vector<BenchRow> rows;
    /// Least-squares slope of log(seconds) against log(n * c * d).
    double slope = 0.0;

    std::string to_csv() const;
};

/// Times a single-threaded nested forward per n (best of `repeats`).
BenchReport bench_scaling(const std::vector<int>& n_values, int r, int height, int layers,
                          std::uint64_t seed, int repeats = 3);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace ngnn
