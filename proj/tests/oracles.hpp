#pragma once

// Test-only reference implementations. They deliberately avoid the library
// code paths they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "ngnn/graph.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline Matrix laplacian(const ngnn::Graph& g) {
    const int n = g.num_nodes();
    Matrix lap(n, std::vector<double>(n, 0.0));
    for (const auto& [u, v] : g.edges()) {
        lap[u][u] += 1;
        lap[v][v] += 1;
        lap[u][v] -= 1;
        lap[v][u] -= 1;
    }
    return lap;
}

/// Gauss-Jordan inverse with partial pivoting.
inline Matrix invert(Matrix a) {
    const int n = static_cast<int>(a.size());
    Matrix inv(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n; ++i) inv[i][i] = 1.0;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        std::swap(a[col], a[pivot]);
        std::swap(inv[col], inv[pivot]);
        const double p = a[col][col];
        for (int c = 0; c < n; ++c) {
            a[col][c] /= p;
            inv[col][c] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c < n; ++c) {
                a[r][c] -= f * a[col][c];
                inv[r][c] -= f * inv[col][c];
            }
        }
    }
    return inv;
}

/// Laplacian pseudoinverse of a connected graph via L+ = (L + J/n)^-1 - J/n.
inline Matrix laplacian_pinv_connected(const ngnn::Graph& g) {
    const int n = g.num_nodes();
    Matrix a = laplacian(g);
    for (auto& row : a)
        for (auto& x : row) x += 1.0 / n;
    Matrix inv = invert(a);
    for (auto& row : inv)
        for (auto& x : row) x -= 1.0 / n;
    return inv;
}

inline double resistance(const Matrix& pinv, int a, int b) { return pinv[a][a] + pinv[b][b] - 2 * pinv[a][b]; }

/// All-pairs hop distances by Floyd-Warshall; -1 for unreachable.
inline std::vector<std::vector<int>> all_pairs_distances(const ngnn::Graph& g) {
    const int n = g.num_nodes();
    const int inf = 1 << 20;
    std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
    for (int v = 0; v < n; ++v) d[v][v] = 0;
    for (const auto& [u, v] : g.edges()) d[u][v] = d[v][u] = 1;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (auto& row : d)
        for (auto& x : row)
            if (x >= inf) x = -1;
    return d;
}

/// Adjacency of a graph as a bitmask over the upper triangle.
inline std::uint64_t edge_mask(int n, const std::vector<int>& perm, const ngnn::Graph& g) {
    std::uint64_t mask = 0;
    auto index = [n](int u, int v) {
        if (u > v) std::swap(u, v);
        return u * n - u * (u + 1) / 2 + (v - u - 1);
    };
    for (const auto& [u, v] : g.edges()) mask |= std::uint64_t{1} << index(perm[u], perm[v]);
    return mask;
}

/// Canonical form: minimum edge mask over every relabeling.
inline std::uint64_t canonical_form(const ngnn::Graph& g) {
    const int n = g.num_nodes();
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::uint64_t best = UINT64_MAX;
    do {
        best = std::min(best, edge_mask(n, perm, g));
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// One representative of every isomorphism class of simple graphs on n nodes.
inline std::vector<ngnn::Graph> all_nonisomorphic_graphs(int n) {
    std::vector<std::pair<int, int>> slots;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) slots.emplace_back(u, v);
    std::map<std::uint64_t, ngnn::Graph> classes;
    for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << slots.size()); ++bits) {
        std::vector<ngnn::Edge> edges;
        for (std::size_t i = 0; i < slots.size(); ++i)
            if (bits >> i & 1) edges.push_back(slots[i]);
        auto g = ngnn::Graph::build(n, edges);
        classes.emplace(canonical_form(g), std::move(g));
    }
    std::vector<ngnn::Graph> out;
    for (auto& [key, g] : classes) out.push_back(std::move(g));
    return out;
}

/// Naive 1-WL on the disjoint union with string signatures; two graphs are
/// distinguished when their color histograms differ at some round.
inline bool naive_wl_distinguish(const ngnn::Graph& a, const ngnn::Graph& b) {
    if (a.num_nodes() != b.num_nodes()) return true;
    const int na = a.num_nodes(), n = na + b.num_nodes();
    std::vector<std::vector<int>> adj(n);
    for (const auto& [u, v] : a.edges()) {
        adj[u].push_back(v);
        adj[v].push_back(u);
    }
    for (const auto& [u, v] : b.edges()) {
        adj[na + u].push_back(na + v);
        adj[na + v].push_back(na + u);
    }
    std::vector<int> color(n, 0);
    for (int round = 0; round <= n; ++round) {
        std::map<int, int> ha, hb;
        for (int v = 0; v < na; ++v) ++ha[color[v]];
        for (int v = na; v < n; ++v) ++hb[color[v]];
        if (ha != hb) return true;
        std::map<std::string, int> ids;
        std::vector<int> next(n);
        for (int v = 0; v < n; ++v) {
            std::vector<int> nb;
            for (int u : adj[v]) nb.push_back(color[u]);
            std::sort(nb.begin(), nb.end());
            std::string sig = std::to_string(color[v]) + "|";
            for (int c : nb) sig += std::to_string(c) + ",";
            next[v] = ids.emplace(sig, static_cast<int>(ids.size())).first->second;
        }
        color = next;
    }
    return false;
}

} // namespace oracle
