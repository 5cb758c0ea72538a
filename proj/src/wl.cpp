#include "ngnn/wl.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <numeric>

#include "ngnn/errors.hpp"
#include "ngnn/rng.hpp"

namespace ngnn {

namespace {

std::uint64_t combine(std::uint64_t h, std::uint64_t x) {
    return mix64(h ^ (x + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)));
}

// Ranks items by a strict-weak-order comparator; equal items share a rank.
template <typename Less, typename Equal>
std::vector<int> rank_by(int n, Less less, Equal equal) {
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), less);
    std::vector<int> rank(n);
    int next = -1;
    for (int i = 0; i < n; ++i) {
        if (i == 0 || !equal(order[i - 1], order[i])) ++next;
        rank[order[i]] = next;
    }
    return rank;
}

ColorMap initial_colors(const Graph& g) {
    const int n = g.num_nodes();
    ColorMap cm;
    cm.colors.assign(n, 0);
    cm.labels.assign(n, combine(0, 0x1f2e3d4c5b6a7988ULL));
    const auto& f = g.node_features();
    if (!f || f->cols() == 0) return cm;

    const int w = static_cast<int>(f->cols());
    std::vector<std::vector<std::uint64_t>> rows(n, std::vector<std::uint64_t>(w));
    for (int v = 0; v < n; ++v)
        for (int c = 0; c < w; ++c) rows[v][c] = std::bit_cast<std::uint64_t>((*f)(v, c));
    cm.colors = rank_by(
        n, [&](int a, int b) { return rows[a] < rows[b]; },
        [&](int a, int b) { return rows[a] == rows[b]; });
    for (int v = 0; v < n; ++v) {
        std::uint64_t h = combine(0, static_cast<std::uint64_t>(w));
        for (auto bits : rows[v]) h = combine(h, bits);
        cm.labels[v] = h;
    }
    return cm;
}

ColorMap refine_once(const Graph& g, const ColorMap& prev) {
    const int n = g.num_nodes();
    std::vector<std::vector<int>> signature(n);
    ColorMap next;
    next.labels.resize(n);
    for (int v = 0; v < n; ++v) {
        auto& sig = signature[v];
        sig.push_back(prev.colors[v]);
        std::vector<std::uint64_t> nb_labels;
        for (NodeId u : g.neighbors(v)) {
            sig.push_back(prev.colors[u]);
            nb_labels.push_back(prev.labels[u]);
        }
        std::sort(sig.begin() + 1, sig.end());
        std::sort(nb_labels.begin(), nb_labels.end());
        std::uint64_t h = combine(prev.labels[v], nb_labels.size());
        for (auto l : nb_labels) h = combine(h, l);
        next.labels[v] = h;
    }
    next.colors = rank_by(
        n, [&](int a, int b) { return signature[a] < signature[b]; },
        [&](int a, int b) { return signature[a] == signature[b]; });
    return next;
}

} // namespace

int ColorMap::num_colors() const {
    return colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;
}

RefinementHistory wl_refine(const Graph& g, int max_iters) {
    if (max_iters < 0) throw InvalidInput("max_iters must be >= 0");
    RefinementHistory hist;
    hist.rounds.push_back(initial_colors(g));
    for (int t = 0; t < max_iters; ++t) {
        ColorMap next = refine_once(g, hist.rounds.back());
        const bool stable = next.num_colors() == hist.rounds.back().num_colors();
        // The non-refining round is kept: its labels still carry the class
        // adjacency counts that separate graphs with equal stable partitions.
        hist.rounds.push_back(std::move(next));
        if (stable) {
            hist.converged = true;
            break;
        }
    }
    hist.stabilized_at = static_cast<int>(hist.rounds.size()) - (hist.converged ? 2 : 1);
    return hist;
}

std::uint64_t wl_hash(const Graph& g, int iters) {
    if (iters < 1) throw InvalidInput("wl_hash requires iters >= 1");
    const auto hist = wl_refine(g, iters);
    // Partitions count as equal only with equal histograms in every kept round.
    std::uint64_t h = combine(0, static_cast<std::uint64_t>(g.num_nodes()));
    h = combine(h, hist.rounds.size());
    for (const auto& round : hist.rounds) {
        auto labels = round.labels;
        std::sort(labels.begin(), labels.end());
        h = combine(h, 0xabcdefULL);
        for (auto l : labels) h = combine(h, l);
    }
    return h;
}

bool wl_distinguish(const Graph& a, const Graph& b) {
    if (a.num_nodes() != b.num_nodes()) return true;
    const int iters = std::max(a.num_nodes(), b.num_nodes()) + 1;
    return wl_hash(a, iters) != wl_hash(b, iters);
}

} // namespace ngnn
