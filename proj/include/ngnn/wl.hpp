#pragma once

#include <cstdint>
#include <vector>

#include "ngnn/graph.hpp"

namespace ngnn {

/// Node colors of one refinement round, canonicalized to 0..k-1.
struct ColorMap {
    std::vector<int> colors;
    /// Graph-independent 64-bit label per node: a digest of the node's full
    /// refinement signature, comparable across graphs.
    std::vector<std::uint64_t> labels;

    int num_colors() const;
};

struct RefinementHistory {
    /// rounds[0] is the initial coloring. When converged, the last entry is
    /// the first round that did not increase the color count.
    std::vector<ColorMap> rounds;
    /// Last round whose color count increased (0 if none did).
    int stabilized_at = 0;
    bool converged = false;
};

/// 1-WL color refinement. Round 0 colors nodes by their feature rows
/// (bit-exact); featureless graphs start with one color. Each later round
/// ranks the sorted (color, sorted neighbor colors) signatures. Stops once
/// the color count stops increasing or after max_iters rounds.
RefinementHistory wl_refine(const Graph& g, int max_iters);

/// Digest of the per-round label histograms over the rounds wl_refine keeps
/// (at most iters refinements, ending one round past stabilization).
/// Isomorphic graphs always hash equal; distinct 64-bit digests can collide.
std::uint64_t wl_hash(const Graph& g, int iters);

/// wl_hash comparison at stabilization. true implies non-isomorphic.
bool wl_distinguish(const Graph& a, const Graph& b);

} // namespace ngnn
