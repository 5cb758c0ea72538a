#include "ngnn/graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ngnn/errors.hpp"
#include "ngnn/rng.hpp"

namespace ngnn {

namespace {

std::string edge_str(NodeId u, NodeId v) {
    return "(" + std::to_string(u) + ", " + std::to_string(v) + ")";
}

} // namespace

Graph Graph::build(int num_nodes, std::vector<Edge> edges,
                   std::optional<FeatureMatrix> node_features,
                   std::optional<EdgeFeatureMap> edge_features) {
    if (num_nodes < 0) throw InvalidInput("negative node count");
    for (auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= num_nodes || v >= num_nodes)
            throw InvalidInput("edge endpoint out of range: " + edge_str(u, v));
        if (u == v) throw InvalidInput("self-loop at node " + std::to_string(u));
        if (u > v) std::swap(u, v);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    if (node_features && node_features->rows() != num_nodes)
        throw InvalidInput("node feature matrix has " + std::to_string(node_features->rows()) +
                           " rows, expected " + std::to_string(num_nodes));

    if (edge_features) {
        EdgeFeatureMap normalized;
        std::optional<std::size_t> width;
        for (const auto& [e, f] : *edge_features) {
            Edge key{std::min(e.first, e.second), std::max(e.first, e.second)};
            if (!std::binary_search(edges.begin(), edges.end(), key))
                throw InvalidInput("edge feature for missing edge " + edge_str(e.first, e.second));
            if (width && *width != f.size()) throw InvalidInput("edge feature width mismatch");
            width = f.size();
            normalized[key] = f;
        }
        if (normalized.size() != edges.size())
            throw InvalidInput("edge features must cover every edge exactly once");
        edge_features = std::move(normalized);
    }

    Graph g;
    g.num_nodes_ = num_nodes;
    g.edges_ = std::move(edges);
    g.node_features_ = std::move(node_features);
    g.edge_features_ = std::move(edge_features);
    g.build_adjacency();
    return g;
}

Graph make_graph_trusted(int num_nodes, std::vector<Edge> sorted_edges,
                         std::optional<FeatureMatrix> node_features) {
    Graph g;
    g.num_nodes_ = num_nodes;
    g.edges_ = std::move(sorted_edges);
    g.node_features_ = std::move(node_features);
    g.build_adjacency();
    return g;
}

void Graph::build_adjacency() {
    offsets_.assign(num_nodes_ + 1, 0);
    for (const auto& [u, v] : edges_) {
        ++offsets_[u + 1];
        ++offsets_[v + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adjacency_.resize(2 * edges_.size());
    std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [u, v] : edges_) {
        adjacency_[cursor[u]++] = v;
        adjacency_[cursor[v]++] = u;
    }
    // Sorted lists; has_edge binary-searches them.
    for (int v = 0; v < num_nodes_; ++v)
        std::sort(adjacency_.begin() + offsets_[v], adjacency_.begin() + offsets_[v + 1]);
}

int Graph::max_degree() const {
    int best = 0;
    for (int v = 0; v < num_nodes_; ++v) best = std::max(best, degree(v));
    return best;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    if (u < 0 || v < 0 || u >= num_nodes_ || v >= num_nodes_) return false;
    const auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

bool operator==(const Graph& a, const Graph& b) {
    if (a.num_nodes_ != b.num_nodes_ || a.edges_ != b.edges_) return false;
    if (a.node_features_.has_value() != b.node_features_.has_value()) return false;
    if (a.node_features_ && (a.node_features_->cols() != b.node_features_->cols() ||
                             *a.node_features_ != *b.node_features_))
        return false;
    return a.edge_features_ == b.edge_features_;
}

Permutation::Permutation(std::vector<NodeId> mapping) : mapping_(std::move(mapping)) {
    std::vector<char> seen(mapping_.size(), 0);
    for (NodeId x : mapping_) {
        if (x < 0 || static_cast<std::size_t>(x) >= mapping_.size() || seen[x])
            throw InvalidInput("permutation is not a bijection");
        seen[x] = 1;
    }
}

Permutation Permutation::identity(int n) {
    std::vector<NodeId> m(n);
    std::iota(m.begin(), m.end(), 0);
    return Permutation(std::move(m));
}

Permutation Permutation::random(int n, std::uint64_t seed) {
    std::vector<NodeId> m(n);
    std::iota(m.begin(), m.end(), 0);
    Rng rng(seed);
    rng.shuffle(std::span<NodeId>(m));
    return Permutation(std::move(m));
}

Graph builtin(Builtin which) {
    switch (which) {
    case Builtin::two_triangles:
        return Graph::build(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}});
    case Builtin::hexagon:
        return cycle(6);
    }
    throw InvalidInput("unknown builtin");
}

Graph builtin(std::string_view name) {
    if (name == "two_triangles") return builtin(Builtin::two_triangles);
    if (name == "hexagon") return builtin(Builtin::hexagon);
    throw InvalidInput("unknown builtin graph: " + std::string(name));
}

Graph cycle(int k) {
    if (k < 3) throw InvalidInput("cycle needs at least 3 nodes");
    std::vector<Edge> edges;
    for (int i = 0; i < k; ++i) edges.emplace_back(i, (i + 1) % k);
    return Graph::build(k, std::move(edges));
}

std::pair<Graph, Graph> cycle_pair(int k) {
    if (k < 3) throw InvalidInput("cycle_pair requires k >= 3");
    std::vector<Edge> two;
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < k; ++i) two.emplace_back(c * k + i, c * k + (i + 1) % k);
    return {Graph::build(2 * k, std::move(two)), cycle(2 * k)};
}

Graph path(int n) {
    std::vector<Edge> edges;
    for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return Graph::build(n, std::move(edges));
}

Graph complete(int n) {
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return Graph::build(n, std::move(edges));
}

Graph random_regular(int n, int r, std::uint64_t seed) {
    if (n < 0 || r < 0) throw InvalidInput("random_regular: negative argument");
    if (r >= n && !(n == 0 && r == 0)) throw InvalidInput("random_regular requires r < n");
    if ((static_cast<long long>(n) * r) % 2 != 0) throw InvalidInput("random_regular requires n*r even");

    Rng rng(seed);
    std::vector<NodeId> points;
    points.reserve(static_cast<std::size_t>(n) * r);
    std::vector<Edge> edges;
    edges.reserve(points.capacity() / 2);
    for (;;) {
        points.clear();
        for (int v = 0; v < n; ++v)
            for (int j = 0; j < r; ++j) points.push_back(v);
        rng.shuffle(std::span<NodeId>(points));
        edges.clear();
        bool ok = true;
        for (std::size_t i = 0; i < points.size(); i += 2) {
            const NodeId u = points[i], v = points[i + 1];
            if (u == v) {
                ok = false;
                break;
            }
            edges.emplace_back(std::min(u, v), std::max(u, v));
        }
        if (!ok) continue;
        std::sort(edges.begin(), edges.end());
        if (std::adjacent_find(edges.begin(), edges.end()) != edges.end()) continue;
        return make_graph_trusted(n, std::move(edges));
    }
}

Graph random_gnp(int n, double p, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Edge> edges;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (rng.unit() < p) edges.emplace_back(u, v);
    return make_graph_trusted(n, std::move(edges));
}

Graph permute_graph(const Graph& g, const Permutation& p) {
    if (p.size() != g.num_nodes()) throw InvalidInput("permutation length does not match graph size");
    std::vector<Edge> edges;
    edges.reserve(g.num_edges());
    for (const auto& [u, v] : g.edges()) edges.emplace_back(p[u], p[v]);

    std::optional<FeatureMatrix> nf;
    if (g.node_features()) {
        nf = FeatureMatrix(g.num_nodes(), g.node_feature_width());
        for (int i = 0; i < g.num_nodes(); ++i) nf->row(p[i]) = g.node_features()->row(i);
    }
    std::optional<EdgeFeatureMap> ef;
    if (g.edge_features()) {
        ef.emplace();
        for (const auto& [e, f] : *g.edge_features()) {
            const NodeId a = p[e.first], b = p[e.second];
            (*ef)[{std::min(a, b), std::max(a, b)}] = f;
        }
    }
    return Graph::build(g.num_nodes(), std::move(edges), std::move(nf), std::move(ef));
}

namespace {

struct IsoSearch {
    const Graph& a;
    const Graph& b;
    std::vector<NodeId> order;  // nodes of a in assignment order
    std::vector<NodeId> map;    // a -> b, -1 unassigned
    std::vector<char> used;     // b nodes taken

    bool extend(std::size_t depth) {
        if (depth == order.size()) return true;
        const NodeId x = order[depth];
        for (NodeId y = 0; y < b.num_nodes(); ++y) {
            if (used[y] || a.degree(x) != b.degree(y)) continue;
            bool consistent = true;
            for (std::size_t d = 0; d < depth && consistent; ++d) {
                const NodeId px = order[d];
                consistent = a.has_edge(x, px) == b.has_edge(y, map[px]);
            }
            if (!consistent) continue;
            map[x] = y;
            used[y] = 1;
            if (extend(depth + 1)) return true;
            used[y] = 0;
            map[x] = -1;
        }
        return false;
    }
};

} // namespace

bool brute_force_isomorphic(const Graph& a, const Graph& b) {
    if (a.num_nodes() != b.num_nodes()) return false;
    if (a.num_nodes() > 10) throw InvalidInput("brute_force_isomorphic is limited to 10 nodes");
    if (a.num_edges() != b.num_edges()) return false;
    std::vector<int> da, db;
    for (int v = 0; v < a.num_nodes(); ++v) {
        da.push_back(a.degree(v));
        db.push_back(b.degree(v));
    }
    std::sort(da.begin(), da.end());
    std::sort(db.begin(), db.end());
    if (da != db) return false;

    IsoSearch s{a, b, {}, std::vector<NodeId>(a.num_nodes(), -1),
                std::vector<char>(b.num_nodes(), 0)};
    s.order.resize(a.num_nodes());
    std::iota(s.order.begin(), s.order.end(), 0);
    return s.extend(0);
}

std::vector<int> bfs_distances(const Graph& g, NodeId source) {
    if (source < 0 || source >= g.num_nodes()) throw InvalidInput("bfs source out of range");
    std::vector<int> dist(g.num_nodes(), -1);
    std::vector<NodeId> frontier{source};
    dist[source] = 0;
    for (std::size_t head = 0; head < frontier.size(); ++head) {
        const NodeId u = frontier[head];
        for (NodeId w : g.neighbors(u))
            if (dist[w] < 0) {
                dist[w] = dist[u] + 1;
                frontier.push_back(w);
            }
    }
    return dist;
}

int diameter(const Graph& g) {
    int best = 0;
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        const auto d = bfs_distances(g, v);
        best = std::max(best, *std::max_element(d.begin(), d.end()));
    }
    return best;
}

bool is_connected(const Graph& g) {
    if (g.num_nodes() == 0) return true;
    const auto d = bfs_distances(g, 0);
    return std::find(d.begin(), d.end(), -1) == d.end();
}

namespace {

class LineReader {
public:
    explicit LineReader(std::string_view text) : text_(text) {}

    // Next line split into whitespace-separated tokens; nullopt at end.
    std::optional<std::vector<std::string_view>> next() {
        if (pos_ >= text_.size()) return std::nullopt;
        auto end = text_.find('\n', pos_);
        if (end == std::string_view::npos) end = text_.size();
        std::string_view line = text_.substr(pos_, end - pos_);
        pos_ = end + 1;
        ++line_no_;
        std::vector<std::string_view> tokens;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
            std::size_t j = i;
            while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
            if (j > i) tokens.push_back(line.substr(i, j - i));
            i = j;
        }
        return tokens;
    }

    // Skips blank lines.
    std::optional<std::vector<std::string_view>> next_nonempty() {
        for (;;) {
            auto t = next();
            if (!t || !t->empty()) return t;
        }
    }

    int line_no() const { return line_no_; }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    int line_no_ = 0;
};

template <typename T>
T parse_number(std::string_view tok, int line_no) {
    T value{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size())
        throw InvalidInput("line " + std::to_string(line_no) + ": malformed number '" +
                           std::string(tok) + "'");
    return value;
}

void append_double(std::string& out, double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, ptr);
}

} // namespace

Graph parse_graph(std::string_view text) {
    LineReader reader(text);
    const auto header = reader.next_nonempty();
    if (!header || header->size() != 2) throw InvalidInput("malformed header: expected 'n m'");
    const int n = parse_number<int>((*header)[0], reader.line_no());
    const long m = parse_number<long>((*header)[1], reader.line_no());
    if (n < 0 || m < 0) throw InvalidInput("malformed header: negative count");

    std::vector<Edge> edges;
    edges.reserve(m);
    for (long i = 0; i < m; ++i) {
        const auto t = reader.next();
        if (!t || t->size() != 2)
            throw InvalidInput("line " + std::to_string(reader.line_no()) + ": expected 'u v'");
        const int u = parse_number<int>((*t)[0], reader.line_no());
        const int v = parse_number<int>((*t)[1], reader.line_no());
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw InvalidInput("line " + std::to_string(reader.line_no()) +
                               ": edge endpoint out of range " + edge_str(u, v));
        edges.emplace_back(u, v);
    }

    std::optional<FeatureMatrix> features;
    if (const auto t = reader.next_nonempty()) {
        if (t->size() != 2 || (*t)[0] != "F")
            throw InvalidInput("line " + std::to_string(reader.line_no()) + ": expected 'F f'");
        const int f = parse_number<int>((*t)[1], reader.line_no());
        if (f < 0) throw InvalidInput("negative feature width");
        features = FeatureMatrix(n, f);
        for (int row = 0; row < n; ++row) {
            const auto r = reader.next();
            if (!r || static_cast<int>(r->size()) != f)
                throw InvalidInput("line " + std::to_string(reader.line_no()) +
                                   ": feature width mismatch, expected " + std::to_string(f));
            for (int c = 0; c < f; ++c)
                (*features)(row, c) = parse_number<double>((*r)[c], reader.line_no());
        }
        if (reader.next_nonempty()) throw InvalidInput("trailing content after feature block");
    }
    return Graph::build(n, std::move(edges), std::move(features));
}

std::string serialize_graph(const Graph& g) {
    if (g.edge_features())
        throw Unsupported("edge features cannot be written in the edge-list format");
    std::string out = std::to_string(g.num_nodes()) + " " + std::to_string(g.num_edges()) + "\n";
    for (const auto& [u, v] : g.edges()) {
        out += std::to_string(u);
        out += ' ';
        out += std::to_string(v);
        out += '\n';
    }
    if (const auto& f = g.node_features()) {
        out += "F " + std::to_string(f->cols()) + "\n";
        for (int r = 0; r < f->rows(); ++r) {
            for (int c = 0; c < f->cols(); ++c) {
                if (c) out += ' ';
                append_double(out, (*f)(r, c));
            }
            out += '\n';
        }
    }
    return out;
}

Graph read_graph_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_graph(ss.str());
}

void write_graph_file(const std::string& path, const Graph& g) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize_graph(g);
}

} // namespace ngnn
