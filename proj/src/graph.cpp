#include <bisq/graph.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bisq {

Graph Graph::build(std::size_t n, std::span<const Edge> edges) {
    Graph g;
    g.n_ = n;
    g.rows_.assign(n, Bitset(n));
    g.degree_.assign(n, 0);
    for (const Edge& e : edges) {
        if (e.u == e.v)
            throw std::invalid_argument("graph: self-loop at vertex " + std::to_string(e.u));
        if (e.u >= n || e.v >= n)
            throw std::invalid_argument("graph: endpoint " + std::to_string(std::max(e.u, e.v)) +
                                        " out of range for n=" + std::to_string(n));
        if (g.rows_[e.u].test(e.v)) continue; // dedup under orientation
        g.rows_[e.u].set(e.v);
        g.rows_[e.v].set(e.u);
        ++g.degree_[e.u];
        ++g.degree_[e.v];
        ++g.m_;
    }
    return g;
}

GraphBuilder::GraphBuilder(std::size_t n) : n_(n), rows_(n, Bitset(n)) {}

void GraphBuilder::add_edge(Vertex u, Vertex v) {
    if (u == v) throw std::invalid_argument("graph builder: self-loop at vertex " + std::to_string(u));
    if (u >= n_ || v >= n_) throw std::invalid_argument("graph builder: endpoint out of range");
    rows_[u].set(v);
    rows_[v].set(u);
}

Graph GraphBuilder::take() {
    Graph g;
    g.n_ = n_;
    g.rows_ = std::move(rows_);
    g.degree_.resize(n_);
    std::size_t twice_m = 0;
    for (std::size_t v = 0; v < n_; ++v) {
        g.degree_[v] = static_cast<std::uint32_t>(g.rows_[v].count());
        twice_m += g.degree_[v];
    }
    g.m_ = twice_m / 2;
    rows_.clear();
    return g;
}

std::vector<Vertex> Graph::neighbors(Vertex u) const {
    std::vector<Vertex> out;
    out.reserve(degree_[u]);
    const auto words = rows_[u].words();
    for (std::size_t wi = 0; wi < words.size(); ++wi) {
        std::uint64_t w = words[wi];
        while (w) {
            out.push_back(static_cast<Vertex>(wi * 64 + std::countr_zero(w)));
            w &= w - 1;
        }
    }
    return out;
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(m_);
    for (Vertex u = 0; u < n_; ++u)
        for (Vertex v : neighbors(u))
            if (v > u) out.emplace_back(u, v);
    return out;
}

Graph build_graph(std::size_t n, std::span<const Edge> edges) { return Graph::build(n, edges); }

Graph gen_er(std::size_t n, double p, Seed seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("gen_er: p must be in [0,1]");
    Rng rng(seed);
    std::vector<Edge> edges;
    for (Vertex u = 0; u + 1 < n; ++u)
        for (Vertex v = u + 1; v < n; ++v)
            if (rng.bernoulli(p)) edges.emplace_back(u, v);
    return Graph::build(n, edges);
}

Graph gen_complete(std::size_t n) {
    std::vector<Edge> edges;
    for (Vertex u = 0; u + 1 < n; ++u)
        for (Vertex v = u + 1; v < n; ++v) edges.emplace_back(u, v);
    return Graph::build(n, edges);
}

Graph gen_complete_bipartite(std::size_t a, std::size_t b) {
    std::vector<Edge> edges;
    for (Vertex u = 0; u < a; ++u)
        for (Vertex v = 0; v < b; ++v) edges.emplace_back(u, static_cast<Vertex>(a + v));
    return Graph::build(a + b, edges);
}

Graph gen_star(std::size_t leaves) {
    std::vector<Edge> edges;
    for (Vertex v = 1; v <= leaves; ++v) edges.emplace_back(0, v);
    return Graph::build(leaves + 1, edges);
}

Graph gen_path(std::size_t n) {
    std::vector<Edge> edges;
    for (Vertex v = 0; v + 1 < n; ++v) edges.emplace_back(v, v + 1);
    return Graph::build(n, edges);
}

std::uint64_t count_triangles_exact(const Graph& g) {
    std::uint64_t incidences = 0; // sum over edges of |common neighborhood|
    for (Vertex u = 0; u < g.vertex_count(); ++u)
        for (Vertex v : g.neighbors(u)) {
            if (v <= u) continue;
            incidences += g.row(u).intersect_count(g.row(v));
        }
    return incidences / 3;
}

std::vector<Vertex> common_neighbors(const Graph& g, Vertex x, Vertex y) {
    if (x == y) throw std::invalid_argument("common_neighbors: x == y");
    std::vector<Vertex> out;
    const auto wx = g.row(x).words();
    const auto wy = g.row(y).words();
    for (std::size_t wi = 0; wi < wx.size(); ++wi) {
        std::uint64_t w = wx[wi] & wy[wi];
        while (w) {
            out.push_back(static_cast<Vertex>(wi * 64 + std::countr_zero(w)));
            w &= w - 1;
        }
    }
    return out;
}

void write_edge_list(const Graph& g, std::ostream& out) {
    out << g.vertex_count() << ' ' << g.edge_count() << '\n';
    for (Vertex u = 0; u < g.vertex_count(); ++u)
        for (Vertex v : g.neighbors(u))
            if (v > u) out << u << ' ' << v << '\n';
}

void write_edge_list_file(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_edge_list(g, out);
}

Graph read_edge_list(std::istream& in) {
    std::size_t n = 0, m = 0;
    if (!(in >> n >> m)) throw std::runtime_error("edge list: malformed header");
    std::vector<Edge> edges;
    edges.reserve(m);
    std::vector<Bitset> adj(n, Bitset(n));
    for (std::size_t i = 0; i < m; ++i) {
        std::uint64_t u = 0, v = 0;
        if (!(in >> u >> v)) throw std::runtime_error("edge list: expected " + std::to_string(m) +
                                                      " edges, got " + std::to_string(i));
        if (u == v) throw std::runtime_error("edge list: self-loop at line " + std::to_string(i + 2));
        if (u >= n || v >= n) throw std::runtime_error("edge list: endpoint out of range at line " +
                                                       std::to_string(i + 2));
        if (adj[u].test(static_cast<std::size_t>(v)))
            throw std::runtime_error("edge list: duplicate edge at line " + std::to_string(i + 2));
        adj[u].set(static_cast<std::size_t>(v));
        adj[v].set(static_cast<std::size_t>(u));
        edges.emplace_back(static_cast<Vertex>(u), static_cast<Vertex>(v));
    }
    return Graph::build(n, edges);
}

Graph read_edge_list_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return read_edge_list(in);
}

} // namespace bisq
