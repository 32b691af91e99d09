#ifndef BISQ_GRAPH_HPP
#define BISQ_GRAPH_HPP

#include <bisq/rng.hpp>

#include <bit>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bisq {

using Vertex = std::uint32_t;

// Unordered vertex pair, stored normalized (u < v).
struct Edge {
    Vertex u = 0;
    Vertex v = 0;

    Edge() = default;
    Edge(Vertex a, Vertex b) : u(a < b ? a : b), v(a < b ? b : a) {}

    auto operator<=>(const Edge&) const = default;
};

// Fixed-width bit set; one per vertex row so neighborhood intersections run
// at word speed even on the n ~ 4096 hard instances.
class Bitset {
  public:
    Bitset() = default;
    explicit Bitset(std::size_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    void set(std::size_t i) { words_[i >> 6] |= (1ull << (i & 63)); }
    void reset(std::size_t i) { words_[i >> 6] &= ~(1ull << (i & 63)); }
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    std::size_t size() const { return nbits_; }
    std::size_t count() const {
        std::size_t c = 0;
        for (std::uint64_t w : words_) c += std::popcount(w);
        return c;
    }

    bool intersects(const Bitset& other) const {
        std::size_t k = std::min(words_.size(), other.words_.size());
        for (std::size_t i = 0; i < k; ++i)
            if (words_[i] & other.words_[i]) return true;
        return false;
    }

    std::size_t intersect_count(const Bitset& other) const {
        std::size_t k = std::min(words_.size(), other.words_.size());
        std::size_t c = 0;
        for (std::size_t i = 0; i < k; ++i) c += std::popcount(words_[i] & other.words_[i]);
        return c;
    }

    std::span<const std::uint64_t> words() const { return words_; }

  private:
    std::size_t nbits_ = 0;
    std::vector<std::uint64_t> words_;
};

// Immutable simple undirected graph over vertices 0..n-1. Adjacency is a
// symmetric bit matrix; isolated vertices are allowed.
class Graph {
  public:
    Graph() = default;
    // edges may contain duplicates (under either orientation); self-loops or
    // out-of-range endpoints are rejected.
    static Graph build(std::size_t n, std::span<const Edge> edges);

    std::size_t vertex_count() const { return n_; }
    std::size_t edge_count() const { return m_; }

    bool has_edge(Vertex u, Vertex v) const { return rows_[u].test(v); }
    const Bitset& row(Vertex u) const { return rows_[u]; }
    std::size_t degree(Vertex u) const { return degree_[u]; }

    std::vector<Vertex> neighbors(Vertex u) const;
    std::vector<Edge> edges() const;

  private:
    friend class GraphBuilder;

    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<Bitset> rows_;
    std::vector<std::uint32_t> degree_;
};

Graph build_graph(std::size_t n, std::span<const Edge> edges);

// Incremental construction without materializing an edge list; used by the
// large generators.
class GraphBuilder {
  public:
    explicit GraphBuilder(std::size_t n);
    void add_edge(Vertex u, Vertex v); // validates; duplicates are no-ops
    Graph take();

  private:
    std::size_t n_;
    std::vector<Bitset> rows_;
};

// Erdos-Renyi G(n,p); each pair included independently, deterministic per seed.
Graph gen_er(std::size_t n, double p, Seed seed);

// Deterministic small generators used by the test corpus and the CLI.
Graph gen_complete(std::size_t n);
Graph gen_complete_bipartite(std::size_t a, std::size_t b);
Graph gen_star(std::size_t leaves);
Graph gen_path(std::size_t n);

// Exact triangle count: per edge |common neighbors|, summed and divided by 3.
std::uint64_t count_triangles_exact(const Graph& g);

// N(x) ∩ N(y); x == y is rejected.
std::vector<Vertex> common_neighbors(const Graph& g, Vertex x, Vertex y);

// Edge-list file format: header "n m", then one "u v" per line, 0-indexed.
// Reader rejects self-loops, duplicates and out-of-range endpoints.
void write_edge_list(const Graph& g, std::ostream& out);
void write_edge_list_file(const Graph& g, const std::string& path);
Graph read_edge_list(std::istream& in);
Graph read_edge_list_file(const std::string& path);

} // namespace bisq

#endif
