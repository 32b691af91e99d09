#ifndef BISQ_PRIMITIVES_HPP
#define BISQ_PRIMITIVES_HPP

#include <bisq/oracle.hpp>
#include <bisq/rng.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

namespace bisq {

struct ApproxParams {
    double epsilon = 0.1; // relative accuracy, in (0,1)
    double delta = 0.01;  // failure probability, in (0,1)
    Seed seed;
};

void validate(const ApproxParams& ap);

// smallest t with 2^t >= k (k >= 1)
std::uint32_t ceil_log2(std::size_t k);

// One root-to-leaf branching walk over the bipartite halving tree of (A,B).
// Both children of the current node are queried; the walk multiplies the
// branch count in and descends into a uniformly chosen nonempty child.
// The leaf is always an edge; 2^branch_levels is an unbiased estimate of
// |E(G[A,B])| and the leaf is reached with probability exactly
// 2^-branch_levels.
struct WalkTrace {
    Edge leaf_pair{};
    std::uint32_t branch_levels = 0; // probability = 2^-branch_levels
    std::uint32_t depth_bound = 0;   // D = ceil_lg|A| + ceil_lg|B| >= branch_levels
    std::uint64_t queries_used = 0;
    bool ok = false; // false iff (A,B) had no crossing edge after all

    double probability() const { return std::ldexp(1.0, -static_cast<int>(branch_levels)); }
    double estimate() const { return std::ldexp(1.0, static_cast<int>(branch_levels)); }
};

// Requires bis(a,b) == true established by the caller (one query).
WalkTrace walk_once(BisSurface& o, VSpan a, VSpan b, Rng& rng);

// Exactly E(G[A,B]), deterministically, by recursive halving of the larger
// side. Query count <= 4 * max(1,|E|) * (ceil_lg|A| + ceil_lg|B| + 1).
std::vector<Edge> enum_edges_bipartite(BisSurface& o, VSpan a, VSpan b);

// Exactly E(G[X]) via X = X1 ⊎ X2, recursing on both halves plus the
// crossing edges. |x| >= 2.
std::vector<Edge> enum_edges_induced(BisSurface& o, VSpan x);

// (1±ε)-approximation of |E(G[A,B])| with probability >= 1-δ; zero and small
// counts are reported exactly (enumeration fallback).
double estimate_edges(BisSurface& o, VSpan a, VSpan b, const ApproxParams& ap);

// Exactly uniform sample from E(G[A,B]) (subsumes the (1±ε)-approximate
// contract for every ε). Caller must have established E(G[A,B]) != ∅.
Edge sample_edge(BisSurface& o, VSpan a, VSpan b, const ApproxParams& ap);

// N(v) ∩ Z exactly; v must not lie in z.
std::vector<Vertex> neighbors_of(BisSurface& o, Vertex v, VSpan z);

// (1±ε)-approximation of |N(v) ∩ Z|.
double approx_degree(BisSurface& o, Vertex v, VSpan z, const ApproxParams& ap);

// Exactly uniform element of N(v) ∩ Z; the set must be nonempty.
Vertex random_neighbor(BisSurface& o, Vertex v, VSpan z, const ApproxParams& ap);

// Per-run store of facts already paid for through the ledger: full
// neighborhoods, the edges induced among a vertex's neighbors, and (once
// some caller needs it) the whole edge set. Everything here is exact and
// deterministic, so answering from the cache instead of re-querying leaves
// every estimator's output distribution unchanged - it only removes
// repeated queries within one run. Never shared across runs.
class KnowledgeBase {
  public:
    explicit KnowledgeBase(BisSurface& o)
        : o_(&o), nbrs_(o.vertex_count()), nbr_known_(o.vertex_count(), false),
          induced_(o.vertex_count()), induced_known_(o.vertex_count(), false) {}

    std::size_t vertex_count() const { return nbr_known_.size(); }

    const std::vector<Vertex>& neighbors(Vertex v);
    std::uint64_t degree(Vertex v) { return neighbors(v).size(); }

    // E(G[N(v)]): one edge per triangle through v's neighborhood pairings
    const std::vector<Edge>& induced_neighbor_edges(Vertex v);

    // Whole edge set; enumerates on first use.
    const std::vector<Edge>& all_edges();
    bool has_all_edges() const { return all_known_; }

  private:
    // Once the whole edge set is known, neighborhoods and induced edges are
    // derived locally instead of queried.
    const Bitset& adjacency_row(Vertex v);

    BisSurface* o_;
    std::vector<std::vector<Vertex>> nbrs_;
    std::vector<bool> nbr_known_;
    std::vector<std::vector<Edge>> induced_;
    std::vector<bool> induced_known_;
    std::vector<Edge> all_edges_;
    std::vector<Bitset> adj_;
    bool all_known_ = false;

  public:
    // cumulative queries spent on rejected/accepted sampling walks by the
    // samplers sharing this knowledge base; drives their enumeration switch
    std::uint64_t walk_spend = 0;
};

// (1±ε)-approximation of |E(G)|. Each walk runs over a fresh uniformly
// random vertex bipartition: every edge crosses with probability exactly
// 1/2, so twice the crossing-count estimate is unbiased for m. Small graphs
// fall back to exact whole-graph enumeration.
double estimate_edges_global(BisSurface& o, const ApproxParams& ap, KnowledgeBase* kb = nullptr);

// Exactly uniform sampler over E(G). Per draw: a fresh random bipartition,
// one walk, and acceptance with probability estimate/2^D - the acceptance
// event has probability proportional to the number of crossing edges, which
// makes the output distribution exactly uniform over E(G) by vertex
// exchangeability. When the expected rejection cost exceeds the cost of
// enumerating the graph outright, the sampler enumerates once and serves
// draws from the learned edge list.
class GlobalEdgeSampler {
  public:
    // m_hint: rough edge-count estimate used only for cost decisions;
    // expected_draws: how many draws the caller plans (cost decisions only).
    // A knowledge base, when given, supplies or receives the enumerated edge
    // list so repeated samplers in one run pay for it once.
    GlobalEdgeSampler(BisSurface& o, double m_hint, std::uint64_t expected_draws, Rng rng,
                      KnowledgeBase* kb = nullptr);

    // Caller guarantees the graph has at least one edge.
    Edge draw();

  private:
    const std::vector<Edge>& enumerate_all();
    void add_walk_spend(std::uint64_t q);
    std::uint64_t walk_spend() const;

    BisSurface* o_;
    KnowledgeBase* kb_;
    Rng rng_;
    std::vector<Vertex> part_a_, part_b_;
    std::vector<Edge> own_edges_;
    const std::vector<Edge>* edges_ = nullptr;
    std::uint64_t reject_cap_ = 64;
    std::uint64_t own_walk_spend_ = 0;
    double enum_switch_cost_ = 1e18;
    bool enumerate_upfront_ = false;
};

} // namespace bisq

#endif
