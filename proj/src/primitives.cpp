#include <bisq/primitives.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace bisq {

void validate(const ApproxParams& ap) {
    if (!(ap.epsilon > 0.0 && ap.epsilon < 1.0))
        throw std::invalid_argument("approx params: epsilon must be in (0,1)");
    if (!(ap.delta > 0.0 && ap.delta < 1.0))
        throw std::invalid_argument("approx params: delta must be in (0,1)");
}

std::uint32_t ceil_log2(std::size_t k) {
    std::uint32_t t = 0;
    while ((std::size_t{1} << t) < k) ++t;
    return t;
}

namespace {

// First-half/second-half split by element count; both halves nonempty for
// size >= 2. Elements are id-sorted, so this is the vertex-id midpoint of
// the set.
std::pair<VSpan, VSpan> halves(VSpan s) {
    std::size_t h = (s.size() + 1) / 2;
    return {s.first(h), s.subspan(h)};
}

struct EnumLimit {
    std::size_t cap = std::numeric_limits<std::size_t>::max();
    bool aborted = false;
};

void enum_bip_rec(BisSurface& o, VSpan a, VSpan b, std::vector<Edge>& out, EnumLimit& lim) {
    if (lim.aborted) return;
    if (!o.bis(a, b)) return;
    if (a.size() == 1 && b.size() == 1) {
        out.emplace_back(a[0], b[0]);
        if (out.size() >= lim.cap) lim.aborted = true;
        return;
    }
    bool split_a = a.size() >= b.size();
    auto [h1, h2] = halves(split_a ? a : b);
    if (split_a) {
        enum_bip_rec(o, h1, b, out, lim);
        enum_bip_rec(o, h2, b, out, lim);
    } else {
        enum_bip_rec(o, a, h1, out, lim);
        enum_bip_rec(o, a, h2, out, lim);
    }
}

void enum_induced_rec(BisSurface& o, VSpan x, std::vector<Edge>& out, EnumLimit& lim) {
    if (x.size() < 2 || lim.aborted) return;
    auto [x1, x2] = halves(x);
    enum_induced_rec(o, x1, out, lim);
    enum_induced_rec(o, x2, out, lim);
    enum_bip_rec(o, x1, x2, out, lim);
}

} // namespace

WalkTrace walk_once(BisSurface& o, VSpan a, VSpan b, Rng& rng) {
    WalkTrace t;
    t.depth_bound = ceil_log2(a.size()) + ceil_log2(b.size());
    while (a.size() > 1 || b.size() > 1) {
        bool split_a = a.size() >= b.size();
        auto [h1, h2] = halves(split_a ? a : b);
        bool t1 = split_a ? o.bis(h1, b) : o.bis(a, h1);
        bool t2 = split_a ? o.bis(h2, b) : o.bis(a, h2);
        t.queries_used += 2;
        VSpan chosen;
        if (t1 && t2) {
            ++t.branch_levels;
            chosen = (rng.next_u64() & 1) ? h2 : h1;
        } else if (t1 || t2) {
            chosen = t1 ? h1 : h2;
        } else {
            return t; // no crossing edge below this node: root was empty
        }
        (split_a ? a : b) = chosen;
    }
    t.leaf_pair = Edge(a[0], b[0]);
    t.ok = true;
    return t;
}

std::vector<Edge> enum_edges_bipartite(BisSurface& o, VSpan a, VSpan b) {
    std::vector<Edge> out;
    EnumLimit lim;
    enum_bip_rec(o, a, b, out, lim);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Edge> enum_edges_induced(BisSurface& o, VSpan x) {
    if (x.size() < 2) throw std::invalid_argument("enum_edges_induced: need at least 2 vertices");
    std::vector<Edge> out;
    EnumLimit lim;
    enum_induced_rec(o, x, out, lim);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Shared skeleton for the adaptive edge-count estimators. A coarse probe
// fixes the walk budget; when the probe suggests few edges (or enumeration
// is simply cheaper than the walks it would take), the count is resolved
// exactly instead.
struct CountProblem {
    std::uint32_t depth = 0;                       // walk depth bound
    double enum_discount = 1.0;                    // <1 when enumeration keeps paying off
    std::function<double(Rng&)> walk_value;        // unbiased estimate of the count
    std::function<bool(std::size_t, double&)> enumerate; // cap -> (complete?, count)
};

double walk_budget(double m0, std::uint32_t depth, const ApproxParams& ap, double c_walks) {
    double ratio = std::ldexp(1.0, static_cast<int>(depth)) / std::max(1.0, m0);
    return std::ceil(c_walks * ratio * std::log(2.0 / ap.delta) / (ap.epsilon * ap.epsilon));
}

// Expected enumeration queries: roughly two tree nodes per edge, plus the
// chain above the region where edges become dense.
double enum_cost_model(double m_hint, std::uint32_t depth) {
    double m = std::max(m_hint, 1.0);
    return 2.0 * m * std::max(2.0, static_cast<double>(depth) - std::log2(m + 1.0) + 1.0);
}

double adaptive_count(const CountProblem& cp, const ApproxParams& ap, Rng& rng) {
    constexpr double kWalkConstant = 3.0;
    constexpr int kProbeWalks = 16;

    double probe_sum = 0.0;
    for (int i = 0; i < kProbeWalks; ++i) probe_sum += cp.walk_value(rng);
    double m0 = std::max(1.0, probe_sum / kProbeWalks);

    const double small = 4.0 / (ap.epsilon * ap.epsilon);
    for (int round = 0; round < 4; ++round) {
        const bool last = (round == 3);
        double enum_cost = cp.enum_discount * enum_cost_model(m0, cp.depth);
        double walks = walk_budget(m0, cp.depth, ap, kWalkConstant);
        double walk_cost = walks * 2.0 * (cp.depth + 1);
        if (m0 <= small || enum_cost <= walk_cost || last) {
            std::size_t cap = last ? std::numeric_limits<std::size_t>::max()
                                   : static_cast<std::size_t>(4.0 * std::max(m0, small) + 16.0);
            double count = 0.0;
            if (cp.enumerate(cap, count)) return count;
            m0 = std::max(m0, count); // undercounted badly; go around again
            continue;
        }
        double sum = 0.0;
        const auto w = static_cast<std::uint64_t>(walks);
        for (std::uint64_t i = 0; i < w; ++i) sum += cp.walk_value(rng);
        double m1 = sum / static_cast<double>(w);
        if (m1 < m0 / 2.0 && round < 2) {
            m0 = std::max(1.0, m1); // probe was high; re-run with honest budget
            continue;
        }
        if (m1 <= small) {
            m0 = std::max(1.0, m1);
            continue; // small after all: resolve exactly next round
        }
        return m1;
    }
    return m0; // unreachable in practice
}

} // namespace

double estimate_edges(BisSurface& o, VSpan a, VSpan b, const ApproxParams& ap) {
    validate(ap);
    if (!o.bis(a, b)) return 0.0;
    Rng rng(ap.seed);
    CountProblem cp;
    cp.depth = ceil_log2(a.size()) + ceil_log2(b.size());
    cp.walk_value = [&](Rng& r) {
        WalkTrace t = walk_once(o, a, b, r);
        return t.ok ? t.estimate() : 0.0;
    };
    cp.enumerate = [&](std::size_t cap, double& count) {
        std::vector<Edge> out;
        EnumLimit lim{cap, false};
        enum_bip_rec(o, a, b, out, lim);
        count = static_cast<double>(out.size());
        return !lim.aborted;
    };
    return adaptive_count(cp, ap, rng);
}

Edge sample_edge(BisSurface& o, VSpan a, VSpan b, const ApproxParams& ap) {
    validate(ap);
    if (!o.bis(a, b)) throw std::invalid_argument("sample_edge: edge set is empty");
    Rng rng(ap.seed);
    const std::uint32_t depth = ceil_log2(a.size()) + ceil_log2(b.size());
    const double pow2d = std::ldexp(1.0, static_cast<int>(depth));

    double probe_sum = 0.0;
    for (int i = 0; i < 8; ++i) {
        WalkTrace t = walk_once(o, a, b, rng);
        if (!t.ok) throw std::invalid_argument("sample_edge: edge set is empty");
        probe_sum += t.estimate();
    }
    const double m0 = probe_sum / 8.0;

    if (m0 > pow2d / 8.0) {
        // Acceptance probability per attempt is |E(G[A,B])| / 2^D, about 1/8
        // or better here, and the accepted leaf is exactly uniform.
        for (int attempt = 0; attempt < 64; ++attempt) {
            WalkTrace t = walk_once(o, a, b, rng);
            if (!t.ok) throw std::invalid_argument("sample_edge: edge set is empty");
            if (rng.uniform() < t.estimate() / pow2d) return t.leaf_pair;
        }
    }
    std::vector<Edge> edges = enum_edges_bipartite(o, a, b);
    if (edges.empty()) throw std::invalid_argument("sample_edge: edge set is empty");
    return edges[rng.below(edges.size())];
}

std::vector<Vertex> neighbors_of(BisSurface& o, Vertex v, VSpan z) {
    if (std::binary_search(z.begin(), z.end(), v))
        throw std::invalid_argument("neighbors_of: v must not lie in z");
    if (z.empty()) return {};
    VSpan a(&v, 1);
    std::vector<Vertex> out;
    for (const Edge& e : enum_edges_bipartite(o, a, z)) out.push_back(e.u == v ? e.v : e.u);
    std::sort(out.begin(), out.end());
    return out;
}

double approx_degree(BisSurface& o, Vertex v, VSpan z, const ApproxParams& ap) {
    if (std::binary_search(z.begin(), z.end(), v))
        throw std::invalid_argument("approx_degree: v must not lie in z");
    if (z.empty()) return 0.0;
    VSpan a(&v, 1);
    return estimate_edges(o, a, z, ap);
}

Vertex random_neighbor(BisSurface& o, Vertex v, VSpan z, const ApproxParams& ap) {
    if (std::binary_search(z.begin(), z.end(), v))
        throw std::invalid_argument("random_neighbor: v must not lie in z");
    if (z.empty()) throw std::invalid_argument("random_neighbor: neighbor set is empty");
    VSpan a(&v, 1);
    Edge e = sample_edge(o, a, z, ap);
    return e.u == v ? e.v : e.u;
}

namespace {

std::vector<Vertex> iota_vertices(std::size_t n) {
    std::vector<Vertex> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Vertex>(i);
    return v;
}

// Uniform bipartition with both sides nonempty; every vertex pair is
// separated with the same probability, so crossing-edge statistics treat
// all edges symmetrically.
void random_bipartition(std::size_t n, Rng& rng, std::vector<Vertex>& a, std::vector<Vertex>& b) {
    do {
        a.clear();
        b.clear();
        std::uint64_t bits = 0;
        for (std::size_t v = 0; v < n; ++v) {
            if ((v & 63) == 0) bits = rng.next_u64();
            ((bits >> (v & 63)) & 1 ? a : b).push_back(static_cast<Vertex>(v));
        }
    } while (a.empty() || b.empty());
}

double valid_partition_probability(std::size_t n) {
    return n >= 54 ? 1.0 : 1.0 - std::ldexp(1.0, 1 - static_cast<int>(n));
}

} // namespace

double estimate_edges_global(BisSurface& o, const ApproxParams& ap, KnowledgeBase* kb) {
    validate(ap);
    const std::size_t n = o.vertex_count();
    if (n < 2) return 0.0;
    if (kb && kb->has_all_edges()) return static_cast<double>(kb->all_edges().size());
    Rng rng(ap.seed);
    const double pvalid = valid_partition_probability(n);
    std::vector<Vertex> a, b;
    a.reserve(n);
    b.reserve(n);

    CountProblem cp;
    cp.depth = 2 * ceil_log2((n + 1) / 2 + 1);
    // learned edges outlive this call when a knowledge base is shared
    cp.enum_discount = kb ? 0.35 : 1.0;
    cp.walk_value = [&](Rng& r) {
        random_bipartition(n, r, a, b);
        if (!o.bis(a, b)) return 0.0;
        WalkTrace t = walk_once(o, a, b, r);
        return t.ok ? 2.0 * pvalid * t.estimate() : 0.0;
    };
    std::vector<Vertex> all = iota_vertices(n);
    cp.enumerate = [&](std::size_t cap, double& count) {
        if (kb) { // learned edges stay available for the rest of the run
            count = static_cast<double>(kb->all_edges().size());
            return true;
        }
        std::vector<Edge> out;
        EnumLimit lim{cap, false};
        enum_induced_rec(o, all, out, lim);
        count = static_cast<double>(out.size());
        return !lim.aborted;
    };
    return adaptive_count(cp, ap, rng);
}

GlobalEdgeSampler::GlobalEdgeSampler(BisSurface& o, double m_hint, std::uint64_t expected_draws,
                                     Rng rng, KnowledgeBase* kb)
    : o_(&o), kb_(kb), rng_(rng) {
    const std::size_t n = o.vertex_count();
    part_a_.reserve(n);
    part_b_.reserve(n);
    if (kb_ && kb_->has_all_edges()) {
        edges_ = &kb_->all_edges();
        return;
    }

    const std::uint32_t depth = 2 * ceil_log2((n + 1) / 2 + 1);
    const double accept = std::min(1.0, std::max(m_hint, 1.0) / std::ldexp(2.0, static_cast<int>(depth)));
    reject_cap_ = static_cast<std::uint64_t>(std::max(64.0, 32.0 / accept));

    const double per_draw = (2.0 * depth + 2.0) / accept;
    enum_switch_cost_ = enum_cost_model(m_hint, depth);
    enumerate_upfront_ =
        enum_switch_cost_ < per_draw * static_cast<double>(std::max<std::uint64_t>(expected_draws, 1));
}

const std::vector<Edge>& GlobalEdgeSampler::enumerate_all() {
    if (kb_) {
        edges_ = &kb_->all_edges();
    } else {
        auto verts = iota_vertices(o_->vertex_count());
        own_edges_ = enum_edges_induced(*o_, verts);
        edges_ = &own_edges_;
    }
    if (edges_->empty()) throw std::invalid_argument("global edge sampler: graph has no edges");
    return *edges_;
}

Edge GlobalEdgeSampler::draw() {
    if (!edges_ && enumerate_upfront_) enumerate_all();
    if (edges_) return (*edges_)[rng_.below(edges_->size())];

    const std::size_t n = o_->vertex_count();
    std::uint64_t rejects = 0;
    for (;;) {
        random_bipartition(n, rng_, part_a_, part_b_);
        std::uint64_t spent = 1;
        if (o_->bis(part_a_, part_b_)) {
            WalkTrace t = walk_once(*o_, part_a_, part_b_, rng_);
            spent += t.queries_used;
            if (t.ok && rng_.uniform() < t.estimate() / std::ldexp(1.0, static_cast<int>(t.depth_bound))) {
                add_walk_spend(spent);
                return t.leaf_pair;
            }
        }
        add_walk_spend(spent);
        // walking has cost more than enumerating would; learn the edge list
        if (static_cast<double>(walk_spend()) > enum_switch_cost_ || ++rejects > reject_cap_)
            return enumerate_all()[rng_.below(edges_->size())];
    }
}

void GlobalEdgeSampler::add_walk_spend(std::uint64_t q) {
    if (kb_) kb_->walk_spend += q;
    else own_walk_spend_ += q;
}

std::uint64_t GlobalEdgeSampler::walk_spend() const {
    return kb_ ? kb_->walk_spend : own_walk_spend_;
}

const Bitset& KnowledgeBase::adjacency_row(Vertex v) {
    if (adj_.empty()) {
        adj_.assign(vertex_count(), Bitset(vertex_count()));
        for (const Edge& e : all_edges_) {
            adj_[e.u].set(e.v);
            adj_[e.v].set(e.u);
        }
    }
    return adj_[v];
}

const std::vector<Vertex>& KnowledgeBase::neighbors(Vertex v) {
    if (!nbr_known_[v]) {
        if (all_known_) {
            const Bitset& row = adjacency_row(v);
            std::vector<Vertex> nb;
            for (std::size_t u = 0; u < vertex_count(); ++u)
                if (row.test(u)) nb.push_back(static_cast<Vertex>(u));
            nbrs_[v] = std::move(nb);
        } else {
            std::vector<Vertex> z;
            z.reserve(nbr_known_.size() - 1);
            for (std::size_t u = 0; u < nbr_known_.size(); ++u)
                if (u != v) z.push_back(static_cast<Vertex>(u));
            nbrs_[v] = neighbors_of(*o_, v, z);
        }
        nbr_known_[v] = true;
    }
    return nbrs_[v];
}

const std::vector<Edge>& KnowledgeBase::induced_neighbor_edges(Vertex v) {
    if (!induced_known_[v]) {
        const auto& nb = neighbors(v);
        if (nb.size() >= 2) {
            if (all_known_) {
                std::vector<Edge> out;
                for (Vertex x : nb) {
                    const Bitset& row = adjacency_row(x);
                    for (Vertex y : nb)
                        if (y > x && row.test(y)) out.emplace_back(x, y);
                }
                std::sort(out.begin(), out.end());
                induced_[v] = std::move(out);
            } else {
                induced_[v] = enum_edges_induced(*o_, nb);
            }
        }
        induced_known_[v] = true;
    }
    return induced_[v];
}

const std::vector<Edge>& KnowledgeBase::all_edges() {
    if (!all_known_) {
        if (vertex_count() >= 2) {
            auto verts = iota_vertices(vertex_count());
            all_edges_ = enum_edges_induced(*o_, verts);
        }
        all_known_ = true;
    }
    return all_edges_;
}

} // namespace bisq
