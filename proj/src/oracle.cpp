#include <bisq/oracle.hpp>

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace bisq {

VertexPairSet::VertexPairSet(std::span<const Edge> pairs) {
    pairs_.reserve(pairs.size());
    for (const Edge& e : pairs) {
        if (e.u == e.v)
            throw std::invalid_argument("vertex pair set: self-pair {" + std::to_string(e.u) + "}");
        pairs_.push_back(e);
    }
    std::sort(pairs_.begin(), pairs_.end());
    pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
}

std::string LedgerSnapshot::to_json() const {
    std::ostringstream os;
    os << "{\"bis\":" << bis << ",\"is\":" << is << ",\"ee\":" << ee << "}";
    return os.str();
}

namespace {

bool sorted_unique(VSpan s) {
    for (std::size_t i = 1; i < s.size(); ++i)
        if (s[i] <= s[i - 1]) return false;
    return true;
}

bool disjoint_sorted(VSpan a, VSpan b) {
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (a[i] > b[j]) ++j;
        else return false;
    }
    return true;
}

// Scratch bitset reused across queries so the per-query cost stays near the
// set sizes rather than n.
thread_local std::vector<std::uint64_t> t_mask;
thread_local std::vector<std::uint32_t> t_touched;

} // namespace

void OracleHandle::validate_bis_input(VSpan u_set, VSpan v_set) const {
    if (u_set.empty() || v_set.empty())
        throw std::invalid_argument("bis: input sets must be nonempty");
    if (!sorted_unique(u_set) || !sorted_unique(v_set))
        throw std::invalid_argument("bis: input sets must be sorted and duplicate-free");
    if (u_set.back() >= hidden_.vertex_count() || v_set.back() >= hidden_.vertex_count())
        throw std::invalid_argument("bis: vertex id out of range");
    if (!disjoint_sorted(u_set, v_set))
        throw std::invalid_argument("bis: input sets overlap");
}

bool OracleHandle::cross_edge_exists(VSpan u_set, VSpan v_set) const {
    VSpan small = u_set.size() <= v_set.size() ? u_set : v_set;
    VSpan large = u_set.size() <= v_set.size() ? v_set : u_set;

    // Tiny side: plain membership tests beat building a mask.
    if (small.size() <= 8 || large.size() <= 16) {
        for (Vertex a : small) {
            const Bitset& row = hidden_.row(a);
            for (Vertex b : large)
                if (row.test(b)) return true;
        }
        return false;
    }

    const std::size_t words = (hidden_.vertex_count() + 63) / 64;
    if (t_mask.size() < words) t_mask.assign(words, 0);
    t_touched.clear();
    for (Vertex b : large) {
        std::uint32_t wi = b >> 6;
        if (t_mask[wi] == 0) t_touched.push_back(wi);
        t_mask[wi] |= (1ull << (b & 63));
    }
    bool found = false;
    for (Vertex a : small) {
        const auto row = hidden_.row(a).words();
        for (std::uint32_t wi : t_touched) {
            if (row[wi] & t_mask[wi]) {
                found = true;
                break;
            }
        }
        if (found) break;
    }
    for (std::uint32_t wi : t_touched) t_mask[wi] = 0;
    return found;
}

bool OracleHandle::bis(VSpan u_set, VSpan v_set) {
    validate_bis_input(u_set, v_set);
    ledger_.charge_bis();
    return cross_edge_exists(u_set, v_set);
}

bool OracleHandle::is_query(VSpan u_set) {
    if (u_set.size() < 2) throw std::invalid_argument("is: need at least 2 vertices");
    if (!sorted_unique(u_set)) throw std::invalid_argument("is: input must be sorted and duplicate-free");
    if (u_set.back() >= hidden_.vertex_count()) throw std::invalid_argument("is: vertex id out of range");
    ledger_.charge_is();
    for (std::size_t i = 0; i < u_set.size(); ++i) {
        const Bitset& row = hidden_.row(u_set[i]);
        for (std::size_t j = i + 1; j < u_set.size(); ++j)
            if (row.test(u_set[j])) return true;
    }
    return false;
}

bool OracleHandle::ee(const VertexPairSet& p) {
    if (p.empty()) throw std::invalid_argument("ee: pair set must be nonempty");
    for (const Edge& e : p.pairs())
        if (e.v >= hidden_.vertex_count()) throw std::invalid_argument("ee: vertex id out of range");
    ledger_.charge_ee();
    for (const Edge& e : p.pairs())
        if (hidden_.has_edge(e.u, e.v)) return true;
    return false;
}

bool OracleHandle::bis_via_ee(VSpan u_set, VSpan v_set) {
    validate_bis_input(u_set, v_set);
    ledger_.charge_ee();
    return cross_edge_exists(u_set, v_set);
}

bool is_via_bis(OracleHandle& h, VSpan u_set, std::size_t rounds, Seed seed) {
    if (u_set.size() < 2) throw std::invalid_argument("is_via_bis: need at least 2 vertices");
    if (rounds < 1) throw std::invalid_argument("is_via_bis: rounds must be >= 1");
    Rng rng(seed);
    std::vector<Vertex> x, y;
    x.reserve(u_set.size());
    y.reserve(u_set.size());
    for (std::size_t r = 0; r < rounds; ++r) {
        do { // nontrivial bipartition of u_set
            x.clear();
            y.clear();
            for (Vertex v : u_set) (rng.next_u64() & 1 ? x : y).push_back(v);
        } while (x.empty() || y.empty());
        if (h.bis(x, y)) return true;
    }
    return false;
}

std::size_t is_via_bis_default_rounds(std::size_t n) {
    std::size_t rounds = 1;
    // ceil(3 log2 n): per-round miss probability <= 1/2, target n^-3
    while ((1ull << rounds) < static_cast<std::uint64_t>(n) * n * n && rounds < 63) ++rounds;
    return rounds;
}

} // namespace bisq
