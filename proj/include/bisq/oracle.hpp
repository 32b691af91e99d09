#ifndef BISQ_ORACLE_HPP
#define BISQ_ORACLE_HPP

#include <bisq/graph.hpp>
#include <bisq/rng.hpp>

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bisq {

// Sorted, duplicate-free list of vertex ids. All oracle inputs use this form.
using VSpan = std::span<const Vertex>;

// Set of unordered vertex pairs; the EE oracle's input. Normalizes, rejects
// self-pairs, and deduplicates under orientation.
class VertexPairSet {
  public:
    VertexPairSet() = default;
    explicit VertexPairSet(std::span<const Edge> pairs);

    const std::vector<Edge>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

  private:
    std::vector<Edge> pairs_;
};

struct LedgerSnapshot {
    std::uint64_t bis = 0;
    std::uint64_t is = 0;
    std::uint64_t ee = 0;

    std::uint64_t total() const { return bis + is + ee; }
    bool operator==(const LedgerSnapshot&) const = default;
    std::string to_json() const; // {"bis":k1,"is":k2,"ee":k3}
};

// Monotone per-oracle-kind counters; the primary measurement of the lab.
// Atomic so a handle can be shared across threads.
class QueryLedger {
  public:
    LedgerSnapshot snapshot() const {
        return {bis_.load(std::memory_order_relaxed), is_.load(std::memory_order_relaxed),
                ee_.load(std::memory_order_relaxed)};
    }
    void charge_bis() { bis_.fetch_add(1, std::memory_order_relaxed); }
    void charge_is() { is_.fetch_add(1, std::memory_order_relaxed); }
    void charge_ee() { ee_.fetch_add(1, std::memory_order_relaxed); }

  private:
    std::atomic<std::uint64_t> bis_{0};
    std::atomic<std::uint64_t> is_{0};
    std::atomic<std::uint64_t> ee_{0};
};

// Owns the hidden graph. Nothing outside this class reads the adjacency
// directly; every answer is paid for through the ledger before it is
// returned, and malformed inputs are hard errors that leave the ledger
// untouched.
class OracleHandle {
  public:
    explicit OracleHandle(Graph hidden) : hidden_(std::move(hidden)) {}

    std::size_t vertex_count() const { return hidden_.vertex_count(); }
    const QueryLedger& ledger() const { return ledger_; }
    LedgerSnapshot snapshot() const { return ledger_.snapshot(); }

    // true iff some edge has one endpoint in each set; sets must be sorted,
    // nonempty, in range and disjoint.
    bool bis(VSpan u_set, VSpan v_set);

    // true iff some edge lies inside u_set; |u_set| >= 2.
    bool is_query(VSpan u_set);

    // true iff some pair of p is an edge; p nonempty.
    bool ee(const VertexPairSet& p);

    // Same answer as bis on every input, charged as a single EE query with
    // the implicit pair set u_set x v_set (never materialized).
    bool bis_via_ee(VSpan u_set, VSpan v_set);

  private:
    friend bool is_via_bis(OracleHandle&, VSpan, std::size_t, Seed);

    void validate_bis_input(VSpan u_set, VSpan v_set) const;
    bool cross_edge_exists(VSpan u_set, VSpan v_set) const;

    Graph hidden_;
    QueryLedger ledger_;
};

// One-sided randomized IS simulation: `rounds` random bipartitions of u_set,
// one BIS query each. true is always correct; a false answer errs per round
// with probability at most 1/2 per witnessing edge.
bool is_via_bis(OracleHandle& h, VSpan u_set, std::size_t rounds, Seed seed);

// Rounds for failure probability n^-3.
std::size_t is_via_bis_default_rounds(std::size_t n);

// The query surface algorithms compile against: BIS-shaped questions plus
// public knowledge of |V|. Implementations route the charge to a specific
// ledger counter, so estimator code cannot bypass the metering.
class BisSurface {
  public:
    virtual ~BisSurface() = default;
    virtual bool bis(VSpan u_set, VSpan v_set) = 0;
    virtual std::size_t vertex_count() const = 0;
    virtual LedgerSnapshot snapshot() const = 0;
};

// Charges bis_count.
class DirectBis final : public BisSurface {
  public:
    explicit DirectBis(OracleHandle& h) : h_(&h) {}
    bool bis(VSpan u_set, VSpan v_set) override { return h_->bis(u_set, v_set); }
    std::size_t vertex_count() const override { return h_->vertex_count(); }
    LedgerSnapshot snapshot() const override { return h_->snapshot(); }

  private:
    OracleHandle* h_;
};

// Routes every BIS question through the EE oracle (charges ee_count).
class EeBis final : public BisSurface {
  public:
    explicit EeBis(OracleHandle& h) : h_(&h) {}
    bool bis(VSpan u_set, VSpan v_set) override { return h_->bis_via_ee(u_set, v_set); }
    std::size_t vertex_count() const override { return h_->vertex_count(); }
    LedgerSnapshot snapshot() const override { return h_->snapshot(); }

  private:
    OracleHandle* h_;
};

} // namespace bisq

#endif
