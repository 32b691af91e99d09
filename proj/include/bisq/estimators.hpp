#ifndef BISQ_ESTIMATORS_HPP
#define BISQ_ESTIMATORS_HPP

#include <bisq/oracle.hpp>
#include <bisq/primitives.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace bisq {

// ε, δ, the seed, and every constant the asymptotic statements hide.
struct EstimatorConfig {
    double epsilon = 0.2;
    double delta = 0.05;
    Seed seed{};
    double c_high = 2.0;  // trial multiplier for the high estimator
    double c_s = 1.0;     // vertex sampling rate multiplier
    double c_f = 0.15;    // edge sample size multiplier
    double c_heavy = 1.0; // heaviness threshold multiplier
    double l_floor = 1.0; // below this guess, enumerate and count exactly
};

void validate(const EstimatorConfig& cfg);

struct GuessStep {
    double l_guess = 0.0;
    double estimate = 0.0;
    std::string algorithm;
    LedgerSnapshot queries; // totals charged during this step
};

struct GuessState {
    double l_guess = 0.0;
    std::vector<GuessStep> history;
};

// The sampled state the low estimator extracts before estimation starts:
// vertex sample S with its incident and neighborhood-induced edges, plus the
// uniform edge sample F with the edges induced among F's endpoints'
// neighborhoods. After construction no further queries are needed.
struct LowSketch {
    std::vector<Vertex> s_set;
    std::vector<Edge> e_s;        // all edges with >= 1 endpoint in S
    std::vector<Edge> e_s_prime;  // union over v in S of E(G[N(v)])
    std::vector<Edge> f_multiset; // f_target independent uniform edge draws
    std::vector<Edge> e_f;        // union over v in V(F) of E(G[N(v) ∩ V(F)])
    double p_rate = 0.0;
    std::uint64_t f_target = 0;

    // build fingerprint; estimate_from_sketch rejects mismatches
    std::size_t n = 0;
    double m_hat = 0.0;
    double l_guess = 0.0;
    double epsilon = 0.0;
};

struct EstimateReport {
    double t_hat = 0.0;
    LedgerSnapshot ledger_snapshot;
    std::string algorithm; // "high" | "low" | "exact-fallback"
    double l_used = 0.0;
    Seed seed{};
    GuessState guesses;

    // {"t_hat":…, "algorithm":…, "l_used":…, "ledger":{…}, "seed":…}
    std::string to_json() const;
};

// Vertex order used by the high estimator's designation rule: by degree,
// ties by id. Each triangle is assigned to the edge joining its two
// lowest-ranked vertices; {u,v} is designated for {u,v,w} iff w outranks
// both endpoints.
bool high_rank_less(std::uint64_t deg_a, Vertex a, std::uint64_t deg_b, Vertex b);
bool high_designates(std::uint64_t deg_u, Vertex u, std::uint64_t deg_v, Vertex v,
                     std::uint64_t deg_w, Vertex w);

// Wedge-sampling estimator for triangle-rich graphs. Unbiased when degrees
// and edge draws are exact (which they are here: degrees come from full
// neighborhood enumeration, cached per run; draws are exactly uniform).
// Guarantee: (1±ε) with probability >= 1-δ provided T >= l_guess.
// An optional knowledge base shares already-paid-for facts within a run.
double triangle_est_high(BisSurface& o, const EstimatorConfig& cfg, double l_guess, double m_hat,
                         KnowledgeBase* kb = nullptr);

LowSketch build_low_sketch(BisSurface& o, const EstimatorConfig& cfg, double l_guess,
                           double m_hat, std::size_t n, KnowledgeBase* kb = nullptr);

// Pure function of the sketch; issues no queries. Heavy edges (many sampled
// co-neighbors) are counted through their designated apex in S; all-light
// triangles are counted through wedge pairs among the F draws.
double estimate_from_sketch(const LowSketch& sk, const EstimatorConfig& cfg, double l_guess,
                            double m_hat);

double triangle_est_low(BisSurface& o, const EstimatorConfig& cfg, double l_guess, double m_hat,
                        std::size_t n, KnowledgeBase* kb = nullptr);

// Audit hooks: heaviness classification as estimate_from_sketch sees it.
// Pure functions of the sketch; meant for invariant checks on small inputs.
std::size_t sketch_co_neighbor_count(const LowSketch& sk, Vertex x, Vertex y);
double sketch_heavy_threshold(const LowSketch& sk, const EstimatorConfig& cfg);
bool sketch_edge_heavy(const LowSketch& sk, const EstimatorConfig& cfg, Vertex x, Vertex y);

// Geometric search over the guess L, halving from C(n,3)/2 until the
// estimate is consistent (t_hat >= L/2) or the guess drops below l_floor,
// at which point the edge set is enumerated and counted exactly.
EstimateReport triangle_est(BisSurface& o, const EstimatorConfig& cfg);

} // namespace bisq

#endif
