#ifndef BISQ_HARD_INSTANCES_HPP
#define BISQ_HARD_INSTANCES_HPP

#include <bisq/estimators.hpp>
#include <bisq/graph.hpp>
#include <bisq/oracle.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace bisq {

enum class Flavor { yes, no };

std::string to_string(Flavor f);

// Parameters of a planted two-biclique instance on n = 4*sqrt(m) vertices.
// The yes flavor has at most t triangles, the no flavor at least 2t (each
// with high probability); the two flavors with the same seed differ only by
// the completion of a small random subset of C towards A ∪ B.
struct HardInstanceSpec {
    std::uint64_t m = 0;
    std::uint64_t t = 0;
    Flavor flavor = Flavor::yes;
    Seed seed;
};

// Throws with the violated inequality named.
void validate_spec(const HardInstanceSpec& spec);

enum class PartLabel : std::uint8_t { a, b, c, c_prime, d, pad };

struct PartitionLabels {
    std::vector<PartLabel> label;

    std::size_t count(PartLabel l) const;
    std::vector<Vertex> members(PartLabel l) const;
    // c_prime vertices carry their own label; part C means c ∪ c_prime
    std::size_t part_c_size() const { return count(PartLabel::c) + count(PartLabel::c_prime); }
};

std::pair<Graph, PartitionLabels> gen_hard(const HardInstanceSpec& spec);

struct ValidationReport {
    std::uint64_t size_a = 0, size_b = 0, size_c = 0, size_c_prime = 0, size_d = 0;
    std::uint64_t edges = 0;
    std::uint64_t triangles = 0;

    bool parts_ok = false;     // each of A,B,C,D within [sqrt(m)/2, 2 sqrt(m)]
    bool edges_ok = false;     // within [m/4, 16m]
    bool triangles_ok = false; // yes: T <= t;  no: T >= 2t
    bool c_prime_ok = false;   // no flavor: |C'| within [8t/m, 64t/m]
    bool c_prime_within_strict = false; // the tighter 32t/m upper limit, logged only
    bool pass = false;

    std::string summary() const;
};

ValidationReport validate_instance(const Graph& g, const PartitionLabels& labels,
                                   const HardInstanceSpec& spec);

// Base instance padded with a disjoint balanced complete bipartite graph:
// triangle-free, pad_side^2 extra edges, 2*pad_side extra vertices, triangle
// count unchanged.
struct PaddedSpec {
    HardInstanceSpec base;
    std::uint64_t pad_side() const; // ceil(sqrt(t))
};

std::pair<Graph, PartitionLabels> gen_padded(const PaddedSpec& ps);

struct DistinguisherRow {
    Flavor flavor = Flavor::yes;
    std::uint64_t seed = 0;
    std::uint64_t m = 0;
    std::uint64_t t = 0;
    std::uint64_t n = 0;
    std::uint64_t edges = 0;
    std::uint64_t triangles = 0;
    double t_hat = 0.0;
    Flavor classified = Flavor::yes;
    std::uint64_t ee_queries = 0;
    std::uint64_t non_ee_queries = 0; // stays zero: everything is EE-charged
    bool correct() const { return classified == flavor; }
};

struct ExperimentReport {
    std::vector<DistinguisherRow> rows;
    double accuracy_yes = 0.0;
    double accuracy_no = 0.0;
    std::uint64_t ee_p50 = 0;
    std::uint64_t ee_p90 = 0;

    double accuracy() const;
    // flavor,seed,m,t,n,edges,triangles,t_hat,classified,ee_queries
    void write_csv(std::ostream& out) const;
};

// Runs the chosen estimator over `trials` seeded instances per flavor, with
// every oracle call routed through the EE oracle. t_hat < 1.5t classifies as
// yes. Estimators: "triangle-est" (the geometric-guess wrapper) or
// "exact-enum" (full edge enumeration + exact count).
ExperimentReport run_distinguisher(const HardInstanceSpec& spec, const std::string& algorithm,
                                   const EstimatorConfig& cfg, std::size_t trials);

} // namespace bisq

#endif
