#include <bisq/hard_instances.hpp>

#include <bisq/primitives.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace bisq {

std::string to_string(Flavor f) { return f == Flavor::yes ? "yes" : "no"; }

namespace {

std::uint64_t integer_sqrt(std::uint64_t m) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(m)));
    while (r * r > m) --r;
    while ((r + 1) * (r + 1) <= m) ++r;
    return r;
}

} // namespace

void validate_spec(const HardInstanceSpec& spec) {
    if (spec.m == 0) throw std::invalid_argument("hard instance: m must be positive");
    const std::uint64_t root = integer_sqrt(spec.m);
    if (root * root != spec.m)
        throw std::invalid_argument("hard instance: sqrt(m) must be integral, got m=" +
                                    std::to_string(spec.m));
    const double n = 4.0 * static_cast<double>(root);
    const double log2n = std::log2(n);
    const double t = static_cast<double>(spec.t);
    const double m = static_cast<double>(spec.m);
    std::ostringstream why;
    if (t < m * log2n / 8.0) {
        why << "hard instance: t >= m*log2(n)/8 violated (t=" << spec.t
            << ", m*log2(n)/8=" << m * log2n / 8.0 << ")";
        if (static_cast<double>(root) < 16.0 * log2n)
            why << "; note sqrt(m) < 16*log2(n), the valid t-window is empty at this m";
        throw std::invalid_argument(why.str());
    }
    if (t > m * static_cast<double>(root) / 128.0) {
        why << "hard instance: t <= m^(3/2)/128 violated (t=" << spec.t
            << ", m^(3/2)/128=" << m * static_cast<double>(root) / 128.0 << ")";
        if (static_cast<double>(root) < 16.0 * log2n)
            why << "; note sqrt(m) < 16*log2(n), the valid t-window is empty at this m";
        throw std::invalid_argument(why.str());
    }
}

std::size_t PartitionLabels::count(PartLabel l) const {
    std::size_t c = 0;
    for (PartLabel x : label)
        if (x == l) ++c;
    return c;
}

std::vector<Vertex> PartitionLabels::members(PartLabel l) const {
    std::vector<Vertex> out;
    for (std::size_t v = 0; v < label.size(); ++v)
        if (label[v] == l) out.push_back(static_cast<Vertex>(v));
    return out;
}

std::pair<Graph, PartitionLabels> gen_hard(const HardInstanceSpec& spec) {
    validate_spec(spec);
    const std::uint64_t root = integer_sqrt(spec.m);
    const std::size_t n = static_cast<std::size_t>(4 * root);
    const double m32 = static_cast<double>(spec.m) * static_cast<double>(root);
    const double cross_p = std::sqrt(static_cast<double>(spec.t) / (16.0 * m32));
    const double c_prime_p = 32.0 * static_cast<double>(spec.t) / m32;

    // Separate streams per phase: the yes and no flavors of one seed share
    // the partition and the cross-edge coin flips, and differ only by the
    // C' completion.
    Rng master(spec.seed);
    Rng part_rng = master.split(1);
    Rng cross_rng = master.split(2);
    Rng cprime_rng = master.split(3);

    PartitionLabels labels;
    labels.label.resize(n);
    for (std::size_t v = 0; v < n; ++v) {
        switch (part_rng.below(4)) {
            case 0: labels.label[v] = PartLabel::a; break;
            case 1: labels.label[v] = PartLabel::b; break;
            case 2: labels.label[v] = PartLabel::c; break;
            default: labels.label[v] = PartLabel::d; break;
        }
    }
    auto part_a = labels.members(PartLabel::a);
    auto part_b = labels.members(PartLabel::b);
    auto part_c = labels.members(PartLabel::c);
    auto part_d = labels.members(PartLabel::d);

    GraphBuilder builder(n);
    for (Vertex u : part_a)
        for (Vertex v : part_b) builder.add_edge(u, v);
    for (Vertex u : part_c)
        for (Vertex v : part_d) builder.add_edge(u, v);

    std::vector<Vertex> part_ab;
    part_ab.reserve(part_a.size() + part_b.size());
    std::merge(part_a.begin(), part_a.end(), part_b.begin(), part_b.end(),
               std::back_inserter(part_ab));
    for (Vertex x : part_ab)
        for (Vertex y : part_c)
            if (cross_rng.bernoulli(cross_p)) builder.add_edge(x, y);

    if (spec.flavor == Flavor::no) {
        for (Vertex y : part_c) {
            if (!cprime_rng.bernoulli(c_prime_p)) continue;
            labels.label[y] = PartLabel::c_prime;
            for (Vertex x : part_ab) builder.add_edge(x, y);
        }
    }
    return {builder.take(), std::move(labels)};
}

std::string ValidationReport::summary() const {
    std::ostringstream os;
    os << "parts A/B/C/C'/D = " << size_a << "/" << size_b << "/" << size_c << "/" << size_c_prime
       << "/" << size_d << ", edges = " << edges << ", triangles = " << triangles
       << " | parts_ok=" << parts_ok << " edges_ok=" << edges_ok << " triangles_ok=" << triangles_ok
       << " c_prime_ok=" << c_prime_ok << " c_prime_within_strict=" << c_prime_within_strict
       << " pass=" << pass;
    return os.str();
}

ValidationReport validate_instance(const Graph& g, const PartitionLabels& labels,
                                   const HardInstanceSpec& spec) {
    ValidationReport r;
    r.size_a = labels.count(PartLabel::a);
    r.size_b = labels.count(PartLabel::b);
    r.size_c_prime = labels.count(PartLabel::c_prime);
    r.size_c = labels.count(PartLabel::c) + r.size_c_prime;
    r.size_d = labels.count(PartLabel::d);
    r.edges = g.edge_count();
    r.triangles = count_triangles_exact(g);

    const double root = std::sqrt(static_cast<double>(spec.m));
    auto part_in_band = [&](std::uint64_t s) {
        return static_cast<double>(s) >= root / 2.0 && static_cast<double>(s) <= 2.0 * root;
    };
    r.parts_ok = part_in_band(r.size_a) && part_in_band(r.size_b) && part_in_band(r.size_c) &&
                 part_in_band(r.size_d);
    r.edges_ok = r.edges >= spec.m / 4 && r.edges <= 16 * spec.m;
    if (spec.flavor == Flavor::yes) {
        r.triangles_ok = r.triangles <= spec.t;
        r.c_prime_ok = r.size_c_prime == 0;
        r.c_prime_within_strict = true;
    } else {
        r.triangles_ok = r.triangles >= 2 * spec.t;
        const double tm = static_cast<double>(spec.t) / static_cast<double>(spec.m);
        const double cp = static_cast<double>(r.size_c_prime);
        r.c_prime_ok = cp >= 8.0 * tm && cp <= 64.0 * tm;
        r.c_prime_within_strict = cp >= 8.0 * tm && cp <= 32.0 * tm;
    }
    r.pass = r.parts_ok && r.edges_ok && r.triangles_ok && r.c_prime_ok;
    return r;
}

std::uint64_t PaddedSpec::pad_side() const {
    return static_cast<std::uint64_t>(std::ceil(std::sqrt(static_cast<double>(base.t))));
}

std::pair<Graph, PartitionLabels> gen_padded(const PaddedSpec& ps) {
    auto [base_graph, labels] = gen_hard(ps.base);
    const std::size_t n0 = base_graph.vertex_count();
    const std::size_t side = static_cast<std::size_t>(ps.pad_side());
    GraphBuilder builder(n0 + 2 * side);
    for (Vertex u = 0; u < n0; ++u)
        for (Vertex v : base_graph.neighbors(u))
            if (v > u) builder.add_edge(u, v);
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j)
            builder.add_edge(static_cast<Vertex>(n0 + i), static_cast<Vertex>(n0 + side + j));
    labels.label.resize(n0 + 2 * side, PartLabel::pad);
    return {builder.take(), std::move(labels)};
}

double ExperimentReport::accuracy() const {
    if (rows.empty()) return 0.0;
    std::size_t c = 0;
    for (const auto& r : rows)
        if (r.correct()) ++c;
    return static_cast<double>(c) / static_cast<double>(rows.size());
}

void ExperimentReport::write_csv(std::ostream& out) const {
    out << "flavor,seed,m,t,n,edges,triangles,t_hat,classified,ee_queries\n";
    for (const auto& r : rows) {
        std::ostringstream th;
        th.precision(17);
        th << r.t_hat;
        out << to_string(r.flavor) << ',' << r.seed << ',' << r.m << ',' << r.t << ',' << r.n << ','
            << r.edges << ',' << r.triangles << ',' << th.str() << ',' << to_string(r.classified)
            << ',' << r.ee_queries << '\n';
    }
}

ExperimentReport run_distinguisher(const HardInstanceSpec& spec, const std::string& algorithm,
                                   const EstimatorConfig& cfg, std::size_t trials) {
    validate_spec(spec);
    if (algorithm != "triangle-est" && algorithm != "exact-enum")
        throw std::invalid_argument("run_distinguisher: unknown estimator id '" + algorithm + "'");

    ExperimentReport report;
    Rng master(cfg.seed);
    std::size_t correct_yes = 0, correct_no = 0;
    for (Flavor flavor : {Flavor::yes, Flavor::no}) {
        Rng flavor_rng = master.split(flavor == Flavor::yes ? 1 : 2);
        for (std::size_t i = 0; i < trials; ++i) {
            DistinguisherRow row;
            row.flavor = flavor;
            row.seed = flavor_rng.split(i).next_u64();
            row.m = spec.m;
            row.t = spec.t;

            HardInstanceSpec inst = spec;
            inst.flavor = flavor;
            inst.seed = Seed{row.seed};
            auto [graph, labels] = gen_hard(inst);
            row.n = graph.vertex_count();
            row.edges = graph.edge_count();
            row.triangles = count_triangles_exact(graph);

            OracleHandle handle(std::move(graph));
            EeBis surface(handle);
            if (algorithm == "exact-enum") {
                std::vector<Vertex> verts(row.n);
                for (std::size_t v = 0; v < row.n; ++v) verts[v] = static_cast<Vertex>(v);
                auto edges = enum_edges_induced(surface, verts);
                row.t_hat =
                    static_cast<double>(count_triangles_exact(Graph::build(row.n, edges)));
            } else {
                EstimatorConfig run_cfg = cfg;
                run_cfg.seed = Seed{Rng(Seed{row.seed}).split(99).next_u64()};
                row.t_hat = triangle_est(surface, run_cfg).t_hat;
            }
            auto snap = handle.snapshot();
            row.ee_queries = snap.ee;
            row.non_ee_queries = snap.bis + snap.is;
            row.classified =
                row.t_hat < 1.5 * static_cast<double>(spec.t) ? Flavor::yes : Flavor::no;
            if (row.correct()) (flavor == Flavor::yes ? correct_yes : correct_no) += 1;
            report.rows.push_back(row);
        }
    }
    if (trials > 0) {
        report.accuracy_yes = static_cast<double>(correct_yes) / static_cast<double>(trials);
        report.accuracy_no = static_cast<double>(correct_no) / static_cast<double>(trials);
    }
    std::vector<std::uint64_t> counts;
    counts.reserve(report.rows.size());
    for (const auto& r : report.rows) counts.push_back(r.ee_queries);
    if (!counts.empty()) {
        std::sort(counts.begin(), counts.end());
        report.ee_p50 = counts[counts.size() / 2];
        report.ee_p90 = counts[(counts.size() * 9) / 10];
    }
    return report;
}

} // namespace bisq
