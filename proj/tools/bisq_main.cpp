// bisq: a query-metered lab for triangle counting under emptiness oracles.
// Subcommands: generate, estimate, bench, distinguish.
// Exit codes: 0 success, 2 usage/spec error, 3 internal invariant violation.

#include <bisq/estimators.hpp>
#include <bisq/graph.hpp>
#include <bisq/hard_instances.hpp>
#include <bisq/oracle.hpp>
#include <bisq/primitives.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

using json = nlohmann::ordered_json;
using namespace bisq;

namespace {

struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw SpecError("cannot open for writing: " + path);
    out << content;
}

void write_sidecar(const std::string& graph_path, const json& j) {
    write_text_file(graph_path + ".json", j.dump(2) + "\n");
}

json ground_truth_json(const Graph& g) {
    return json{{"n", g.vertex_count()},
                {"m", g.edge_count()},
                {"triangles", count_triangles_exact(g)}};
}

std::size_t worker_count(std::size_t rows) {
    std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("BISQ_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) hw = std::min<std::size_t>(hw, static_cast<std::size_t>(v));
    }
    return std::max<std::size_t>(1, std::min(hw, rows));
}

struct EstimatorFlags {
    double epsilon = 0.2;
    double delta = 0.05;
    std::uint64_t seed = 0;
    double c_high = 2.0, c_s = 1.0, c_f = 0.4, c_heavy = 1.0, l_floor = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--epsilon", epsilon, "relative accuracy in (0,1)")->capture_default_str();
        cmd->add_option("--delta", delta, "failure probability in (0,1)")->capture_default_str();
        cmd->add_option("--seed", seed, "seed for all randomness in the run")->required();
        cmd->add_option("--c-high", c_high, "trial multiplier, high estimator")->capture_default_str();
        cmd->add_option("--c-s", c_s, "vertex sample rate multiplier")->capture_default_str();
        cmd->add_option("--c-f", c_f, "edge sample size multiplier")->capture_default_str();
        cmd->add_option("--c-heavy", c_heavy, "heaviness threshold multiplier")->capture_default_str();
        cmd->add_option("--l-floor", l_floor, "guess floor for the exact fallback")->capture_default_str();
    }

    EstimatorConfig config() const {
        EstimatorConfig c;
        c.epsilon = epsilon;
        c.delta = delta;
        c.seed = Seed{seed};
        c.c_high = c_high;
        c.c_s = c_s;
        c.c_f = c_f;
        c.c_heavy = c_heavy;
        c.l_floor = l_floor;
        return c;
    }
};

struct GenerateArgs {
    std::size_t n = 0; // er
    double p = 0.0;
    std::uint64_t m = 0, t = 0; // hard / padded
    std::string flavor = "yes";
    std::size_t k = 0; // complete
    std::uint64_t seed = 0;
    std::string out;
};

Flavor parse_flavor(const std::string& s) {
    if (s == "yes") return Flavor::yes;
    if (s == "no") return Flavor::no;
    throw SpecError("flavor must be 'yes' or 'no', got '" + s + "'");
}

void run_generate_er(const GenerateArgs& a) {
    if (a.p < 0.0 || a.p > 1.0) throw SpecError("generate er: p must be in [0,1]");
    Graph g = gen_er(a.n, a.p, Seed{a.seed});
    write_edge_list_file(g, a.out);
    write_sidecar(a.out, json{{"generator", "er"},
                              {"params", {{"n", a.n}, {"p", a.p}}},
                              {"seed", a.seed},
                              {"ground_truth", ground_truth_json(g)}});
    std::cout << "wrote " << a.out << " (n=" << g.vertex_count() << ", m=" << g.edge_count()
              << ", T=" << count_triangles_exact(g) << ")\n";
}

void run_generate_hard(const GenerateArgs& a, bool padded) {
    HardInstanceSpec spec{a.m, a.t, parse_flavor(a.flavor), Seed{a.seed}};
    try {
        validate_spec(spec);
    } catch (const std::invalid_argument& e) {
        throw SpecError(e.what());
    }
    Graph g;
    PartitionLabels labels;
    std::uint64_t pad_side = 0;
    if (padded) {
        PaddedSpec ps{spec};
        pad_side = ps.pad_side();
        std::tie(g, labels) = gen_padded(ps);
    } else {
        std::tie(g, labels) = gen_hard(spec);
    }
    ValidationReport vr = validate_instance(g, labels, spec);
    write_edge_list_file(g, a.out);
    json sidecar{{"generator", padded ? "hard-padded" : "hard"},
                 {"params", {{"m", a.m}, {"t", a.t}, {"flavor", a.flavor}}},
                 {"seed", a.seed},
                 {"ground_truth", ground_truth_json(g)},
                 {"parts",
                  {{"a", vr.size_a},
                   {"b", vr.size_b},
                   {"c", vr.size_c},
                   {"c_prime", vr.size_c_prime},
                   {"d", vr.size_d}}},
                 {"validation",
                  {{"parts_ok", vr.parts_ok},
                   {"edges_ok", vr.edges_ok},
                   {"triangles_ok", vr.triangles_ok},
                   {"c_prime_ok", vr.c_prime_ok},
                   {"c_prime_within_strict", vr.c_prime_within_strict},
                   {"pass", vr.pass}}}};
    if (padded) sidecar["params"]["pad_side"] = pad_side;
    write_sidecar(a.out, sidecar);
    std::cout << "wrote " << a.out << " (" << vr.summary() << ")\n";
}

void run_generate_complete(const GenerateArgs& a) {
    Graph g = gen_complete(a.k);
    write_edge_list_file(g, a.out);
    write_sidecar(a.out, json{{"generator", "complete"},
                              {"params", {{"k", a.k}}},
                              {"ground_truth", ground_truth_json(g)}});
    std::cout << "wrote " << a.out << " (m=" << g.edge_count() << ")\n";
}

void run_estimate(const std::string& in, const std::string& out, const EstimatorFlags& flags,
                  bool verbose) {
    Graph g;
    try {
        g = read_edge_list_file(in);
    } catch (const std::exception& e) {
        throw SpecError(std::string("estimate: ") + e.what());
    }
    OracleHandle handle(std::move(g));
    DirectBis surface(handle);
    EstimateReport report = triangle_est(surface, flags.config());
    std::string payload = report.to_json() + "\n";
    if (out.empty()) std::cout << payload;
    else write_text_file(out, payload);
    if (verbose)
        for (const auto& step : report.guesses.history)
            std::cerr << "  L=" << step.l_guess << " " << step.algorithm << " t_hat=" << step.estimate
                      << " queries=" << step.queries.total() << "\n";
    std::cerr << "t_hat=" << report.t_hat << " algorithm=" << report.algorithm
              << " queries=" << report.ledger_snapshot.total() << "\n";
}

struct BenchRow {
    std::string graph;
    std::uint64_t n = 0, m = 0, triangles = 0;
    std::string algorithm;
    std::uint64_t seed = 0;
    double t_hat = 0.0;
    double rel_error = 0.0;
    LedgerSnapshot ledger;
    double wall_ms = 0.0;
    std::string status = "ok";
};

struct BenchTask {
    std::string label;
    std::function<Graph()> make_graph;
    std::uint64_t seed = 0;
};

void run_bench_rows(const std::vector<BenchTask>& tasks, const std::string& algorithm,
                    const EstimatorFlags& flags, const std::string& out_path) {
    std::vector<BenchRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            BenchRow& row = rows[i];
            row.graph = tasks[i].label;
            row.algorithm = algorithm;
            row.seed = tasks[i].seed;
            try {
                Graph g = tasks[i].make_graph();
                row.n = g.vertex_count();
                row.m = g.edge_count();
                row.triangles = count_triangles_exact(g);
                OracleHandle handle(std::move(g));
                DirectBis surface(handle);
                EstimatorConfig cfg = flags.config();
                cfg.seed = Seed{tasks[i].seed};
                auto t0 = std::chrono::steady_clock::now();
                if (algorithm == "est") {
                    row.t_hat = triangle_est(surface, cfg).t_hat;
                } else if (algorithm == "high") {
                    row.t_hat = triangle_est_high(
                        surface, cfg, std::max(1.0, static_cast<double>(row.triangles)),
                        static_cast<double>(row.m));
                } else if (algorithm == "low") {
                    row.t_hat = triangle_est_low(
                        surface, cfg, std::max(1.0, static_cast<double>(row.triangles)),
                        static_cast<double>(row.m), row.n);
                } else {
                    throw SpecError("bench: unknown algorithm '" + algorithm + "'");
                }
                auto t1 = std::chrono::steady_clock::now();
                row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
                row.ledger = handle.snapshot();
                row.rel_error = std::abs(row.t_hat - static_cast<double>(row.triangles)) /
                                std::max(1.0, static_cast<double>(row.triangles));
            } catch (const std::exception& e) {
                row.status = std::string("error:") + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t workers = worker_count(tasks.size());
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << "graph,n,m,T,algorithm,seed,t_hat,rel_error,bis,is,ee,wall_ms,status\n";
    csv.precision(17);
    for (const BenchRow& r : rows)
        csv << r.graph << ',' << r.n << ',' << r.m << ',' << r.triangles << ',' << r.algorithm
            << ',' << r.seed << ',' << r.t_hat << ',' << r.rel_error << ',' << r.ledger.bis << ','
            << r.ledger.is << ',' << r.ledger.ee << ',' << r.wall_ms << ',' << r.status << '\n';
    if (out_path.empty()) std::cout << csv.str();
    else write_text_file(out_path, csv.str());
}

std::vector<std::uint64_t> parse_u64_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stoull(item));
    if (out.empty()) throw SpecError("empty list: '" + s + "'");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    if (out.empty()) throw SpecError("empty list: '" + s + "'");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bisq: query-metered triangle counting under emptiness oracles"};
    app.require_subcommand(1);

    auto* generate =
        app.add_subcommand("generate", "write a graph edge list plus a ground-truth sidecar");
    generate->require_subcommand(1);
    GenerateArgs ga;

    auto* gen_er_cmd = generate->add_subcommand("er", "Erdos-Renyi G(n,p)");
    gen_er_cmd->add_option("--n", ga.n, "vertex count")->required();
    gen_er_cmd->add_option("--p", ga.p, "edge probability")->required();
    gen_er_cmd->add_option("--seed", ga.seed, "generator seed")->required();
    gen_er_cmd->add_option("-o,--out", ga.out, "output edge-list path")->required();

    auto* gen_hard_cmd = generate->add_subcommand("hard", "planted two-biclique instance");
    gen_hard_cmd->add_option("--m", ga.m, "edge scale (sqrt(m) must be integral)")->required();
    gen_hard_cmd->add_option("--t", ga.t, "triangle threshold")->required();
    gen_hard_cmd->add_option("--flavor", ga.flavor, "yes | no")->required();
    gen_hard_cmd->add_option("--seed", ga.seed, "generator seed")->required();
    gen_hard_cmd->add_option("-o,--out", ga.out, "output edge-list path")->required();

    auto* gen_padded_cmd =
        generate->add_subcommand("padded", "hard instance plus triangle-free padding");
    gen_padded_cmd->add_option("--m", ga.m, "edge scale of the base instance")->required();
    gen_padded_cmd->add_option("--t", ga.t, "triangle threshold of the base instance")->required();
    gen_padded_cmd->add_option("--flavor", ga.flavor, "yes | no")->required();
    gen_padded_cmd->add_option("--seed", ga.seed, "generator seed")->required();
    gen_padded_cmd->add_option("-o,--out", ga.out, "output edge-list path")->required();

    auto* gen_complete_cmd = generate->add_subcommand("complete", "complete graph K_k");
    gen_complete_cmd->add_option("--k", ga.k, "vertex count")->required();
    gen_complete_cmd->add_option("-o,--out", ga.out, "output edge-list path")->required();

    auto* estimate =
        app.add_subcommand("estimate", "run the triangle estimator against a graph file");
    std::string est_in, est_out;
    bool est_verbose = false;
    EstimatorFlags est_flags;
    estimate->add_option("-i,--in", est_in, "edge-list input")->required();
    estimate->add_option("-o,--out", est_out, "report JSON output (stdout if omitted)");
    estimate->add_flag("--verbose", est_verbose, "print the guess history to stderr");
    est_flags.attach(estimate);

    auto* bench = app.add_subcommand(
        "bench", "sweep estimators over generated graphs, one CSV row per run");
    std::string bench_family = "er", bench_algorithm = "est", bench_out;
    std::string bench_ns = "128", bench_ps = "0.1", bench_ms, bench_ts, bench_flavor = "yes";
    std::uint64_t bench_seeds = 3;
    EstimatorFlags bench_flags;
    bench->add_option("--family", bench_family, "er | hard")->capture_default_str();
    bench
        ->add_option("--algorithm", bench_algorithm,
                     "est | high | low (high/low take the exact T as the guess)")
        ->capture_default_str();
    bench->add_option("--n", bench_ns, "comma list of vertex counts (er)")->capture_default_str();
    bench->add_option("--p", bench_ps, "comma list of densities (er)")->capture_default_str();
    bench->add_option("--m", bench_ms, "comma list of edge scales (hard)");
    bench->add_option("--t", bench_ts, "comma list of triangle thresholds (hard)");
    bench->add_option("--flavor", bench_flavor, "hard-instance flavor")->capture_default_str();
    bench->add_option("--trials", bench_seeds, "seeds per configuration")->capture_default_str();
    bench->add_option("-o,--out", bench_out, "CSV output (stdout if omitted)");
    bench_flags.attach(bench);

    auto* distinguish = app.add_subcommand("distinguish", "yes/no gap experiment over the EE oracle");
    std::uint64_t dist_m = 0, dist_t = 0, dist_trials = 10;
    std::string dist_algorithm = "triangle-est", dist_out;
    EstimatorFlags dist_flags;
    distinguish->add_option("--m", dist_m, "edge scale")->required();
    distinguish->add_option("--t", dist_t, "triangle threshold")->required();
    distinguish->add_option("--trials", dist_trials, "instances per flavor")->capture_default_str();
    distinguish->add_option("--algorithm", dist_algorithm, "triangle-est | exact-enum")
        ->capture_default_str();
    distinguish->add_option("-o,--out", dist_out, "CSV output (stdout if omitted)");
    dist_flags.attach(distinguish);

    try {
        app.parse(argc, argv);

        if (generate->parsed()) {
            if (gen_er_cmd->parsed()) run_generate_er(ga);
            else if (gen_hard_cmd->parsed()) run_generate_hard(ga, false);
            else if (gen_padded_cmd->parsed()) run_generate_hard(ga, true);
            else run_generate_complete(ga);
        } else if (estimate->parsed()) {
            run_estimate(est_in, est_out, est_flags, est_verbose);
        } else if (bench->parsed()) {
            std::vector<BenchTask> tasks;
            Rng master(bench_flags.seed);
            if (bench_family == "er") {
                for (std::uint64_t n : parse_u64_list(bench_ns))
                    for (double p : parse_double_list(bench_ps))
                        for (std::uint64_t s = 0; s < bench_seeds; ++s) {
                            std::uint64_t seed = master.split(n)
                                                     .split(static_cast<std::uint64_t>(p * 1e9))
                                                     .split(s)
                                                     .next_u64();
                            std::ostringstream label;
                            label << "er(n=" << n << ";p=" << p << ")";
                            tasks.push_back({label.str(),
                                             [n, p, seed] { return gen_er(n, p, Seed{seed}); },
                                             seed});
                        }
            } else if (bench_family == "hard") {
                if (bench_ms.empty() || bench_ts.empty())
                    throw SpecError("bench --family hard needs --m and --t");
                Flavor fl = parse_flavor(bench_flavor);
                for (std::uint64_t m : parse_u64_list(bench_ms))
                    for (std::uint64_t t : parse_u64_list(bench_ts))
                        for (std::uint64_t s = 0; s < bench_seeds; ++s) {
                            validate_spec(HardInstanceSpec{m, t, fl, Seed{0}});
                            std::uint64_t seed = master.split(m).split(t).split(s).next_u64();
                            std::ostringstream label;
                            label << "hard(m=" << m << ";t=" << t << ";" << bench_flavor << ")";
                            tasks.push_back({label.str(),
                                             [m, t, fl, seed] {
                                                 return gen_hard({m, t, fl, Seed{seed}}).first;
                                             },
                                             seed});
                        }
            } else {
                throw SpecError("bench: unknown family '" + bench_family + "'");
            }
            run_bench_rows(tasks, bench_algorithm, bench_flags, bench_out);
        } else if (distinguish->parsed()) {
            try {
                validate_spec(HardInstanceSpec{dist_m, dist_t, Flavor::yes, Seed{0}});
            } catch (const std::invalid_argument& e) {
                throw SpecError(e.what());
            }
            auto report =
                run_distinguisher(HardInstanceSpec{dist_m, dist_t, Flavor::yes, Seed{0}},
                                  dist_algorithm, dist_flags.config(),
                                  static_cast<std::size_t>(dist_trials));
            std::ostringstream csv;
            report.write_csv(csv);
            if (dist_out.empty()) std::cout << csv.str();
            else write_text_file(dist_out, csv.str());
            std::cerr << "accuracy yes=" << report.accuracy_yes << " no=" << report.accuracy_no
                      << " ee_p50=" << report.ee_p50 << " ee_p90=" << report.ee_p90 << "\n";
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help path
        app.exit(e);
        return 2;
    } catch (const SpecError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
