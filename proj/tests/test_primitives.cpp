#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bisq/primitives.hpp>

#include "test_support.hpp"
#include "walk_oracle.hpp"

#include <atomic>
#include <map>
#include <thread>

using namespace bisq;

namespace {

struct Rig {
    Graph g;
    OracleHandle h;
    DirectBis o;
    explicit Rig(Graph graph) : g(std::move(graph)), h(g), o(h) {}
};

std::vector<Vertex> vs(std::initializer_list<Vertex> v) { return {v}; }

ApproxParams ap(double eps, double delta, std::uint64_t seed) { return {eps, delta, Seed{seed}}; }

} // namespace

TEST_CASE("enum_edges_bipartite") {
    SUBCASE("empty graph uses exactly one query") {
        Rig r(build_graph(8, {}));
        auto a = vs({0, 1, 2}), b = vs({3, 4, 5, 6});
        CHECK(enum_edges_bipartite(r.o, a, b).empty());
        CHECK(r.h.snapshot().bis == 1);
    }
    SUBCASE("single edge") {
        Rig r(build_graph(2, std::vector<Edge>{{0, 1}}));
        auto a = vs({0}), b = vs({1});
        auto edges = enum_edges_bipartite(r.o, a, b);
        CHECK(edges == std::vector<Edge>{Edge{0, 1}});
    }
    SUBCASE("complete bipartite K44 within the stated query bound") {
        Rig r(gen_complete_bipartite(4, 4));
        auto a = vs({0, 1, 2, 3}), b = vs({4, 5, 6, 7});
        auto edges = enum_edges_bipartite(r.o, a, b);
        CHECK(edges.size() == 16);
        // bound: 4 * max(1,|E|) * (ceil_lg|A| + ceil_lg|B| + 1)
        CHECK(r.h.snapshot().bis <= 4 * 16 * (2 + 2 + 1));
    }
    SUBCASE("overlap rejected") {
        Rig r(gen_complete(4));
        auto a = vs({0, 1}), b = vs({1, 2});
        CHECK_THROWS_AS(enum_edges_bipartite(r.o, a, b), std::invalid_argument);
    }
}

TEST_CASE("enum agrees with ground truth and stays within the query bound") {
    for (std::uint64_t s = 0; s < 60; ++s) {
        std::size_t n = 8 + (s * 7) % 56;
        Graph g = gen_er(n, 0.05 + 0.02 * (s % 10), Seed{7000 + s});
        Rig r(g);
        auto verts = test::all_vertices(n);
        std::size_t half = n / 2;
        VSpan a = VSpan(verts).first(half), b = VSpan(verts).subspan(half);

        auto before = r.h.snapshot().bis;
        auto got = enum_edges_bipartite(r.o, a, b);
        auto used = r.h.snapshot().bis - before;

        std::vector<Edge> want;
        for (Vertex u : a)
            for (Vertex v : b)
                if (g.has_edge(u, v)) want.emplace_back(u, v);
        std::sort(want.begin(), want.end());
        CHECK(got == want);
        std::uint64_t bound =
            4 * std::max<std::uint64_t>(1, want.size()) * (ceil_log2(a.size()) + ceil_log2(b.size()) + 1);
        CHECK(used <= bound);
    }
}

TEST_CASE("enum_edges_induced") {
    SUBCASE("K3 full edge set") {
        Rig r(gen_complete(3));
        auto x = vs({0, 1, 2});
        CHECK(enum_edges_induced(r.o, x).size() == 3);
    }
    SUBCASE("independent set") {
        Rig r(gen_star(5)); // leaves 1..5 are pairwise nonadjacent
        auto x = vs({1, 2, 3, 4, 5});
        CHECK(enum_edges_induced(r.o, x).empty());
    }
    SUBCASE("needs two vertices") {
        Rig r(gen_complete(3));
        auto x = vs({0});
        CHECK_THROWS_AS(enum_edges_induced(r.o, x), std::invalid_argument);
    }
    SUBCASE("whole vertex set equals adjacency ground truth") {
        for (std::uint64_t s = 0; s < 6; ++s) {
            Graph g = gen_er(64, 0.1, Seed{100 + s});
            Rig r(g);
            auto verts = test::all_vertices(64);
            CHECK(enum_edges_induced(r.o, verts) == test::edges_sorted(r.g));
        }
    }
}

TEST_CASE("neighbors_of") {
    SUBCASE("star center sees all leaves") {
        Rig r(gen_star(6));
        auto z = vs({1, 2, 3, 4, 5, 6});
        CHECK(neighbors_of(r.o, 0, z) == z);
    }
    SUBCASE("isolated vertex costs one query") {
        Rig r(build_graph(8, std::vector<Edge>{{1, 2}}));
        auto z = test::vertices_except(8, 0);
        CHECK(neighbors_of(r.o, 0, z).empty());
        CHECK(r.h.snapshot().bis == 1);
    }
    SUBCASE("matches ground-truth adjacency") {
        Graph g = gen_er(64, 0.2, Seed{42});
        Rig r(g);
        for (Vertex v = 0; v < 64; v += 7) {
            auto z = test::vertices_except(64, v);
            CHECK(neighbors_of(r.o, v, z) == g.neighbors(v));
        }
    }
    SUBCASE("v inside z rejected") {
        Rig r(gen_complete(4));
        auto z = vs({0, 1, 2});
        CHECK_THROWS_AS(neighbors_of(r.o, 1, z), std::invalid_argument);
    }
}

TEST_CASE("walk estimator is exactly unbiased: exhaustive 4x4 bipartite graphs") {
    // Every bipartite adjacency pattern between |A|=4 and |B|=4.
    auto a = vs({0, 1, 2, 3}), b = vs({4, 5, 6, 7});
    for (std::uint32_t mask = 0; mask < (1u << 16); ++mask) {
        std::vector<Edge> edges;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if ((mask >> (4 * i + j)) & 1)
                    edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(4 + j));
        Graph g = build_graph(8, edges);
        double expect = test::walk_expectation(g, a, b);
        REQUIRE(expect == doctest::Approx(static_cast<double>(edges.size())).epsilon(1e-12));
    }
}

TEST_CASE("walk acceptance makes sampling exactly uniform: exhaustive small cases") {
    // P(accept and leaf=e) = reach * 2^(branches-D) must be equal across edges.
    auto a = vs({0, 1, 2}), b = vs({3, 4, 5, 6});
    for (std::uint64_t s = 0; s < 200; ++s) {
        Graph g = gen_er(7, 0.10 + 0.08 * (s % 10), Seed{81000 + s});
        auto dist = test::walk_leaf_distribution(g, a, b);
        if (dist.empty()) continue;
        const int depth = static_cast<int>(ceil_log2(3) + ceil_log2(4));
        double first = -1.0;
        for (const auto& [e, stat] : dist) {
            CHECK(stat.branch_levels <= depth);
            double p_accept = stat.reach_probability * std::ldexp(1.0, stat.branch_levels - depth);
            if (first < 0) first = p_accept;
            CHECK(p_accept == doctest::Approx(first).epsilon(1e-12));
        }
    }
}

TEST_CASE("walk_once production trace matches its contract") {
    Graph g = gen_er(32, 0.15, Seed{5});
    Rig r(g);
    auto verts = test::all_vertices(32);
    VSpan a = VSpan(verts).first(16), b = VSpan(verts).subspan(16);
    REQUIRE(test::cross_edge_truth(g, a, b));
    Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        WalkTrace t = walk_once(r.o, a, b, rng);
        REQUIRE(t.ok);
        CHECK(g.has_edge(t.leaf_pair.u, t.leaf_pair.v)); // leaves are always edges
        CHECK(t.branch_levels <= t.depth_bound);
        CHECK(t.probability() >= std::ldexp(1.0, -static_cast<int>(t.depth_bound)));
        CHECK(t.estimate() * t.probability() == doctest::Approx(1.0));
    }
}

TEST_CASE("estimate_edges") {
    SUBCASE("empty graph short-circuits to exact zero with one query") {
        Rig r(build_graph(16, {}));
        auto a = vs({0, 1, 2, 3}), b = vs({8, 9, 10, 11});
        CHECK(estimate_edges(r.o, a, b, ap(0.2, 0.1, 1)) == 0.0);
        CHECK(r.h.snapshot().bis == 1);
    }
    SUBCASE("single edge is exact via enumeration fallback") {
        Rig r(build_graph(2, std::vector<Edge>{{0, 1}}));
        auto a = vs({0}), b = vs({1});
        CHECK(estimate_edges(r.o, a, b, ap(0.2, 0.1, 2)) == 1.0);
    }
    SUBCASE("K_{32,32}: within (1±0.1) of 1024 in at least 95 of 100 seeded runs") {
        Rig r(gen_complete_bipartite(32, 32));
        auto verts = test::all_vertices(64);
        VSpan a = VSpan(verts).first(32), b = VSpan(verts).subspan(32);
        int ok = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            double est = estimate_edges(r.o, a, b, ap(0.1, 0.05, 300 + s));
            if (est >= 922 && est <= 1127) ++ok;
        }
        CHECK(ok >= 95);
    }
    SUBCASE("ER bipartite block accuracy over seeds") {
        Graph g = gen_er(64, 0.3, Seed{17});
        Rig r(g);
        auto verts = test::all_vertices(64);
        VSpan a = VSpan(verts).first(32), b = VSpan(verts).subspan(32);
        std::size_t truth = 0;
        for (Vertex u : a)
            for (Vertex v : b)
                if (g.has_edge(u, v)) ++truth;
        int ok = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            double est = estimate_edges(r.o, a, b, ap(0.15, 0.05, 40000 + s));
            if (est >= 0.85 * truth && est <= 1.15 * truth) ++ok;
        }
        CHECK(ok >= 95);
    }
    SUBCASE("parameter validation") {
        Rig r(gen_complete(4));
        auto a = vs({0}), b = vs({1});
        CHECK_THROWS_AS(estimate_edges(r.o, a, b, ap(0.0, 0.1, 1)), std::invalid_argument);
        CHECK_THROWS_AS(estimate_edges(r.o, a, b, ap(0.1, 1.0, 1)), std::invalid_argument);
    }
}

TEST_CASE("approx_degree") {
    SUBCASE("isolated vertex is exact zero") {
        Rig r(build_graph(8, std::vector<Edge>{{1, 2}}));
        auto z = test::vertices_except(8, 0);
        CHECK(approx_degree(r.o, 0, z, ap(0.2, 0.1, 1)) == 0.0);
    }
    SUBCASE("degree-1 vertex is exact via enumeration fallback") {
        Rig r(gen_path(3));
        auto z = test::vertices_except(3, 0);
        CHECK(approx_degree(r.o, 0, z, ap(0.2, 0.1, 1)) == 1.0);
    }
    SUBCASE("star center over 63 leaves, eps=0.1: in [56,70] in >=95/100 runs") {
        Rig r(gen_star(63));
        auto z = test::vertices_except(64, 0);
        int ok = 0;
        for (std::uint64_t s = 0; s < 100; ++s) {
            double est = approx_degree(r.o, 0, z, ap(0.1, 0.05, 600 + s));
            if (est >= 56 && est <= 70) ++ok;
        }
        CHECK(ok >= 95);
    }
}

TEST_CASE("sample_edge") {
    SUBCASE("single edge with probability one") {
        Rig r(build_graph(2, std::vector<Edge>{{0, 1}}));
        auto a = vs({0}), b = vs({1});
        for (std::uint64_t s = 0; s < 20; ++s) CHECK(sample_edge(r.o, a, b, ap(0.1, 0.1, s)) == Edge{0, 1});
    }
    SUBCASE("K_{2,2}: TV distance from uniform <= 0.02 over 1e5 draws") {
        Rig r(gen_complete_bipartite(2, 2));
        auto a = vs({0, 1}), b = vs({2, 3});
        std::map<Edge, std::uint64_t> hist;
        const std::uint64_t draws = 100000;
        Rng seeds(12345);
        for (std::uint64_t i = 0; i < draws; ++i) ++hist[sample_edge(r.o, a, b, ap(0.1, 0.1, seeds.next_u64()))];
        CHECK(test::tv_from_uniform(hist, 4, draws) <= 0.02);
    }
    SUBCASE("path 0-1-2 with A={0,2}, B={1}: each edge frequency in [0.48,0.52]") {
        Rig r(gen_path(3));
        auto a = vs({0, 2}), b = vs({1});
        std::uint64_t c01 = 0;
        const std::uint64_t draws = 100000;
        Rng seeds(777);
        for (std::uint64_t i = 0; i < draws; ++i)
            if (sample_edge(r.o, a, b, ap(0.1, 0.1, seeds.next_u64())) == Edge{0, 1}) ++c01;
        double f = static_cast<double>(c01) / draws;
        CHECK(f >= 0.48);
        CHECK(f <= 0.52);
    }
    SUBCASE("empty edge set rejected") {
        Rig r(build_graph(4, {}));
        auto a = vs({0}), b = vs({1});
        CHECK_THROWS_AS(sample_edge(r.o, a, b, ap(0.1, 0.1, 5)), std::invalid_argument);
    }
}

TEST_CASE("random_neighbor") {
    SUBCASE("degree-1 vertex returns its unique neighbor") {
        Rig r(gen_path(3));
        auto z = test::vertices_except(3, 0);
        for (std::uint64_t s = 0; s < 10; ++s) CHECK(random_neighbor(r.o, 0, z, ap(0.1, 0.1, s)) == 1);
    }
    SUBCASE("star center over 4 leaves: each leaf frequency in [0.23,0.27]") {
        Rig r(gen_star(4));
        auto z = test::vertices_except(5, 0);
        std::map<Vertex, std::uint64_t> hist;
        const std::uint64_t draws = 100000;
        Rng seeds(5150);
        for (std::uint64_t i = 0; i < draws; ++i) ++hist[random_neighbor(r.o, 0, z, ap(0.1, 0.1, seeds.next_u64()))];
        for (Vertex leaf = 1; leaf <= 4; ++leaf) {
            double f = static_cast<double>(hist[leaf]) / draws;
            CHECK(f >= 0.23);
            CHECK(f <= 0.27);
        }
    }
    SUBCASE("ER(64,0.2) fixed vertex: TV from uniform over N(v) <= 0.02 at 1e5 draws") {
        Graph g = gen_er(64, 0.2, Seed{31});
        Rig r(g);
        const Vertex v = 5;
        auto z = test::vertices_except(64, v);
        auto nbrs = g.neighbors(v);
        REQUIRE(!nbrs.empty());
        std::map<Edge, std::uint64_t> hist; // key by (v,w) pairs for the helper
        const std::uint64_t draws = 100000;
        Rng seeds(8);
        for (std::uint64_t i = 0; i < draws; ++i)
            ++hist[Edge(v, random_neighbor(r.o, v, z, ap(0.1, 0.1, seeds.next_u64())))];
        CHECK(test::tv_from_uniform(hist, nbrs.size(), draws) <= 0.02);
    }
}

TEST_CASE("global walk scheme is exactly unbiased for m: all 4-vertex graphs") {
    // E over (uniform nonempty bipartition, walk) of 2*(1-2^(1-n))*estimate
    // must equal the edge count exactly. Enumerates all 16 assignments and
    // the full walk tree per assignment.
    for (std::uint32_t mask = 0; mask < 64; ++mask) {
        std::vector<Edge> edges;
        int slot = 0;
        for (Vertex a = 0; a < 4; ++a)
            for (Vertex b = a + 1; b < 4; ++b, ++slot)
                if ((mask >> slot) & 1) edges.emplace_back(a, b);
        Graph g = build_graph(4, edges);

        const double pvalid = 1.0 - std::ldexp(1.0, 1 - 4);
        double expect = 0.0;
        int valid = 0;
        for (std::uint32_t assign = 0; assign < 16; ++assign) {
            std::vector<Vertex> a, b;
            for (Vertex v = 0; v < 4; ++v) ((assign >> v) & 1 ? a : b).push_back(v);
            if (a.empty() || b.empty()) continue;
            ++valid;
            expect += 2.0 * pvalid * test::walk_expectation(g, a, b);
        }
        expect /= valid;
        CHECK(expect == doctest::Approx(static_cast<double>(edges.size())).epsilon(1e-12));
    }
}

TEST_CASE("oracle handles are shareable: concurrent queries stay consistent and fully metered") {
    Graph g = gen_er(64, 0.2, Seed{12321});
    OracleHandle h(g);
    constexpr int kThreads = 4, kQueries = 2000;
    std::vector<std::thread> pool;
    std::atomic<int> wrong{0};
    std::atomic<std::uint64_t> issued{0};
    for (int t = 0; t < kThreads; ++t)
        pool.emplace_back([&, t] {
            DirectBis o(h);
            Rng rng(900 + t);
            for (int i = 0; i < kQueries; ++i) {
                std::vector<Vertex> a, b;
                for (Vertex v = 0; v < 64; ++v) {
                    auto r = rng.below(3);
                    if (r == 0) a.push_back(v);
                    else if (r == 1) b.push_back(v);
                }
                if (a.empty() || b.empty()) continue;
                bool answer = o.bis(a, b);
                issued.fetch_add(1);
                if (answer != test::cross_edge_truth(g, a, b)) wrong.fetch_add(1);
            }
        });
    for (auto& th : pool) th.join();
    CHECK(wrong.load() == 0);
    // ledger totals equal the number of calls actually issued
    CHECK(h.snapshot().bis == issued.load());
    CHECK(issued.load() > 0);
}

TEST_CASE("estimate_edges_global") {
    SUBCASE("small graphs resolve exactly") {
        Rig r(gen_complete(8));
        CHECK(estimate_edges_global(r.o, ap(0.05, 0.01, 4)) == 28.0);
        Rig e(build_graph(6, {}));
        CHECK(estimate_edges_global(e.o, ap(0.2, 0.1, 4)) == 0.0);
    }
    SUBCASE("accuracy on a denser graph over seeds") {
        Graph g = gen_er(96, 0.5, Seed{2024});
        Rig r(g);
        const double truth = static_cast<double>(g.edge_count());
        int ok = 0;
        for (std::uint64_t s = 0; s < 60; ++s) {
            double est = estimate_edges_global(r.o, ap(0.1, 0.05, 71000 + s));
            if (est >= 0.9 * truth && est <= 1.1 * truth) ++ok;
        }
        CHECK(ok >= 57);
    }
}

TEST_CASE("global edge sampler is uniform over the whole edge set") {
    SUBCASE("rejection-walk start on a dense small graph") {
        // starts in the walk regime and is free to switch to the learned
        // edge list; every regime mix must stay exactly uniform
        Graph g = gen_er(12, 0.5, Seed{66});
        Rig r(g);
        auto edges = test::edges_sorted(g);
        REQUIRE(!edges.empty());
        GlobalEdgeSampler sampler(r.o, static_cast<double>(edges.size()), 1, Rng(1234));
        std::map<Edge, std::uint64_t> hist;
        const std::uint64_t draws = 200000;
        for (std::uint64_t i = 0; i < draws; ++i) ++hist[sampler.draw()];
        CHECK(test::tv_from_uniform(hist, edges.size(), draws) <= 0.02);
        for (const auto& [e, c] : hist) CHECK(g.has_edge(e.u, e.v));
    }
    SUBCASE("enumerated mode on a sparse graph") {
        Graph g = gen_path(40); // 39 edges in a 40-vertex universe
        Rig r(g);
        GlobalEdgeSampler sampler(r.o, 39.0, 100000, Rng(99));
        std::map<Edge, std::uint64_t> hist;
        const std::uint64_t draws = 100000;
        for (std::uint64_t i = 0; i < draws; ++i) ++hist[sampler.draw()];
        CHECK(test::tv_from_uniform(hist, 39, draws) <= 0.02);
    }
}

TEST_CASE("primitive runs are replayable from the seed") {
    Graph g = gen_er(48, 0.2, Seed{3});
    auto run = [&] {
        Rig r(g);
        auto verts = test::all_vertices(48);
        VSpan a = VSpan(verts).first(24), b = VSpan(verts).subspan(24);
        double est = estimate_edges(r.o, a, b, ap(0.15, 0.05, 424242));
        Edge e = sample_edge(r.o, a, b, ap(0.15, 0.05, 171717));
        return std::tuple{est, e, r.h.snapshot()};
    };
    auto r1 = run();
    auto r2 = run();
    CHECK(std::get<0>(r1) == std::get<0>(r2));
    CHECK(std::get<1>(r1) == std::get<1>(r2));
    CHECK(std::get<2>(r1) == std::get<2>(r2));
}
