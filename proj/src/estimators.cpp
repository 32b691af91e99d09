#include <bisq/estimators.hpp>

#include <bisq/graph.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <unordered_map>
#include <sstream>
#include <stdexcept>

namespace bisq {

void validate(const EstimatorConfig& cfg) {
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
        throw std::invalid_argument("estimator config: epsilon must be in (0,1)");
    if (!(cfg.delta > 0.0 && cfg.delta < 1.0))
        throw std::invalid_argument("estimator config: delta must be in (0,1)");
    if (cfg.c_high <= 0 || cfg.c_s <= 0 || cfg.c_f <= 0 || cfg.c_heavy <= 0)
        throw std::invalid_argument("estimator config: multipliers must be positive");
    if (cfg.l_floor < 1.0) throw std::invalid_argument("estimator config: l_floor must be >= 1");
}

namespace {

std::string format_double(double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
}

std::uint64_t derive_seed(Seed seed, std::uint64_t tag) { return Rng(seed).split(tag).next_u64(); }

LedgerSnapshot minus(const LedgerSnapshot& after, const LedgerSnapshot& before) {
    return {after.bis - before.bis, after.is - before.is, after.ee - before.ee};
}

} // namespace

bool high_rank_less(std::uint64_t deg_a, Vertex a, std::uint64_t deg_b, Vertex b) {
    return deg_a != deg_b ? deg_a < deg_b : a < b;
}

bool high_designates(std::uint64_t deg_u, Vertex u, std::uint64_t deg_v, Vertex v,
                     std::uint64_t deg_w, Vertex w) {
    return high_rank_less(deg_u, u, deg_w, w) && high_rank_less(deg_v, v, deg_w, w);
}

double triangle_est_high(BisSurface& o, const EstimatorConfig& cfg, double l_guess, double m_hat,
                         KnowledgeBase* kb) {
    validate(cfg);
    if (l_guess < 1.0) throw std::invalid_argument("triangle_est_high: l_guess must be >= 1");
    if (m_hat < 1.0) return 0.0;

    const double eps = cfg.epsilon;
    const std::uint64_t trials = static_cast<std::uint64_t>(
        std::ceil(cfg.c_high * std::max(1.0, std::pow(m_hat, 1.5) / l_guess) *
                  std::log(2.0 / cfg.delta) / (eps * eps)));

    Rng rng(derive_seed(cfg.seed, 0x41));
    KnowledgeBase local(o);
    KnowledgeBase& know = kb ? *kb : local;
    // Inside the geometric search the knowledge base persists and the next
    // levels double the trial budget, so size the sampler's mode choice for
    // the whole descent rather than this level alone.
    const std::uint64_t draw_hint = kb ? trials * 8 : trials;
    GlobalEdgeSampler sampler(o, m_hat, draw_hint, rng.split(1), &know);
    Rng pick(rng.split(2));

    double sum = 0.0;
    for (std::uint64_t i = 0; i < trials; ++i) {
        Edge e = sampler.draw();
        Vertex u = e.u, v = e.v;
        std::uint64_t du = know.degree(u), dv = know.degree(v);
        if (!high_rank_less(du, u, dv, v)) {
            std::swap(u, v);
            std::swap(du, dv);
        }
        const auto& nu = know.neighbors(u);
        Vertex w = nu[pick.below(nu.size())];
        if (w == v) continue;
        VSpan vv(&v, 1), ww(&w, 1);
        if (!o.bis(vv, ww)) continue; // wedge does not close
        std::uint64_t dw = know.degree(w);
        if (high_designates(du, u, dv, v, dw, w)) sum += m_hat * static_cast<double>(du);
    }
    return sum / static_cast<double>(trials);
}

LowSketch build_low_sketch(BisSurface& o, const EstimatorConfig& cfg, double l_guess,
                           double m_hat, std::size_t n, KnowledgeBase* kb) {
    validate(cfg);
    if (l_guess < 1.0) throw std::invalid_argument("build_low_sketch: l_guess must be >= 1");

    LowSketch sk;
    sk.n = n;
    sk.m_hat = m_hat;
    sk.l_guess = l_guess;
    sk.epsilon = cfg.epsilon;

    const double eps2 = cfg.epsilon * cfg.epsilon;
    const double logn = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
    sk.p_rate = std::min(1.0, cfg.c_s * logn / (eps2 * std::sqrt(l_guess)));
    if (m_hat < 1.0 || n == 0) return sk; // nothing to sample from

    Rng rng(derive_seed(cfg.seed, 0x10));
    Rng s_rng = rng.split(1);
    for (std::size_t v = 0; v < n; ++v)
        if (s_rng.bernoulli(sk.p_rate)) sk.s_set.push_back(static_cast<Vertex>(v));

    // S's full neighborhoods give E_S; the induced edges among each
    // neighborhood give E_S'.
    std::vector<std::vector<Vertex>> s_nbrs(sk.s_set.size());
    for (std::size_t i = 0; i < sk.s_set.size(); ++i) {
        Vertex v = sk.s_set[i];
        if (kb) {
            s_nbrs[i] = kb->neighbors(v);
        } else {
            std::vector<Vertex> z;
            z.reserve(n - 1);
            for (std::size_t u = 0; u < n; ++u)
                if (u != v) z.push_back(static_cast<Vertex>(u));
            s_nbrs[i] = neighbors_of(o, v, z);
        }
        for (Vertex w : s_nbrs[i]) sk.e_s.emplace_back(v, w);
    }
    std::sort(sk.e_s.begin(), sk.e_s.end());
    sk.e_s.erase(std::unique(sk.e_s.begin(), sk.e_s.end()), sk.e_s.end());

    for (std::size_t i = 0; i < sk.s_set.size(); ++i) {
        if (s_nbrs[i].size() < 2) continue;
        if (kb) {
            const auto& ind = kb->induced_neighbor_edges(sk.s_set[i]);
            sk.e_s_prime.insert(sk.e_s_prime.end(), ind.begin(), ind.end());
        } else {
            for (const Edge& e : enum_edges_induced(o, s_nbrs[i])) sk.e_s_prime.push_back(e);
        }
    }
    std::sort(sk.e_s_prime.begin(), sk.e_s_prime.end());
    sk.e_s_prime.erase(std::unique(sk.e_s_prime.begin(), sk.e_s_prime.end()), sk.e_s_prime.end());

    sk.f_target = static_cast<std::uint64_t>(
        std::ceil(cfg.c_f * m_hat * logn / (eps2 * std::sqrt(l_guess))));
    const std::uint64_t draw_hint = kb ? sk.f_target * 8 : sk.f_target;
    GlobalEdgeSampler sampler(o, m_hat, draw_hint, rng.split(2), kb);
    sk.f_multiset.reserve(sk.f_target);
    for (std::uint64_t i = 0; i < sk.f_target; ++i) sk.f_multiset.push_back(sampler.draw());

    std::vector<Vertex> vf;
    vf.reserve(2 * sk.f_multiset.size());
    for (const Edge& e : sk.f_multiset) {
        vf.push_back(e.u);
        vf.push_back(e.v);
    }
    std::sort(vf.begin(), vf.end());
    vf.erase(std::unique(vf.begin(), vf.end()), vf.end());

    for (Vertex v : vf) {
        if (kb) {
            // restrict the cached neighborhood facts to V(F)
            for (const Edge& e : kb->induced_neighbor_edges(v))
                if (std::binary_search(vf.begin(), vf.end(), e.u) &&
                    std::binary_search(vf.begin(), vf.end(), e.v))
                    sk.e_f.push_back(e);
            continue;
        }
        std::vector<Vertex> others;
        others.reserve(vf.size() - 1);
        for (Vertex u : vf)
            if (u != v) others.push_back(u);
        if (others.empty()) continue;
        std::vector<Vertex> zv = neighbors_of(o, v, others); // N(v) ∩ V(F)
        if (zv.size() < 2) continue;
        for (const Edge& e : enum_edges_induced(o, zv)) sk.e_f.push_back(e);
    }
    std::sort(sk.e_f.begin(), sk.e_f.end());
    sk.e_f.erase(std::unique(sk.e_f.begin(), sk.e_f.end()), sk.e_f.end());
    return sk;
}

namespace {

// Heaviness classifier over the sketch: an edge (or candidate pair) is heavy
// iff at least theta sampled vertices are adjacent to both endpoints. The
// signatures are computable from E_S alone.
class HeavyClassifier {
  public:
    HeavyClassifier(const LowSketch& sk, double theta) : theta_(theta) {
        idx_.assign(sk.n, -1);
        for (std::size_t i = 0; i < sk.s_set.size(); ++i) idx_[sk.s_set[i]] = static_cast<int>(i);
        sig_.assign(sk.n, Bitset(sk.s_set.size()));
        for (const Edge& e : sk.e_s) {
            if (idx_[e.u] >= 0) sig_[e.v].set(static_cast<std::size_t>(idx_[e.u]));
            if (idx_[e.v] >= 0) sig_[e.u].set(static_cast<std::size_t>(idx_[e.v]));
        }
    }

    std::size_t sampled_co_neighbors(Vertex x, Vertex y) const {
        return sig_[x].intersect_count(sig_[y]);
    }

    bool heavy(Vertex x, Vertex y) const {
        return static_cast<double>(sampled_co_neighbors(x, y)) >= theta_;
    }

    // S-members adjacent to both endpoints, as s_set indices.
    std::vector<std::size_t> apex_indices(Vertex x, Vertex y) const {
        std::vector<std::size_t> out;
        const auto wx = sig_[x].words();
        const auto wy = sig_[y].words();
        for (std::size_t wi = 0; wi < wx.size(); ++wi) {
            std::uint64_t w = wx[wi] & wy[wi];
            while (w) {
                out.push_back(wi * 64 + static_cast<std::size_t>(std::countr_zero(w)));
                w &= w - 1;
            }
        }
        return out;
    }

  private:
    double theta_;
    std::vector<int> idx_;
    std::vector<Bitset> sig_;
};

} // namespace

double estimate_from_sketch(const LowSketch& sk, const EstimatorConfig& cfg, double l_guess,
                            double m_hat) {
    validate(cfg);
    if (sk.l_guess != l_guess || sk.m_hat != m_hat || sk.epsilon != cfg.epsilon)
        throw std::invalid_argument("estimate_from_sketch: sketch was built with different parameters");
    if (sk.n < 3 || sk.f_target == 0) return 0.0;

    const double eps2 = cfg.epsilon * cfg.epsilon;
    const double logn = std::log(static_cast<double>(std::max<std::size_t>(sk.n, 2)));
    const double theta = cfg.c_heavy * logn / eps2;
    HeavyClassifier cls(sk, theta);

    // Triangles owning a heavy edge: counted at their lexicographically least
    // heavy edge, through apexes that landed in S, weight 1/p each.
    double heavy_sum = 0.0;
    for (const Edge& e : sk.e_s_prime) {
        if (!cls.heavy(e.u, e.v)) continue;
        for (std::size_t idx : cls.apex_indices(e.u, e.v)) {
            Vertex v = sk.s_set[idx];
            bool designated = true;
            if (cls.heavy(e.u, v) && Edge(e.u, v) < e) designated = false;
            if (designated && cls.heavy(e.v, v) && Edge(e.v, v) < e) designated = false;
            if (designated) heavy_sum += 1.0 / sk.p_rate;
        }
    }

    // All-light triangles: wedges formed by two distinct F draws sharing a
    // vertex whose closing edge is present (and light). Draw lightness is
    // precomputed once per draw; closing-edge lightness is memoized.
    std::vector<std::vector<std::uint32_t>> incident(sk.n);
    std::vector<char> draw_light(sk.f_multiset.size());
    std::unordered_map<std::uint64_t, bool> closing_light;
    for (std::size_t i = 0; i < sk.f_multiset.size(); ++i) {
        const Edge& e = sk.f_multiset[i];
        incident[e.u].push_back(static_cast<std::uint32_t>(i));
        incident[e.v].push_back(static_cast<std::uint32_t>(i));
        draw_light[i] = !cls.heavy(e.u, e.v);
    }
    std::uint64_t light_pairs = 0;
    for (std::size_t y = 0; y < sk.n; ++y) {
        const auto& inc = incident[y];
        if (inc.size() < 2) continue;
        for (std::size_t a = 0; a < inc.size(); ++a) {
            if (!draw_light[inc[a]]) continue;
            const Edge& ea = sk.f_multiset[inc[a]];
            Vertex x = ea.u == y ? ea.v : ea.u;
            for (std::size_t b = a + 1; b < inc.size(); ++b) {
                if (!draw_light[inc[b]]) continue;
                const Edge& eb = sk.f_multiset[inc[b]];
                Vertex z = eb.u == y ? eb.v : eb.u;
                if (z == x) continue; // same edge drawn twice
                Edge closing(x, z);
                if (!std::binary_search(sk.e_f.begin(), sk.e_f.end(), closing)) continue;
                const std::uint64_t key =
                    (static_cast<std::uint64_t>(closing.u) << 32) | closing.v;
                auto it = closing_light.find(key);
                if (it == closing_light.end())
                    it = closing_light.emplace(key, !cls.heavy(closing.u, closing.v)).first;
                if (it->second) ++light_pairs;
            }
        }
    }
    const double ft = static_cast<double>(sk.f_target);
    double light_sum = static_cast<double>(light_pairs) * m_hat * m_hat / (3.0 * ft * ft);
    return heavy_sum + light_sum;
}

double triangle_est_low(BisSurface& o, const EstimatorConfig& cfg, double l_guess, double m_hat,
                        std::size_t n, KnowledgeBase* kb) {
    LowSketch sk = build_low_sketch(o, cfg, l_guess, m_hat, n, kb);
    return estimate_from_sketch(sk, cfg, l_guess, m_hat);
}

std::size_t sketch_co_neighbor_count(const LowSketch& sk, Vertex x, Vertex y) {
    return HeavyClassifier(sk, 0.0).sampled_co_neighbors(x, y);
}

double sketch_heavy_threshold(const LowSketch& sk, const EstimatorConfig& cfg) {
    const double logn = std::log(static_cast<double>(std::max<std::size_t>(sk.n, 2)));
    return cfg.c_heavy * logn / (cfg.epsilon * cfg.epsilon);
}

bool sketch_edge_heavy(const LowSketch& sk, const EstimatorConfig& cfg, Vertex x, Vertex y) {
    return HeavyClassifier(sk, sketch_heavy_threshold(sk, cfg)).heavy(x, y);
}

std::string EstimateReport::to_json() const {
    std::ostringstream os;
    os << "{\"t_hat\":" << format_double(t_hat) << ",\"algorithm\":\"" << algorithm
       << "\",\"l_used\":" << format_double(l_used) << ",\"ledger\":" << ledger_snapshot.to_json()
       << ",\"seed\":" << seed.value << "}";
    return os.str();
}

EstimateReport triangle_est(BisSurface& o, const EstimatorConfig& cfg) {
    validate(cfg);
    const std::size_t n = o.vertex_count();
    EstimateReport report;
    report.seed = cfg.seed;

    const double triples = n >= 3 ? static_cast<double>(n) * (n - 1) * (n - 2) / 6.0 : 0.0;
    double l_guess = triples / 2.0;
    const double iterations = std::max(1.0, std::ceil(std::log2(std::max(2.0, triples))));
    const double delta_iter =
        std::min(1.0 / static_cast<double>(std::max<std::size_t>(n, 2)), cfg.delta / iterations);

    KnowledgeBase know(o);
    double m_hat = 0.0;
    if (l_guess >= cfg.l_floor && n >= 2) {
        ApproxParams ap{cfg.epsilon / 4.0, delta_iter, Seed{derive_seed(cfg.seed, 0x6d)}};
        m_hat = estimate_edges_global(o, ap, &know);
    }

    std::uint64_t iter = 0;
    for (;; ++iter, l_guess /= 2.0) {
        LedgerSnapshot before = o.snapshot();
        if (l_guess < cfg.l_floor) {
            // Exact fallback: enumerate the whole edge set and count locally.
            double exact = 0.0;
            if (n >= 2)
                exact = static_cast<double>(
                    count_triangles_exact(Graph::build(n, know.all_edges())));
            report.t_hat = exact;
            report.algorithm = "exact-fallback";
            report.l_used = l_guess;
            report.guesses.history.push_back(
                {l_guess, exact, "exact-fallback", minus(o.snapshot(), before)});
            break;
        }
        EstimatorConfig iter_cfg = cfg;
        iter_cfg.delta = delta_iter;
        iter_cfg.seed = Seed{derive_seed(cfg.seed, 0x1000 + iter)};
        const bool use_high = l_guess >= m_hat;
        double t_hat = use_high ? triangle_est_high(o, iter_cfg, l_guess, m_hat, &know)
                                : triangle_est_low(o, iter_cfg, l_guess, m_hat, n, &know);
        report.guesses.history.push_back(
            {l_guess, t_hat, use_high ? "high" : "low", minus(o.snapshot(), before)});
        if (t_hat >= l_guess / 2.0) {
            report.t_hat = t_hat;
            report.algorithm = use_high ? "high" : "low";
            report.l_used = l_guess;
            break;
        }
    }
    report.guesses.l_guess = report.l_used;
    report.ledger_snapshot = o.snapshot();
    return report;
}

} // namespace bisq
