#include "distinguish.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "forward_sim.hpp"
#include "genealogy.hpp"
#include "numeric.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace nvm {

namespace {

uint64_t fnv64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

struct FamilyParams {
    std::string name;
    std::vector<int64_t> args;
};

FamilyParams family_params(const std::string& spec) {
    FamilyParams out;
    std::string cur;
    bool in_name = true;
    for (char c : spec + ":") {
        if (c == ':' || c == ',') {
            if (in_name) {
                out.name = cur;
                in_name = false;
            } else if (!cur.empty()) {
                try {
                    out.args.push_back(std::stoll(cur));
                } catch (...) {
                    out.args.push_back(-1);  // non-numeric tail (e.g. "leaf")
                    if (cur == "leaf") out.args.back() = -2;
                }
            }
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

}  // namespace

std::string Decision::verdict_name() const {
    switch (verdict) {
        case Verdict::distinct_first_greater:
            return "distinct_first_greater";
        case Verdict::distinct_second_greater:
            return "distinct_second_greater";
        default:
            return "undecided";
    }
}

Decision compare(const std::string& spec_a, const std::string& spec_b, double epsilon, int32_t d,
                 int64_t t_budget, double significance, uint64_t seed) {
    require(significance > 0.0 && significance <= 0.1, "significance: must be in (0, 0.1]");
    require(t_budget >= 1024, "t_budget: must be >= 1024");
    RootedGraph ga = build_family(spec_a);
    RootedGraph gb = build_family(spec_b);
    require(ga.is_finite() && gb.is_finite(), "compare: finite graphs required");

    // Seeds depend on the descriptor, not the argument position, so that
    // swapping the inputs negates z exactly.
    const uint64_t seed_a = hash2(seed, fnv64(spec_a));
    const uint64_t seed_b = hash2(seed, fnv64(spec_b));
    const double crit = normal_quantile(1.0 - significance / 2.0);

    std::vector<int64_t> stages;
    for (int64_t t = t_budget; t >= std::max<int64_t>(16384, t_budget / 8); t /= 2)
        stages.push_back(t);
    if (stages.empty()) stages.push_back(t_budget);
    std::reverse(stages.begin(), stages.end());

    Decision out;
    out.statistic = "plain(" + std::to_string(d) + ")";
    out.significance = significance;
    for (size_t i = 0; i < stages.size(); ++i) {
        const int64_t t = stages[i];
        Trace ta = simulate_trace(ga, epsilon, t, seed_a);
        Trace tb = simulate_trace(gb, epsilon, t, seed_b);
        RepStatResult sa = repetition_plain(ta, d);
        RepStatResult sb = repetition_plain(tb, d);
        const double diff = sa.value - sb.value;
        const double se = std::sqrt(sa.batch_stderr * sa.batch_stderr +
                                    sb.batch_stderr * sb.batch_stderr);
        out.z_score = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : std::copysign(1e9, diff));
        out.samples_used = t;
        out.value_first = sa.value;
        out.value_second = sb.value;
        const bool last = (i + 1 == stages.size());
        const double need = last ? crit : 2.0 * crit;
        if (std::fabs(out.z_score) >= need) {
            out.verdict = out.z_score > 0 ? Decision::Verdict::distinct_first_greater
                                          : Decision::Verdict::distinct_second_greater;
            return out;
        }
    }
    out.verdict = Decision::Verdict::undecided;
    return out;
}

namespace {

// Best available source for the lag-d coalescence probability of a family.
std::pair<double, std::string> pd_best_source(const std::string& spec, double eps, int32_t d) {
    FamilyParams fp = family_params(spec);
    if (fp.name == "complete" && d <= 2) {
        CompleteClosedForm cf = closed_forms_complete(static_cast<int32_t>(fp.args.at(0)), eps);
        return {d == 1 ? cf.p1 : cf.p2, "closed_form"};
    }
    if (fp.name == "bipartite") {
        return {closed_form_bipartite(static_cast<int32_t>(fp.args.at(0)),
                                      static_cast<int32_t>(fp.args.at(1)), eps, d),
                "closed_form"};
    }
    if (fp.name == "star") {
        const int32_t m = static_cast<int32_t>(fp.args.at(0));
        const bool leaf = fp.args.size() > 1 && fp.args[1] == -2;
        return {leaf ? closed_form_bipartite(m, 1, eps, d) : closed_form_bipartite(1, m, eps, d),
                "closed_form"};
    }
    if (fp.name == "lattice") {
        require(d == 2, "lattice: only the lag-2 value is available");
        Estimate e = lattice_p2(static_cast<int32_t>(fp.args.at(0)), eps, 200000, 12345);
        return {e.value, "monte_carlo"};
    }
    RootedGraph g = build_family(spec);
    if (g.vertex_count() <= 256) return {pd_exact(g, eps, d), "pair_chain"};
    MeetingProbs mp = estimate_meeting_probs(g, eps, {0, d}, 200000, 1e-4, 991);
    return {mp.event("meet_0_" + std::to_string(d)).value, "monte_carlo"};
}

}  // namespace

SweepResult sweep_eps(const std::string& spec_a, const std::string& spec_b, int32_t d,
                      const std::vector<double>& grid) {
    require(!grid.empty(), "grid: must be non-empty");
    for (size_t i = 0; i < grid.size(); ++i) {
        require(grid[i] > 0.0 && grid[i] < 1.0, "grid: epsilon values must be in (0,1)");
        if (i) require(grid[i] > grid[i - 1], "grid: must be sorted increasing");
    }
    SweepResult out;
    for (double eps : grid) {
        auto [va, sa] = pd_best_source(spec_a, eps, d);
        auto [vb, sb] = pd_best_source(spec_b, eps, d);
        SweepRow row;
        row.epsilon = eps;
        row.value_first = va;
        row.value_second = vb;
        row.difference = va - vb;
        row.source = sa == sb ? sa : sa + "+" + sb;
        out.rows.push_back(row);
    }
    out.sign_change_next.assign(out.rows.size(), false);
    for (size_t i = 0; i + 1 < out.rows.size(); ++i) {
        if (out.rows[i].difference * out.rows[i + 1].difference < 0.0) {
            out.sign_change_next[i] = true;
            out.brackets.emplace_back(out.rows[i].epsilon, out.rows[i + 1].epsilon);
        }
    }
    return out;
}

Quadruple bipartite_quadruple(int64_t alpha_num, int64_t alpha_den, int64_t n1) {
    require(alpha_den >= 2 && alpha_num >= 1 && alpha_num < alpha_den,
            "alpha: must be a rational in (0,1)");
    const int64_t g = std::gcd(alpha_num, alpha_den);
    const int64_t a = alpha_num / g, b = alpha_den / g;
    const int64_t b3 = b * b * b;
    if (n1 % b3 != 0)
        throw ParamError("n1: must be a multiple of " + std::to_string(b3) +
                         " (denominator cubed)");
    require(n1 >= b3, "n1: must be >= denominator cubed");
    Quadruple q;
    q.n1 = n1;
    q.n2 = (b - a) * n1 / b;
    q.m2 = (b - a) * q.n2 / b;
    q.m1 = (b - a) * q.m2 / b;
    // Construction identities.
    require(q.m1 * q.n1 == q.m2 * q.n2, "quadruple: product identity violated");
    require((q.m2 - q.m1) * b * b == (q.n1 - q.n2) * (b - a) * (b - a),
            "quadruple: slope identity violated");
    return q;
}

Crossing find_crossing(int64_t n1, int64_t m1, int64_t n2, int64_t m2, double tol) {
    require(tol > 0.0, "tol: must be positive");
    require(n1 >= 1 && m1 >= 1 && n2 >= 1 && m2 >= 1, "n,m: must be >= 1");
    Crossing out;
    if (n1 == n2 && m1 == m2) {
        out.status = Crossing::Status::degenerate_equal;
        return out;
    }
    auto diff = [&](double eps) {
        return bipartite_p(static_cast<int32_t>(n1), static_cast<int32_t>(m1), eps) -
               bipartite_p(static_cast<int32_t>(n2), static_cast<int32_t>(m2), eps);
    };
    // Interior grid scan; eps = 0 is always a degenerate tie and is skipped.
    const int steps = 999;
    double prev_eps = 1.0 / (steps + 1);
    double prev = diff(prev_eps);
    for (int i = 2; i <= steps; ++i) {
        const double eps = static_cast<double>(i) / (steps + 1);
        const double cur = diff(eps);
        if (prev == 0.0) {
            // Grid point is an exact root.
            out.status = Crossing::Status::found;
            out.eps_star = prev_eps;
            break;
        }
        if (prev * cur < 0.0) {
            double lo = prev_eps, hi = eps;
            double flo = prev;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = diff(mid);
                if ((fm < 0) == (flo < 0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            out.status = Crossing::Status::found;
            out.eps_star = 0.5 * (lo + hi);
            break;
        }
        prev = cur;
        prev_eps = eps;
    }
    if (out.status != Crossing::Status::found) return out;
    if (std::fabs(diff(out.eps_star)) >= tol)
        throw NumericError("find_crossing: bisection did not reach tolerance");
    const CubicCoeffs cc = cubic_coeffs(n1, m1, n2, m2);
    const double x = (1.0 - out.eps_star) * (1.0 - out.eps_star);
    out.cubic_residual = std::fabs(cc.eval(x));
    return out;
}

A2CollisionReport random_graph_a2_experiment(int32_t n, uint64_t seed1, uint64_t seed2) {
    require(n >= 8, "n: must be >= 8");
    RootedGraph g1 = sample_uniform_graph(n, seed1);
    RootedGraph g2 = sample_uniform_graph(n, seed2);
    auto a2_at = [](const RootedGraph& g, int32_t v) {
        double sum = 0.0;
        for (int32_t w : g.neighbors(v)) sum += 1.0 / g.degree(w);
        return sum / g.degree(v);
    };
    A2CollisionReport out;
    out.n = n;
    out.seed1 = seed1;
    out.seed2 = seed2;
    double min_gap = 2.0;
    for (int32_t u = 0; u < n; ++u) {
        const double a = a2_at(g1, u);
        for (int32_t v = 0; v < n; ++v) {
            const double gap = std::fabs(a - a2_at(g2, v));
            if (gap < 1e-12)
                out.collisions.emplace_back(u, v);
            else
                min_gap = std::min(min_gap, gap);
        }
    }
    out.min_nonzero_gap = min_gap;
    return out;
}

QuadrupleExperiment quadruple_statistic_experiment(int64_t n1, int64_t m1, int64_t n2, int64_t m2,
                                                   double eps_star, const std::string& mode,
                                                   int64_t t_budget, uint64_t seed) {
    require(mode == "exact_small" || mode == "monte_carlo", "mode: exact_small or monte_carlo");
    QuadrupleExperiment out;
    out.eps_star = eps_star;
    out.mode = mode;
    out.first.spec = "bipartite:" + std::to_string(n1) + "," + std::to_string(m1);
    out.second.spec = "bipartite:" + std::to_string(n2) + "," + std::to_string(m2);
    const std::vector<int32_t> offsets{0, 2, 4, 6};

    if (mode == "exact_small") {
        for (auto* side : {&out.first, &out.second}) {
            RootedGraph g = build_family(side->spec);
            JointExactResult joint = joint_exact_small(g, eps_star, offsets);
            side->p2 = joint.together({0, 1});
            side->p4 = joint.together({0, 2});
            side->p6 = joint.together({0, 3});
            side->q_direct = joint.coincidence_probability();
            std::map<int32_t, double> pairwise{{2, side->p2}, {4, side->p4}, {6, side->p6}};
            std::vector<double> tildes{joint.exact_two_pairs(0, 1, 2, 3),
                                       joint.exact_two_pairs(0, 2, 1, 3),
                                       joint.exact_two_pairs(0, 3, 1, 2)};
            side->q_assembled =
                q_from_components(pairwise, joint.together({0, 1, 2, 3}), tildes, 2, 4, 6);
        }
        out.max_pairwise_tie_error = std::max(
            {std::fabs(out.first.p2 - out.second.p2), std::fabs(out.first.p4 - out.second.p4),
             std::fabs(out.first.p6 - out.second.p6)});
        out.q_difference = out.first.q_direct - out.second.q_direct;
        return out;
    }

    for (auto* side : {&out.first, &out.second}) {
        RootedGraph g = build_family(side->spec);
        Trace tr = simulate_trace(g, eps_star, t_budget, hash2(seed, fnv64(side->spec)));
        RepStatResult s = repetition_quadruple(tr, 2, 4, 6);
        side->s246 = s.value;
        side->s246_stderr = s.batch_stderr;
    }
    const double se = std::sqrt(out.first.s246_stderr * out.first.s246_stderr +
                                out.second.s246_stderr * out.second.s246_stderr);
    out.q_difference = out.first.s246 - out.second.s246;
    out.z_score = se > 0.0 ? out.q_difference / se : 0.0;
    return out;
}

Json to_json(const Decision& d) {
    return Json{{"verdict", d.verdict_name()},   {"statistic", d.statistic},
                {"z_score", d.z_score},          {"significance", d.significance},
                {"samples_used", d.samples_used}, {"value_first", d.value_first},
                {"value_second", d.value_second}};
}

Json to_json(const SweepResult& s) {
    Json rows = Json::array();
    for (size_t i = 0; i < s.rows.size(); ++i) {
        const auto& r = s.rows[i];
        rows.push_back(Json{{"epsilon", r.epsilon},
                            {"value_first", r.value_first},
                            {"value_second", r.value_second},
                            {"difference", r.difference},
                            {"source", r.source},
                            {"sign_change_next", static_cast<bool>(s.sign_change_next[i])}});
    }
    Json brackets = Json::array();
    for (auto [lo, hi] : s.brackets) brackets.push_back(Json{{"lo", lo}, {"hi", hi}});
    return Json{{"rows", rows}, {"brackets", brackets}};
}

Json to_json(const A2CollisionReport& r) {
    Json cols = Json::array();
    for (auto [u, v] : r.collisions) cols.push_back(Json{{"u1", u}, {"u2", v}});
    return Json{{"n", r.n},
                {"seed1", r.seed1},
                {"seed2", r.seed2},
                {"collisions", cols},
                {"collision_count", r.collisions.size()},
                {"min_nonzero_gap", r.min_nonzero_gap}};
}

Json to_json(const QuadrupleExperiment& q) {
    auto side = [](const QuadrupleExperiment::Side& s) {
        return Json{{"spec", s.spec},       {"p2", s.p2},
                    {"p4", s.p4},           {"p6", s.p6},
                    {"q_direct", s.q_direct}, {"q_assembled", s.q_assembled},
                    {"s246", s.s246},       {"s246_stderr", s.s246_stderr}};
    };
    return Json{{"mode", q.mode},
                {"eps_star", q.eps_star},
                {"first", side(q.first)},
                {"second", side(q.second)},
                {"max_pairwise_tie_error", q.max_pairwise_tie_error},
                {"q_difference", q.q_difference},
                {"z_score", q.z_score}};
}

}  // namespace nvm
