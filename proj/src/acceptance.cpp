#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>

#include "distinguish.hpp"
#include "errors.hpp"
#include "forward_sim.hpp"
#include "genealogy.hpp"
#include "graph.hpp"
#include "numeric.hpp"
#include "oracles.hpp"
#include "serialize.hpp"
#include "stats.hpp"

namespace nvm {

namespace {

const std::vector<double> kEpsGrid{0.1, 0.3, 0.5, 0.7, 0.9};
const std::vector<double> kEpsGridFine{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

struct Check {
    bool pass = true;
    std::string detail;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += "FAILED " + what;
        }
    }
    void note(const std::string& s) {
        if (!detail.empty()) detail += "; ";
        detail += s;
    }
};

// 1. Closed forms agree with the pair-chain solver across the families.
CriterionResult c1() {
    Check ck;
    double worst = 0.0;
    for (int n = 3; n <= 8; ++n) {
        RootedGraph g = build_family("complete:" + std::to_string(n));
        for (double eps : kEpsGrid) {
            CompleteClosedForm cf = closed_forms_complete(n, eps);
            worst = std::max(worst, std::fabs(cf.p1 - pd_exact(g, eps, 1)));
            worst = std::max(worst, std::fabs(cf.p2 - pd_exact(g, eps, 2)));
        }
    }
    for (int n = 1; n <= 11; ++n) {
        for (int m = 1; n + m <= 12; ++m) {
            if (n + m < 3) continue;
            RootedGraph g =
                build_family("bipartite:" + std::to_string(n) + "," + std::to_string(m));
            for (double eps : kEpsGrid)
                for (int d = 1; d <= 4; ++d)
                    worst = std::max(
                        worst, std::fabs(closed_form_bipartite(n, m, eps, d) - pd_exact(g, eps, d)));
        }
    }
    for (int k = 1; k <= 3; ++k) {
        for (int h = 1; h <= 3; ++h) {
            RootedGraph g = build_family("tree:" + std::to_string(k) + "," + std::to_string(h));
            for (double eps : kEpsGrid)
                worst = std::max(worst, std::fabs(tree_p2(k, h, eps).p2 - pd_exact(g, eps, 2)));
        }
    }
    ck.expect(worst < 1e-10, "max closed-form deviation " + format_double(worst));
    ck.note("max|closed-pair_chain|=" + format_double(worst));
    return {1, "closed_form_vs_pair_chain", ck.pass, ck.detail};
}

// 2. Complete-graph identity between p1 and p2.
CriterionResult c2() {
    Check ck;
    double worst = 0.0;
    for (int n = 2; n <= 50; ++n) {
        for (double eps : kEpsGridFine) {
            CompleteClosedForm cf = closed_forms_complete(n, eps);
            const double b = 1.0 - eps;
            const double rhs = b * b / (n - 1.0) + b * (n - 2.0) / (n - 1.0) * cf.p1;
            worst = std::max(worst, std::fabs(cf.p2 - rhs));
        }
    }
    ck.expect(worst < 1e-12, "identity residual " + format_double(worst));
    ck.note("max_residual=" + format_double(worst));
    return {2, "complete_identity", ck.pass, ck.detail};
}

// 3. Exact enumeration vs sampler, and convergence to the absorbing limits.
CriterionResult c3() {
    Check ck;
    const std::vector<std::string> graphs{"complete:2", "path:3", "cycle:3", "star:3"};
    const std::vector<std::vector<int32_t>> offset_sets{{0, 2}, {0, 1, 3}};
    const int64_t replicas = 100000;
    double worst_z = 0.0;
    for (const auto& spec : graphs) {
        RootedGraph g = build_family(spec);
        for (double eps : {0.3, 0.5}) {
            for (const auto& offsets : offset_sets) {
                // The enumeration cap is t + max offset <= 8.
                const int32_t t = std::min(6, 8 - offsets.back());
                ExactPatternProbs exact = exact_enumeration_probs(g, eps, offsets, t);
                MeetingProbs mc = estimate_meeting_probs_at_horizon(
                    g, eps, offsets, replicas, t + offsets.back(), 0xACCE5501, 0.0);
                for (const auto& name : pattern_event_names(offsets)) {
                    const double pe = exact.event(name);
                    const Estimate& est = mc.event(name);
                    const double scale = std::max(
                        est.stderr_, std::sqrt(pe * (1.0 - pe) / replicas));
                    const double diff = std::fabs(est.value - pe);
                    if (scale == 0.0) {
                        ck.expect(diff < 1e-12, spec + " " + name + " exact-vs-mc degenerate");
                    } else {
                        worst_z = std::max(worst_z, diff / scale);
                        ck.expect(diff <= 4.0 * scale + 1e-12,
                                  spec + " " + name + " mc z=" + format_double(diff / scale));
                    }
                }
                // Meet-type events grow with t and stay below the limit.
                JointExactResult lim = joint_exact_small(g, eps, offsets);
                std::map<std::string, double> limit_value;
                const int k = static_cast<int>(offsets.size());
                for (const auto& name : pattern_event_names(offsets)) {
                    if (name.rfind("tilde_", 0) == 0) continue;
                    if (name == "meet_all") {
                        std::vector<int> all(k);
                        for (int i = 0; i < k; ++i) all[i] = i;
                        limit_value[name] = lim.together(all);
                    } else {
                        auto rest = name.substr(5);
                        auto us = rest.find('_');
                        int32_t oa = std::stoi(rest.substr(0, us));
                        int32_t ob = std::stoi(rest.substr(us + 1));
                        int ra = -1, rb = -1;
                        for (int i = 0; i < k; ++i) {
                            if (offsets[i] == oa) ra = i;
                            if (offsets[i] == ob) rb = i;
                        }
                        limit_value[name] = lim.together({ra, rb});
                    }
                }
                std::map<std::string, double> prev;
                for (int32_t tt = 0; tt <= t; ++tt) {
                    ExactPatternProbs e = exact_enumeration_probs(g, eps, offsets, tt);
                    for (auto& [name, lv] : limit_value) {
                        const double v = e.event(name);
                        if (prev.count(name))
                            ck.expect(v >= prev[name] - 1e-12,
                                      spec + " " + name + " monotone at t=" + std::to_string(tt));
                        ck.expect(v <= lv + 1e-12, spec + " " + name + " below limit");
                        prev[name] = v;
                    }
                }
            }
        }
    }
    ck.note("worst mc z=" + format_double(worst_z));
    return {3, "brute_force_oracle", ck.pass, ck.detail};
}

// 4. Law of large numbers on the complete graph.
CriterionResult c4() {
    Check ck;
    RootedGraph g = build_family("complete:5");
    Trace tr = simulate_trace(g, 0.3, 2000000, 20240601);
    Estimate p = pd_hat(tr, 2);
    const double target = closed_forms_complete(5, 0.3).p2;
    const double err = std::fabs(p.value - target);
    ck.expect(err < 4.0 * p.stderr_, "LLN deviation " + format_double(err) + " vs 4*stderr " +
                                         format_double(4.0 * p.stderr_));
    ck.note("err=" + format_double(err) + " stderr=" + format_double(p.stderr_));
    return {4, "lln_complete5", ck.pass, ck.detail};
}

// 5. Cycle parity, the odd lower bound, and strict monotonicity.
CriterionResult c5() {
    Check ck;
    for (double eps : {0.2, 0.5}) {
        for (int n : {4, 6, 8}) {
            RootedGraph g = build_family("cycle:" + std::to_string(n));
            const double p1 = pd_exact(g, eps, 1);
            ck.expect(p1 == 0.0, "even cycle p1 exact zero n=" + std::to_string(n));
        }
        for (int n : {3, 5, 7}) {
            RootedGraph g = build_family("cycle:" + std::to_string(n));
            const double p1 = pd_exact(g, eps, 1);
            const double bound = std::pow((1.0 - eps) / 2.0, n);
            ck.expect(p1 >= bound, "odd cycle p1 bound n=" + std::to_string(n));
        }
        auto p2_of = [&](int n) {
            return pd_exact(build_family("cycle:" + std::to_string(n)), eps, 2);
        };
        for (const auto& ns : {std::vector<int>{3, 5, 7, 9}, std::vector<int>{4, 6, 8}}) {
            for (size_t i = 0; i + 1 < ns.size(); ++i)
                ck.expect(p2_of(ns[i]) > p2_of(ns[i + 1]),
                          "cycle p2 strict decrease " + std::to_string(ns[i]) + ">" +
                              std::to_string(ns[i + 1]) + " eps=" + format_double(eps));
        }
    }
    return {5, "cycle_parity_strictness", ck.pass, ck.detail};
}

// 6. Monotonicity across families and the lattice dimension.
CriterionResult c6() {
    Check ck;
    for (double eps : kEpsGridFine) {
        for (int n = 6; n < 12; ++n)
            ck.expect(closed_forms_complete(n, eps).p2 > closed_forms_complete(n + 1, eps).p2,
                      "complete p2 decrease n=" + std::to_string(n));
        ck.expect(tree_p2(2, 2, eps).p2 > tree_p2(3, 2, eps).p2, "tree p2 decrease k=2>3");
        ck.expect(tree_p2(3, 2, eps).p2 > tree_p2(4, 2, eps).p2, "tree p2 decrease k=3>4");
        ck.expect(tree_p2(2, 1, eps).p2 > tree_p2(2, 2, eps).p2, "tree p2 decrease h=1>2");
        ck.expect(tree_p2(2, 2, eps).p2 > tree_p2(2, 3, eps).p2, "tree p2 decrease h=2>3");
    }
    const int64_t replicas = 100000;
    std::vector<Estimate> lat;
    for (int d = 1; d <= 3; ++d) lat.push_back(lattice_p2(d, 0.2, replicas, 5150 + d));
    for (int d = 0; d < 2; ++d) {
        const double lo = lat[d].value - 3.0 * lat[d].stderr_;
        const double hi = lat[d + 1].value + 3.0 * lat[d + 1].stderr_;
        ck.expect(lo > hi, "lattice p2 3-sigma separation d=" + std::to_string(d + 1));
    }
    ck.note("lattice p2 = " + format_double(lat[0].value) + ", " + format_double(lat[1].value) +
            ", " + format_double(lat[2].value));
    return {6, "monotonicity_suite", ck.pass, ck.detail};
}

// 7. Star indistinguishability at the center.
CriterionResult c7() {
    Check ck;
    for (int m = 1; m <= 20; ++m) {
        for (double eps : kEpsGrid) {
            const double q = (1.0 - eps) * (1.0 - eps);
            ck.expect(std::fabs(closed_form_bipartite(1, m, eps, 2) - q) < 1e-15,
                      "center p2 independent of m=" + std::to_string(m));
        }
    }
    Trace t3 = simulate_trace(build_family("star:3"), 0.5, 1000000, 101);
    Trace t8 = simulate_trace(build_family("star:8"), 0.5, 1000000, 102);
    const double pval = window_chi2_two_sample(t3, t8, 4);
    ck.expect(pval > 0.01, "window chi2 p=" + format_double(pval));
    ck.note("chi2 p=" + format_double(pval));
    for (const Trace* tr : {&t3, &t8}) {
        RepStatResult s = repetition_plain(*tr, 2);
        const double err = std::fabs(s.value - 0.625);
        ck.expect(err < 4.0 * s.batch_stderr,
                  "two-step transition frequency err=" + format_double(err));
    }
    return {7, "star_indistinguishability", ck.pass, ck.detail};
}

// 8. Bipartite cubic crossing and the quadruple statistic at the tie.
CriterionResult c8() {
    Check ck;
    Crossing cr = find_crossing(3, 1, 2, 2, 1e-9);
    ck.expect(cr.status == Crossing::Status::found, "crossing found");
    const double expected = 1.0 - std::sqrt(2.0) / 2.0;
    ck.expect(std::fabs(cr.eps_star - expected) < 1e-6,
              "eps* err=" + format_double(std::fabs(cr.eps_star - expected)));
    ck.expect(cr.cubic_residual < 1e-9, "cubic residual " + format_double(cr.cubic_residual));
    QuadrupleExperiment qe =
        quadruple_statistic_experiment(3, 1, 2, 2, cr.eps_star, "exact_small", 0, 0);
    ck.expect(qe.max_pairwise_tie_error < 1e-9,
              "pairwise tie error " + format_double(qe.max_pairwise_tie_error));
    for (const auto* side : {&qe.first, &qe.second}) {
        ck.expect(std::fabs(side->q_direct - side->q_assembled) < 1e-9,
                  side->spec + " q consistency " +
                      format_double(std::fabs(side->q_direct - side->q_assembled)));
    }
    // The sign of the small-instance q difference is reported, not asserted.
    ck.note("eps*=" + format_double(cr.eps_star) +
            " q_diff=" + format_double(qe.q_difference));
    return {8, "bipartite_cubic_crossing", ck.pass, ck.detail};
}

// 9. Bipartite asymptotic tie decay.
CriterionResult c9() {
    Check ck;
    const double alpha = 0.25;
    std::vector<double> diffs, pvals;
    for (int64_t n1 : {64, 128, 256}) {
        Quadruple q = bipartite_quadruple(1, 4, n1);
        const double pa = bipartite_p(static_cast<int32_t>(q.n1), static_cast<int32_t>(q.m1), alpha);
        const double pb = bipartite_p(static_cast<int32_t>(q.n2), static_cast<int32_t>(q.m2), alpha);
        diffs.push_back(std::fabs(pa - pb));
        pvals.push_back(pa);
    }
    ck.expect(diffs[0] > diffs[1] && diffs[1] > diffs[2], "tie gap decreases");
    const double r1 = diffs[1] / diffs[0];
    const double r2 = diffs[2] / diffs[1];
    ck.expect(r1 >= 0.35 && r1 <= 0.65, "gap ratio 128/64 = " + format_double(r1));
    ck.expect(r2 >= 0.35 && r2 <= 0.65, "gap ratio 256/128 = " + format_double(r2));
    ck.note("gap ratios=" + format_double(r1) + "," + format_double(r2) +
            " value ratios=" + format_double(pvals[1] / pvals[0]) + "," +
            format_double(pvals[2] / pvals[1]));
    return {9, "bipartite_asymptotic_tie", ck.pass, ck.detail};
}

// 10. Triple-coincidence identity on a bipartite graph.
CriterionResult c10() {
    Check ck;
    Trace tr = simulate_trace(build_family("bipartite:2,3"), 0.4, 2000000, 424242);
    TripleIdentity ti = triple_identity_residual(tr, 2, 4);
    ck.expect(ti.residual < 5.0 * ti.combined_stderr,
              "residual " + format_double(ti.residual) + " vs 5*se " +
                  format_double(5.0 * ti.combined_stderr));
    ck.note("residual=" + format_double(ti.residual) +
            " combined_se=" + format_double(ti.combined_stderr));
    return {10, "triple_identity", ck.pass, ck.detail};
}

// 11. Moment diagnostics of the thinned statistic.
CriterionResult c11() {
    Check ck;
    RootedGraph g = build_family("complete:5");
    Trace pilot = simulate_trace(g, 0.3, 200000, 778);
    const double p_hat = pd_hat(pilot, 2).value;
    const int32_t kappa = choose_kappa(0.3, 2, p_hat);
    const int64_t batches = 2000, per_batch = 500;
    // Margin covers the burn-in prefix lost to thinning.
    const int64_t t_len = kappa * (batches * per_batch + 128) + 2 + kappa;
    Trace tr = simulate_trace(g, 0.3, t_len, 777);
    CltReport rep = clt_report(tr, 2, kappa, batches);
    ck.expect(rep.batch_size >= per_batch, "batch size >= 500");
    ck.expect(std::fabs(rep.m1) < 1e-12 && std::fabs(rep.m2 - 1.0) < 1e-12,
              "standardization exact");
    ck.expect(std::fabs(rep.m3) < 0.15, "K5 m3=" + format_double(rep.m3));
    ck.expect(std::fabs(rep.m4 - 3.0) < 0.35, "K5 m4=" + format_double(rep.m4));
    ck.note("kappa=" + std::to_string(kappa) + " m3=" + format_double(rep.m3) +
            " m4=" + format_double(rep.m4));
    RootedGraph k2 = build_family("complete:2");
    for (uint64_t seed = 1; seed <= 10; ++seed) {
        const int32_t kc = 3;  // the kappa rule degenerates to d+1 as eps -> 1
        Trace ctrl = simulate_trace(k2, 1.0, kc * (batches * per_batch + 128) + 2 + kc, seed);
        CltReport r = clt_report(ctrl, 2, kc, batches);
        ck.expect(std::fabs(r.m3) < 0.15 && std::fabs(r.m4 - 3.0) < 0.35,
                  "control seed " + std::to_string(seed) + " m3=" + format_double(r.m3) +
                      " m4=" + format_double(r.m4));
    }
    return {11, "clt_diagnostics", ck.pass, ck.detail};
}

// 12. Random-graph collision scan and the a2 estimator.
CriterionResult c12() {
    Check ck;
    A2CollisionReport rep = random_graph_a2_experiment(64, 7, 11);
    ck.expect(rep.collisions.empty(),
              "cross-graph collisions=" + std::to_string(rep.collisions.size()));
    ck.note("min gap=" + format_double(rep.min_nonzero_gap));
    RootedGraph g = sample_uniform_graph(12, 5);
    Estimate est = estimate_a2(g, 0.3, 100000, 31337);
    const double exact = a2_formula(g);
    const double err = std::fabs(est.value - exact);
    ck.expect(err < 3.0 * est.stderr_,
              "a2 estimator err=" + format_double(err) + " 3se=" + format_double(3 * est.stderr_));
    return {12, "random_graph_a2", ck.pass, ck.detail};
}

// 13. Pairwise separation of the (p1,p2) profiles for complete graphs and cycles.
CriterionResult c13() {
    Check ck;
    double worst_complete = 1.0, worst_cycle = 1.0;
    for (int n1 = 3; n1 <= 8; ++n1) {
        for (int n2 = n1 + 1; n2 <= 8; ++n2) {
            for (double eps : kEpsGrid) {
                CompleteClosedForm a = closed_forms_complete(n1, eps);
                CompleteClosedForm b = closed_forms_complete(n2, eps);
                const double sep =
                    std::max(std::fabs(a.p1 - b.p1), std::fabs(a.p2 - b.p2));
                worst_complete = std::min(worst_complete, sep);
                ck.expect(sep > 1e-9, "complete pair " + std::to_string(n1) + "," +
                                          std::to_string(n2) + " eps=" + format_double(eps));
            }
        }
    }
    std::map<std::pair<int, double>, std::pair<double, double>> cycle_vals;
    for (int n = 3; n <= 9; ++n) {
        RootedGraph g = build_family("cycle:" + std::to_string(n));
        for (double eps : kEpsGrid)
            cycle_vals[{n, eps}] = {pd_exact(g, eps, 1), pd_exact(g, eps, 2)};
    }
    for (int n1 = 3; n1 <= 9; ++n1) {
        for (int n2 = n1 + 1; n2 <= 9; ++n2) {
            for (double eps : kEpsGrid) {
                auto [a1, a2] = cycle_vals[{n1, eps}];
                auto [b1, b2] = cycle_vals[{n2, eps}];
                const double sep = std::max(std::fabs(a1 - b1), std::fabs(a2 - b2));
                worst_cycle = std::min(worst_cycle, sep);
                ck.expect(sep > 1e-9, "cycle pair " + std::to_string(n1) + "," +
                                          std::to_string(n2) + " eps=" + format_double(eps));
            }
        }
    }
    ck.note("min separation: complete=" + format_double(worst_complete) +
            " cycle=" + format_double(worst_cycle));
    return {13, "profile_separation", ck.pass, ck.detail};
}

// 14. Determinism: byte-identical emitted tables, thread-count invariance.
CriterionResult c14() {
    Check ck;
    auto sweep_csv = [] {
        std::vector<double> grid;
        for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
        SweepResult s = sweep_eps("complete:3", "complete:5", 2, grid);
        CsvTable csv({"epsilon", "value_first", "value_second", "difference", "source",
                      "sign_change_next"});
        for (size_t i = 0; i < s.rows.size(); ++i) {
            const auto& r = s.rows[i];
            csv.add_row({format_double(r.epsilon), format_double(r.value_first),
                         format_double(r.value_second), format_double(r.difference), r.source,
                         s.sign_change_next[i] ? "1" : "0"});
        }
        return csv.to_string();
    };
    ck.expect(sweep_csv() == sweep_csv(), "sweep CSV byte-identical");

    RootedGraph g = build_family("complete:5");
    Trace a = simulate_trace(g, 0.3, 100000, 9001);
    Trace b = simulate_trace(g, 0.3, 100000, 9001);
    ck.expect(a.bits == b.bits, "trace regeneration byte-identical");

    auto run_mc = [&] {
        return estimate_meeting_probs(g, 0.3, {0, 2, 4}, 50000, 1e-6, 77);
    };
    std::string saved;
    if (const char* cur = std::getenv("THREADS")) saved = cur;
    setenv("THREADS", "1", 1);
    MeetingProbs one = run_mc();
    setenv("THREADS", "4", 1);
    MeetingProbs four = run_mc();
    if (saved.empty())
        unsetenv("THREADS");
    else
        setenv("THREADS", saved.c_str(), 1);
    for (const auto& [name, est] : one.events) {
        ck.expect(est.value == four.event(name).value && est.stderr_ == four.event(name).stderr_,
                  "thread invariance of " + name);
    }
    return {14, "determinism", ck.pass, ck.detail};
}

}  // namespace

CriterionResult run_criterion(int id) {
    static const std::map<int, std::function<CriterionResult()>> table{
        {1, c1},  {2, c2},  {3, c3},  {4, c4},  {5, c5},  {6, c6},  {7, c7},
        {8, c8},  {9, c9},  {10, c10}, {11, c11}, {12, c12}, {13, c13}, {14, c14}};
    auto it = table.find(id);
    require(it != table.end(), "criterion: id must be in 1..14");
    const auto start = std::chrono::steady_clock::now();
    CriterionResult r = it->second();
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %2d %s%s%s (%.1fs)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.detail.empty() ? "" : ": ", r.detail.c_str(), r.seconds);
    std::fflush(stdout);
    return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids) {
    std::vector<int> run = ids;
    if (run.empty())
        for (int i = 1; i <= 14; ++i) run.push_back(i);
    std::vector<CriterionResult> out;
    for (int id : run) out.push_back(run_criterion(id));
    return out;
}

void write_results_csv(const std::vector<CriterionResult>& results, const std::string& path) {
    CsvTable csv({"id", "name", "pass", "detail"});
    for (const auto& r : results)
        csv.add_row({std::to_string(r.id), r.name, r.pass ? "1" : "0", r.detail});
    csv.write(path);
}

int count_failures(const std::vector<CriterionResult>& results) {
    int n = 0;
    for (const auto& r : results)
        if (!r.pass) ++n;
    return n;
}

}  // namespace nvm
