#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "errors.hpp"
#include "forward_sim.hpp"
#include "genealogy.hpp"
#include "graph.hpp"
#include "oracles.hpp"
#include "stats.hpp"

using namespace nvm;

TEST_SUITE_BEGIN("genealogy");

TEST_CASE("full noise kills every path at birth") {
    RootedGraph g = build_family("complete:4");
    SplitMix rng(1);
    for (int rep = 0; rep < 50; ++rep) {
        MeetPattern pat = sample_meet_pattern(g, 1.0, {0, 2, 5}, 5, rng);
        for (int i = 0; i < 3; ++i) {
            CHECK(pat.depths[i] == 0);
            for (int j = 0; j < 3; ++j) CHECK(pat.met[i][j] == (i == j));
        }
    }
}

TEST_CASE("met is a coalescence equivalence") {
    RootedGraph g = build_family("complete:3");
    SplitMix rng(7);
    for (int rep = 0; rep < 2000; ++rep) {
        MeetPattern pat = sample_meet_pattern(g, 0.3, {0, 1, 2, 4}, 30, rng);
        const int k = 4;
        for (int i = 0; i < k; ++i) {
            CHECK(pat.met[i][i]);
            for (int j = 0; j < k; ++j) {
                CHECK(pat.met[i][j] == pat.met[j][i]);
                for (int l = 0; l < k; ++l)
                    if (pat.met[i][j] && pat.met[j][l]) CHECK(pat.met[i][l]);
            }
        }
    }
}

TEST_CASE("forced two-step return on the single edge") {
    // On K_2 the offset-2 path returns to the root iff it survives twice.
    RootedGraph g = build_family("complete:2");
    MeetingProbs mp = estimate_meeting_probs(g, 0.5, {0, 2}, 100000, 1e-8, 21);
    const Estimate& e = mp.event("meet_0_2");
    CHECK(std::fabs(e.value - 0.25) <= 3.0 * e.stderr_);
    CHECK(e.truncation_bound <= 1e-8);
}

TEST_CASE("bipartite parity forbids odd-offset meetings") {
    for (const char* spec : {"bipartite:2,3", "cycle:4", "tree:2,2"}) {
        RootedGraph g = build_family(spec);
        MeetingProbs mp = estimate_meeting_probs(g, 0.4, {0, 1}, 20000, 1e-6, 5);
        CHECK(mp.event("meet_0_1").value == 0.0);
    }
}

TEST_CASE("pairwise estimate matches the pair-chain value on C4") {
    RootedGraph g = build_family("cycle:4");
    MeetingProbs mp = estimate_meeting_probs(g, 0.5, {0, 2}, 100000, 1e-8, 33);
    const Estimate& e = mp.event("meet_0_2");
    CHECK(std::fabs(e.value - 1.0 / 7.0) <= 3.0 * e.stderr_);
}

TEST_CASE("inclusion chains hold on every run") {
    RootedGraph g = build_family("complete:4");
    for (uint64_t seed : {1ull, 2ull, 3ull}) {
        MeetingProbs mp = estimate_meeting_probs(g, 0.25, {0, 1, 3}, 20000, 1e-6, seed);
        const double p_all = mp.event("meet_all").value;
        CHECK(p_all <= mp.event("meet_0_1").value);
        CHECK(p_all <= mp.event("meet_0_3").value);
        CHECK(p_all <= mp.event("meet_1_3").value);
    }
    // Four paths: tilde events sit below their pairwise events.
    MeetingProbs mp = estimate_meeting_probs(g, 0.25, {0, 2, 4, 6}, 20000, 1e-6, 9);
    CHECK(mp.event("tilde_2_4_6").value <= mp.event("meet_0_2").value);
    CHECK(mp.event("tilde_4_2_6").value <= mp.event("meet_0_4").value);
    CHECK(mp.event("tilde_6_2_4").value <= mp.event("meet_0_6").value);
}

TEST_CASE("estimates are deterministic and thread-invariant") {
    RootedGraph g = build_family("complete:5");
    auto run = [&] { return estimate_meeting_probs(g, 0.3, {0, 2, 4}, 40000, 1e-6, 1234); };
    std::string saved;
    if (const char* cur = std::getenv("THREADS")) saved = cur;
    setenv("THREADS", "1", 1);
    MeetingProbs one = run();
    setenv("THREADS", "3", 1);
    MeetingProbs three = run();
    if (saved.empty())
        unsetenv("THREADS");
    else
        setenv("THREADS", saved.c_str(), 1);
    for (const auto& [name, est] : one.events) {
        CHECK(est.value == three.event(name).value);
        CHECK(est.stderr_ == three.event(name).stderr_);
    }
}

TEST_CASE("a2 estimator on paths") {
    // Middle of a path: both neighbors are leaves, a2 = 1.
    RootedGraph p3_mid = load_edge_list("root 1\n0 1\n1 2\n");
    Estimate mid = estimate_a2(p3_mid, 0.5, 50000, 3);
    CHECK(std::fabs(mid.value - 1.0) <= 3.0 * mid.stderr_);
    // End of the path: a2 = 1/2.
    RootedGraph p3_end = build_family("path:3");
    Estimate end = estimate_a2(p3_end, 0.5, 50000, 4);
    CHECK(std::fabs(end.value - 0.5) <= 3.0 * end.stderr_);
}

TEST_CASE("a2 estimator agrees with the formula on a random graph") {
    RootedGraph g = sample_uniform_graph(12, 5);
    Estimate est = estimate_a2(g, 0.3, 100000, 6);
    CHECK(std::fabs(est.value - a2_formula(g)) <= 3.0 * est.stderr_);
}

TEST_CASE("exact enumeration: forced return probability at t=2") {
    RootedGraph g = build_family("complete:2");
    ExactPatternProbs ee = exact_enumeration_probs(g, 0.5, {0, 2}, 2);
    CHECK(ee.event("meet_0_2") == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("exact enumeration at t=0 equals the d-step return probability") {
    // The only shared node can be (root, 0).
    for (const char* spec : {"complete:3", "cycle:4", "star:3"}) {
        RootedGraph g = build_family(spec);
        for (int d : {1, 2, 3}) {
            ExactPatternProbs ee = exact_enumeration_probs(g, 0.4, {0, d}, 0);
            // Independent route: kernel power times survival.
            std::vector<double> v(g.vertex_count(), 0.0);
            v[g.root()] = 1.0;
            for (int step = 0; step < d; ++step) {
                std::vector<double> v2(g.vertex_count(), 0.0);
                for (int32_t w = 0; w < g.vertex_count(); ++w)
                    for (int32_t x : g.neighbors(w)) v2[x] += v[w] / g.degree(w);
                v = v2;
            }
            const double expect = std::pow(0.6, d) * v[g.root()];
            CHECK(ee.event("meet_0_" + std::to_string(d)) ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("exact enumeration is nondecreasing in t for meet events") {
    for (const char* spec : {"complete:2", "path:3", "cycle:3", "star:3"}) {
        RootedGraph g = build_family(spec);
        for (double eps : {0.3, 0.6}) {
            double prev = -1.0;
            for (int t = 0; t <= 6; ++t) {
                const double v = exact_enumeration_probs(g, eps, {0, 2}, t).event("meet_0_2");
                CHECK(v >= prev - 1e-13);
                prev = v;
            }
        }
    }
}

TEST_CASE("exact enumeration matches the sampler at matched horizon") {
    RootedGraph g = build_family("path:3");
    const int t = 4;
    ExactPatternProbs ee = exact_enumeration_probs(g, 0.5, {0, 2}, t);
    MeetingProbs mp = estimate_meeting_probs_at_horizon(g, 0.5, {0, 2}, 1000000, t + 2, 77, 0.0);
    const double pe = ee.event("meet_0_2");
    const Estimate& est = mp.event("meet_0_2");
    CHECK(std::fabs(est.value - pe) <= 4.0 * est.stderr_);
}

TEST_CASE("exact enumeration size caps") {
    CHECK_THROWS_AS(exact_enumeration_probs(build_family("complete:5"), 0.5, {0, 2}, 2),
                    CapacityError);
    CHECK_THROWS_AS(exact_enumeration_probs(build_family("complete:3"), 0.5, {0, 4}, 5),
                    CapacityError);
}

TEST_CASE("q assembly from components") {
    std::map<int32_t, double> zero{{2, 0.0}, {4, 0.0}, {6, 0.0}};
    CHECK(q_from_components(zero, 0.0, {0, 0, 0}, 2, 4, 6) == doctest::Approx(0.125));
    std::map<int32_t, double> ones{{2, 1.0}, {4, 1.0}, {6, 1.0}};
    CHECK(q_from_components(ones, 1.0, {0, 0, 0}, 2, 4, 6) == doctest::Approx(1.0));
    std::map<int32_t, double> missing{{2, 0.5}, {4, 0.5}};
    CHECK_THROWS_WITH_AS(q_from_components(missing, 0.1, {0, 0, 0}, 2, 4, 6),
                         doctest::Contains("lag 6"), ParamError);
}

TEST_CASE("four-path tilde estimates match the absorbing solver") {
    RootedGraph g = build_family("bipartite:2,3");
    const double eps = 0.4;
    const std::vector<int32_t> offsets{0, 2, 4, 6};
    JointExactResult exact = joint_exact_small(g, eps, offsets);
    MeetingProbs mc = estimate_meeting_probs(g, eps, offsets, 400000, 1e-7, 8899);
    struct Pair {
        const char* name;
        double value;
    };
    const Pair cases[] = {
        {"tilde_2_4_6", exact.exact_two_pairs(0, 1, 2, 3)},
        {"tilde_4_2_6", exact.exact_two_pairs(0, 2, 1, 3)},
        {"tilde_6_2_4", exact.exact_two_pairs(0, 3, 1, 2)},
        {"meet_all", exact.together({0, 1, 2, 3})},
        {"meet_0_2", exact.together({0, 1})},
        {"meet_2_4", exact.together({1, 2})},
    };
    for (const auto& c : cases) {
        const Estimate& est = mc.event(c.name);
        const double scale =
            std::max(est.stderr_, std::sqrt(c.value * (1 - c.value) / 400000.0));
        CHECK(std::fabs(est.value - c.value) <= 4.0 * scale + 1e-7);
    }
}

TEST_CASE("depths stop at the death event and are capped by the horizon") {
    RootedGraph g = build_family("complete:3");
    SplitMix rng(5);
    for (int rep = 0; rep < 500; ++rep) {
        const int32_t horizon = 12;
        MeetPattern pat = sample_meet_pattern(g, 0.5, {0, 3}, horizon, rng);
        CHECK(pat.depths[0] <= horizon - 3);  // born at relative time 0
        CHECK(pat.depths[1] <= horizon);
        CHECK(pat.depths[0] >= 0);
    }
}

TEST_CASE("forward statistic and backward estimate agree on three families") {
    for (const char* spec : {"complete:5", "cycle:6", "bipartite:2,3"}) {
        RootedGraph g = build_family(spec);
        const double eps = 0.3;
        Trace tr = simulate_trace(g, eps, 800000, 606 + g.vertex_count());
        Estimate forward = pd_hat(tr, 2);
        MeetingProbs mp = estimate_meeting_probs(g, eps, {0, 2}, 300000, 1e-7, 607);
        const Estimate& backward = mp.event("meet_0_2");
        const double combined = std::sqrt(forward.stderr_ * forward.stderr_ +
                                          backward.stderr_ * backward.stderr_);
        CHECK(std::fabs(forward.value - backward.value) <= 4.0 * combined);
    }
}

TEST_CASE("quadruple coincidence from a forward trace matches assembled q") {
    // Monte Carlo components on K_{2,3} against the empirical four-fold
    // coincidence frequency of a long trace.
    RootedGraph g = build_family("bipartite:2,3");
    const double eps = 0.4;
    MeetingProbs mp = estimate_meeting_probs(g, eps, {0, 2, 4, 6}, 400000, 1e-6, 2024);
    std::map<int32_t, double> pairwise{{2, mp.event("meet_0_2").value},
                                       {4, mp.event("meet_0_4").value},
                                       {6, mp.event("meet_0_6").value}};
    const double q = q_from_components(pairwise, mp.event("meet_all").value,
                                       {mp.event("tilde_2_4_6").value,
                                        mp.event("tilde_4_2_6").value,
                                        mp.event("tilde_6_2_4").value},
                                       2, 4, 6);
    // The assembled value is a linear combination of the components, so its
    // stderr is bounded by the coefficient-weighted sum regardless of the
    // correlations within the shared run.
    const double se_q = (3.0 * mp.event("meet_0_2").stderr_ + 2.0 * mp.event("meet_0_4").stderr_ +
                         mp.event("meet_0_6").stderr_ + mp.event("tilde_2_4_6").stderr_ +
                         mp.event("tilde_4_2_6").stderr_ + mp.event("tilde_6_2_4").stderr_ +
                         mp.event("meet_all").stderr_) /
                        8.0;
    Trace tr = simulate_trace(g, eps, 2000000, 31415);
    RepStatResult s = repetition_quadruple(tr, 2, 4, 6);
    const double combined = std::sqrt(s.batch_stderr * s.batch_stderr + se_q * se_q);
    CHECK(std::fabs(s.value - q) <= 4.0 * combined);
}

TEST_SUITE_END();
