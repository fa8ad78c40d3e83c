#include <doctest.h>

#include <cmath>

#include "errors.hpp"
#include "forward_sim.hpp"
#include "graph.hpp"
#include "oracles.hpp"
#include "rng.hpp"
#include "stats.hpp"

using namespace nvm;

namespace {

Trace trace_from_bits(std::vector<uint8_t> bits, double eps = 0.5) {
    Trace t;
    t.bits = std::move(bits);
    t.epsilon = eps;
    t.burn_in = 0;
    return t;
}

}  // namespace

TEST_SUITE_BEGIN("stats");

TEST_CASE("repetition statistic on hand patterns") {
    Trace zeros = trace_from_bits({0, 0, 0, 0, 0});
    CHECK(repetition_plain(zeros, 1).value == 1.0);
    Trace alt = trace_from_bits({0, 1, 0, 1, 0});
    CHECK(repetition_plain(alt, 1).value == 0.0);
    CHECK(repetition_plain(alt, 2).value == 1.0);
    Trace ones = trace_from_bits(std::vector<uint8_t>(10, 1));
    CHECK(repetition_quadruple(ones, 2, 4, 6).value == 1.0);
    CHECK_THROWS_AS(repetition_plain(trace_from_bits({0, 1}), 2), ParamError);
}

TEST_CASE("complement invariance of the coincidence statistics") {
    SplitMix rng(12);
    std::vector<uint8_t> bits(5000);
    for (auto& b : bits) b = static_cast<uint8_t>(rng.next() & 1);
    Trace t = trace_from_bits(bits);
    for (auto& b : bits) b ^= 1;
    Trace tc = trace_from_bits(bits);
    for (int d : {1, 2, 5}) {
        CHECK(repetition_plain(t, d).value == repetition_plain(tc, d).value);
    }
    CHECK(repetition_quadruple(t, 1, 2, 3).value == repetition_quadruple(tc, 1, 2, 3).value);
}

TEST_CASE("quadruple frequency never exceeds its pairwise parts") {
    Trace tr = simulate_trace(build_family("complete:4"), 0.35, 200000, 8);
    const double quad = repetition_quadruple(tr, 2, 4, 6).value;
    CHECK(quad <= repetition_plain(tr, 2).value);
    CHECK(quad <= repetition_plain(tr, 4).value);
    CHECK(quad <= repetition_plain(tr, 6).value);
}

TEST_CASE("pd_hat trivial cases") {
    Trace noise = simulate_trace(build_family("complete:2"), 1.0, 1000000, 13);
    Estimate p = pd_hat(noise, 2);
    CHECK(p.value >= 0.0);
    CHECK(p.value <= 0.01);
    Trace ones = trace_from_bits(std::vector<uint8_t>(100, 1));
    CHECK(pd_hat(ones, 3).value == 1.0);
}

TEST_CASE("pd_hat matches the closed form on K5") {
    Trace tr = simulate_trace(build_family("complete:5"), 0.3, 2000000, 20240601);
    Estimate p = pd_hat(tr, 2);
    CHECK(std::fabs(p.value - closed_forms_complete(5, 0.3).p2) <= 4.0 * p.stderr_);
    // The statistic sits above one half (minus noise) on honest traces.
    RepStatResult s = repetition_plain(tr, 2);
    CHECK(2.0 * s.value - 1.0 >= -4.0 * s.batch_stderr);
}

TEST_CASE("kappa selection") {
    CHECK(choose_kappa(0.5, 2, 0.2) == 6);
    CHECK(choose_kappa(0.999999, 3, 0.0) == 4);
    CHECK_THROWS_AS(choose_kappa(0.5, 2, 1.0), ParamError);
    // Minimality: the returned kappa satisfies the bound, kappa-1 does not.
    SplitMix rng(77);
    for (int rep = 0; rep < 200; ++rep) {
        const double eps = 0.05 + 0.9 * rng.next_unit();
        const int d = 1 + static_cast<int>(rng.next_below(5));
        const double p = rng.next_unit() * 0.95;
        const int32_t kappa = choose_kappa(eps, d, p);
        const double b = 1.0 - eps;
        const double level = (1.0 + p) * (1.0 - 0.5 * (1.0 + p));
        auto ok = [&](int32_t kk) {
            return 4.0 * std::pow(b, kk - d) < (1.0 - std::pow(b, kk)) * level;
        };
        CHECK(kappa > d);
        CHECK(ok(kappa));
        if (kappa > d + 1) CHECK_FALSE(ok(kappa - 1));
    }
}

TEST_CASE("variance profile of the pure-noise trace is linear with slope 1/4") {
    Trace tr = simulate_trace(build_family("complete:2"), 1.0, 1 << 21, 14);
    VarianceProfile vp = variance_profile(tr, 2);
    CHECK(vp.classification == "linear");
    CHECK(std::fabs(vp.slope - 0.25) < 0.03);
    CHECK(vp.slope >= 0.0);
    CHECK_THROWS_AS(variance_profile(trace_from_bits(std::vector<uint8_t>(100, 0)), 1),
                    ParamError);
}

TEST_CASE("variance profile of a correlated trace stays linear with slope in (0,1)") {
    Trace tr = simulate_trace(build_family("complete:5"), 0.3, 1 << 21, 15);
    VarianceProfile vp = variance_profile(tr, 2);
    CHECK(vp.classification == "linear");
    CHECK(vp.slope > 0.0);
    CHECK(vp.slope < 1.0);
}

TEST_CASE("clt report standardization is exact") {
    Trace tr = simulate_trace(build_family("complete:2"), 1.0, 500000, 16);
    CltReport r = clt_report(tr, 2, 3, 100);
    CHECK(std::fabs(r.m1) < 1e-12);
    CHECK(std::fabs(r.m2 - 1.0) < 1e-12);
    CHECK_THROWS_AS(clt_report(tr, 2, 3, 99), ParamError);
}

TEST_CASE("triple identity residual on the pure-noise trace") {
    Trace tr = simulate_trace(build_family("complete:2"), 1.0, 1000000, 17);
    TripleIdentity ti = triple_identity_residual(tr, 2, 4);
    CHECK(ti.residual < 0.01);
    CHECK(ti.residual >= 0.0);
}

TEST_SUITE_END();
