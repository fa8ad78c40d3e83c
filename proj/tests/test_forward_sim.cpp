#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "errors.hpp"
#include "forward_sim.hpp"
#include "graph.hpp"
#include "stats.hpp"

using namespace nvm;

TEST_SUITE_BEGIN("forward_sim");

TEST_CASE("pure-noise trace has fair repetition frequency") {
    Trace tr = simulate_trace(build_family("complete:2"), 1.0, 100000, 11);
    RepStatResult s = repetition_plain(tr, 1);
    CHECK(std::fabs(s.value - 0.5) < 0.01);
}

TEST_CASE("traces are deterministic in the seed and prefix-stable in t") {
    RootedGraph g = build_family("complete:5");
    Trace a = simulate_trace(g, 0.3, 5000, 99);
    Trace b = simulate_trace(g, 0.3, 5000, 99);
    CHECK(a.bits == b.bits);
    Trace longer = simulate_trace(g, 0.3, 10000, 99);
    CHECK(std::equal(a.bits.begin(), a.bits.end(), longer.bits.begin()));
    Trace other = simulate_trace(g, 0.3, 5000, 100);
    CHECK(a.bits != other.bits);
}

TEST_CASE("lattice input is rejected") {
    RootedGraph z2 = build_family("lattice:2");
    CHECK_THROWS_AS(simulate_trace(z2, 0.5, 100, 1), ParamError);
}

TEST_CASE("burn-in default follows the geometric tail rule") {
    CHECK(default_burn_in(1.0) == 1);
    // smallest b with 0.7^b < 1e-9 is 59
    CHECK(default_burn_in(0.3) == 59);
    Trace tr = simulate_trace(build_family("complete:3"), 0.3, 20, 5);
    CHECK(tr.burn_in < tr.length());
}

TEST_CASE("marginal frequency of the root stays at one half") {
    // 10^4 independent replicas observed at a fixed time.
    RootedGraph g = build_family("complete:5");
    const int64_t replicas = 10000, t_obs = 37;
    int64_t ones = 0;
    for (int64_t r = 0; r < replicas; ++r)
        ones += simulate_trace(g, 0.3, t_obs, 5000 + r).bits[t_obs];
    const double freq = static_cast<double>(ones) / replicas;
    CHECK(std::fabs(freq - 0.5) < 4.0 * 0.5 / std::sqrt(static_cast<double>(replicas)));
}

TEST_CASE("star center two-step law matches the closed value and is free of m") {
    // P(X_{t+1} = X_{t-1}) = eps/2 + (1-eps)(eps/2 + (1-eps)) = 0.625 at eps = 1/2.
    for (int m : {3, 5, 8}) {
        Trace tr = simulate_trace(build_family("star:" + std::to_string(m)), 0.5, 400000, 71 + m);
        RepStatResult s = repetition_plain(tr, 2);
        CHECK(std::fabs(s.value - 0.625) < 4.0 * s.batch_stderr);
    }
}

TEST_CASE("window distribution sums to one and sees uniform windows at full noise") {
    Trace tr = simulate_trace(build_family("complete:2"), 1.0, 1000000, 3);
    auto dist = window_distribution(tr, 3);
    double total = 0.0;
    for (auto& [key, f] : dist) total += f;
    CHECK(std::fabs(total - 1.0) < 1e-12);
    CHECK(dist.size() == 8);
    CHECK(window_chi2_uniform(tr, 3) > 0.01);
}

TEST_CASE("window distribution of constant bits is a point mass") {
    Trace tr;
    tr.bits.assign(100, 0);
    tr.epsilon = 0.5;
    tr.burn_in = 0;
    auto dist = window_distribution(tr, 2);
    REQUIRE(dist.size() == 1);
    CHECK(dist.at(0) == 1.0);
    CHECK_THROWS_AS(window_distribution(tr, 101), ParamError);
}

TEST_CASE("trace file round trip is bit exact") {
    Trace tr = simulate_trace(build_family("cycle:6"), 0.4, 12345, 17);
    const std::string bits = "/tmp/nvm_test_trace.bits", sidecar = "/tmp/nvm_test_trace.json";
    write_trace(tr, bits, sidecar);
    Trace back = read_trace(bits, sidecar);
    CHECK(back.bits == tr.bits);
    CHECK(back.epsilon == tr.epsilon);
    CHECK(back.seed == tr.seed);
    CHECK(back.burn_in == tr.burn_in);
    CHECK(back.graph_descriptor == tr.graph_descriptor);
    std::remove(bits.c_str());
    std::remove(sidecar.c_str());
}

TEST_SUITE_END();
