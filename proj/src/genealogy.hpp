#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "estimate.hpp"
#include "graph.hpp"
#include "partition.hpp"
#include "rng.hpp"

namespace nvm {

// One sampled backward genealogy: which paths coalesced and how long each
// survived. met is the coalescence equivalence (symmetric, true diagonal,
// closed under the shared-randomness merging).
struct MeetPattern {
    std::vector<int32_t> offsets;
    std::vector<std::vector<bool>> met;
    std::vector<int32_t> depths;  // steps survived, capped by the horizon

    Partition partition() const;  // blocks = coalescence classes
};

// Simulate all backward paths started at the root at the given birth offsets
// over one shared randomness field. Paths at the same (vertex, time) node
// coalesce and move together; each path stops at a noise event or at the
// horizon floor (offsets.back() - horizon).
MeetPattern sample_meet_pattern(const RootedGraph& g, double epsilon,
                                const std::vector<int32_t>& offsets, int32_t horizon,
                                SplitMix& rng);

// Monte Carlo estimates of the meeting-pattern events for up to 4 paths.
struct MeetingProbs {
    std::vector<int32_t> offsets;
    int32_t horizon = 0;
    int64_t replicas = 0;
    double truncation_bound = 0.0;
    std::map<std::string, Estimate> events;
    // Full distribution of the final coalescence partition, one entry per
    // partition of the offset set.
    std::vector<std::pair<Partition, Estimate>> partitions;

    const Estimate& event(const std::string& name) const;
};

// Horizon picked so that k * (1-eps)^(horizon - max_offset) < tolerance;
// the bound is recorded in every Estimate's truncation_bound.
MeetingProbs estimate_meeting_probs(const RootedGraph& g, double epsilon,
                                    const std::vector<int32_t>& offsets, int64_t replicas,
                                    double tolerance, uint64_t seed);

// Same estimator at a caller-chosen horizon. With horizon = t + max_offset
// the sampled events are exactly the finite-t pattern events (every path is
// stopped at absolute time 0).
MeetingProbs estimate_meeting_probs_at_horizon(const RootedGraph& g, double epsilon,
                                               const std::vector<int32_t>& offsets,
                                               int64_t replicas, int32_t horizon, uint64_t seed,
                                               double truncation_bound);

// Frequency of {the offset-2 path survives two steps and returns to the
// root}, divided by (1-eps)^2: a Monte Carlo estimate of the inverse-degree
// average a2.
Estimate estimate_a2(const RootedGraph& g, double epsilon, int64_t replicas, uint64_t seed);

// Exact finite-t pattern probabilities on tiny instances by dynamic
// programming over the joint backward state; the brute-force oracle for the
// sampler. Requires |V| <= 4 and t + max_offset <= 8.
struct ExactPatternProbs {
    std::vector<int32_t> offsets;
    int32_t t = 0;
    std::map<std::string, double> events;
    std::vector<std::pair<Partition, double>> partitions;

    double event(const std::string& name) const;
};
ExactPatternProbs exact_enumeration_probs(const RootedGraph& g, double epsilon,
                                          const std::vector<int32_t>& offsets, int32_t t);

// Event keys shared by the estimators: pairwise "meet_<oi>_<oj>" for every
// offset pair, "meet_all", and for four paths the three two-pair patterns
// "tilde_<a>_<b>_<c>" (path(0) with path(a) in one block, path(b) with
// path(c) in another, blocks distinct).
std::vector<std::string> pattern_event_names(const std::vector<int32_t>& offsets);

// Assemble the limiting quadruple-coincidence probability from its
// components: pairwise limits keyed by lag, the triple-meet limit, and the
// three two-pair ("tilde") limits in the order (d1,d2,d3), (d2,d1,d3),
// (d3,d1,d2).
double q_from_components(const std::map<int32_t, double>& pairwise_by_lag, double p_triple,
                         const std::vector<double>& tildes, int32_t d1, int32_t d2, int32_t d3);

}  // namespace nvm
