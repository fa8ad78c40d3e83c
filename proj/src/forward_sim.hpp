#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "graph.hpp"

namespace nvm {

// The root's observation sequence X_0..X_T plus the parameters that generated
// it. Regenerating with the same (graph, epsilon, t_max, seed) is bit-identical.
struct Trace {
    std::vector<uint8_t> bits;  // values in {0,1}, length T+1
    double epsilon = 1.0;
    std::string graph_descriptor;
    uint64_t seed = 0;
    int64_t burn_in = 0;  // leading entries flagged as transient

    int64_t length() const { return static_cast<int64_t>(bits.size()); }
    int64_t usable_length() const { return length() - burn_in; }
};

// Smallest b with (1-eps)^b < 1e-9, the point where the initial state's
// influence on the root marginal is negligible.
int64_t default_burn_in(double epsilon);

// Synchronous full-state simulation on a finite graph: at each step every
// vertex independently takes a fresh fair coin with probability eps, else
// copies a uniformly chosen neighbor's previous opinion. Per-vertex
// randomness is keyed by (seed, t, vertex), so the trace does not depend on
// update order and extending t_max preserves the prefix.
Trace simulate_trace(const RootedGraph& g, double epsilon, int64_t t_max, uint64_t seed);

// Sliding-window frequencies over the post-burn-in bits (stride 1); the
// window is packed most-recent-bit-last into the key's low bits.
std::map<uint32_t, double> window_distribution(const Trace& trace, int32_t w);

// Window counts at the given stride. Stride >= w gives non-overlapping
// windows whose counts follow a multinomial sampling model closely enough
// for chi-squared testing.
std::map<uint32_t, int64_t> window_counts(const Trace& trace, int32_t w, int32_t stride);

// Two-sample chi-squared homogeneity test over w-bit window counts taken at
// stride 2w (spaced windows keep the multinomial model honest). Returns the
// p-value.
double window_chi2_two_sample(const Trace& a, const Trace& b, int32_t w);

// Goodness-of-fit of spaced window counts against the uniform distribution.
double window_chi2_uniform(const Trace& t, int32_t w);

// Raw bit file (packed 8 per byte, LSB first) + JSON sidecar.
void write_trace(const Trace& t, const std::string& bits_path, const std::string& sidecar_path);
Trace read_trace(const std::string& bits_path, const std::string& sidecar_path);

}  // namespace nvm
