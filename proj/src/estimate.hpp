#pragma once

#include <cmath>
#include <cstdint>

namespace nvm {

// A Monte Carlo value with its standard error, replica count, and an upper
// bound on the bias introduced by any finite truncation.
struct Estimate {
    double value = 0.0;
    double stderr_ = 0.0;
    int64_t replicas = 0;
    double truncation_bound = 0.0;
};

// Estimate for the mean of an indicator observed `hits` times in `replicas`
// independent replicas.
inline Estimate indicator_estimate(int64_t hits, int64_t replicas, double truncation_bound) {
    Estimate e;
    e.replicas = replicas;
    e.truncation_bound = truncation_bound;
    if (replicas > 0) {
        e.value = static_cast<double>(hits) / static_cast<double>(replicas);
        e.stderr_ = std::sqrt(e.value * (1.0 - e.value) / static_cast<double>(replicas));
    }
    return e;
}

}  // namespace nvm
