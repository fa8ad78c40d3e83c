#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "estimate.hpp"
#include "forward_sim.hpp"

namespace nvm {

// Repetition statistic over a trace: the fraction of post-burn-in indices at
// which the indicated coincidence holds.
struct RepStatResult {
    std::string mode;  // "plain(d)", "thinned(d,kappa)", "quadruple(d1,d2,d3)"
    double value = 0.0;
    int64_t terms = 0;
    double batch_stderr = 0.0;  // from 64 equal batches
    int64_t burn_in_used = 0;
};

RepStatResult repetition_plain(const Trace& trace, int32_t d);
RepStatResult repetition_thinned(const Trace& trace, int32_t d, int32_t kappa);
RepStatResult repetition_quadruple(const Trace& trace, int32_t d1, int32_t d2, int32_t d3);

// Plug-in estimate of the coalescence probability from the repetition
// statistic: clamp(2 S - 1, 0, 1). stderr doubles the batch stderr; the
// recorded truncation bound is the burn-in bias bound (1-eps)^burn_in / eps.
Estimate pd_hat(const Trace& trace, int32_t d);

// Smallest kappa > d with
// 4 (1-eps)^(kappa-d) < (1 - (1-eps)^kappa) (1+p)(1 - (1+p)/2).
int32_t choose_kappa(double epsilon, int32_t d, double p_hat);

// Growth profile of Var(sum of coincidence indicators) across dyadic block
// sizes, with a linear-vs-logarithmic model comparison.
struct VarianceProfile {
    std::vector<int64_t> block_sizes;
    std::vector<double> variance_per_term;  // Var(block sum)/s at each s
    double slope = 0.0;                     // fitted linear-growth rate
    std::string classification;             // "linear" | "logarithmic" | "inconclusive"
};
VarianceProfile variance_profile(const Trace& trace, int32_t d);

// Moments of standardized batch means of the kappa-thinned indicator stream.
struct CltReport {
    int64_t batches = 0;
    int64_t batch_size = 0;
    double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
};
CltReport clt_report(const Trace& trace, int32_t d, int32_t kappa, int64_t batches);

// | empirical P(X_i = X_{i+d1} = X_{i+d2}) - (1 + p^_{d1} + p^_{d2} +
// p^_{d2-d1})/4 | with the plug-in estimates taken from the same trace.
struct TripleIdentity {
    double residual = 0.0;
    double combined_stderr = 0.0;  // quadrature combination of the parts
};
TripleIdentity triple_identity_residual(const Trace& trace, int32_t d1, int32_t d2);

}  // namespace nvm
