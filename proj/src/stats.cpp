#include "stats.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "numeric.hpp"

namespace nvm {

namespace {

constexpr int64_t kStderrBatches = 64;

// Mean and 64-batch stderr of a 0/1 sequence produced by gen(i) for
// i in [0, terms).
template <class Gen>
RepStatResult indicator_mean(int64_t terms, int64_t burn_in, std::string mode, Gen gen) {
    RepStatResult out;
    out.mode = std::move(mode);
    out.terms = terms;
    out.burn_in_used = burn_in;
    int64_t total = 0;
    for (int64_t i = 0; i < terms; ++i) total += gen(i);
    out.value = static_cast<double>(total) / static_cast<double>(terms);
    const int64_t batch = terms / kStderrBatches;
    if (batch >= 1) {
        std::vector<double> sums(kStderrBatches, 0.0);
        for (int64_t b = 0; b < kStderrBatches; ++b) {
            int64_t s = 0;
            for (int64_t i = b * batch; i < (b + 1) * batch; ++i) s += gen(i);
            sums[b] = static_cast<double>(s);
        }
        out.batch_stderr = batch_means(sums, batch).stderr_of_mean;
    }
    return out;
}

}  // namespace

RepStatResult repetition_plain(const Trace& trace, int32_t d) {
    require(d >= 1, "d: must be >= 1");
    const int64_t start = trace.burn_in;
    const int64_t terms = trace.length() - d - start;
    require(terms >= 1, "trace: needs length >= burn_in + d + 1 (have " +
                            std::to_string(trace.length()) + ")");
    const auto& bits = trace.bits;
    return indicator_mean(terms, start, "plain(" + std::to_string(d) + ")",
                          [&](int64_t i) { return bits[start + i] == bits[start + i + d]; });
}

RepStatResult repetition_thinned(const Trace& trace, int32_t d, int32_t kappa) {
    require(d >= 1, "d: must be >= 1");
    require(kappa > d, "kappa: must exceed d");
    const int64_t i0 = (trace.burn_in + kappa - 1) / kappa;
    const int64_t last = (trace.length() - 1 - d) / kappa;
    const int64_t terms = last - i0 + 1;
    require(terms >= 1, "trace: too short for thinned statistic");
    const auto& bits = trace.bits;
    return indicator_mean(
        terms, i0 * kappa,
        "thinned(" + std::to_string(d) + "," + std::to_string(kappa) + ")", [&](int64_t i) {
            const int64_t j = (i0 + i) * kappa;
            return bits[j] == bits[j + d];
        });
}

RepStatResult repetition_quadruple(const Trace& trace, int32_t d1, int32_t d2, int32_t d3) {
    require(0 < d1 && d1 < d2 && d2 < d3, "d1,d2,d3: need 0 < d1 < d2 < d3");
    const int64_t start = trace.burn_in;
    const int64_t terms = trace.length() - d3 - start;
    require(terms >= 1, "trace: needs length >= burn_in + d3 + 1");
    const auto& bits = trace.bits;
    return indicator_mean(terms, start,
                          "quadruple(" + std::to_string(d1) + "," + std::to_string(d2) + "," +
                              std::to_string(d3) + ")",
                          [&](int64_t i) {
                              const uint8_t x = bits[start + i];
                              return bits[start + i + d1] == x && bits[start + i + d2] == x &&
                                     bits[start + i + d3] == x;
                          });
}

Estimate pd_hat(const Trace& trace, int32_t d) {
    RepStatResult s = repetition_plain(trace, d);
    Estimate out;
    out.value = std::clamp(2.0 * s.value - 1.0, 0.0, 1.0);
    out.stderr_ = 2.0 * s.batch_stderr;
    out.replicas = s.terms;
    out.truncation_bound =
        trace.epsilon < 1.0
            ? std::pow(1.0 - trace.epsilon, trace.burn_in) / trace.epsilon
            : 0.0;
    return out;
}

int32_t choose_kappa(double epsilon, int32_t d, double p_hat) {
    require(epsilon > 0.0 && epsilon < 1.0, "epsilon: must be in (0,1)");
    require(d >= 1, "d: must be >= 1");
    require(p_hat >= 0.0 && p_hat <= 1.0, "p_hat: must be in [0,1]");
    if (p_hat == 1.0)
        throw ParamError("p_hat: variance lower bound vanishes at p_hat = 1");
    const double b = 1.0 - epsilon;
    const double level = (1.0 + p_hat) * (1.0 - 0.5 * (1.0 + p_hat));
    for (int32_t kappa = d + 1; kappa < d + 100000; ++kappa) {
        if (4.0 * std::pow(b, kappa - d) < (1.0 - std::pow(b, kappa)) * level) return kappa;
    }
    throw NumericError("choose_kappa: no kappa found (epsilon too small?)");
}

VarianceProfile variance_profile(const Trace& trace, int32_t d) {
    require(trace.length() >= (int64_t{1} << 14), "trace: length >= 2^14 required");
    const int64_t start = trace.burn_in;
    const int64_t terms = trace.length() - d - start;
    const auto& bits = trace.bits;
    std::vector<uint8_t> z(terms);
    for (int64_t i = 0; i < terms; ++i) z[i] = bits[start + i] == bits[start + i + d];

    VarianceProfile out;
    for (int64_t s = 16; s * 64 <= terms; s *= 2) {
        const int64_t blocks = terms / s;
        double mean = 0.0;
        std::vector<double> sums(blocks, 0.0);
        for (int64_t b = 0; b < blocks; ++b) {
            int64_t acc = 0;
            for (int64_t i = b * s; i < (b + 1) * s; ++i) acc += z[i];
            sums[b] = static_cast<double>(acc);
            mean += sums[b];
        }
        mean /= blocks;
        double var = 0.0;
        for (double v : sums) var += (v - mean) * (v - mean);
        var /= (blocks - 1);
        out.block_sizes.push_back(s);
        out.variance_per_term.push_back(var / s);
    }
    // Model A: Var(s) = sigma s, i.e. v(s) constant. Model B: Var(s) =
    // a ln s + b, i.e. v(s) = (a ln s + b)/s. Compared on v(s).
    const size_t n = out.block_sizes.size();
    std::vector<double> ones(n, 1.0), lns(n), inv(n), y = out.variance_per_term;
    for (size_t i = 0; i < n; ++i) {
        lns[i] = std::log(static_cast<double>(out.block_sizes[i])) / out.block_sizes[i];
        inv[i] = 1.0 / out.block_sizes[i];
    }
    double mean_v = 0.0;
    for (double v : y) mean_v += v;
    mean_v /= n;
    double rss_lin = 0.0;
    for (double v : y) rss_lin += (v - mean_v) * (v - mean_v);
    Fit2 log_fit = least_squares_2(lns, inv, y);
    out.slope = std::max(mean_v, 0.0);
    if (rss_lin < 0.5 * log_fit.rss)
        out.classification = "linear";
    else if (log_fit.rss < 0.5 * rss_lin)
        out.classification = "logarithmic";
    else
        out.classification = "inconclusive";
    return out;
}

CltReport clt_report(const Trace& trace, int32_t d, int32_t kappa, int64_t batches) {
    require(batches >= 100, "batches: must be >= 100");
    require(kappa > d, "kappa: must exceed d");
    const int64_t i0 = (trace.burn_in + kappa - 1) / kappa;
    const int64_t last = (trace.length() - 1 - d) / kappa;
    const int64_t terms = last - i0 + 1;
    const int64_t batch_size = terms / batches;
    require(batch_size >= 1, "trace: too short to fill the requested batches");

    const auto& bits = trace.bits;
    std::vector<double> means(batches, 0.0);
    for (int64_t b = 0; b < batches; ++b) {
        int64_t acc = 0;
        for (int64_t i = b * batch_size; i < (b + 1) * batch_size; ++i) {
            const int64_t j = (i0 + i) * kappa;
            acc += bits[j] == bits[j + d];
        }
        means[b] = static_cast<double>(acc) / batch_size;
    }
    double mu = 0.0;
    for (double m : means) mu += m;
    mu /= batches;
    double var = 0.0;
    for (double m : means) var += (m - mu) * (m - mu);
    var /= batches;  // population form: standardized m2 is exactly 1
    const double sd = std::sqrt(var);
    require(sd > 0.0, "clt_report: degenerate batch means");

    CltReport out;
    out.batches = batches;
    out.batch_size = batch_size;
    for (double m : means) {
        const double u = (m - mu) / sd;
        out.m1 += u;
        out.m2 += u * u;
        out.m3 += u * u * u;
        out.m4 += u * u * u * u;
    }
    out.m1 /= batches;
    out.m2 /= batches;
    out.m3 /= batches;
    out.m4 /= batches;
    return out;
}

TripleIdentity triple_identity_residual(const Trace& trace, int32_t d1, int32_t d2) {
    require(0 < d1 && d1 < d2, "d1,d2: need 0 < d1 < d2");
    const int64_t start = trace.burn_in;
    const int64_t terms = trace.length() - d2 - start;
    require(terms >= 1, "trace: needs length >= burn_in + d2 + 1");
    const auto& bits = trace.bits;
    RepStatResult triple = indicator_mean(
        terms, start, "triple", [&](int64_t i) {
            const uint8_t x = bits[start + i];
            return bits[start + i + d1] == x && bits[start + i + d2] == x;
        });
    Estimate p1 = pd_hat(trace, d1);
    Estimate p2 = pd_hat(trace, d2);
    Estimate pdiff = pd_hat(trace, d2 - d1);
    const double predicted = (1.0 + p1.value + p2.value + pdiff.value) / 4.0;
    TripleIdentity out;
    out.residual = std::fabs(triple.value - predicted);
    out.combined_stderr = std::sqrt(triple.batch_stderr * triple.batch_stderr +
                                    std::pow(p1.stderr_ / 4.0, 2) +
                                    std::pow(p2.stderr_ / 4.0, 2) +
                                    std::pow(pdiff.stderr_ / 4.0, 2));
    return out;
}

}  // namespace nvm
