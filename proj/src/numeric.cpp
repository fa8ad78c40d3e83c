#include "numeric.hpp"

#include <cmath>
#include <limits>

#include "errors.hpp"

namespace nvm {

namespace {

// Series expansion of P(a,x), valid for x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x) (modified Lentz), valid for x >= a+1.
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    require(a > 0.0 && x >= 0.0, "gamma_p: a > 0 and x >= 0 required");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double chi2_sf(double x, double k) {
    if (x <= 0.0) return 1.0;
    if (x < k + 1.0) return 1.0 - gamma_p_series(k / 2.0, x / 2.0);
    return gamma_q_cf(k / 2.0, x / 2.0);
}

double normal_quantile(double p) {
    require(p > 0.0 && p < 1.0, "normal_quantile: p in (0,1) required");
    // Bisection on erfc is plenty fast and accurate to ~1e-12.
    auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

BatchMean batch_means(const std::vector<double>& batch_sums, int64_t batch_size) {
    BatchMean out;
    out.batches = static_cast<int64_t>(batch_sums.size());
    out.batch_size = batch_size;
    if (out.batches == 0 || batch_size == 0) return out;
    double total = 0.0;
    for (double s : batch_sums) total += s;
    double grand = total / (static_cast<double>(out.batches) * batch_size);
    out.mean = grand;
    if (out.batches < 2) return out;
    double ss = 0.0;
    for (double s : batch_sums) {
        double m = s / batch_size - grand;
        ss += m * m;
    }
    double var_of_batch_mean = ss / (out.batches - 1);
    out.stderr_of_mean = std::sqrt(var_of_batch_mean / out.batches);
    return out;
}

Fit2 least_squares_2(const std::vector<double>& f1, const std::vector<double>& f2,
                     const std::vector<double>& y) {
    // Solve the 2x2 normal equations directly.
    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    for (size_t i = 0; i < y.size(); ++i) {
        s11 += f1[i] * f1[i];
        s12 += f1[i] * f2[i];
        s22 += f2[i] * f2[i];
        r1 += f1[i] * y[i];
        r2 += f2[i] * y[i];
    }
    double det = s11 * s22 - s12 * s12;
    Fit2 out;
    if (std::fabs(det) < 1e-300) {
        out.rss = std::numeric_limits<double>::infinity();
        return out;
    }
    out.a = (s22 * r1 - s12 * r2) / det;
    out.b = (s11 * r2 - s12 * r1) / det;
    for (size_t i = 0; i < y.size(); ++i) {
        double e = y[i] - out.a * f1[i] - out.b * f2[i];
        out.rss += e * e;
    }
    return out;
}

}  // namespace nvm
