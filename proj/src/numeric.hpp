#pragma once

#include <cstdint>
#include <vector>

namespace nvm {

// Regularized lower incomplete gamma P(a,x).
double gamma_p(double a, double x);

// Survival function of the chi-squared distribution with k degrees of freedom.
double chi2_sf(double x, double k);

// Standard normal quantile (two-sided critical value = normal_quantile(1 - sig/2)).
double normal_quantile(double p);

// Mean and standard error of the mean computed from equal batches.
// Returns {mean over the batched prefix, stderr of the mean}.
struct BatchMean {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    int64_t batches = 0;
    int64_t batch_size = 0;
};
BatchMean batch_means(const std::vector<double>& batch_sums, int64_t batch_size);

// Least squares fit y ~ a*f1(x) + b*f2(x); returns coefficients and RSS.
struct Fit2 {
    double a = 0.0, b = 0.0, rss = 0.0;
};
Fit2 least_squares_2(const std::vector<double>& f1, const std::vector<double>& f2,
                     const std::vector<double>& y);

}  // namespace nvm
