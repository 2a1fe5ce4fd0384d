#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace msalab {

struct MonteCarloEstimate {
    std::int64_t successes = 0;
    std::int64_t trials = 0;
    double p_hat = 0.0;
    double ci_lo = 0.0; // 95% Clopper-Pearson
    double ci_hi = 1.0;
};

MonteCarloEstimate binomial_estimate(std::int64_t successes, std::int64_t trials);

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
    double r2 = 0.0;
};

/// Least squares y = intercept + slope * x.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct PlaneFit {
    double intercept = 0.0;
    double a = 0.0; // coefficient of x1
    double b = 0.0; // coefficient of x2
};

/// Least squares y = intercept + a*x1 + b*x2.
PlaneFit fit_plane(const std::vector<double>& x1, const std::vector<double>& x2,
                   const std::vector<double>& y);

double median(std::vector<double> v);
double percentile(std::vector<double> v, double q); // q in [0,1]

/// Run fn(i) for i in [0, n) on `workers` threads; any partition gives identical results
/// as long as fn writes only to slot i of preallocated storage.
void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn);

} // namespace msalab
