#include "msalab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include <Eigen/Dense>
#include <boost/math/distributions/binomial.hpp>

#include "msalab/errors.hpp"

namespace msalab {

MonteCarloEstimate binomial_estimate(std::int64_t successes, std::int64_t trials) {
    if (trials < 1) throw validation_error("binomial_estimate: trials must be >= 1");
    if (successes < 0 || successes > trials) throw validation_error("binomial_estimate: successes out of range");
    MonteCarloEstimate e;
    e.successes = successes;
    e.trials = trials;
    e.p_hat = static_cast<double>(successes) / static_cast<double>(trials);
    using boost::math::binomial_distribution;
    const double alpha2 = 0.025;
    e.ci_lo = binomial_distribution<double>::find_lower_bound_on_p(
        static_cast<double>(trials), static_cast<double>(successes), alpha2);
    e.ci_hi = binomial_distribution<double>::find_upper_bound_on_p(
        static_cast<double>(trials), static_cast<double>(successes), alpha2);
    return e;
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw validation_error("fit_line: need >= 2 points");
    const auto n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw numerical_error("fit_line: degenerate abscissae");
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / den;
    f.intercept = (sy - f.slope * sx) / n;
    double ssr = 0, sst = 0;
    const double ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ssr += e * e;
        sst += (y[i] - ybar) * (y[i] - ybar);
    }
    f.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
    return f;
}

PlaneFit fit_plane(const std::vector<double>& x1, const std::vector<double>& x2,
                   const std::vector<double>& y) {
    if (x1.size() != y.size() || x2.size() != y.size() || y.size() < 3)
        throw validation_error("fit_plane: need >= 3 points");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(y.size()), 3);
    Eigen::VectorXd b(static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < y.size(); ++i) {
        a(static_cast<Eigen::Index>(i), 0) = 1.0;
        a(static_cast<Eigen::Index>(i), 1) = x1[i];
        a(static_cast<Eigen::Index>(i), 2) = x2[i];
        b[static_cast<Eigen::Index>(i)] = y[i];
    }
    Eigen::Vector3d c = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    return PlaneFit{c[0], c[1], c[2]};
}

double median(std::vector<double> v) {
    if (v.empty()) throw validation_error("median: empty sample");
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double percentile(std::vector<double> v, double q) {
    if (v.empty()) throw validation_error("percentile: empty sample");
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

void parallel_for(std::int64_t n, int workers, const std::function<void(std::int64_t)>& fn) {
    workers = std::max(1, workers);
    if (workers == 1 || n < 2) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::int64_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errs[static_cast<std::size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
}

} // namespace msalab
