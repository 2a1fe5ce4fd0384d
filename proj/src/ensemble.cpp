#include "msalab/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "msalab/errors.hpp"
#include "msalab/rng.hpp"
#include "msalab/spectral.hpp"

namespace msalab {

std::string distribution_name(Distribution d) {
    switch (d) {
        case Distribution::UniformSym: return "uniform[-1,1]";
        case Distribution::Bernoulli: return "bernoulli";
        case Distribution::Uniform01: return "uniform[0,1]";
    }
    return "?";
}

Distribution distribution_from_name(const std::string& name) {
    if (name == "uniform[-1,1]" || name == "uniform_sym") return Distribution::UniformSym;
    if (name == "bernoulli" || name == "bernoulli(+-1)") return Distribution::Bernoulli;
    if (name == "uniform[0,1]" || name == "uniform01") return Distribution::Uniform01;
    throw validation_error("unknown distribution '" + name +
                           "' (expected uniform[-1,1], bernoulli or uniform[0,1])");
}

double omega_at(const DisorderModel& model, std::int64_t trial, const Site& s, int dim) {
    const std::uint64_t w = site_word(model.master_seed, trial, s, dim);
    switch (model.distribution) {
        case Distribution::UniformSym: return 2.0 * word_to_unit(w) - 1.0;
        case Distribution::Bernoulli: return (w >> 63) ? 1.0 : -1.0;
        case Distribution::Uniform01: return word_to_unit(w);
    }
    return 0.0;
}

EnvironmentSample sample_environment(const DisorderModel& model, const BoxSpec& region, std::int64_t trial) {
    EnvironmentSample out;
    out.region = region;
    out.trial_id = trial;
    const auto ss = sites(region);
    out.values.reserve(ss.size());
    for (const auto& s : ss) out.values.push_back(omega_at(model, trial, s, region.dim));
    return out;
}

FiniteVolumeOperator assemble(const EnvironmentSample& sample, Bc bc, const DisorderModel& model) {
    const BoxSpec& box = sample.region;
    const auto ss = sites(box);
    const auto n = static_cast<std::int64_t>(ss.size());
    const int d = box.dim;
    const std::int64_t w = box.side - 1;

    FiniteVolumeOperator op;
    op.box = box;
    op.bc = bc;
    op.coupling = model.coupling;
    op.diag.resize(n);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n * (2 * d + 1)));
    for (std::int64_t i = 0; i < n; ++i) {
        const double v = 2.0 * d + model.coupling * sample.at_index(i);
        op.diag[i] = v;
        trip.emplace_back(i, i, v);
        for (int ax = 0; ax < d; ++ax) {
            Site nb = ss[static_cast<std::size_t>(i)];
            nb[ax] += 1;
            if (contains_site(box, nb)) {
                const auto j = site_index(box, nb);
                trip.emplace_back(i, j, -1.0);
                trip.emplace_back(j, i, -1.0);
            } else if (bc == Bc::Periodic && w > 2) {
                nb[ax] -= w; // wrap to the opposite face
                const auto j = site_index(box, nb);
                trip.emplace_back(i, j, -1.0);
                trip.emplace_back(j, i, -1.0);
            }
        }
    }
    op.matrix.resize(n, n);
    op.matrix.setFromTriplets(trip.begin(), trip.end());
    return op;
}

FiniteVolumeOperator assemble_box(const DisorderModel& model, const BoxSpec& box, Bc bc, std::int64_t trial) {
    return assemble(sample_environment(model, box, trial), bc, model);
}

namespace {

double ks_two_sample(std::vector<double>& a, std::vector<double>& b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const auto na = a.size(), nb = b.size();
    std::size_t i = 0, j = 0;
    double dmax = 0.0;
    while (i < na && j < nb) {
        const double x = std::min(a[i], b[j]);
        while (i < na && a[i] <= x) ++i;
        while (j < nb && b[j] <= x) ++j;
        dmax = std::max(dmax, std::abs(double(i) / double(na) - double(j) / double(nb)));
    }
    return dmax;
}

} // namespace

CovarianceReport check_covariance(const DisorderModel& model, const BoxSpec& box, const Site& shift,
                                  std::int64_t trials) {
    if (trials < 1) throw validation_error("check_covariance: trials must be >= 1");
    Site c2 = box.center;
    for (int i = 0; i < box.dim; ++i) c2[i] += shift[i];
    const BoxSpec shifted(c2, box.side, box.dim);

    std::vector<double> ev_a, ev_b;
    ev_a.reserve(static_cast<std::size_t>(trials * box.site_count()));
    ev_b.reserve(ev_a.capacity());
    for (std::int64_t t = 0; t < trials; ++t) {
        const auto sa = spectrum(assemble_box(model, box, Bc::Dirichlet, t), false);
        const auto sb = spectrum(assemble_box(model, shifted, Bc::Dirichlet, t), false);
        ev_a.insert(ev_a.end(), sa.eigenvalues.begin(), sa.eigenvalues.end());
        ev_b.insert(ev_b.end(), sb.eigenvalues.begin(), sb.eigenvalues.end());
    }
    CovarianceReport rep;
    rep.trials = trials;
    rep.statistic = ks_two_sample(ev_a, ev_b);
    rep.critical_1pct = 1.6276 * std::sqrt(2.0 / static_cast<double>(trials));
    return rep;
}

} // namespace msalab
