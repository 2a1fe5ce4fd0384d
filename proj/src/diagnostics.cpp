#include "msalab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "msalab/errors.hpp"
#include "msalab/rng.hpp"

namespace msalab {

namespace {

double vector_slice_norm(const Eigen::VectorXd& v, const std::vector<std::int64_t>& idx) {
    double s = 0.0;
    for (auto i : idx) s += v[i] * v[i];
    return std::sqrt(s);
}

} // namespace

double sli_ratio(const FiniteVolumeOperator& outer_op, const FiniteVolumeOperator& inner_op,
                 const BoxSpec& cell, double energy) {
    if (!is_inside_thick(cell, inner_op.box) || !is_inside_thick(inner_op.box, outer_op.box))
        throw validation_error("sli_ratio: need cell < inner < outer with the 3-unit margin");
    const double dist_out = spectral_dist(outer_op, energy);
    const double dist_in = spectral_dist(inner_op, energy);
    if (!(dist_out > singular_tolerance(outer_op)) || !(dist_in > singular_tolerance(inner_op)))
        throw singular_energy_error("sli_ratio: E within tolerance of a spectrum");

    const auto belt_out = belt_indices(outer_op.box);

    // belt of the inner box, indexed inside the outer operator
    std::vector<std::int64_t> gin_outer;
    {
        const std::int64_t h = inner_op.box.half();
        for (const auto& s : sites(inner_op.box))
            if (chebyshev(s, inner_op.box.center, inner_op.box.dim) == h)
                gin_outer.push_back(site_index(outer_op.box, s));
    }
    const auto cell_outer = subbox_indices(outer_op.box, cell);
    const auto cell_inner = subbox_indices(inner_op.box, cell);

    const double lhs = green_block_norm(outer_op, energy, belt_out, cell_outer, dist_out);
    const double f1 = green_block_norm(inner_op, energy, belt_indices(inner_op.box), cell_inner, dist_in);
    const double f2 = green_block_norm(outer_op, energy, belt_out, gin_outer, dist_out);
    if (f1 == 0.0 || f2 == 0.0) throw numerical_error("sli_ratio: vanishing right-hand side");
    return lhs / (f1 * f2);
}

SliScan sli_scan(const DisorderModel& model, int dim, Bc bc, int outer_side, int inner_side,
                 int cell_side, double energy, std::int64_t trials, int workers) {
    const BoxSpec outer(make_site(0), outer_side, dim);
    const BoxSpec inner(make_site(0), inner_side, dim);
    const BoxSpec cell(make_site(0), cell_side, dim);
    std::vector<double> ratios(static_cast<std::size_t>(trials), -1.0);
    parallel_for(trials, workers, [&](std::int64_t t) {
        const auto sample = sample_environment(model, outer, t);
        const auto op_out = assemble(sample, bc, model);
        const auto op_in = assemble_box(model, inner, bc, t); // same omega by counter keying
        try {
            ratios[static_cast<std::size_t>(t)] = sli_ratio(op_out, op_in, cell, energy);
        } catch (const singular_energy_error&) {
            // near-spectral trial; recorded as skipped
        }
    });
    SliScan scan;
    for (double r : ratios) {
        if (r < 0) {
            ++scan.skipped;
            continue;
        }
        scan.ratios.push_back(r);
        scan.gamma_max = std::max(scan.gamma_max, r);
    }
    return scan;
}

EdiRatio edi_ratio(const Eigen::VectorXd& psi, double energy, const BoxSpec& big_box,
                   const FiniteVolumeOperator& probe_op) {
    if (!is_inside_thick(probe_op.box, big_box))
        throw validation_error("edi_ratio: probe box must sit inside the big box with margin");
    EdiRatio out;
    const Site cx = probe_op.box.center;
    const double num = std::abs(psi[site_index(big_box, cx)]);

    std::vector<std::int64_t> belt_big, thick_big;
    {
        const auto probe_sites = sites(probe_op.box);
        const std::int64_t h = probe_op.box.half();
        const std::int64_t rin = probe_op.box.side / 6;
        for (const auto& s : probe_sites) {
            const auto r = chebyshev(s, cx, probe_op.box.dim);
            if (r == h) belt_big.push_back(site_index(big_box, s));
            if (r >= rin) thick_big.push_back(site_index(big_box, s));
        }
    }
    const double g_psi = vector_slice_norm(psi, belt_big);
    const double g_psi_thick = vector_slice_norm(psi, thick_big);
    if (num == 0.0) return out; // supported away from the probe: ratio 0, valid
    if (num < kAmplitudeFloor || g_psi < kAmplitudeFloor) return out;

    const double dist = spectral_dist(probe_op, energy);
    if (!(dist > singular_tolerance(probe_op))) return out;
    const auto belt = belt_indices(probe_op.box);
    const std::vector<std::int64_t> center_col{site_index(probe_op.box, cx)};
    const double gr = green_block_norm(probe_op, energy, belt, center_col, dist);
    if (gr == 0.0) return out;
    out.spec_belt = num / (gr * g_psi);
    out.thick_belt = num / (gr * g_psi_thick);
    out.valid = true;
    return out;
}

EdiScan edi_scan(const DisorderModel& model, int dim, Bc bc, int big_side, int probe_side,
                 double e_target, std::int64_t trials, int workers) {
    const BoxSpec big(make_site(0), big_side, dim);
    struct TrialOut {
        double max_spec = 0.0;
        double max_thick = 0.0;
        std::int64_t probes = 0;
        std::vector<double> thick;
    };
    std::vector<TrialOut> per_trial(static_cast<std::size_t>(trials));
    const std::int64_t margin = (big_side - 3 - probe_side) / 2;
    const std::int64_t step = std::max<std::int64_t>(1, probe_side / 4);

    parallel_for(trials, workers, [&](std::int64_t t) {
        auto& acc = per_trial[static_cast<std::size_t>(t)];
        const auto op_big = assemble_box(model, big, bc, t);
        const auto spec = spectrum(op_big, true);
        Eigen::Index j = 0;
        (spec.eigenvalues.array() - e_target).abs().minCoeff(&j);
        const double e = spec.eigenvalues[j];
        const Eigen::VectorXd psi = spec.eigenvectors.col(j);

        std::vector<std::int64_t> offs;
        for (std::int64_t o = -margin; o <= margin; o += step) offs.push_back(o);
        // probes tile along each axis through the center
        for (int ax = 0; ax < dim; ++ax) {
            for (auto o : offs) {
                Site c = big.center;
                c[ax] += o;
                const BoxSpec probe(c, probe_side, dim);
                const auto op_probe = assemble_box(model, probe, bc, t);
                const auto r = edi_ratio(psi, e, big, op_probe);
                if (!r.valid) continue;
                ++acc.probes;
                acc.max_spec = std::max(acc.max_spec, r.spec_belt);
                acc.max_thick = std::max(acc.max_thick, r.thick_belt);
                acc.thick.push_back(r.thick_belt);
            }
        }
    });
    EdiScan scan;
    for (const auto& acc : per_trial) {
        scan.gamma_max_spec = std::max(scan.gamma_max_spec, acc.max_spec);
        scan.gamma_max_thick = std::max(scan.gamma_max_thick, acc.max_thick);
        scan.probes += acc.probes;
        scan.ratios_thick.insert(scan.ratios_thick.end(), acc.thick.begin(), acc.thick.end());
    }
    return scan;
}

WegnerCurve wegner_scan(const DisorderModel& model, int dim, Bc bc, double energy,
                        const std::vector<double>& etas, const std::vector<int>& scales,
                        std::int64_t trials, int workers) {
    if (trials < 100) throw validation_error("wegner_scan: trials must be >= 100");
    for (double eta : etas)
        if (!(eta > 0 && eta <= 1)) throw validation_error("wegner_scan: eta must be in (0, 1]");
    WegnerCurve curve;
    curve.energy = energy;
    curve.etas = etas;
    curve.scales = scales;
    for (int l : scales) {
        const BoxSpec box(make_site(0), l, dim);
        std::vector<double> dist(static_cast<std::size_t>(trials));
        parallel_for(trials, workers, [&](std::int64_t t) {
            dist[static_cast<std::size_t>(t)] =
                spectral_dist(assemble_box(model, box, bc, t), energy);
        });
        std::vector<MonteCarloEstimate> row;
        for (double eta : etas) {
            std::int64_t hits = 0;
            for (double d : dist) hits += d <= eta ? 1 : 0;
            row.push_back(binomial_estimate(hits, trials));
        }
        curve.p.push_back(std::move(row));
    }
    // joint log-log fit over nonzero cells: ln p = c + a ln eta + b ln L
    std::vector<double> le, ll, lp;
    for (std::size_t i = 0; i < scales.size(); ++i)
        for (std::size_t k = 0; k < etas.size(); ++k)
            if (curve.p[i][k].successes > 0) {
                le.push_back(std::log(etas[k]));
                ll.push_back(std::log(static_cast<double>(scales[i])));
                lp.push_back(std::log(curve.p[i][k].p_hat));
            }
    if (lp.size() >= 3) {
        const auto fit = fit_plane(le, ll, lp);
        curve.eta_slope = fit.a;
        curve.l_exponent = fit.b;
    }
    return curve;
}

NeTable ne_scan(const DisorderModel& model, int dim, Bc bc, double e_lo, double e_hi,
                const std::vector<int>& scales, std::int64_t trials, int workers) {
    if (!(e_hi >= e_lo)) throw validation_error("ne_scan: empty interval");
    NeTable table;
    table.e_lo = e_lo;
    table.e_hi = e_hi;
    for (int l : scales) {
        const BoxSpec box(make_site(0), l, dim);
        std::vector<double> counts(static_cast<std::size_t>(trials));
        parallel_for(trials, workers, [&](std::int64_t t) {
            const auto spec = spectrum(assemble_box(model, box, bc, t), false);
            const auto& ev = spec.eigenvalues;
            const auto lo = std::lower_bound(ev.data(), ev.data() + ev.size(), e_lo);
            const auto hi = std::upper_bound(ev.data(), ev.data() + ev.size(), e_hi);
            counts[static_cast<std::size_t>(t)] = static_cast<double>(hi - lo);
        });
        NeRow row;
        row.scale = l;
        double s = 0, s2 = 0;
        for (double c : counts) {
            s += c;
            s2 += c * c;
        }
        row.mean_count = s / static_cast<double>(trials);
        row.per_volume = row.mean_count / std::pow(static_cast<double>(l), dim);
        const double var = s2 / static_cast<double>(trials) - row.mean_count * row.mean_count;
        row.std_error = std::sqrt(std::max(0.0, var) / static_cast<double>(trials));
        table.rows.push_back(row);
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& r : table.rows) {
        lo = std::min(lo, r.per_volume);
        hi = std::max(hi, r.per_volume);
    }
    table.spread = lo > 0 ? (hi - lo) / lo : std::numeric_limits<double>::infinity();
    return table;
}

MonteCarloEstimate eigenvalue_distance_event(const DisorderModel& model, int dim, Bc bc,
                                             const BoxSpec& box_a, const BoxSpec& box_b, double eta,
                                             const Separation& sep, std::int64_t trials, int workers) {
    if (dim != box_a.dim || dim != box_b.dim)
        throw validation_error("eigenvalue_distance_event: dimension mismatch");
    if (!nonoverlapping(box_a, box_b, sep))
        throw validation_error("eigenvalue_distance_event: boxes must be rho-nonoverlapping");
    std::vector<char> hit(static_cast<std::size_t>(trials), 0);
    parallel_for(trials, workers, [&](std::int64_t t) {
        const auto sa = spectrum(assemble_box(model, box_a, bc, t), false);
        const auto sb = spectrum(assemble_box(model, box_b, bc, t), false);
        // min distance between two sorted lists
        double best = std::numeric_limits<double>::infinity();
        const auto& a = sa.eigenvalues;
        const auto& b = sb.eigenvalues;
        Eigen::Index i = 0, j = 0;
        while (i < a.size() && j < b.size()) {
            best = std::min(best, std::abs(a[i] - b[j]));
            if (a[i] < b[j])
                ++i;
            else
                ++j;
        }
        hit[static_cast<std::size_t>(t)] = best <= eta ? 1 : 0;
    });
    std::int64_t n = 0;
    for (auto c : hit) n += c;
    return binomial_estimate(n, trials);
}

DecayProfile profile_from_vector(const BoxSpec& box, const Eigen::VectorXd& v, double eigenvalue) {
    const auto all = sites(box);
    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    const Site x0 = all[static_cast<std::size_t>(imax)];

    // largest radius that stays inside the box around x0
    std::int64_t rmax = box.half();
    for (int i = 0; i < box.dim; ++i) {
        const std::int64_t lo = x0[i] - (box.center[i] - box.half());
        const std::int64_t hi = (box.center[i] + box.half()) - x0[i];
        rmax = std::min({rmax, lo, hi});
    }
    DecayProfile prof;
    prof.center = x0;
    prof.eigenvalue = eigenvalue;
    std::vector<double> shell2(static_cast<std::size_t>(rmax) + 1, 0.0);
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto r = chebyshev(all[i], x0, box.dim);
        if (r <= rmax) shell2[static_cast<std::size_t>(r)] += v[static_cast<Eigen::Index>(i)] * v[static_cast<Eigen::Index>(i)];
    }
    for (std::int64_t r = 1; r <= rmax; ++r) {
        const double norm = std::sqrt(shell2[static_cast<std::size_t>(r)]);
        if (norm < kProfileFloor) break; // below solver noise: stop the profile here
        prof.radii.push_back(static_cast<int>(r));
        prof.log_norm.push_back(std::log(norm));
    }
    if (prof.radii.size() >= 4) {
        const std::size_t h = prof.radii.size() / 2;
        std::vector<double> xs(prof.radii.begin() + static_cast<std::ptrdiff_t>(h), prof.radii.end());
        std::vector<double> ys(prof.log_norm.begin() + static_cast<std::ptrdiff_t>(h), prof.log_norm.end());
        const auto fit = fit_line(xs, ys);
        prof.fitted_rate = -fit.slope;
        prof.r2 = fit.r2;
    }
    return prof;
}

DecaySummary eigenfunction_decay(const DisorderModel& model, int dim, Bc bc, const BoxSpec& box,
                                 double e_lo, double e_hi, std::int64_t trials, int workers) {
    if (dim != box.dim) throw validation_error("eigenfunction_decay: dimension mismatch");
    if (box.half() < 5) throw validation_error("eigenfunction_decay: box too small for 5 radii");
    std::vector<std::vector<DecayProfile>> per_trial(static_cast<std::size_t>(trials));
    parallel_for(trials, workers, [&](std::int64_t t) {
        const auto spec = spectrum(assemble_box(model, box, bc, t), true);
        auto& out = per_trial[static_cast<std::size_t>(t)];
        for (Eigen::Index j = 0; j < spec.eigenvalues.size(); ++j) {
            const double e = spec.eigenvalues[j];
            if (e < e_lo || e > e_hi) continue;
            auto prof = profile_from_vector(box, spec.eigenvectors.col(j), e);
            if (prof.radii.size() >= 5) out.push_back(std::move(prof));
        }
    });
    DecaySummary summary;
    std::vector<double> rates;
    for (auto& v : per_trial)
        for (auto& p : v) {
            rates.push_back(p.fitted_rate);
            summary.profiles.push_back(std::move(p));
        }
    if (!rates.empty()) summary.median_rate = median(rates);
    return summary;
}

MomentTrace dynamical_moment(const DisorderModel& model, int dim, Bc bc, const BoxSpec& box,
                             double e_lo, double e_hi, int n, const Site& psi0_site,
                             const std::vector<double>& t_grid, std::int64_t trial) {
    if (t_grid.empty()) throw validation_error("dynamical_moment: empty time grid");
    const auto spec = spectrum(assemble_box(model, box, bc, trial), true);
    const auto all = sites(box);
    const auto nsites = static_cast<Eigen::Index>(all.size());

    Eigen::VectorXd weight(nsites); // <x>^n about the center
    for (Eigen::Index i = 0; i < nsites; ++i) {
        double r2 = 1.0;
        for (int ax = 0; ax < dim; ++ax) {
            const double dx = static_cast<double>(all[static_cast<std::size_t>(i)][ax] - box.center[ax]);
            r2 += dx * dx;
        }
        weight[i] = std::pow(r2, 0.5 * n); // (sqrt(1+|x|^2))^n
    }

    Eigen::VectorXd coef = spec.eigenvectors.row(site_index(box, psi0_site)).transpose();
    for (Eigen::Index j = 0; j < coef.size(); ++j)
        if (spec.eigenvalues[j] < e_lo || spec.eigenvalues[j] > e_hi) coef[j] = 0.0;

    MomentTrace trace;
    trace.times = t_grid;
    double cum = 0.0;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        Eigen::VectorXcd phased(coef.size());
        for (Eigen::Index j = 0; j < coef.size(); ++j)
            phased[j] = coef[j] * std::exp(std::complex<double>(0.0, -spec.eigenvalues[j] * t_grid[k]));
        Eigen::VectorXcd psi_t = spec.eigenvectors * phased;
        double m = 0.0;
        for (Eigen::Index i = 0; i < nsites; ++i) m += weight[i] * std::norm(psi_t[i]);
        trace.moment.push_back(m);
        cum += m;
        trace.cesaro.push_back(cum / static_cast<double>(k + 1));
    }
    trace.max_value = *std::max_element(trace.moment.begin(), trace.moment.end());
    trace.late_early_ratio = trace.moment.front() > 0 ? trace.max_value / trace.moment.front()
                                                      : std::numeric_limits<double>::infinity();
    return trace;
}

CorrelatorFit correlator_decay(const DisorderModel& model, int dim, Bc bc, const BoxSpec& box,
                               double e_lo, double e_hi, std::int64_t trials, int workers) {
    const auto all = sites(box);
    const auto rmax = box.half();
    std::vector<std::vector<double>> q_trial(static_cast<std::size_t>(trials));
    std::vector<std::vector<double>> c_trial(static_cast<std::size_t>(trials));
    parallel_for(trials, workers, [&](std::int64_t t) {
        const auto spec = spectrum(assemble_box(model, box, bc, t), true);
        const auto c0 = site_index(box, box.center);
        Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(all.size()));
        for (Eigen::Index j = 0; j < spec.eigenvalues.size(); ++j) {
            if (spec.eigenvalues[j] < e_lo || spec.eigenvalues[j] > e_hi) continue;
            const double a0 = std::abs(spec.eigenvectors(c0, j));
            if (a0 == 0.0) continue;
            q += a0 * spec.eigenvectors.col(j).cwiseAbs();
        }
        // shell means
        std::vector<double> sums(static_cast<std::size_t>(rmax) + 1, 0.0), cnts(sums.size(), 0.0);
        for (std::size_t i = 0; i < all.size(); ++i) {
            const auto r = chebyshev(all[i], box.center, dim);
            sums[static_cast<std::size_t>(r)] += q[static_cast<Eigen::Index>(i)];
            cnts[static_cast<std::size_t>(r)] += 1.0;
        }
        auto& qs = q_trial[static_cast<std::size_t>(t)];
        auto& cs = c_trial[static_cast<std::size_t>(t)];
        for (std::size_t r = 0; r < sums.size(); ++r) {
            qs.push_back(sums[r]);
            cs.push_back(cnts[r]);
        }
    });
    CorrelatorFit fit;
    std::vector<double> qmean(static_cast<std::size_t>(rmax) + 1, 0.0);
    for (std::size_t r = 0; r < qmean.size(); ++r) {
        double s = 0.0, c = 0.0;
        for (std::int64_t t = 0; t < trials; ++t) {
            s += q_trial[static_cast<std::size_t>(t)][r];
            c += c_trial[static_cast<std::size_t>(t)][r];
        }
        qmean[r] = c > 0 ? s / c : 0.0;
    }
    fit.q0 = qmean[0];
    std::vector<double> xs, ys;
    for (std::int64_t r = 1; r <= rmax; ++r) {
        const double v = qmean[static_cast<std::size_t>(r)];
        if (v < kProfileFloor) break;
        fit.radii.push_back(static_cast<int>(r));
        fit.q.push_back(v);
        xs.push_back(static_cast<double>(r));
        ys.push_back(std::log(v));
    }
    if (xs.size() >= 5) {
        double best_r2 = -std::numeric_limits<double>::infinity();
        for (double zeta = 0.50; zeta <= 1.0001; zeta += 0.05) {
            std::vector<double> xz(xs.size());
            for (std::size_t i = 0; i < xs.size(); ++i) xz[i] = std::pow(xs[i], zeta);
            const auto f = fit_line(xz, ys);
            if (f.r2 > best_r2) {
                best_r2 = f.r2;
                fit.best_zeta = zeta;
                fit.rate = -f.slope;
                fit.r2 = f.r2;
            }
        }
    }
    return fit;
}

LyapunovEstimate lyapunov_1d(const DisorderModel& model, double energy, std::int64_t steps,
                             int batches, std::int64_t trial) {
    if (steps < batches || batches < 2) throw validation_error("lyapunov_1d: need steps >= batches >= 2");
    const std::int64_t blen = steps / batches;
    std::vector<double> gamma_b;
    double v0 = 1.0, v1 = 0.0;
    for (int b = 0; b < batches; ++b) {
        double acc = 0.0;
        for (std::int64_t k = 0; k < blen; ++k) {
            const std::int64_t site = static_cast<std::int64_t>(b) * blen + k;
            const double om = omega_at(model, trial, make_site(site), 1);
            const double a = energy - 2.0 - model.coupling * om;
            const double w0 = a * v0 - v1;
            const double w1 = v0;
            const double nrm = std::hypot(w0, w1);
            acc += std::log(nrm);
            v0 = w0 / nrm;
            v1 = w1 / nrm;
        }
        gamma_b.push_back(acc / static_cast<double>(blen));
    }
    LyapunovEstimate est;
    est.steps = blen * batches;
    double s = 0;
    for (double g : gamma_b) s += g;
    est.gamma = s / static_cast<double>(batches);
    double var = 0;
    for (double g : gamma_b) var += (g - est.gamma) * (g - est.gamma);
    var /= static_cast<double>(batches - 1);
    const double half = 1.96 * std::sqrt(var / static_cast<double>(batches));
    est.ci_lo = est.gamma - half;
    est.ci_hi = est.gamma + half;
    return est;
}

} // namespace msalab
