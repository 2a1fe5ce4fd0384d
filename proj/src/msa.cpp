#include "msalab/msa.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "msalab/errors.hpp"

namespace msalab {

double regularity_threshold(const RegularityParams& params, int side) {
    switch (params.kind) {
        case RegularityKind::Suitable:
            if (!(params.value > 0)) throw validation_error("suitable: theta must be > 0");
            return std::pow(static_cast<double>(side), -params.value);
        case RegularityKind::SubexpSuitable:
            if (!(params.value > 0 && params.value < 1))
                throw validation_error("sub-exponentially-suitable: zeta must be in (0,1)");
            return std::exp(-std::pow(static_cast<double>(side), params.value));
        case RegularityKind::Regular:
            if (!(params.value > 0)) throw validation_error("regular: m must be > 0");
            return std::exp(-params.value * side / 2.0);
    }
    return 0.0;
}

RegularityVerdict classify_box(const FiniteVolumeOperator& op, const RegularityParams& params) {
    if (op.box.side % 6 != 0) throw validation_error("classify_box: box side must be in 6N");
    RegularityVerdict v;
    v.threshold = regularity_threshold(params, op.box.side);
    const auto spec = spectrum(op, false);
    v.spectral_distance = spectral_dist(spec, params.energy);
    if (!(v.spectral_distance > singular_tolerance(op))) {
        v.verdict = BoxVerdict::EnergyInSpectrum;
        v.norm_value = std::numeric_limits<double>::infinity();
        return v;
    }
    v.norm_value = belt_core_norm(op, params.energy, v.spectral_distance);
    v.verdict = v.norm_value <= v.threshold ? BoxVerdict::Regular : BoxVerdict::Singular;
    return v;
}

double suitable_to_regular_mass(double theta, int side) {
    if (side < 2) throw validation_error("suitable_to_regular_mass: L must be >= 2");
    if (!(theta > 0)) throw validation_error("suitable_to_regular_mass: theta must be > 0");
    return 2.0 * theta * std::log(static_cast<double>(side)) / side;
}

double subexp_to_regular_mass(double zeta, int side) {
    if (side < 2) throw validation_error("subexp_to_regular_mass: L must be >= 2");
    if (!(zeta > 0 && zeta < 1)) throw validation_error("subexp_to_regular_mass: zeta must be in (0,1)");
    return 2.0 * std::pow(static_cast<double>(side), zeta - 1.0);
}

MonteCarloEstimate estimate_singular_prob(const DisorderModel& model, int dim, Bc bc, int side,
                                          const RegularityParams& params, std::int64_t trials,
                                          const Separation& sep, int workers) {
    (void)sep; // kept for signature parity with the two-box estimator
    if (trials < 1) throw validation_error("estimate_singular_prob: trials must be >= 1");
    const BoxSpec box(make_site(0), side, dim);
    std::vector<char> singular(static_cast<std::size_t>(trials), 0);
    parallel_for(trials, workers, [&](std::int64_t t) {
        const auto op = assemble_box(model, box, bc, t);
        singular[static_cast<std::size_t>(t)] = classify_box(op, params).regular() ? 0 : 1;
    });
    std::int64_t bad = 0;
    for (auto c : singular) bad += c;
    return binomial_estimate(bad, trials);
}

CertifyResult certify_grid(const FiniteVolumeOperator& op, double m, double e_lo, double e_hi,
                           int grid_n, double s) {
    if (grid_n < 2 && e_hi > e_lo) throw validation_error("certify_grid: grid_n must be >= 2");
    if (e_hi < e_lo) throw validation_error("certify_grid: empty interval");
    const int side = op.box.side;
    const double thr = std::exp(-m * side / 2.0);
    const double dist_floor = std::pow(static_cast<double>(side), -s);

    CertifyResult res;
    if (e_hi == e_lo) {
        res.grid_energies = {e_lo};
    } else {
        res.grid_energies.resize(static_cast<std::size_t>(grid_n));
        for (int i = 0; i < grid_n; ++i)
            res.grid_energies[static_cast<std::size_t>(i)] =
                e_lo + (e_hi - e_lo) * static_cast<double>(i) / static_cast<double>(grid_n - 1);
    }
    const double h = res.grid_energies.size() > 1
                         ? (e_hi - e_lo) / static_cast<double>(res.grid_energies.size() - 1)
                         : 0.0;

    const auto spec = spectrum(op, false);

    // lazily computed eigenbasis data for the sharper Lipschitz envelope
    Eigen::VectorXd sigma; // ||psi_j|belt|| * ||psi_j|core|| per eigenpair
    auto envelope_pad = [&](double e_i) {
        if (sigma.size() == 0) {
            const auto full = spectrum(op, true);
            const auto belt = belt_indices(op.box);
            const auto core = subbox_indices(op.box, core_box(op.box, op.box.side / 3));
            sigma.resize(full.eigenvalues.size());
            for (Eigen::Index j = 0; j < full.eigenvalues.size(); ++j) {
                double nb = 0, nc = 0;
                for (auto r : belt) nb += full.eigenvectors(r, j) * full.eigenvectors(r, j);
                for (auto c : core) nc += full.eigenvectors(c, j) * full.eigenvectors(c, j);
                sigma[j] = std::sqrt(nb) * std::sqrt(nc);
            }
        }
        double sum = 0;
        for (Eigen::Index j = 0; j < spec.eigenvalues.size(); ++j) {
            const double dj = std::abs(spec.eigenvalues[j] - e_i);
            sum += sigma[j] / ((dj - 0.5 * h) * dj);
        }
        return 0.5 * h * sum;
    };

    res.ok.assign(res.grid_energies.size(), 0);
    res.certified = true;
    for (std::size_t i = 0; i < res.grid_energies.size(); ++i) {
        const double e = res.grid_energies[i];
        const double dist = spectral_dist(spec, e);
        bool ok = dist > dist_floor + 0.5 * h;
        if (ok) {
            // between grid points the first resolvent identity gives
            //   ||B(E) - B(E_i)|| <= |E - E_i| ||R(E)|| ||R(E_i)|| <= (h/2)/(d_i(d_i - h/2)),
            // capped by (h/2) L^{2s} through the distance floor; when that slack is
            // coarser than the threshold, the per-eigenpair envelope
            //   sum_j sigma_j / ((d_j - h/2) d_j)
            // bounds the same variation with the actual belt/core weights
            const double norm = belt_core_norm(op, e, dist);
            const double pad = 0.5 * h / (dist * (dist - 0.5 * h));
            ok = norm + pad <= thr;
            if (!ok && h > 0) ok = norm + envelope_pad(e) <= thr;
        }
        res.ok[i] = ok ? 1 : 0;
        res.certified = res.certified && ok;
    }
    return res;
}

bool certify_interval_regularity(const FiniteVolumeOperator& op, double m, double e_lo, double e_hi,
                                 int grid_n, double s) {
    return certify_grid(op, m, e_lo, e_hi, grid_n, s).certified;
}

double interval_halfwidth(double m, double m_prime, int side, double s) {
    if (!(m_prime < m)) throw validation_error("interval_halfwidth: need m_prime < m");
    const double l2s = std::pow(static_cast<double>(side), 2.0 * s);
    return (std::exp(-m_prime * side / 2.0) - std::exp(-m * side / 2.0)) / (2.0 * l2s);
}

bool two_box_event_holds(const FiniteVolumeOperator& op_x, const FiniteVolumeOperator& op_y,
                         const TwoBoxEvent& ev, int grid_n, double s) {
    const auto cx = certify_grid(op_x, ev.mass, ev.e_lo, ev.e_hi, grid_n, s);
    const auto cy = certify_grid(op_y, ev.mass, ev.e_lo, ev.e_hi, grid_n, s);
    for (std::size_t i = 0; i < cx.ok.size(); ++i)
        if (!cx.ok[i] && !cy.ok[i]) return false;
    return true;
}

MonteCarloEstimate estimate_two_box_fail(const DisorderModel& model, int dim, Bc bc, double m, int side,
                                         double e_lo, double e_hi, const Site& x, const Site& y,
                                         int grid_n, double s, std::int64_t trials, const Separation& sep,
                                         int workers) {
    if (trials < 1) throw validation_error("estimate_two_box_fail: trials must be >= 1");
    const BoxSpec bx(x, side, dim), by(y, side, dim);
    if (chebyshev(x, y, dim) <= side + sep.rho)
        throw validation_error("estimate_two_box_fail: centers must satisfy |x-y| > L + rho");
    const TwoBoxEvent ev{m, side, e_lo, e_hi, x, y};
    std::vector<char> fail(static_cast<std::size_t>(trials), 0);
    parallel_for(trials, workers, [&](std::int64_t t) {
        const auto opx = assemble_box(model, bx, bc, t);
        const auto opy = assemble_box(model, by, bc, t);
        fail[static_cast<std::size_t>(t)] = two_box_event_holds(opx, opy, ev, grid_n, s) ? 0 : 1;
    });
    std::int64_t bad = 0;
    for (auto c : fail) bad += c;
    return binomial_estimate(bad, trials);
}

namespace {

void push(std::vector<std::string>& out, const std::string& msg) { out.push_back(msg); }

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

} // namespace

std::vector<std::string> validate_msa_params(const MsaParams& mp, int dim, double alpha,
                                             bool interval_stage, bool check_zetas) {
    std::vector<std::string> out;
    const double bd = static_cast<double>(mp.b) * dim;
    if (!(mp.b == 1 || mp.b == 2)) push(out, "(wegner): b must be 1 or 2, got " + num(mp.b));
    if (!(mp.theta > bd)) push(out, "(exponents): need theta > b*d, got theta=" + num(mp.theta) + " b*d=" + num(bd));
    if (!(0 < mp.p && mp.p < mp.p_prime && mp.p_prime < mp.theta - bd))
        push(out, "(exponents): need 0 < p < p' < theta - b*d, got p=" + num(mp.p) + " p'=" + num(mp.p_prime) +
                      " theta-b*d=" + num(mp.theta - bd));
    if (alpha > 0) {
        const double amax = std::min((2 * mp.p + 2 * dim) / (mp.p + 2 * dim), mp.theta / (mp.p + bd));
        if (!(1 < alpha && alpha < amax))
            push(out, "(scale exponent): need 1 < alpha < min{(2p+2d)/(p+2d), theta/(p+bd)} = " + num(amax) +
                          ", got alpha=" + num(alpha));
        if (!(mp.theta / 2 < mp.theta_prime && mp.theta_prime < mp.theta))
            push(out, "(auxiliary exponents): need theta/2 < theta' < theta, got theta'=" + num(mp.theta_prime));
        if (!(mp.p + bd < mp.s && alpha * mp.s < mp.theta_prime))
            push(out, "(auxiliary exponents): need p + b*d < s < alpha*s < theta', got s=" + num(mp.s) +
                          " alpha*s=" + num(alpha * mp.s) + " theta'=" + num(mp.theta_prime));
    }
    if (interval_stage && !(mp.theta > 2 * mp.p + (mp.b + 1) * dim))
        push(out, "(interval stage): need theta > 2p + (b+1)d = " + num(2 * mp.p + (mp.b + 1) * dim) +
                      ", got theta=" + num(mp.theta));
    if (check_zetas) {
        if (!(0 < mp.zeta2 && mp.zeta2 < mp.zeta1 && mp.zeta1 < mp.zeta0 && mp.zeta0 < 1))
            push(out, "(zeta ladder): need 0 < zeta2 < zeta1 < zeta0 < 1, got " + num(mp.zeta2) + ", " +
                          num(mp.zeta1) + ", " + num(mp.zeta0));
        else if (alpha > 0 && !(alpha < mp.zeta0 / mp.zeta1))
            push(out, "(zeta ladder): need alpha < zeta0/zeta1 = " + num(mp.zeta0 / mp.zeta1) +
                          ", got alpha=" + num(alpha));
    }
    if (mp.rho < 0) push(out, "(iad): rho must be >= 0");
    return out;
}

ScaleSchedule build_schedule(const ScheduleConfig& cfg) {
    if (cfg.l0 < 6 || cfg.l0 % 6 != 0) throw validation_error("build_schedule: L0 must be in 6N");
    if (cfg.l0 > cfg.cap) throw validation_error("build_schedule: L0 exceeds the cap");
    if (cfg.mode == ScheduleMode::Geometric && (cfg.y < 11 || cfg.y % 2 == 0))
        throw validation_error("build_schedule: Geometric mode needs odd Y >= 11");
    if (cfg.msa_grade) {
        const double alpha = cfg.mode == ScheduleMode::Power ? cfg.alpha : -1.0;
        auto diags = validate_msa_params(cfg.params, cfg.dim, alpha, false, false);
        if (!diags.empty()) {
            std::string all = "build_schedule: inadmissible parameters:";
            for (const auto& d : diags) all += "\n  " + d;
            throw validation_error(all);
        }
    }
    ScaleSchedule sched;
    sched.mode = cfg.mode;
    sched.l0 = cfg.l0;
    int l = cfg.l0;
    sched.scales.push_back(l);
    while (true) {
        int next;
        if (cfg.mode == ScheduleMode::Geometric) {
            next = cfg.y * l;
        } else {
            next = snap_6n(std::pow(static_cast<double>(l), cfg.alpha));
            if (next <= l)
                throw validation_error("build_schedule: alpha too small to advance past L=" + std::to_string(l));
        }
        if (next > cfg.cap) break;
        sched.scales.push_back(next);
        l = next;
    }
    return sched;
}

FittedMass fitted_mass(const DisorderModel& model, int dim, Bc bc, double energy, int side,
                       std::int64_t trials, int workers) {
    if (trials < 1) throw validation_error("fitted_mass: trials must be >= 1");
    const BoxSpec box(make_site(0), side, dim);
    std::vector<double> mass(static_cast<std::size_t>(trials),
                             std::numeric_limits<double>::quiet_NaN());
    parallel_for(trials, workers, [&](std::int64_t t) {
        const auto op = assemble_box(model, box, bc, t);
        const auto spec = spectrum(op, false);
        const double dist = spectral_dist(spec, energy);
        if (!(dist > singular_tolerance(op))) return;
        const double norm = belt_core_norm(op, energy, dist);
        mass[static_cast<std::size_t>(t)] = -2.0 * std::log(norm) / side;
    });
    FittedMass fm;
    std::vector<double> vals;
    for (double m : mass) {
        if (std::isnan(m))
            ++fm.skipped;
        else
            vals.push_back(m);
    }
    fm.used = static_cast<std::int64_t>(vals.size());
    if (vals.empty()) throw numerical_error("fitted_mass: every trial had E in the spectrum");
    fm.median_mass = median(vals);
    fm.min_mass = *std::min_element(vals.begin(), vals.end());
    return fm;
}

std::string tag_name(Tag t) {
    switch (t) {
        case Tag::Pass: return "PASS";
        case Tag::Fail: return "FAIL";
        case Tag::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

Tag tag_against_lower_threshold(const MonteCarloEstimate& est, double threshold) {
    if (est.ci_lo > threshold) return Tag::Pass;
    if (est.ci_hi < threshold) return Tag::Fail;
    return Tag::Inconclusive;
}

namespace {

MonteCarloEstimate good_event_estimate(const DisorderModel& model, int dim, Bc bc, int side,
                                       const RegularityParams& params, std::int64_t trials, int workers) {
    const auto bad = estimate_singular_prob(model, dim, bc, side, params, trials, Separation{0}, workers);
    return binomial_estimate(bad.trials - bad.successes, bad.trials);
}

} // namespace

BootstrapResult run_bootstrap(const DisorderModel& model, int dim, Bc bc, double e0,
                              const BootstrapConfig& cfg) {
    {
        auto diags = validate_msa_params(cfg.params, dim, cfg.alpha, false, true);
        if (!diags.empty()) {
            std::string all = "run_bootstrap: inadmissible parameters:";
            for (const auto& d : diags) all += "\n  " + d;
            throw validation_error(all);
        }
    }
    ScheduleConfig gcfg{ScheduleMode::Geometric, cfg.l0, cfg.alpha, cfg.y, cfg.cap, false, cfg.params, dim};
    ScheduleConfig pcfg{ScheduleMode::Power, cfg.l0, cfg.alpha, cfg.y, cfg.cap, true, cfg.params, dim};
    const auto geo = build_schedule(gcfg);
    const auto pow_sched = build_schedule(pcfg);

    const MsaParams& mp = cfg.params;
    const double entry_thr = 1.0 - std::pow(3.0 * cfg.y - 4.0, -2.0 * dim);

    BootstrapResult result;

    // stage 1: theta-suitability along the geometric ladder
    StageReport st1;
    st1.stage = 1;
    st1.name = "suitability, geometric ladder";
    for (std::size_t k = 0; k < geo.scales.size(); ++k) {
        const int l = geo.scales[k];
        RegularityParams rp{RegularityKind::Suitable, mp.theta, e0};
        StageRow row;
        row.scale = l;
        row.estimate = good_event_estimate(model, dim, bc, l, rp, cfg.trials, cfg.workers);
        row.threshold = k == 0 ? entry_thr : 1.0 - std::pow(static_cast<double>(l), -mp.p);
        row.tag = tag_against_lower_threshold(row.estimate, row.threshold);
        st1.rows.push_back(row);
        if (k == 0 && row.tag == Tag::Fail) {
            st1.halted = true;
            st1.note = "starting hypothesis failed at L0: the pipeline halts";
            break;
        }
    }
    result.stages.push_back(st1);
    if (st1.halted) {
        result.halted = true;
        return result;
    }

    // stage 2: m0-regularity hypothesis at L0, m0/2 along the power ladder, mass ledger
    const double m0 = suitable_to_regular_mass(mp.theta, cfg.l0);
    const double m0p = suitable_to_regular_mass(mp.theta_prime, cfg.l0);
    StageReport st2;
    st2.stage = 2;
    st2.name = "regularity, power ladder";
    {
        RegularityParams rp{RegularityKind::Regular, m0, e0};
        StageRow row;
        row.scale = cfg.l0;
        row.estimate = good_event_estimate(model, dim, bc, cfg.l0, rp, cfg.trials, cfg.workers);
        row.threshold = 1.0 - std::pow(static_cast<double>(cfg.l0), -mp.p_prime);
        row.tag = tag_against_lower_threshold(row.estimate, row.threshold);
        row.mass = fitted_mass(model, dim, bc, e0, cfg.l0, cfg.trials, cfg.workers).median_mass;
        st2.rows.push_back(row);
    }
    for (std::size_t k = 1; k < pow_sched.scales.size(); ++k) {
        const int l = pow_sched.scales[k];
        RegularityParams rp{RegularityKind::Regular, m0 / 2.0, e0};
        StageRow row;
        row.scale = l;
        row.estimate = good_event_estimate(model, dim, bc, l, rp, cfg.trials, cfg.workers);
        row.threshold = 1.0 - std::pow(static_cast<double>(l), -mp.p);
        row.tag = tag_against_lower_threshold(row.estimate, row.threshold);
        row.mass = fitted_mass(model, dim, bc, e0, l, cfg.trials, cfg.workers).median_mass;
        st2.rows.push_back(row);
    }
    for (std::size_t k = 0; k + 1 < st2.rows.size(); ++k)
        st2.mass_ledger_sum += st2.rows[k].mass - st2.rows[k + 1].mass;
    st2.mass_ledger_bound = m0p - m0 / 2.0;
    st2.mass_ledger_ok = st2.mass_ledger_sum <= st2.mass_ledger_bound;
    {
        std::ostringstream os;
        os << "m0=" << m0 << " m0'=" << m0p << " mass ledger sum=" << st2.mass_ledger_sum
           << " bound=" << st2.mass_ledger_bound << (st2.mass_ledger_ok ? " (ok)" : " (violated)");
        st2.note = os.str();
    }
    result.stages.push_back(st2);

    // stage 3: sub-exponential suitability along the geometric ladder
    StageReport st3;
    st3.stage = 3;
    st3.name = "sub-exponential suitability, geometric ladder";
    const double y_bound = std::pow(11.0, 1.0 / (1.0 - mp.zeta0));
    {
        std::ostringstream os;
        os << "sub-exponential ladder wants rung factor Y >= 11^{1/(1-zeta0)} = " << y_bound
           << (cfg.y >= y_bound ? " (satisfied)" : " (not satisfied at desk scale; reported, not enforced)");
        st3.note = os.str();
    }
    for (std::size_t k = 0; k < geo.scales.size(); ++k) {
        const int l = geo.scales[k];
        RegularityParams rp{RegularityKind::SubexpSuitable, mp.zeta0, e0};
        StageRow row;
        row.scale = l;
        row.estimate = good_event_estimate(model, dim, bc, l, rp, cfg.trials, cfg.workers);
        row.threshold = k == 0 ? entry_thr
                               : 1.0 - std::exp(-std::pow(static_cast<double>(l), mp.zeta1));
        row.tag = tag_against_lower_threshold(row.estimate, row.threshold);
        st3.rows.push_back(row);
    }
    result.stages.push_back(st3);

    // stage 4: two-box interval events along the power ladder
    StageReport st4;
    st4.stage = 4;
    st4.name = "two-box interval events, power ladder";
    const double m_se = subexp_to_regular_mass(mp.zeta0, cfg.l0);
    const double delta2 = interval_halfwidth(m_se, 0.75 * m_se, cfg.l0, mp.s);
    {
        std::ostringstream os;
        os << "m=" << m_se / 2.0 << " interval half-width delta2=" << delta2;
        st4.note = os.str();
    }
    for (std::size_t k = 0; k < pow_sched.scales.size(); ++k) {
        const int l = pow_sched.scales[k];
        const std::int64_t off = (l + mp.rho) / 2 + 1; // |x-y| = 2*off > L + rho
        const Site x = make_site(-off);
        const Site y = make_site(off);
        const auto fail = estimate_two_box_fail(model, dim, bc, m_se / 2.0, l, e0 - delta2, e0 + delta2, x,
                                                y, cfg.grid_n, mp.s, cfg.trials, Separation{mp.rho},
                                                cfg.workers);
        StageRow row;
        row.scale = l;
        row.estimate = binomial_estimate(fail.trials - fail.successes, fail.trials);
        row.threshold = 1.0 - std::exp(-std::pow(static_cast<double>(l), mp.zeta2));
        row.tag = tag_against_lower_threshold(row.estimate, row.threshold);
        st4.rows.push_back(row);
    }
    result.stages.push_back(st4);
    return result;
}

} // namespace msalab
