#include "msalab/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "msalab/diagnostics.hpp"
#include "msalab/errors.hpp"

namespace msalab {

namespace fs = std::filesystem;

std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

std::string bc_name(Bc bc) { return bc == Bc::Dirichlet ? "dirichlet" : "periodic"; }

Bc bc_from_name(const std::string& s) {
    if (s == "dirichlet") return Bc::Dirichlet;
    if (s == "periodic") return Bc::Periodic;
    throw validation_error("unknown boundary condition '" + s + "'");
}

json model_to_json(const DisorderModel& m) {
    return json{{"coupling", m.coupling},
                {"distribution", distribution_name(m.distribution)},
                {"master_seed", m.master_seed}};
}

DisorderModel model_from_json(const json& j) {
    DisorderModel m;
    m.coupling = j.value("coupling", 1.0);
    m.distribution = distribution_from_name(j.value("distribution", std::string("uniform[-1,1]")));
    m.master_seed = j.value("master_seed", std::uint64_t{1});
    return m;
}

MsaParams msa_params_from_json(const json& p) {
    MsaParams mp;
    mp.theta = p.value("theta", mp.theta);
    mp.p = p.value("p", mp.p);
    mp.p_prime = p.value("p_prime", mp.p_prime);
    mp.s = p.value("s", mp.s);
    mp.theta_prime = p.value("theta_prime", mp.theta_prime);
    mp.zeta0 = p.value("zeta0", mp.zeta0);
    mp.zeta1 = p.value("zeta1", mp.zeta1);
    mp.zeta2 = p.value("zeta2", mp.zeta2);
    mp.b = p.value("b", mp.b);
    mp.rho = p.value("rho", mp.rho);
    return mp;
}

json msa_params_to_json(const MsaParams& mp) {
    return json{{"theta", mp.theta},   {"p", mp.p},         {"p_prime", mp.p_prime},
                {"s", mp.s},           {"theta_prime", mp.theta_prime},
                {"zeta0", mp.zeta0},   {"zeta1", mp.zeta1}, {"zeta2", mp.zeta2},
                {"b", mp.b},           {"rho", mp.rho}};
}

const std::vector<std::string> kExperiments = {"wegner", "ne",       "msa",        "bootstrap",
                                               "sli",    "edi",      "decay",      "dynamics",
                                               "correlator", "lyapunov", "oracle"};

} // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    if (!j.contains("experiment")) throw validation_error("config: missing 'experiment'");
    cfg.experiment = j.at("experiment").get<std::string>();
    if (j.contains("model")) cfg.model = model_from_json(j.at("model"));
    cfg.dimension = j.value("dimension", 1);
    cfg.bc = bc_from_name(j.value("bc", std::string("dirichlet")));
    cfg.trials = j.value("trials", std::int64_t{2000});
    cfg.workers = j.value("workers", 2);
    cfg.out_dir = j.value("out", std::string("out"));
    cfg.params = j.value("params", json::object());
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    // the output directory is a run location, not an experiment parameter; leaving
    // it out keeps summary.json byte-identical across re-runs into other directories
    return json{{"experiment", cfg.experiment}, {"model", model_to_json(cfg.model)},
                {"dimension", cfg.dimension},   {"bc", bc_name(cfg.bc)},
                {"trials", cfg.trials},         {"workers", cfg.workers},
                {"params", cfg.params}};
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw validation_error("config parse error in '" + path + "': " + e.what());
    }
    return config_from_json(j);
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
    std::vector<std::string> out;
    if (std::find(kExperiments.begin(), kExperiments.end(), cfg.experiment) == kExperiments.end())
        out.push_back("unknown experiment '" + cfg.experiment + "'");
    if (cfg.dimension < 1 || cfg.dimension > 3) out.push_back("dimension must be 1, 2 or 3");
    if (cfg.trials < 1) out.push_back("trials must be >= 1");
    if (cfg.workers < 1) out.push_back("workers must be >= 1");
    if (!(cfg.model.coupling >= 0)) out.push_back("coupling must be >= 0");

    if (cfg.experiment == "bootstrap" || cfg.experiment == "msa") {
        const auto mp = msa_params_from_json(cfg.params);
        const double alpha = cfg.params.value("alpha", 1.25);
        const bool interval_stage = cfg.experiment == "msa" && cfg.params.value("two_box", false);
        const bool zetas = cfg.experiment == "bootstrap";
        for (auto& d : validate_msa_params(mp, cfg.dimension, alpha, interval_stage, zetas))
            out.push_back(d);
        const int l0 = cfg.params.value("l0", cfg.params.value("side", 12));
        if (l0 < 6 || l0 % 6 != 0) out.push_back("L0/side must be in 6N");
    }
    return out;
}

namespace {

struct ExperimentOutput {
    std::string csv;
    json summary;
};

void csv_header(std::string& csv, const std::string& header) { csv = header + "\n"; }

void csv_row(std::string& csv, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        csv += cells[i];
        csv += i + 1 < cells.size() ? "," : "";
    }
    csv += "\n";
}

json estimate_to_json(const MonteCarloEstimate& e) {
    return json{{"successes", e.successes}, {"trials", e.trials}, {"p_hat", e.p_hat},
                {"ci_lo", e.ci_lo},         {"ci_hi", e.ci_hi}};
}

ExperimentOutput exp_wegner(const ExperimentConfig& cfg) {
    const double energy = cfg.params.value("energy", 2.0);
    const auto etas = cfg.params.value("etas", std::vector<double>{1e-3, 3e-3, 1e-2, 3e-2});
    const auto scales = cfg.params.value("scales", std::vector<int>{12, 24, 48});
    const auto curve =
        wegner_scan(cfg.model, cfg.dimension, cfg.bc, energy, etas, scales, cfg.trials, cfg.workers);
    ExperimentOutput out;
    csv_header(out.csv, "scale,eta,successes,trials,p_hat,ci_lo,ci_hi");
    for (std::size_t i = 0; i < curve.scales.size(); ++i)
        for (std::size_t k = 0; k < curve.etas.size(); ++k) {
            const auto& e = curve.p[i][k];
            csv_row(out.csv, {std::to_string(curve.scales[i]), csv_num(curve.etas[k]),
                              std::to_string(e.successes), std::to_string(e.trials), csv_num(e.p_hat),
                              csv_num(e.ci_lo), csv_num(e.ci_hi)});
        }
    out.summary = json{{"energy", energy},
                       {"eta_slope", curve.eta_slope},
                       {"l_exponent", curve.l_exponent}};
    return out;
}

ExperimentOutput exp_ne(const ExperimentConfig& cfg) {
    const auto interval = cfg.params.value("interval", std::vector<double>{1.5, 2.5});
    const auto scales = cfg.params.value("scales", std::vector<int>{12, 24, 48});
    const auto table = ne_scan(cfg.model, cfg.dimension, cfg.bc, interval.at(0), interval.at(1), scales,
                               cfg.trials, cfg.workers);
    ExperimentOutput out;
    csv_header(out.csv, "scale,mean_count,per_volume,std_error");
    for (const auto& r : table.rows)
        csv_row(out.csv, {std::to_string(r.scale), csv_num(r.mean_count), csv_num(r.per_volume),
                          csv_num(r.std_error)});
    out.summary = json{{"interval", interval}, {"spread", table.spread}};
    return out;
}

ExperimentOutput exp_msa(const ExperimentConfig& cfg) {
    const auto mp = msa_params_from_json(cfg.params);
    const int side = cfg.params.value("side", 12);
    const double energy = cfg.params.value("energy", 0.0);
    const std::string kind = cfg.params.value("kind", std::string("suitable"));
    RegularityParams rp;
    rp.energy = energy;
    if (kind == "suitable") {
        rp.kind = RegularityKind::Suitable;
        rp.value = cfg.params.value("value", mp.theta);
    } else if (kind == "subexp") {
        rp.kind = RegularityKind::SubexpSuitable;
        rp.value = cfg.params.value("value", mp.zeta0);
    } else if (kind == "regular") {
        rp.kind = RegularityKind::Regular;
        rp.value = cfg.params.value("value", suitable_to_regular_mass(mp.theta, side));
    } else {
        throw validation_error("msa: kind must be suitable, subexp or regular");
    }
    const auto single = estimate_singular_prob(cfg.model, cfg.dimension, cfg.bc, side, rp, cfg.trials,
                                               Separation{mp.rho}, cfg.workers);
    ExperimentOutput out;
    csv_header(out.csv, "event,scale,successes,trials,p_hat,ci_lo,ci_hi");
    csv_row(out.csv, {"single_box_singular", std::to_string(side), std::to_string(single.successes),
                      std::to_string(single.trials), csv_num(single.p_hat), csv_num(single.ci_lo),
                      csv_num(single.ci_hi)});
    out.summary = json{{"side", side},
                       {"kind", kind},
                       {"value", rp.value},
                       {"energy", energy},
                       {"single_box_singular", estimate_to_json(single)}};
    if (cfg.params.value("two_box", false)) {
        const double mass = cfg.params.value("mass", suitable_to_regular_mass(mp.theta, side) / 2.0);
        const double delta = cfg.params.value("delta", 0.0);
        const int grid_n = cfg.params.value("grid_n", 3);
        const std::int64_t dist = cfg.params.value("centers_distance", std::int64_t{side + 2});
        const auto two = estimate_two_box_fail(cfg.model, cfg.dimension, cfg.bc, mass, side,
                                               energy - delta, energy + delta, make_site(-(dist / 2)),
                                               make_site(dist - dist / 2), grid_n, mp.s, cfg.trials,
                                               Separation{mp.rho}, cfg.workers);
        csv_row(out.csv, {"two_box_fail", std::to_string(side), std::to_string(two.successes),
                          std::to_string(two.trials), csv_num(two.p_hat), csv_num(two.ci_lo),
                          csv_num(two.ci_hi)});
        out.summary["two_box_fail"] = estimate_to_json(two);
        out.summary["mass"] = mass;
        out.summary["delta"] = delta;
    }
    return out;
}

ExperimentOutput exp_bootstrap(const ExperimentConfig& cfg) {
    BootstrapConfig bc_cfg;
    bc_cfg.l0 = cfg.params.value("l0", 12);
    bc_cfg.cap = cfg.params.value("cap", 300);
    bc_cfg.y = cfg.params.value("y", 11);
    bc_cfg.alpha = cfg.params.value("alpha", 1.25);
    bc_cfg.params = msa_params_from_json(cfg.params);
    bc_cfg.trials = cfg.trials;
    bc_cfg.grid_n = cfg.params.value("grid_n", 3);
    bc_cfg.workers = cfg.workers;
    const double e0 = cfg.params.value("energy", 0.0);
    const auto result = run_bootstrap(cfg.model, cfg.dimension, cfg.bc, e0, bc_cfg);
    ExperimentOutput out;
    out.summary = json::object();
    out.summary["msa_params"] = msa_params_to_json(bc_cfg.params);
    csv_header(out.csv, "stage,scale,successes,trials,p_hat,ci_lo,ci_hi,threshold,tag,mass");
    for (const auto& st : result.stages)
        for (const auto& row : st.rows)
            csv_row(out.csv,
                    {std::to_string(st.stage), std::to_string(row.scale),
                     std::to_string(row.estimate.successes), std::to_string(row.estimate.trials),
                     csv_num(row.estimate.p_hat), csv_num(row.estimate.ci_lo),
                     csv_num(row.estimate.ci_hi), csv_num(row.threshold), tag_name(row.tag),
                     csv_num(row.mass)});
    auto boot = bootstrap_to_json(result);
    boot["msa_params"] = out.summary["msa_params"];
    boot["energy"] = e0;
    boot["text_report"] = bootstrap_to_text(result);
    out.summary = boot;
    return out;
}

ExperimentOutput exp_sli(const ExperimentConfig& cfg) {
    const auto outer_scales = cfg.params.value("outer_scales", std::vector<int>{36, 72});
    const int inner = cfg.params.value("inner_side", 12);
    const int cell = cfg.params.value("cell_side", 4);
    const bool has_fixed_e = cfg.params.contains("energy");
    const double e_primary = has_fixed_e ? cfg.params.at("energy").get<double>()
                                         : -(cfg.model.coupling + 3.0);
    const double e_inband = cfg.params.value("energy_inband", 0.0);
    ExperimentOutput out;
    csv_header(out.csv, "outer,energy,regime,gamma_max,p90,count,skipped");
    json rows = json::array();
    for (int l : outer_scales) {
        for (auto [e, regime] :
             {std::pair<double, const char*>{e_primary, has_fixed_e ? "configured" : "below_spectrum"},
              std::pair<double, const char*>{e_inband, "in_band"}}) {
            const auto scan =
                sli_scan(cfg.model, cfg.dimension, cfg.bc, l, inner, cell, e, cfg.trials, cfg.workers);
            const double p90 = scan.ratios.empty() ? 0.0 : percentile(scan.ratios, 0.9);
            csv_row(out.csv, {std::to_string(l), csv_num(e), regime, csv_num(scan.gamma_max),
                              csv_num(p90), std::to_string(scan.ratios.size()),
                              std::to_string(scan.skipped)});
            rows.push_back(json{{"outer", l},
                               {"energy", e},
                               {"regime", regime},
                               {"gamma_max", scan.gamma_max},
                               {"p90", p90}});
        }
    }
    out.summary = json{{"inner_side", inner}, {"cell_side", cell}, {"rows", rows}};
    return out;
}

ExperimentOutput exp_edi(const ExperimentConfig& cfg) {
    const auto big_scales = cfg.params.value("big_scales", std::vector<int>{36, 72});
    const int probe = cfg.params.value("probe_side", 12);
    const double e_target = cfg.params.value("e_target", 0.0);
    ExperimentOutput out;
    csv_header(out.csv, "big,probe,gamma_max_spec_belt,gamma_max_thick_belt,probes");
    json rows = json::array();
    for (int l : big_scales) {
        const auto scan =
            edi_scan(cfg.model, cfg.dimension, cfg.bc, l, probe, e_target, cfg.trials, cfg.workers);
        csv_row(out.csv, {std::to_string(l), std::to_string(probe), csv_num(scan.gamma_max_spec),
                          csv_num(scan.gamma_max_thick), std::to_string(scan.probes)});
        rows.push_back(json{{"big", l},
                           {"gamma_max_spec_belt", scan.gamma_max_spec},
                           {"gamma_max_thick_belt", scan.gamma_max_thick},
                           {"probes", scan.probes}});
    }
    out.summary = json{{"probe_side", probe}, {"e_target", e_target}, {"rows", rows}};
    return out;
}

ExperimentOutput exp_decay(const ExperimentConfig& cfg) {
    const int side = cfg.params.value("side", 216);
    const auto interval = cfg.params.value("interval", std::vector<double>{-0.5, 0.5});
    const BoxSpec box(make_site(0), side, cfg.dimension);
    const auto summary = eigenfunction_decay(cfg.model, cfg.dimension, cfg.bc, box, interval.at(0),
                                             interval.at(1), cfg.trials, cfg.workers);
    ExperimentOutput out;
    csv_header(out.csv, "eigenvalue,center,fitted_rate,r2,n_radii");
    for (const auto& p : summary.profiles)
        csv_row(out.csv, {csv_num(p.eigenvalue), std::to_string(p.center[0]), csv_num(p.fitted_rate),
                          csv_num(p.r2), std::to_string(p.radii.size())});
    out.summary = json{{"side", side},
                       {"interval", interval},
                       {"profiles", summary.profiles.size()},
                       {"median_rate", summary.median_rate}};
    return out;
}

ExperimentOutput exp_dynamics(const ExperimentConfig& cfg) {
    const int side = cfg.params.value("side", 216);
    const auto interval = cfg.params.value("interval", std::vector<double>{-0.5, 0.5});
    const int n = cfg.params.value("moment", 2);
    const double t_min = cfg.params.value("t_min", 10.0);
    const double t_max = cfg.params.value("t_max", 1e4);
    const int t_points = cfg.params.value("t_points", 25);
    std::vector<double> ts;
    for (int i = 0; i < t_points; ++i)
        ts.push_back(t_min * std::pow(t_max / t_min, static_cast<double>(i) / (t_points - 1)));
    const BoxSpec box(make_site(0), side, cfg.dimension);
    const auto trace = dynamical_moment(cfg.model, cfg.dimension, cfg.bc, box, interval.at(0),
                                        interval.at(1), n, make_site(0), ts);
    ExperimentOutput out;
    csv_header(out.csv, "t,moment,cesaro");
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        csv_row(out.csv, {csv_num(trace.times[i]), csv_num(trace.moment[i]), csv_num(trace.cesaro[i])});
    out.summary = json{{"side", side},         {"interval", interval},
                       {"moment", n},          {"max_value", trace.max_value},
                       {"late_early_ratio", trace.late_early_ratio}};
    return out;
}

ExperimentOutput exp_correlator(const ExperimentConfig& cfg) {
    const int side = cfg.params.value("side", 216);
    const auto interval = cfg.params.value("interval", std::vector<double>{-0.5, 0.5});
    const BoxSpec box(make_site(0), side, cfg.dimension);
    const auto fit = correlator_decay(cfg.model, cfg.dimension, cfg.bc, box, interval.at(0),
                                      interval.at(1), cfg.trials, cfg.workers);
    ExperimentOutput out;
    csv_header(out.csv, "r,q");
    for (std::size_t i = 0; i < fit.radii.size(); ++i)
        csv_row(out.csv, {std::to_string(fit.radii[i]), csv_num(fit.q[i])});
    out.summary = json{{"side", side},        {"interval", interval}, {"best_zeta", fit.best_zeta},
                       {"rate", fit.rate},    {"r2", fit.r2}};
    return out;
}

ExperimentOutput exp_lyapunov(const ExperimentConfig& cfg) {
    const double energy = cfg.params.value("energy", 0.0);
    const std::int64_t steps = cfg.params.value("steps", std::int64_t{1000000});
    const int batches = cfg.params.value("batches", 32);
    const auto est = lyapunov_1d(cfg.model, energy, steps, batches);
    ExperimentOutput out;
    csv_header(out.csv, "energy,gamma,ci_lo,ci_hi,steps");
    csv_row(out.csv, {csv_num(energy), csv_num(est.gamma), csv_num(est.ci_lo), csv_num(est.ci_hi),
                      std::to_string(est.steps)});
    out.summary = json{{"energy", energy}, {"gamma", est.gamma},
                       {"ci_lo", est.ci_lo}, {"ci_hi", est.ci_hi}};
    return out;
}

ExperimentOutput exp_oracle(const ExperimentConfig& cfg) {
    const int instances = cfg.params.value("instances", 50);
    const auto rep = run_oracle_suite(cfg.model.master_seed, instances, cfg.workers);
    ExperimentOutput out;
    csv_header(out.csv, "dim,side,coupling,energy,rel_err_block,rel_err_full,pass");
    double worst_block = 0, worst_full = 0;
    for (const auto& r : rep.rows) {
        csv_row(out.csv, {std::to_string(r.dim), std::to_string(r.side), csv_num(r.coupling),
                          csv_num(r.energy), csv_num(r.rel_err_block), csv_num(r.rel_err_full),
                          r.pass ? "1" : "0"});
        worst_block = std::max(worst_block, r.rel_err_block);
        worst_full = std::max(worst_full, r.rel_err_full);
    }
    out.summary = json{{"instances", rep.rows.size()},
                       {"all_pass", rep.all_pass},
                       {"worst_rel_err_block", worst_block},
                       {"worst_rel_err_full", worst_full}};
    if (!rep.all_pass) throw numerical_error("oracle suite failed: see data.csv");
    return out;
}

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw numerical_error("cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

json manifest_to_json(const RunManifest& m) {
    json files = json::array();
    for (const auto& f : m.files)
        files.push_back(json{{"name", f.name}, {"fnv1a64", f.fnv1a64}, {"bytes", f.bytes}});
    return json{{"version", m.version},       {"status", m.status}, {"master_seed", m.master_seed},
                {"wall_ms", m.wall_ms},       {"files", files},     {"config", m.config}};
}

} // namespace

OracleReport run_oracle_suite(std::uint64_t master_seed, int instances, int workers) {
    OracleReport rep;
    rep.rows.resize(static_cast<std::size_t>(instances));
    const double couplings[3] = {0.0, 1.0, 8.0};
    parallel_for(instances, workers, [&](std::int64_t i) {
        OracleRow row;
        row.dim = static_cast<int>(i % 2) + 1;
        row.side = (i % 4) < 2 ? 6 : 12;
        row.coupling = couplings[i % 3];
        DisorderModel model{row.coupling, Distribution::UniformSym, master_seed + 977u * static_cast<std::uint64_t>(i)};
        const BoxSpec box(make_site(0), row.side, row.dim);
        const auto op = assemble_box(model, box, Bc::Dirichlet, i);
        const auto spec = spectrum(op, false);
        if (i % 2 == 0) {
            row.energy = -model.coupling - 0.5 - 0.07 * static_cast<double>(i);
        } else {
            // a mid-gap energy: widest gap keeps the shift comfortably regular
            const auto& ev = spec.eigenvalues;
            double best = 0, at = ev[0] - 1.0;
            for (Eigen::Index k = 0; k + 1 < ev.size(); ++k)
                if (ev[k + 1] - ev[k] > best) {
                    best = ev[k + 1] - ev[k];
                    at = 0.5 * (ev[k] + ev[k + 1]);
                }
            row.energy = at;
        }
        const double dist = spectral_dist(spec, row.energy);
        const auto rows_idx = belt_indices(box);
        const auto cols_idx = subbox_indices(box, core_box(box, box.side / 3));
        const double sparse = green_block_norm(op, row.energy, rows_idx, cols_idx, dist);
        const double dense = green_block_norm_dense(op, row.energy, rows_idx, cols_idx, dist);
        row.rel_err_block = std::abs(sparse - dense) / std::max(dense, 1e-300);

        std::vector<std::int64_t> all(static_cast<std::size_t>(op.n()));
        for (std::int64_t k = 0; k < op.n(); ++k) all[static_cast<std::size_t>(k)] = k;
        const double full = green_block_norm(op, row.energy, all, all, dist);
        row.rel_err_full = std::abs(full - 1.0 / dist) * dist;
        row.pass = row.rel_err_block <= 1e-9 && row.rel_err_full <= 1e-9;
        rep.rows[static_cast<std::size_t>(i)] = row;
    });
    rep.all_pass = true;
    for (const auto& r : rep.rows) rep.all_pass = rep.all_pass && r.pass;
    return rep;
}

json bootstrap_to_json(const BootstrapResult& result) {
    json stages = json::array();
    for (const auto& st : result.stages) {
        json rows = json::array();
        for (const auto& row : st.rows) {
            json r{{"scale", row.scale},
                   {"estimate", estimate_to_json(row.estimate)},
                   {"threshold", row.threshold},
                   {"tag", tag_name(row.tag)}};
            if (st.stage == 2) r["mass"] = row.mass;
            rows.push_back(r);
        }
        json s{{"stage", st.stage}, {"name", st.name}, {"rows", rows}, {"halted", st.halted},
               {"note", st.note}};
        if (st.stage == 2) {
            s["mass_ledger_sum"] = st.mass_ledger_sum;
            s["mass_ledger_bound"] = st.mass_ledger_bound;
            s["mass_ledger_ok"] = st.mass_ledger_ok;
        }
        stages.push_back(s);
    }
    return json{{"stages", stages}, {"halted", result.halted}};
}

std::string bootstrap_to_text(const BootstrapResult& result) {
    std::ostringstream os;
    for (const auto& st : result.stages) {
        os << "stage " << st.stage << ": " << st.name << "\n";
        char line[160];
        std::snprintf(line, sizeof line, "  %6s %12s %22s %12s %s\n", "L", "p_hat", "ci95", "threshold",
                      "tag");
        os << line;
        for (const auto& row : st.rows) {
            std::snprintf(line, sizeof line, "  %6d %12.6f [%9.6f,%9.6f] %12.6f %s\n", row.scale,
                          row.estimate.p_hat, row.estimate.ci_lo, row.estimate.ci_hi, row.threshold,
                          tag_name(row.tag).c_str());
            os << line;
        }
        if (!st.note.empty()) os << "  note: " << st.note << "\n";
        if (st.halted) os << "  pipeline halted\n";
    }
    return os.str();
}

RunManifest run(const ExperimentConfig& cfg) {
    {
        const auto diags = validate(cfg);
        if (!diags.empty()) {
            std::string all = "invalid configuration:";
            for (const auto& d : diags) all += "\n  " + d;
            throw validation_error(all);
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    fs::create_directories(cfg.out_dir);

    RunManifest manifest;
    manifest.version = kArtifactVersion;
    manifest.status = "incomplete";
    manifest.master_seed = cfg.model.master_seed;
    manifest.config = config_to_json(cfg);
    write_file(fs::path(cfg.out_dir) / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");

    ExperimentOutput out;
    if (cfg.experiment == "wegner") out = exp_wegner(cfg);
    else if (cfg.experiment == "ne") out = exp_ne(cfg);
    else if (cfg.experiment == "msa") out = exp_msa(cfg);
    else if (cfg.experiment == "bootstrap") out = exp_bootstrap(cfg);
    else if (cfg.experiment == "sli") out = exp_sli(cfg);
    else if (cfg.experiment == "edi") out = exp_edi(cfg);
    else if (cfg.experiment == "decay") out = exp_decay(cfg);
    else if (cfg.experiment == "dynamics") out = exp_dynamics(cfg);
    else if (cfg.experiment == "correlator") out = exp_correlator(cfg);
    else if (cfg.experiment == "lyapunov") out = exp_lyapunov(cfg);
    else if (cfg.experiment == "oracle") out = exp_oracle(cfg);
    else throw validation_error("unknown experiment '" + cfg.experiment + "'");

    json summary = json{{"experiment", cfg.experiment},
                        {"config", config_to_json(cfg)},
                        {"results", out.summary}};
    const std::string summary_bytes = summary.dump(2) + "\n";
    write_file(fs::path(cfg.out_dir) / "data.csv", out.csv);
    write_file(fs::path(cfg.out_dir) / "summary.json", summary_bytes);

    manifest.status = "complete";
    manifest.files.push_back({"data.csv", fnv1a64_hex(out.csv), out.csv.size()});
    manifest.files.push_back({"summary.json", fnv1a64_hex(summary_bytes), summary_bytes.size()});
    manifest.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    write_file(fs::path(cfg.out_dir) / "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
    return manifest;
}

RunManifest run_from_manifest(const std::string& manifest_path, const std::string& out_override) {
    std::ifstream in(manifest_path);
    if (!in) throw validation_error("cannot open manifest '" + manifest_path + "'");
    json j;
    in >> j;
    if (!j.contains("config")) throw validation_error("manifest carries no config echo");
    auto cfg = config_from_json(j.at("config"));
    cfg.out_dir = out_override.empty()
                      ? fs::path(manifest_path).parent_path().string()
                      : out_override;
    if (cfg.out_dir.empty()) cfg.out_dir = ".";
    return run(cfg);
}

} // namespace msalab
