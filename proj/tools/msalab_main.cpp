#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "msalab/errors.hpp"
#include "msalab/runner.hpp"

namespace {

int run_config(msalab::ExperimentConfig cfg) {
    const auto manifest = msalab::run(cfg);
    std::cout << "wrote " << cfg.out_dir << "/{data.csv, summary.json, manifest.json} ("
              << manifest.wall_ms << " ms)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"msalab: finite-volume multiscale-analysis laboratory for the lattice Anderson model"};
    app.require_subcommand(1);

    std::string config_path, out_dir, manifest_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 0;

    auto add_common = [&](CLI::App* sub, bool need_config) {
        auto* c = sub->add_option("--config", config_path, "configuration file (JSON)");
        if (need_config) c->required();
        sub->add_option("--seed", seed, "override the master seed")->each([&](const std::string&) {
            seed_set = true;
        });
        sub->add_option("--workers", workers, "override the worker count");
        sub->add_option("--out", out_dir, "override the output directory");
    };

    const char* experiments[] = {"wegner", "ne",        "msa",      "bootstrap", "sli",   "edi",
                                 "decay",  "dynamics",  "correlator", "lyapunov", "oracle"};
    for (const char* name : experiments) add_common(app.add_subcommand(name, name), name != std::string("oracle"));
    auto* rerun = app.add_subcommand("rerun", "re-run the configuration embedded in a manifest");
    rerun->add_option("--manifest", manifest_path, "manifest.json of a previous run")->required();
    rerun->add_option("--out", out_dir, "output directory for the re-run");

    CLI11_PARSE(app, argc, argv);

    try {
        if (rerun->parsed()) {
            msalab::run_from_manifest(manifest_path, out_dir);
            std::cout << "re-run complete\n";
            return 0;
        }
        const std::string sub = app.get_subcommands().front()->get_name();
        msalab::ExperimentConfig cfg;
        if (!config_path.empty()) {
            cfg = msalab::load_config(config_path);
        } else {
            cfg.experiment = sub;
            cfg.params = nlohmann::json::object();
        }
        cfg.experiment = sub;
        if (seed_set) cfg.model.master_seed = seed;
        if (workers > 0) cfg.workers = workers;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        const auto diags = msalab::validate(cfg);
        if (!diags.empty()) {
            std::cerr << "invalid configuration:\n";
            for (const auto& d : diags) std::cerr << "  " << d << "\n";
            return 1;
        }
        return run_config(cfg);
    } catch (const msalab::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const msalab::capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
