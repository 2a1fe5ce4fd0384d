#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msalab/ensemble.hpp"
#include "msalab/msa.hpp"

namespace msalab {

using json = nlohmann::json;

struct ExperimentConfig {
    std::string experiment;
    DisorderModel model;
    int dimension = 1;
    Bc bc = Bc::Dirichlet;
    std::int64_t trials = 2000;
    int workers = 2;
    std::string out_dir = "out";
    nlohmann::json params = nlohmann::json::object(); // experiment-specific block
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::string& path);

/// Structural and admissibility diagnostics; empty means runnable.
std::vector<std::string> validate(const ExperimentConfig& cfg);

struct ManifestFile {
    std::string name;
    std::string fnv1a64;
    std::uint64_t bytes = 0;
};

struct RunManifest {
    std::string version;
    std::string status; // "incomplete" until the run finishes
    std::uint64_t master_seed = 0;
    double wall_ms = 0.0;
    std::vector<ManifestFile> files;
    nlohmann::json config;
};

/// Dispatch the experiment, write data.csv / summary.json / manifest.json under
/// cfg.out_dir, and return the completed manifest.
RunManifest run(const ExperimentConfig& cfg);

/// Re-run the configuration embedded in a manifest (optionally into another directory).
RunManifest run_from_manifest(const std::string& manifest_path, const std::string& out_override = "");

/// Dense-inverse vs sparse-solve oracle over seeded instances (d in {1,2}, L <= 12,
/// lambda in {0,1,8}); one row per instance. all_pass is the oracle-experiment gate.
struct OracleRow {
    int dim = 0;
    int side = 0;
    double coupling = 0.0;
    double energy = 0.0;
    double rel_err_block = 0.0; // sparse vs dense belt-to-core norm
    double rel_err_full = 0.0;  // full-block norm vs 1/spectral_dist
    bool pass = false;
};

struct OracleReport {
    std::vector<OracleRow> rows;
    bool all_pass = false;
};

OracleReport run_oracle_suite(std::uint64_t master_seed, int instances = 50, int workers = 1);

std::string fnv1a64_hex(const std::string& bytes);

/// Fixed-format float for CSV cells (deterministic across runs).
std::string csv_num(double v);

nlohmann::json bootstrap_to_json(const BootstrapResult& result);
std::string bootstrap_to_text(const BootstrapResult& result);

inline constexpr const char* kArtifactVersion = "msalab 0.1.0";

} // namespace msalab
