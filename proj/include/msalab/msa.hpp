#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msalab/ensemble.hpp"
#include "msalab/spectral.hpp"
#include "msalab/stats.hpp"

namespace msalab {

enum class RegularityKind { Suitable, SubexpSuitable, Regular };

/// Box regularity predicate family: threshold L^-theta, e^{-L^zeta} or e^{-mL/2}.
struct RegularityParams {
    RegularityKind kind = RegularityKind::Regular;
    double value = 1.0; // theta, zeta or m per kind
    double energy = 0.0;
};

double regularity_threshold(const RegularityParams& params, int side);

enum class BoxVerdict { Regular, Singular, EnergyInSpectrum };

struct RegularityVerdict {
    double norm_value = 0.0;
    double threshold = 0.0;
    double spectral_distance = 0.0;
    BoxVerdict verdict = BoxVerdict::Singular;

    bool regular() const { return verdict == BoxVerdict::Regular; }
};

/// Evaluate the regularity predicate on a finite-volume operator (side in 6N).
RegularityVerdict classify_box(const FiniteVolumeOperator& op, const RegularityParams& params);

/// m = 2*theta*log(L)/L: mass equivalent of theta-suitability at scale L.
double suitable_to_regular_mass(double theta, int side);
/// m = 2*L^{zeta-1}: mass equivalent of zeta-sub-exponential suitability at scale L.
double subexp_to_regular_mass(double zeta, int side);

/// P{box at the origin is singular} (EnergyInSpectrum counts as singular).
MonteCarloEstimate estimate_singular_prob(const DisorderModel& model, int dim, Bc bc, int side,
                                          const RegularityParams& params, std::int64_t trials,
                                          const Separation& sep, int workers = 1);

struct CertifyResult {
    bool certified = false;
    std::vector<double> grid_energies;
    std::vector<char> ok; // per grid energy: padded norm and distance checks both hold
};

/// Grid + first-resolvent-identity certification that the box is (m,E)-regular for
/// every E in [e_lo, e_hi]. Conservative: false means "not certified", not "singular".
CertifyResult certify_grid(const FiniteVolumeOperator& op, double m, double e_lo, double e_hi,
                           int grid_n, double s);

bool certify_interval_regularity(const FiniteVolumeOperator& op, double m, double e_lo, double e_hi,
                                 int grid_n, double s);

/// delta of Eq.-style resolvent perturbation window: the interval half-width certified
/// by a single-energy pass with mass margin m versus m_prime (m_prime < m).
double interval_halfwidth(double m, double m_prime, int side, double s);

/// The event R(m, L, I, x, y): for every certified energy in I at least one of the
/// two boxes is (m, E)-regular. Centers must satisfy |x - y| > L + rho.
struct TwoBoxEvent {
    double mass = 0.0;
    int side = 0;
    double e_lo = 0.0, e_hi = 0.0;
    Site x{}, y{};
};

/// Per-realization check of a TwoBoxEvent on two assembled boxes.
bool two_box_event_holds(const FiniteVolumeOperator& op_x, const FiniteVolumeOperator& op_y,
                         const TwoBoxEvent& ev, int grid_n, double s);

/// P{both boxes fail interval certification at a common grid energy}; the empirical
/// complement of the two-box event R(m, L, I, x, y).
MonteCarloEstimate estimate_two_box_fail(const DisorderModel& model, int dim, Bc bc, double m, int side,
                                         double e_lo, double e_hi, const Site& x, const Site& y,
                                         int grid_n, double s, std::int64_t trials, const Separation& sep,
                                         int workers = 1);

struct MsaParams {
    double theta = 4.0;
    double p = 1.0;
    double p_prime = 1.5;
    double s = 2.2;
    double theta_prime = 3.0;
    double zeta0 = 0.6;
    double zeta1 = 0.45;
    double zeta2 = 0.3;
    int b = 1;
    int rho = 0;
};

/// Admissibility diagnostics; empty means admissible. Each entry names the violated
/// inequality. `alpha` < 0 skips the power-mode checks; `interval_stage` adds the
/// two-box interval requirement theta > 2p + (b+1)d.
std::vector<std::string> validate_msa_params(const MsaParams& mp, int dim, double alpha,
                                             bool interval_stage, bool check_zetas);

enum class ScheduleMode { Geometric, Power };

struct ScheduleConfig {
    ScheduleMode mode = ScheduleMode::Power;
    int l0 = 12;
    double alpha = 1.25; // power mode
    int y = 11;          // geometric mode, odd >= 11
    int cap = 300;
    bool msa_grade = true;
    MsaParams params;
    int dim = 1;
};

struct ScaleSchedule {
    ScheduleMode mode = ScheduleMode::Power;
    int l0 = 12;
    std::vector<int> scales;
};

ScaleSchedule build_schedule(const ScheduleConfig& cfg);

struct FittedMass {
    double median_mass = 0.0;
    double min_mass = 0.0;
    std::int64_t used = 0;    // off-spectrum trials entering the statistic
    std::int64_t skipped = 0; // in-spectrum trials
};

/// Empirical mass -2 ln(norm)/L read off the achieved belt-to-core norm.
FittedMass fitted_mass(const DisorderModel& model, int dim, Bc bc, double energy, int side,
                       std::int64_t trials, int workers = 1);

enum class Tag { Pass, Fail, Inconclusive };
std::string tag_name(Tag t);

struct StageRow {
    int scale = 0;
    MonteCarloEstimate estimate; // probability of the good event
    double threshold = 0.0;      // asserted lower bound on the good-event probability
    Tag tag = Tag::Inconclusive;
    double mass = 0.0; // stage-2 fitted mass at this scale (0 elsewhere)
};

struct StageReport {
    int stage = 0;
    std::string name;
    std::vector<StageRow> rows;
    bool halted = false;       // stage-1 entry failure halts the pipeline
    std::string note;          // free-form stage remarks (mass ledger, Y bound, delta windows)
    double mass_ledger_sum = 0.0;
    double mass_ledger_bound = 0.0;
    bool mass_ledger_ok = true;
};

struct BootstrapConfig {
    int l0 = 12;
    int cap = 300;
    int y = 11;
    double alpha = 1.25;
    MsaParams params;
    std::int64_t trials = 4000;
    int grid_n = 3;
    int workers = 1;
};

struct BootstrapResult {
    std::vector<StageReport> stages;
    bool halted = false;
};

/// The four-stage bootstrap pipeline, run empirically with per-scale Monte Carlo
/// estimates tagged PASS / FAIL / INCONCLUSIVE by 95% CI position.
BootstrapResult run_bootstrap(const DisorderModel& model, int dim, Bc bc, double e0,
                              const BootstrapConfig& cfg);

/// Tag a good-event probability estimate against a lower threshold by CI position.
Tag tag_against_lower_threshold(const MonteCarloEstimate& est, double threshold);

} // namespace msalab
