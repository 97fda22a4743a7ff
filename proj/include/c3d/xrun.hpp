#pragma once

// Experiment orchestration: reproducible run configurations (lossless JSON
// round trip plus a stable content hash embedded in every output record), the
// per-run driver writing series/snapshots/reports, end-state classification,
// threshold sweeps over (nu, eps) with a fitted boundary exponent, and rate
// studies comparing measured exponents against their analytic targets.

#include "c3d/common.hpp"
#include "c3d/dns.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace c3d {

inline constexpr const char* code_version = "c3d 1.0";

// ============================================================================
// RunConfig
// ============================================================================

struct RunConfig {
    std::string kind = "dns";   // CLI routing tag: dns | sweep | rate-study | ...

    // physical parameters
    double nu = 1e-3;
    double eps = 1e-3;
    double kappa = 8.0, alpha = 10.0, s = 0.6;
    double lambda0 = 1.0, lambda_inf = 0.5, delta1 = 0.01;
    double c0 = 10.0;   // classification window: min(c0/eps, tmax)

    // initial-data envelope (seeded solenoidal field)
    double data_lambda = 1.0, data_s = 0.6;

    // numerics; the remap cadence is the alignment interval lx/ly
    int nx = 64, ny = 128, nz = 64;
    double lx = 2.0 * pi, ly = 4.0 * pi, lz = 2.0 * pi;
    double dt = 0.02, tmax = 30.0;

    std::uint64_t seed = 1;
    std::string out_dir;        // empty: nothing is written
    double series_dt = 0.1;     // sampling cadence of series.csv (step-end aligned)
    double snapshot_dt = 0.0;   // 0: no snapshots
    int threads = 1;            // sweep-cell parallelism

    // classification thresholds (exposed; defaults are the contract values)
    double streak_collapse = 1e-4;   // E_neq(end)/E_neq(peak) below this
    double streak_growth = 3.0;      // ||u1_0|| growth factor at least this
    double escape_rebound = 10.0;    // E_neq above its post-peak minimum by this
    double relam_total = 1e-2;       // total energy below this fraction of start

    GridSpec grid() const { return GridSpec(nx, ny, nz, lx, ly, lz); }
    NormParams norm_params() const;
    double window() const { return std::min(c0 / eps, tmax); }
};

// Stable serialization (sorted keys, 17 significant digits: doubles survive
// the round trip bit-exactly). config_from_json throws std::invalid_argument
// on malformed text or missing fields.
std::string to_json(const RunConfig& c);
RunConfig config_from_json(const std::string& text);

std::string config_hash(const RunConfig& c);   // 16 hex digits over to_json

// ============================================================================
// Series and classification
// ============================================================================

// All energies carry the 2 pi / Ly measure of the field norms; u1_zero is the
// L2 norm of the x-averaged streamwise velocity.
struct SeriesRow {
    double t = 0.0, energy = 0.0, e_neq = 0.0, e_zero = 0.0, u1_zero = 0.0;
};

struct RunSeries {
    std::vector<SeriesRow> rows;
    bool blowup = false;
    double blowup_t = 0.0;
    std::string blowup_what;
};

enum class Classification {
    relaminarizing,
    streak_dominated,
    nonlinear_escape,
    blow_up_event,
};

const char* to_string(Classification c);
// relaminarizing 0 < streak_dominated 1 < nonlinear_escape 2 < blow_up_event 3
int rank(Classification c);

// Classify a finished run:
//   blow-up passthrough
//   > nonlinear-escape   (E_neq rebounds above its post-peak running minimum)
//   > streak-dominated   (E_neq collapsed below streak_collapse x peak while
//                         ||u1_0|| grew by at least streak_growth)
//   > relaminarizing     (total energy below relam_total x initial)
// with the documented fallback when no rule fires: streak-dominated if the
// ||u1_0|| growth happened, relaminarizing otherwise. A non-blow-up series
// must cover the window min(c0/eps, tmax); otherwise std::invalid_argument.
Classification classify_run(const RunSeries& series, const RunConfig& cfg);

// ============================================================================
// Per-run driver
// ============================================================================

struct RunResult {
    RunSeries series;
    DnsState state;                    // final state (last finite on blow-up)
    std::string hash;                  // config hash
    std::uint64_t series_checksum = 0; // fnv1a64 over the csv bytes
    double wall_time_s = 0.0;
    std::vector<std::string> events;
};

// Seeds the initial data, advances to cfg.window(), samples the series at
// cfg.series_dt, and (when out_dir is set) writes run_config.json, series.csv,
// snapshots/, events.log, and report.json. Blow-ups and CFL collapse are
// recorded in the series and events, never thrown. resume_from names a
// snapshot stem written by a previous run with the same config hash.
RunResult run_dns(const RunConfig& cfg, const std::string& resume_from = "");

// ============================================================================
// Threshold sweep
// ============================================================================

struct SweepCell {
    double nu = 0.0, eps = 0.0;
    Classification cls = Classification::relaminarizing;
    double e_neq_peak = 0.0, e_neq_end = 0.0;
    double energy_end_ratio = 0.0;   // total energy at end / at start
    double u1_growth = 0.0;          // max ||u1_0|| / initial (inf if started at 0)
    bool blowup = false;
    double wall_time_s = 0.0;
};

struct SweepReport {
    std::vector<double> nu_list, eps_grid;
    std::vector<SweepCell> cells;                        // nu-major
    std::vector<std::array<int, 2>> monotone_violations; // (nu idx, eps idx)
    std::vector<double> eps_crit;  // per nu; NaN when the column has no bracket
    double gamma = 0.0;            // boundary exponent in eps_crit ~ nu^gamma
    double gamma_band = 0.0;       // half-width from the eps grid resolution
    bool gamma_valid = false;
    std::string hash;              // base config hash
    double wall_time_s = 0.0;

    const SweepCell& cell(int inu, int ieps) const {
        return cells[std::size_t(inu) * eps_grid.size() + ieps];
    }
};

// Runs one cell per (nu, eps) from the base config (same seed everywhere:
// classifications are deterministic), classifies each, flags every rank
// decrease along increasing eps, brackets the first transition to escape or
// blow-up per column, and fits log eps_crit against log nu. Cells run on
// base.threads workers; integration failures become blow-up cells, any other
// exception propagates.
SweepReport threshold_sweep(const std::vector<double>& nu_list,
                            const std::vector<double>& eps_grid,
                            const RunConfig& base);

std::string sweep_report_json(const SweepReport& r);

// ============================================================================
// Rate studies
// ============================================================================

enum class RateKind { lift_up, inviscid_damping, enhanced_dissipation };

struct RateResult {
    RateKind kind{};
    double measured = 0.0, target = 0.0;
    double tolerance = 0.0;   // acceptance half-width on measured/target - 1
    bool pass = false;
    std::vector<std::pair<double, double>> series;   // the fitted samples
    std::string hash;
    double wall_time_s = 0.0;
};

// lift_up: 2d streak run from a single-mode u2 input; the fitted linear slope
//   of ||u1_0||(t) over [1, 10] against ||u2_in||, target ratio 1.
// inviscid_damping: one inviscid mode (k, eta, l) = (1, 0, 0); the fitted
//   power of |u2|(t) over [5, 50], target -2. (The viscous factor is exact
//   and tested separately, so the algebraic decay is measured at nu = 0.)
// enhanced_dissipation: two seeded runs at cfg.nu and cfg.nu/10; the ratio of
//   times for E_neq to fall by 100x, target 10^{1/3}, pass within a factor
//   of 1.3 either way.
RateResult rate_study(RateKind kind, const RunConfig& cfg);

} // namespace c3d
