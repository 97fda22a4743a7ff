// c3d — command-line driver for the simulation and verification toolkit.
//
// Subcommands:
//   linear           one Fourier mode of the linearized system -> series.csv
//   streak           x-independent (2.5D) run -> series.csv
//   toy              six-amplitude echo model trajectory + domination report
//   coords           coordinate-transform diagnostics fed by a streak run
//   dns              full nonlinear run from a json config (checkpoint/resume)
//   sweep            (nu, eps) threshold sweep -> classification + exponent
//   rate-study       lift-up / inviscid-damping / enhanced-dissipation rates
//   lemma-check      frequency-ratio inequality harness with box doubling
//   multiplier-dump  weight-profile tables as csv
//
// Exit codes: 0 success and all invariants held; 1 usage or i/o error;
// 2 blow-up outcome; 3 a checked invariant or target failed.

#include "CLI11.hpp"
#include "json.hpp"

#include "c3d/coords.hpp"
#include "c3d/dns.hpp"
#include "c3d/lemma_checks.hpp"
#include "c3d/linear.hpp"
#include "c3d/toy.hpp"
#include "c3d/xrun.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace c3d;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_blowup = 2;
constexpr int exit_violation = 3;

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    return std::string(std::istreambuf_iterator<char>(f), {});
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << text;
}

std::string hex16(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// --out accepts either a bare csv path (emit just the table) or a directory
// (emit the full record set: config copy, series.csv, report.json).
struct OutPaths {
    fs::path csv;
    fs::path dir;
    bool has_dir = false;
};

OutPaths resolve_out(const std::string& out) {
    OutPaths p;
    if (fs::path(out).extension() == ".csv") {
        p.csv = out;
        const fs::path parent = fs::path(out).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
    } else {
        p.dir = out;
        p.has_dir = true;
        fs::create_directories(p.dir);
        p.csv = p.dir / "series.csv";
    }
    return p;
}

// Writes the config copy and the report record (config hash, code version,
// wall time, series checksum, plus subcommand-specific fields).
void write_record(const OutPaths& out, const std::string& kind,
                  const json& config, const std::string& csv, json report,
                  double wall_s) {
    write_file(out.csv, csv);
    if (!out.has_dir) return;
    const std::string cfg_text = config.dump(2) + "\n";
    write_file(out.dir / (kind + "_config.json"), cfg_text);
    report["kind"] = kind;
    report["config_hash"] = hex16(fnv1a64(cfg_text));
    report["code_version"] = code_version;
    report["wall_time_s"] = wall_s;
    report["series_checksum"] = hex16(fnv1a64(csv));
    write_file(out.dir / "report.json", report.dump(2) + "\n");
}

class WallClock {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ============================================================================
// linear
// ============================================================================

struct LinearArgs {
    std::vector<double> mode{1.0, 0.0, 0.0};  // k, eta, l
    double nu = 1e-4;
    double tmax = 20.0;
    double dt = 0.0;  // 0: automatic
    double series_dt = 0.1;
    double u1 = 0.0, u2 = 1.0, u3 = 0.0;
    std::string out;
};

int run_linear(const LinearArgs& a) {
    ModeState m = mode_from_velocity(a.mode[0], a.mode[1], a.mode[2], cplx(a.u1, 0.0),
                                     cplx(a.u2, 0.0), cplx(a.u3, 0.0), 0.0);
    const double dt = a.dt > 0.0 ? a.dt : default_mode_dt(m, a.tmax);
    const WallClock clock;

    std::string csv = "t,|u1|,|u2|,|u3|,|q1|,|q2|,|q3|\n";
    long long rows = 0;
    bool finite = true;
    const auto sample = [&](const ModeState& s) {
        const auto u = mode_velocity(s);
        csv += g17(s.t) + "," + g17(std::abs(u[0])) + "," + g17(std::abs(u[1])) + "," +
               g17(std::abs(u[2])) + "," + g17(std::abs(s.q1)) + "," +
               g17(std::abs(s.q2)) + "," + g17(std::abs(s.q3)) + "\n";
        ++rows;
        finite = finite && std::isfinite(std::abs(s.q1)) &&
                 std::isfinite(std::abs(s.q2)) && std::isfinite(std::abs(s.q3));
    };

    sample(m);
    double next = a.series_dt;
    while (m.t < a.tmax - 1e-12) {
        m = linear_mode_step(m, a.nu, std::min(dt, a.tmax - m.t));
        if (m.t >= next - 1e-9) {
            sample(m);
            while (next <= m.t + 1e-9) next += a.series_dt;
        }
    }

    const OutPaths out = resolve_out(a.out);
    json cfg = {{"mode", a.mode}, {"nu", a.nu},   {"tmax", a.tmax},
                {"dt", dt},       {"series_dt", a.series_dt},
                {"u1", a.u1},     {"u2", a.u2},   {"u3", a.u3}};
    write_record(out, "linear", cfg, csv,
                 json{{"rows", rows}, {"t_end", m.t}, {"finite", finite}},
                 clock.seconds());
    std::printf("linear: mode (%g, %g, %g), %lld samples to t = %g -> %s\n", a.mode[0],
                a.mode[1], a.mode[2], rows, m.t, out.csv.string().c_str());
    return finite ? exit_ok : exit_blowup;
}

// ============================================================================
// streak
// ============================================================================

struct StreakArgs {
    int ny = 64, nz = 64;
    double ly = 4.0 * pi, lz = 2.0 * pi;
    std::vector<int> mode{1, 1};  // vorticity mode (my, mz)
    double eps = 1e-3;            // ||(u2, u3)|| of the seeded roll
    double u1_eps = 0.0;          // optional initial ||u1||
    double nu = 1e-3;
    double tmax = 10.0;
    double dt = 0.02;
    double series_dt = 0.1;
    std::string out;
};

json streak_config_json(const StreakArgs& a) {
    return json{{"ny", a.ny},     {"nz", a.nz},     {"ly", a.ly},
                {"lz", a.lz},     {"mode", a.mode}, {"eps", a.eps},
                {"u1_eps", a.u1_eps},               {"nu", a.nu},
                {"tmax", a.tmax}, {"dt", a.dt},     {"series_dt", a.series_dt}};
}

StreakArgs streak_args_from_json(const json& j) {
    StreakArgs a;
    try {
        a.ny = j.at("ny").get<int>();
        a.nz = j.at("nz").get<int>();
        a.ly = j.at("ly").get<double>();
        a.lz = j.at("lz").get<double>();
        a.mode = j.at("mode").get<std::vector<int>>();
        a.eps = j.at("eps").get<double>();
        a.u1_eps = j.at("u1_eps").get<double>();
        a.nu = j.at("nu").get<double>();
        a.tmax = j.at("tmax").get<double>();
        a.dt = j.at("dt").get<double>();
        a.series_dt = j.at("series_dt").get<double>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("streak config: ") + e.what());
    }
    return a;
}

// Hermitian pair of one spectral mode, scaled so the named norm equals eps.
StreakState streak_initial_state(const StreakArgs& a) {
    if (a.mode.size() != 2)
        throw std::invalid_argument("streak: --mode needs exactly my,mz");
    StreakGrid sg(a.ny, a.nz, a.ly, a.lz);
    StreakState st(sg, a.nu);
    const int my = ((a.mode[0] % a.ny) + a.ny) % a.ny;
    const int mz = ((a.mode[1] % a.nz) + a.nz) % a.nz;
    const std::size_t j = sg.idx(my, mz);
    const std::size_t jc = sg.idx((a.ny - my) % a.ny, (a.nz - mz) % a.nz);
    if (j == sg.idx(0, 0))
        throw std::invalid_argument("streak: the mean mode cannot be seeded");
    st.omega[j] = cplx(1.0, 0.0);
    st.omega[jc] = std::conj(st.omega[j]);
    std::vector<cplx> u2, u3;
    streak_velocity(sg, st.omega, u2, u3);
    const double roll = std::hypot(streak_l2(sg, u2), streak_l2(sg, u3));
    if (!(roll > 0.0))
        throw std::invalid_argument("streak: the seeded mode induces no velocity");
    const double scale = a.eps / roll;
    st.omega[j] *= scale;
    st.omega[jc] *= scale;
    if (a.u1_eps > 0.0) {
        st.u1[j] = cplx(1.0, 0.0);
        st.u1[jc] = std::conj(st.u1[j]);
        const double s = a.u1_eps / streak_l2(sg, st.u1);
        st.u1[j] *= s;
        st.u1[jc] *= s;
    }
    return st;
}

int run_streak(const StreakArgs& a) {
    StreakState st = streak_initial_state(a);
    const StreakGrid& sg = st.grid;
    const WallClock clock;

    std::string csv = "t,u1_norm,roll_norm,enstrophy\n";
    bool finite = true;
    const auto sample = [&](const StreakState& s) {
        const double u1n = streak_l2(sg, s.u1);
        const double rolln = std::sqrt(streak_energy(s));
        const double ens = streak_enstrophy(s);
        csv += g17(s.t) + "," + g17(u1n) + "," + g17(rolln) + "," + g17(ens) + "\n";
        finite = finite && std::isfinite(u1n) && std::isfinite(rolln) &&
                 std::isfinite(ens);
    };

    sample(st);
    double next = a.series_dt;
    while (st.t < a.tmax - 1e-12) {
        st = streak_step(st, std::min(a.dt, a.tmax - st.t));
        if (st.t >= next - 1e-9) {
            sample(st);
            while (next <= st.t + 1e-9) next += a.series_dt;
        }
    }

    const OutPaths out = resolve_out(a.out);
    write_record(out, "streak", streak_config_json(a), csv,
                 json{{"t_end", st.t},
                      {"u1_norm_end", streak_l2(sg, st.u1)},
                      {"finite", finite}},
                 clock.seconds());
    std::printf("streak: %dx%d, nu = %g, t = %g, ||u1|| = %.6g -> %s\n", a.ny, a.nz,
                a.nu, st.t, streak_l2(sg, st.u1), out.csv.string().c_str());
    return finite ? exit_ok : exit_blowup;
}

// ============================================================================
// toy
// ============================================================================

struct ToyArgs {
    int k = 2, kp = 1;
    double eta = 100.0;
    double eps = 1e-3;
    double nu = 1e-3;
    double c0 = 10.0;
    double alpha = 10.0;
    double kappa = 8.0;
    std::string variant = "balanced";
    double t0 = 1.0;
    double tmax = 0.0;  // 0: run to 2 eta
    double c_cap = 10.0;
    std::string out;
};

int run_toy(const ToyArgs& a) {
    const SuperVariant v = a.variant == "balanced" ? SuperVariant::balanced
                                                   : SuperVariant::unbalanced;
    const WeightFn wf(a.eta, a.kappa);
    ToyParams params;
    params.eps = a.eps;
    params.nu = a.nu;
    params.c0 = a.c0;
    params.alpha = a.alpha;
    const ToyState s0 = envelope_start(v, wf, a.k, a.kp, a.eta, a.t0);
    const double t_end = a.tmax > 0.0 ? a.tmax : 2.0 * std::abs(a.eta);
    const WallClock clock;

    const ToyTrajectory traj = integrate_toy(s0, params, t_end);
    std::string csv = "t,|q2_k|,|q2_kp|,|q3_kp|,|q3_k|,|q2_0|,|q3_0|\n";
    for (const auto& s : traj.points) {
        csv += g17(s.t);
        for (const auto& q : s.amplitudes()) csv += "," + g17(std::abs(q));
        csv += "\n";
    }
    const DominationReport rep = check_supersolution(traj, v, wf, a.c_cap);

    const OutPaths out = resolve_out(a.out);
    json cfg = {{"k", a.k},         {"kp", a.kp},       {"eta", a.eta},
                {"eps", a.eps},     {"nu", a.nu},       {"c0", a.c0},
                {"alpha", a.alpha}, {"kappa", a.kappa}, {"variant", a.variant},
                {"t0", a.t0},       {"tmax", t_end},    {"c_cap", a.c_cap}};
    json report = {{"dominates", rep.dominates},
                   {"min_margin", rep.min_margin},
                   {"c_needed", rep.c_needed},
                   {"has_violation", rep.has_violation},
                   {"t_violation", rep.t_violation},
                   {"blew_up", traj.blew_up},
                   {"t_blowup", traj.t_blowup},
                   {"points", traj.points.size()}};
    write_record(out, "toy", cfg, csv, report, clock.seconds());

    std::printf("toy: k=%d k'=%d eta=%g %s: %s (c_needed = %.4g, min_margin = %.4g)%s\n",
                a.k, a.kp, a.eta, a.variant.c_str(),
                rep.dominates ? "dominated" : "NOT dominated", rep.c_needed,
                rep.min_margin,
                traj.blew_up ? " [blew up]" : "");
    if (traj.blew_up) return exit_blowup;
    return rep.dominates ? exit_ok : exit_violation;
}

// ============================================================================
// coords
// ============================================================================

struct CoordsArgs {
    std::string streak_dir;
    double tmax = 10.0;
    double dt = 0.02;
    double series_dt = 0.1;
    double sigma = 0.0;
    double residual_tol = 1e-10;
    std::string out;
};

// Streak-state cursor that the coordinate evolution samples as its U0 feed.
// RK4 stage times are nondecreasing within a step, so advancing in place and
// caching the latest fields is exact.
class StreakFeed {
public:
    StreakFeed(StreakState st, double dt) : st_(std::move(st)), dt_(dt) {}

    U0Fields operator()(double t) {
        while (st_.t < t - 1e-12) st_ = streak_step(st_, std::min(dt_, t - st_.t));
        U0Fields f;
        streak_velocity(st_.grid, st_.omega, f.u2, f.u3);
        f.u1 = st_.u1;
        return f;
    }

    const StreakState& state() const { return st_; }

private:
    StreakState st_;
    double dt_;
};

int run_coords(const CoordsArgs& a) {
    const json scfg =
        json::parse(read_file(fs::path(a.streak_dir) / "streak_config.json"));
    const StreakArgs sa = streak_args_from_json(scfg);
    StreakState st = streak_initial_state(sa);
    // spin the feed up to the transform's initial time t = 1
    while (st.t < 1.0 - 1e-12) st = streak_step(st, std::min(sa.dt, 1.0 - st.t));
    StreakFeed feed(st, sa.dt);

    CoordState cs(st.grid, sa.nu, 1.0);
    const WallClock clock;
    std::string csv = "t,g_norm,c_norm,psi_minus_u1,min_det\n";
    double residual_max = 0.0, min_det_min = 1.0;
    long long violations = 0;
    std::string failure;

    const auto sample = [&](const CoordState& s) {
        const JacobianSet jac = jacobian_from_C(s.grid, s.C1, s.C2);
        const double res = jacobian_residual(s.grid, s.C1, s.C2, jac);
        residual_max = std::max(residual_max, res);
        min_det_min = std::min(min_det_min, jac.min_det);
        if (!(res <= a.residual_tol)) ++violations;
        const double gn = coord_hnorm(s.grid, s.g, a.sigma);
        const double cn = std::hypot(coord_hnorm(s.grid, s.C1, a.sigma),
                                     coord_hnorm(s.grid, s.C2, a.sigma));
        const double pv = psi_vs_u1(s, feed(s.t).u1, a.sigma);
        csv += g17(s.t) + "," + g17(gn) + "," + g17(cn) + "," + g17(pv) + "," +
               g17(jac.min_det) + "\n";
    };

    try {
        sample(cs);
        double next = 1.0 + a.series_dt;
        while (cs.t < a.tmax - 1e-12) {
            cs = evolve_coord(cs, std::ref(feed), std::min(a.dt, a.tmax - cs.t));
            if (cs.t >= next - 1e-9) {
                sample(cs);
                while (next <= cs.t + 1e-9) next += a.series_dt;
            }
        }
    } catch (const std::runtime_error& e) {
        failure = e.what();
    }

    const OutPaths out = resolve_out(a.out);
    json cfg = {{"streak_dir", a.streak_dir}, {"tmax", a.tmax},
                {"dt", a.dt},                 {"series_dt", a.series_dt},
                {"sigma", a.sigma},           {"residual_tol", a.residual_tol},
                {"streak_config", scfg}};
    json report = {{"t_end", cs.t},
                   {"residual_max", residual_max},
                   {"min_det_min", min_det_min},
                   {"violations", violations}};
    if (!failure.empty()) report["failure"] = failure;
    write_record(out, "coords", cfg, csv, report, clock.seconds());

    std::printf("coords: t = %g, max residual = %.3g, min det = %.6g, "
                "violations = %lld%s%s\n",
                cs.t, residual_max, min_det_min, violations,
                failure.empty() ? "" : " — stopped: ", failure.c_str());
    if (!failure.empty()) return exit_blowup;
    return violations == 0 ? exit_ok : exit_violation;
}

// ============================================================================
// dns
// ============================================================================

struct DnsArgs {
    std::string config;
    std::string out;
    bool resume = false;
};

// Latest snapshot stem (by time) in <dir>/snapshots, if any.
std::optional<std::string> latest_snapshot_stem(const fs::path& dir) {
    const fs::path snaps = dir / "snapshots";
    if (!fs::is_directory(snaps)) return std::nullopt;
    std::string best;
    for (const auto& e : fs::directory_iterator(snaps)) {
        const std::string name = e.path().filename().string();
        const std::string suffix = "_u1.c3df";
        if (name.rfind("snap_", 0) != 0 || name.size() <= suffix.size() ||
            name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0)
            continue;
        const std::string stem = name.substr(0, name.size() - suffix.size());
        if (stem > best) best = stem;  // zero-padded fixed-width time sorts
    }
    if (best.empty()) return std::nullopt;
    return (snaps / best).string();
}

int run_dns_cmd(const DnsArgs& a) {
    RunConfig cfg;
    if (!a.config.empty()) {
        cfg = config_from_json(read_file(a.config));
    } else if (a.resume && !a.out.empty()) {
        cfg = config_from_json(read_file(fs::path(a.out) / "run_config.json"));
    } else {
        std::fprintf(stderr, "dns: --config is required (or --resume with --out)\n");
        return exit_usage;
    }
    if (!a.out.empty()) cfg.out_dir = a.out;

    std::string resume_stem;
    if (a.resume) {
        if (cfg.out_dir.empty()) {
            std::fprintf(stderr, "dns: --resume needs an output directory\n");
            return exit_usage;
        }
        const fs::path dir = cfg.out_dir;
        const fs::path stored_cfg = dir / "run_config.json";
        if (fs::exists(stored_cfg)) {
            const RunConfig prev = config_from_json(read_file(stored_cfg));
            RunConfig prev_cmp = prev, cfg_cmp = cfg;
            prev_cmp.out_dir.clear();
            cfg_cmp.out_dir.clear();
            if (config_hash(prev_cmp) != config_hash(cfg_cmp)) {
                std::fprintf(stderr,
                             "dns: config hash mismatch with the stored run "
                             "(%s vs %s); refusing to resume\n",
                             config_hash(cfg_cmp).c_str(),
                             config_hash(prev_cmp).c_str());
                return exit_usage;
            }
        }
        const auto stem = latest_snapshot_stem(dir);
        if (!stem) {
            std::fprintf(stderr, "dns: no snapshots under %s to resume from\n",
                         dir.string().c_str());
            return exit_usage;
        }
        resume_stem = *stem;
        std::printf("dns: resuming from %s\n", resume_stem.c_str());
    }

    const RunResult res = run_dns(cfg, resume_stem);
    const auto& rows = res.series.rows;
    std::printf("dns: %s, t = %g, steps = %lld, remaps = %d, E = %.6g, "
                "E_neq = %.6g, checksum = %s, wall = %.1fs\n",
                res.series.blowup ? "BLOW-UP" : "completed", res.state.t,
                res.state.steps, res.state.remaps,
                rows.empty() ? 0.0 : rows.back().energy,
                rows.empty() ? 0.0 : rows.back().e_neq,
                hex16(res.series_checksum).c_str(), res.wall_time_s);
    for (const auto& e : res.events) std::printf("  event: %s\n", e.c_str());
    return res.series.blowup ? exit_blowup : exit_ok;
}

// ============================================================================
// sweep
// ============================================================================

struct SweepArgs {
    std::string config;
    std::vector<double> nus;
    std::vector<double> epss;
    std::string out;
    int threads = 0;
};

int run_sweep(const SweepArgs& a) {
    RunConfig base;
    if (!a.config.empty()) base = config_from_json(read_file(a.config));
    if (a.threads > 0) base.threads = a.threads;
    const SweepReport rep = threshold_sweep(a.nus, a.epss, base);

    if (!a.out.empty()) {
        fs::create_directories(a.out);
        write_file(fs::path(a.out) / "sweep_report.json", sweep_report_json(rep));
        write_file(fs::path(a.out) / "sweep_config.json", to_json(base));
    }

    for (std::size_t inu = 0; inu < rep.nu_list.size(); ++inu) {
        std::printf("nu = %-8g:", rep.nu_list[inu]);
        for (std::size_t j = 0; j < rep.eps_grid.size(); ++j)
            std::printf(" %s", to_string(rep.cell(int(inu), int(j)).cls));
        if (std::isfinite(rep.eps_crit[inu]))
            std::printf("  (eps_crit = %.4g)", rep.eps_crit[inu]);
        std::printf("\n");
    }
    if (rep.gamma_valid)
        std::printf("sweep: gamma = %.4f +/- %.4f, %zu monotonicity violations, "
                    "wall = %.1fs\n",
                    rep.gamma, rep.gamma_band, rep.monotone_violations.size(),
                    rep.wall_time_s);
    else
        std::printf("sweep: boundary not bracketed, %zu monotonicity violations, "
                    "wall = %.1fs\n",
                    rep.monotone_violations.size(), rep.wall_time_s);
    return rep.monotone_violations.empty() ? exit_ok : exit_violation;
}

// ============================================================================
// rate-study
// ============================================================================

struct RateArgs {
    std::string kind;
    std::string config;
    std::string out;
};

int run_rate_study(const RateArgs& a) {
    RateKind kind;
    RunConfig cfg;
    if (a.kind == "lift-up") {
        kind = RateKind::lift_up;
        cfg.nu = 1e-4;
        cfg.eps = 1e-3;
        cfg.ny = 32;
        cfg.nz = 16;
        cfg.dt = 0.02;
    } else if (a.kind == "inviscid-damping") {
        kind = RateKind::inviscid_damping;
        cfg.dt = 0.02;
    } else if (a.kind == "enhanced-dissipation") {
        kind = RateKind::enhanced_dissipation;
        // tall frequency band: the 100x decay must be viscous, not band exit
        cfg.nx = 16;
        cfg.ny = 128;
        cfg.nz = 16;
        cfg.nu = 1e-2;
        cfg.eps = 1e-6;
        cfg.dt = 0.05;
        cfg.tmax = 30.0;
        cfg.series_dt = 0.1;
        cfg.seed = 1;
    } else {
        std::fprintf(stderr, "rate-study: unknown kind '%s'\n", a.kind.c_str());
        return exit_usage;
    }
    if (!a.config.empty()) cfg = config_from_json(read_file(a.config));

    const RateResult r = rate_study(kind, cfg);
    json series = json::array();
    for (const auto& [x, y] : r.series) series.push_back({x, y});
    json report = {{"kind", a.kind},
                   {"measured", r.measured},
                   {"target", r.target},
                   {"tolerance", r.tolerance},
                   {"pass", r.pass},
                   {"config_hash", r.hash},
                   {"code_version", code_version},
                   {"wall_time_s", r.wall_time_s},
                   {"n_points", r.series.size()}};
    if (kind == RateKind::enhanced_dissipation) report["decay_times"] = series;

    if (!a.out.empty()) {
        fs::create_directories(a.out);
        write_file(fs::path(a.out) / "rate_report.json", report.dump(2) + "\n");
        write_file(fs::path(a.out) / "rate_config.json", to_json(cfg));
        std::string csv = "x,y\n";
        for (const auto& [x, y] : r.series) csv += g17(x) + "," + g17(y) + "\n";
        write_file(fs::path(a.out) / "series.csv", csv);
    }
    std::printf("rate-study %s: measured = %.6g, target = %.6g, %s (wall = %.1fs)\n",
                a.kind.c_str(), r.measured, r.target, r.pass ? "pass" : "FAIL",
                r.wall_time_s);
    return r.pass ? exit_ok : exit_violation;
}

// ============================================================================
// lemma-check
// ============================================================================

struct LemmaArgs {
    std::vector<std::string> ids;
    std::size_t samples = 4000;
    int kmax = 8;
    double eta_max = 256.0;
    int lmax = 8;
    double t_min = 1.0;
    double t_max = 512.0;
    bool no_doubling = false;
    std::string out;
};

int run_lemma_check(const LemmaArgs& a) {
    const std::vector<std::string> ids = a.ids.empty() ? registered_lemmas() : a.ids;
    LemmaBox box;
    box.kmax = a.kmax;
    box.eta_max = a.eta_max;
    box.lmax = a.lmax;
    box.t_min = a.t_min;
    box.t_max = a.t_max;

    std::string text;
    bool ok = true;
    for (const auto& id : ids) {
        const LemmaReport rep = verify_lemma(id, box, a.samples);
        std::string line = format_report(rep);
        bool healthy = rep.finite;
        if (!a.no_doubling) {
            const LemmaReport rep2 = verify_lemma(id, box.doubled(), a.samples);
            const double growth = rep2.max_ratio / rep.max_ratio;
            healthy = healthy && rep2.finite && growth < 2.0;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "  doubled-box growth %.4f", growth);
            line += buf;
        }
        line += healthy ? "  [ok]" : "  [VIOLATION]";
        ok = ok && healthy;
        std::printf("%s\n", line.c_str());
        text += line + "\n";
    }
    if (!a.out.empty()) {
        const fs::path parent = fs::path(a.out).parent_path();
        if (!parent.empty()) fs::create_directories(parent);
        write_file(a.out, text);
    }
    return ok ? exit_ok : exit_violation;
}

// ============================================================================
// multiplier-dump
// ============================================================================

struct MultArgs {
    double eta = 100.0;
    double kappa = 8.0;
    std::vector<int> kprimes;
    std::string out;
};

int run_multiplier_dump(const MultArgs& a) {
    const WallClock clock;
    const MultiplierProfile prof = build_profile(a.eta, a.kappa, {}, a.kprimes);
    std::string csv = "t,wbar,w";
    for (const int kp : a.kprimes) csv += ",w3_" + std::to_string(kp);
    csv += "\n";
    for (std::size_t j = 0; j < prof.t_grid.size(); ++j) {
        csv += g17(prof.t_grid[j]) + "," + g17(prof.wbar[j]) + "," + g17(prof.w[j]);
        for (const int kp : a.kprimes)
            csv += "," + g17(std::exp(prof.log_w3.at(kp)[j]));
        csv += "\n";
    }
    const OutPaths out = resolve_out(a.out);
    json cfg = {{"eta", a.eta}, {"kappa", a.kappa}, {"kprimes", a.kprimes}};
    write_record(out, "multiplier-dump", cfg, csv,
                 json{{"nodes", prof.t_grid.size()}}, clock.seconds());
    std::printf("multiplier-dump: eta = %g, kappa = %g, %zu nodes -> %s\n", a.eta,
                a.kappa, prof.t_grid.size(), out.csv.string().c_str());
    return exit_ok;
}

} // namespace

// ============================================================================
// main
// ============================================================================

int main(int argc, char** argv) {
    CLI::App app{"c3d — pseudo-spectral shear-flow simulation and verification"};
    app.set_version_flag("--version", std::string(code_version));
    app.require_subcommand(1);

    LinearArgs la;
    CLI::App* lin = app.add_subcommand("linear", "one linearized Fourier mode");
    lin->add_option("--mode", la.mode, "k,eta,l of the mode")
        ->expected(3)
        ->delimiter(',');
    lin->add_option("--nu", la.nu, "viscosity");
    lin->add_option("--tmax", la.tmax, "final time");
    lin->add_option("--dt", la.dt, "step (0: automatic)");
    lin->add_option("--series-dt", la.series_dt, "sampling cadence");
    lin->add_option("--u1", la.u1, "initial u1 amplitude");
    lin->add_option("--u2", la.u2, "initial u2 amplitude");
    lin->add_option("--u3", la.u3, "initial u3 amplitude");
    lin->add_option("--out", la.out, "output csv or directory")->required();

    StreakArgs sa;
    CLI::App* str = app.add_subcommand("streak", "x-independent (2.5D) run");
    str->add_option("--ny", sa.ny, "y resolution");
    str->add_option("--nz", sa.nz, "z resolution");
    str->add_option("--ly", sa.ly, "y period");
    str->add_option("--lz", sa.lz, "z period");
    str->add_option("--mode", sa.mode, "my,mz of the seeded vorticity mode")
        ->expected(2)
        ->delimiter(',');
    str->add_option("--eps", sa.eps, "seeded roll amplitude ||(u2,u3)||");
    str->add_option("--u1-eps", sa.u1_eps, "seeded streak amplitude ||u1||");
    str->add_option("--nu", sa.nu, "viscosity");
    str->add_option("--tmax", sa.tmax, "final time");
    str->add_option("--dt", sa.dt, "step");
    str->add_option("--series-dt", sa.series_dt, "sampling cadence");
    str->add_option("--out", sa.out, "output csv or directory")->required();

    ToyArgs ta;
    CLI::App* toy = app.add_subcommand("toy", "six-amplitude echo model");
    toy->add_option("--k", ta.k, "resonant x-frequency");
    toy->add_option("--kp", ta.kp, "neighbor x-frequency");
    toy->add_option("--eta", ta.eta, "y-frequency");
    toy->add_option("--eps", ta.eps, "amplitude parameter");
    toy->add_option("--nu", ta.nu, "viscosity");
    toy->add_option("--c0", ta.c0, "floor of the max(eps t, c0) prefactor");
    toy->add_option("--alpha", ta.alpha, "suppression power");
    toy->add_option("--kappa", ta.kappa, "weight strength");
    toy->add_option("--variant", ta.variant, "envelope family")
        ->check(CLI::IsMember({"balanced", "unbalanced"}));
    toy->add_option("--t0", ta.t0, "start time");
    toy->add_option("--tmax", ta.tmax, "final time (0: 2 eta)");
    toy->add_option("--c-cap", ta.c_cap, "domination constant cap");
    toy->add_option("--out", ta.out, "output csv or directory")->required();

    CoordsArgs ca;
    CLI::App* coo = app.add_subcommand("coords", "coordinate-transform diagnostics");
    coo->add_option("--streak-dir", ca.streak_dir,
                    "streak run directory used as the U0 feed")
        ->required();
    coo->add_option("--tmax", ca.tmax, "final time");
    coo->add_option("--dt", ca.dt, "step");
    coo->add_option("--series-dt", ca.series_dt, "sampling cadence");
    coo->add_option("--sigma", ca.sigma, "Sobolev exponent of the reported norms");
    coo->add_option("--residual-tol", ca.residual_tol,
                    "chain-rule residual bound counted as a violation");
    coo->add_option("--out", ca.out, "output csv or directory")->required();

    DnsArgs da;
    CLI::App* dns = app.add_subcommand("dns", "full nonlinear run");
    dns->add_option("--config", da.config, "run configuration json");
    dns->add_option("--out", da.out, "output directory (overrides the config)");
    dns->add_flag("--resume", da.resume,
                  "continue from the latest snapshot in the output directory");

    SweepArgs swa;
    CLI::App* swp = app.add_subcommand("sweep", "(nu, eps) threshold sweep");
    swp->add_option("--config", swa.config, "base run configuration json");
    swp->add_option("--nu", swa.nus, "viscosity list")->required()->delimiter(',');
    swp->add_option("--eps", swa.epss, "amplitude grid (increasing)")
        ->required()
        ->delimiter(',');
    swp->add_option("--out", swa.out, "output directory");
    swp->add_option("--threads", swa.threads, "worker threads");

    RateArgs ra;
    CLI::App* rate = app.add_subcommand("rate-study", "canonical rate measurements");
    rate->add_option("--kind", ra.kind, "lift-up | inviscid-damping | enhanced-dissipation")
        ->required()
        ->check(CLI::IsMember({"lift-up", "inviscid-damping", "enhanced-dissipation"}));
    rate->add_option("--config", ra.config, "run configuration json (overrides defaults)");
    rate->add_option("--out", ra.out, "output directory");

    LemmaArgs lea;
    CLI::App* lem = app.add_subcommand("lemma-check", "inequality harness");
    lem->add_option("--lemma", lea.ids, "check id (repeatable; default: all)");
    lem->add_option("--samples", lea.samples, "configurations per check");
    lem->add_option("--kmax", lea.kmax, "box: max |k|");
    lem->add_option("--eta-max", lea.eta_max, "box: max |eta|");
    lem->add_option("--lmax", lea.lmax, "box: max |l|");
    lem->add_option("--t-min", lea.t_min, "box: min t");
    lem->add_option("--t-max", lea.t_max, "box: max t");
    lem->add_flag("--no-doubling", lea.no_doubling, "skip the box-doubling check");
    lem->add_option("--out", lea.out, "report text file");

    MultArgs ma;
    CLI::App* mul = app.add_subcommand("multiplier-dump", "weight profile tables");
    mul->add_option("--eta", ma.eta, "y-frequency")->required();
    mul->add_option("--kappa", ma.kappa, "weight strength");
    mul->add_option("--kprime", ma.kprimes, "x-frequency for w3 columns (repeatable)");
    mul->add_option("--out", ma.out, "output csv or directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*lin) return run_linear(la);
        if (*str) return run_streak(sa);
        if (*toy) return run_toy(ta);
        if (*coo) return run_coords(ca);
        if (*dns) return run_dns_cmd(da);
        if (*swp) return run_sweep(swa);
        if (*rate) return run_rate_study(ra);
        if (*lem) return run_lemma_check(lea);
        if (*mul) return run_multiplier_dump(ma);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    }
    return exit_usage;
}
