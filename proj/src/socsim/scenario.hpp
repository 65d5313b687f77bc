#pragma once

#include "socsim/grid.hpp"
#include "socsim/marriage.hpp"
#include "socsim/params.hpp"
#include "socsim/stepper.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace socsim {

struct ScenarioConfig {
    int n_m = 240;
    int n_c = 120;

    double ic_mean_m = 1.0;
    double ic_rms_m = 0.6;
    double ic_mean_c = 0.5;
    double ic_rms_c = 0.08;

    ModelParams params;
    MarriageKernelConfig marriage;

    std::vector<double> sweep_l3{0.02, 0.04, 0.06, 0.08};
    double t_end = 75.0;
    std::vector<double> snapshots{12.0, 38.3, 72.4};

    double cfl = 0.8;
    double dt_max = 0.25;
    bool renormalize = true;
    SolverBackend backend = SolverBackend::line_implicit;

    std::string out_dir = "out";
    bool svg = false;

    int oracle_particles = 200000;
    std::uint64_t oracle_seed = 1;
    double oracle_dt = 0.005;

    Grid make_grid() const { return Grid(params.m_max, n_m, n_c); }
    void validate() const;
};

// Flat key=value config file with '#' comments; unknown keys are an error.
ScenarioConfig load_config(const std::string& path);
// One "section.key=value" override, same keys as the file.
void apply_override(ScenarioConfig& cfg, const std::string& assignment);

struct RunStats {
    int steps = 0;
    double max_mass_deviation = 0.0; // |mass_pre - 1|, pre-renormalization
    double max_clipped = 0.0;
    double max_residual_a = 0.0;
    double max_residual_b = 0.0;
    double max_u2_neutrality = 0.0;
    double max_marriage_mass = 0.0;  // |integral of I_f|
    double max_marriage_mean = 0.0;  // |integral of M I_f| / <M>
    double max_marriage_discarded = 0.0;
    double wall_seconds = 0.0;
};

struct SnapshotRecord {
    double t_requested = 0.0;
    double t_actual = 0.0;
    PdfField field; // kept only when requested
    std::string path;
};

struct RunResult {
    double l3 = 0.0;
    bool ok = false;
    std::string error;
    std::string dir;
    Grid grid;
    double t_end = 0.0;
    std::vector<double> t;
    std::vector<MomentSet> moments;
    std::vector<SnapshotRecord> snapshots;
    RunStats stats;
    std::vector<std::string> artifacts; // relative paths within dir
};

// One sweep member.  Writes artifacts when dir is non-empty; keeps snapshot
// fields in memory when keep_fields is set.  Exceptions from the solver or
// calibration are captured in the result.
RunResult run_single(const ScenarioConfig& cfg, double l3, const std::string& dir,
                     bool keep_fields = false);

struct SweepResult {
    std::vector<RunResult> runs;
    std::string manifest_path;
    bool all_ok = false;
};

// Full parametric study: one run per sweep value, a manifest of every artifact
// with checksums.  Failed members are recorded and do not stop the others.
SweepResult run_scenario(const ScenarioConfig& cfg, bool keep_fields = false);

// ---- run comparison ---------------------------------------------------------

struct CompareReport {
    double l3_a = 0.0, l3_b = 0.0;
    std::vector<double> t;          // matched sample times
    std::vector<double> d_mean_m, d_mean_c, d_rms_m, d_rms_c; // b - a
    double final_mean_c_ratio = 0.0; // b / a
    bool b_higher_mean_c = false;
    bool b_higher_mean_m = false;
    bool b_lower_rms_m = false;
    bool b_lower_rms_c = false;
    double early_max_rel_mean_m = 0.0; // max |diff|/mean over t <= 20
};

// Throws on grid or horizon mismatch.
CompareReport compare_series(const RunResult& a, const RunResult& b);
// File-based variant for the CLI: run directories with manifest + moments.
CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b);
std::string format_report(const CompareReport& r);

// Linear interpolation of a moment series at time tq.
MomentSet interpolate_moments(const std::vector<double>& t,
                              const std::vector<MomentSet>& m, double tq);

} // namespace socsim
