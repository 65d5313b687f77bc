#include "socsim/grid.hpp"
#include "socsim/particles.hpp"
#include "socsim/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

using namespace socsim;

int main(int argc, char** argv) {
    CLI::App app{"society wealth-contentment density simulator"};
    app.require_subcommand(1);

    // simulate: full tax sweep with file artifacts
    auto* sim = app.add_subcommand("simulate", "run the wealth-tax parametric study");
    std::string config_path, out_dir, sweep_arg;
    std::vector<std::string> overrides;
    bool svg = false;
    sim->add_option("--config", config_path, "config file (key = value lines)");
    sim->add_option("--set", overrides, "override, e.g. --set run.t_end=10")->take_all();
    sim->add_option("--out", out_dir, "output directory");
    sim->add_option("--sweep-l3", sweep_arg, "comma-separated wealth tax rates");
    sim->add_flag("--svg", svg, "also render contour SVGs at snapshots");

    // compare: two finished run directories
    auto* cmp = app.add_subcommand("compare", "compare two run directories");
    std::string dir_a, dir_b;
    cmp->add_option("run_a", dir_a, "first run directory")->required();
    cmp->add_option("run_b", dir_b, "second run directory")->required();

    // oracle: particle Monte Carlo moment series
    auto* orc = app.add_subcommand("oracle", "particle Monte Carlo validation run");
    std::string o_config, o_out = "oracle_moments.csv";
    std::vector<std::string> o_overrides;
    int o_particles = 0;
    std::uint64_t o_seed = 0;
    bool o_marriage = false;
    orc->add_option("--config", o_config, "config file");
    orc->add_option("--set", o_overrides, "config override")->take_all();
    orc->add_option("--particles", o_particles, "particle count");
    orc->add_option("--seed", o_seed, "rng seed");
    orc->add_option("--out", o_out, "output csv path");
    orc->add_flag("--marriage", o_marriage, "include random marriages");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            ScenarioConfig cfg = load_config(config_path);
            for (const std::string& kv : overrides) apply_override(cfg, kv);
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            if (!sweep_arg.empty()) apply_override(cfg, "sweep.l3=" + sweep_arg);
            if (svg) cfg.svg = true;
            cfg.validate();

            const SweepResult sweep = run_scenario(cfg);
            for (const RunResult& r : sweep.runs) {
                if (r.ok)
                    std::printf("run L3=%g: ok, %d steps, %.1fs -> %s\n", r.l3,
                                r.stats.steps, r.stats.wall_seconds, r.dir.c_str());
                else
                    std::printf("run L3=%g: FAILED (%s)\n", r.l3, r.error.c_str());
            }
            std::printf("manifest: %s\n", sweep.manifest_path.c_str());
            return sweep.all_ok ? 0 : 2;
        }

        if (cmp->parsed()) {
            const CompareReport rep = compare_runs(dir_a, dir_b);
            std::fputs(format_report(rep).c_str(), stdout);
            return 0;
        }

        if (orc->parsed()) {
            ScenarioConfig cfg = load_config(o_config);
            for (const std::string& kv : o_overrides) apply_override(cfg, kv);
            cfg.validate();

            ModelParams params = cfg.params;
            params.l1 = calibrate_l1(params);
            const Grid grid = cfg.make_grid();
            const PdfField ic = build_initial_condition(grid, cfg.ic_mean_m, cfg.ic_rms_m,
                                                        cfg.ic_mean_c, cfg.ic_rms_c);
            OracleConfig oc;
            oc.n_particles = o_particles > 0 ? o_particles : cfg.oracle_particles;
            oc.seed = o_seed != 0 ? o_seed : cfg.oracle_seed;
            oc.dt = cfg.oracle_dt;
            oc.t_end = cfg.t_end;
            oc.marriage = o_marriage;
            oc.checkpoints.clear();
            for (double t = 1.0; t <= cfg.t_end + 1e-9; t += 1.0) oc.checkpoints.push_back(t);

            const OracleSeries series = run_oracle(ic, params, oc);
            const std::filesystem::path out_path(o_out);
            if (out_path.has_parent_path())
                std::filesystem::create_directories(out_path.parent_path());
            write_oracle_csv(series, o_out);
            std::printf("oracle: %d particles, %zu checkpoints -> %s\n", oc.n_particles,
                        series.t.size(), o_out.c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
