#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "socsim/csv.hpp"
#include "socsim/scenario.hpp"
#include "socsim/svg.hpp"

#include <filesystem>
#include <fstream>

namespace fs = std::filesystem;
using namespace socsim;

namespace {

// small, fast scenario for file-level checks
ScenarioConfig tiny_config() {
    ScenarioConfig cfg;
    cfg.n_m = 48;
    cfg.n_c = 24;
    cfg.t_end = 1.0;
    cfg.snapshots = {0.5};
    cfg.sweep_l3 = {0.02, 0.08};
    cfg.out_dir = "tmp_scenario_test";
    return cfg;
}

struct TempDir {
    std::string path;
    explicit TempDir(std::string p) : path(std::move(p)) { fs::remove_all(path); }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("config parsing and overrides") {
    const std::string path = "tmp_config_test.cfg";
    {
        std::ofstream out(path);
        out << "# comment line\n"
            << "grid.n_m = 64\n"
            << "params.k1 = 0.2   # trailing comment\n"
            << "sweep.l3 = 0.01, 0.05\n"
            << "run.snapshots = 1, 2.5\n"
            << "run.t_end = 3\n"
            << "marriage.loss_kernel = partner-wealth\n";
    }
    ScenarioConfig cfg = load_config(path);
    CHECK(cfg.n_m == 64);
    CHECK(cfg.params.k1 == 0.2);
    CHECK(cfg.sweep_l3 == std::vector<double>{0.01, 0.05});
    CHECK(cfg.snapshots == std::vector<double>{1.0, 2.5});
    CHECK(cfg.marriage.loss_kernel == LossKernel::partner_wealth);

    apply_override(cfg, "params.tau_f=40");
    CHECK(cfg.params.tau_f == 40.0);
    CHECK(cfg.marriage.tau_f == 40.0);
    CHECK_THROWS(apply_override(cfg, "params.nonsense=1"));
    CHECK_THROWS(apply_override(cfg, "no_equals_sign"));
    CHECK_THROWS(apply_override(cfg, "marriage.enabled=perhaps"));
    fs::remove(path);

    SUBCASE("validation rejects bad settings") {
        ScenarioConfig bad = tiny_config();
        bad.sweep_l3.clear();
        CHECK_THROWS(bad.validate());
        bad = tiny_config();
        bad.snapshots = {5.0}; // beyond t_end
        CHECK_THROWS(bad.validate());
    }
}

TEST_CASE("single run artifacts") {
    ScenarioConfig cfg = tiny_config();
    TempDir tmp(cfg.out_dir);
    const RunResult r = run_single(cfg, 0.02, cfg.out_dir + "/low", true);
    REQUIRE(r.ok);
    CHECK(r.stats.steps > 0);
    CHECK(r.stats.max_residual_a <= 1e-6);
    CHECK(r.stats.max_residual_b <= 1e-6);
    CHECK(r.stats.max_mass_deviation < 1e-3);
    CHECK(fs::exists(cfg.out_dir + "/low/moments.csv"));
    CHECK(fs::exists(cfg.out_dir + "/low/steps.csv"));
    CHECK(fs::exists(cfg.out_dir + "/low/calibration.csv"));
    CHECK(fs::exists(cfg.out_dir + "/low/manifest.json"));
    REQUIRE(r.snapshots.size() == 1);
    CHECK(r.snapshots[0].t_actual >= r.snapshots[0].t_requested);
    CHECK(fs::exists(cfg.out_dir + "/low/" + r.snapshots[0].path));
    CHECK(r.t.front() == 0.0);
    CHECK(r.t.back() == doctest::Approx(cfg.t_end).epsilon(0.1));

    SUBCASE("moment series files are byte reproducible") {
        const RunResult r2 = run_single(cfg, 0.02, cfg.out_dir + "/again", true);
        REQUIRE(r2.ok);
        CHECK(file_checksum(cfg.out_dir + "/low/moments.csv") ==
              file_checksum(cfg.out_dir + "/again/moments.csv"));
        CHECK(file_checksum(cfg.out_dir + "/low/calibration.csv") ==
              file_checksum(cfg.out_dir + "/again/calibration.csv"));
    }
}

TEST_CASE("zero-horizon run leaves only the initial snapshot") {
    ScenarioConfig cfg = tiny_config();
    cfg.t_end = 0.0;
    cfg.snapshots = {};
    TempDir tmp(cfg.out_dir);
    const RunResult r = run_single(cfg, 0.02, cfg.out_dir + "/zero", true);
    REQUIRE(r.ok);
    CHECK(r.stats.steps == 0);
    CHECK(r.t.size() == 1);
    REQUIRE(r.snapshots.size() == 1);
    CHECK(r.snapshots[0].t_actual == 0.0);
}

TEST_CASE("sweep manifest and failure isolation") {
    ScenarioConfig cfg = tiny_config();
    TempDir tmp(cfg.out_dir);
    SUBCASE("healthy sweep completes every member") {
        const SweepResult sweep = run_scenario(cfg, true);
        CHECK(sweep.all_ok);
        REQUIRE(sweep.runs.size() == 2);
        CHECK(fs::exists(sweep.manifest_path));
        for (const RunResult& r : sweep.runs) {
            CHECK(r.ok);
            // every configured snapshot produced exactly one file
            CHECK(r.snapshots.size() == cfg.snapshots.size());
            for (const std::string& a : r.artifacts)
                CHECK(fs::exists(r.dir + "/" + a));
        }
    }
    SUBCASE("an infeasible member fails alone") {
        cfg.params.target_alienated_fraction = 50.0; // unattainable share
        const SweepResult sweep = run_scenario(cfg, false);
        CHECK_FALSE(sweep.all_ok);
        for (const RunResult& r : sweep.runs) {
            CHECK_FALSE(r.ok);
            CHECK_FALSE(r.error.empty());
        }
        CHECK(fs::exists(sweep.manifest_path));
    }
}

TEST_CASE("series comparison") {
    ScenarioConfig cfg = tiny_config();
    TempDir tmp(cfg.out_dir);
    const RunResult a = run_single(cfg, 0.02, cfg.out_dir + "/a", false);
    const RunResult b = run_single(cfg, 0.08, cfg.out_dir + "/b", false);
    REQUIRE(a.ok);
    REQUIRE(b.ok);

    SUBCASE("identical runs have zero differences") {
        const CompareReport rep = compare_series(a, a);
        for (double d : rep.d_mean_m) CHECK(d == 0.0);
        CHECK(rep.final_mean_c_ratio == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("reports load back from the run directories") {
        const CompareReport mem = compare_series(a, b);
        const CompareReport file = compare_runs(cfg.out_dir + "/a", cfg.out_dir + "/b");
        CHECK(file.final_mean_c_ratio ==
              doctest::Approx(mem.final_mean_c_ratio).epsilon(1e-6));
        CHECK(file.early_max_rel_mean_m ==
              doctest::Approx(mem.early_max_rel_mean_m).epsilon(1e-6));
        const std::string text = format_report(file);
        CHECK(text.find("final <C> ratio") != std::string::npos);
    }
    SUBCASE("grid mismatch is rejected") {
        ScenarioConfig other = cfg;
        other.n_m = 64;
        const RunResult c = run_single(other, 0.02, "", false);
        REQUIRE(c.ok);
        CHECK_THROWS(compare_series(a, c));
    }
}

TEST_CASE("contour svg rendering") {
    const Grid g(12.0, 32, 16);
    SUBCASE("uniform field renders a valid document") {
        PdfField f(g);
        for (double& v : f.values) v = 1.0 / 12.0;
        const std::string svg = render_contour_svg(f, SvgOptions{});
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(svg.find("</svg>") != std::string::npos);
        CHECK(svg.find("<rect") != std::string::npos);
    }
    SUBCASE("deterministic output") {
        const PdfField f = build_initial_condition(g, 1.0, 0.6, 0.5, 0.08);
        SvgOptions opts;
        opts.title = "snapshot";
        CHECK(render_contour_svg(f, opts) == render_contour_svg(f, opts));
    }
    SUBCASE("empty field throws") {
        PdfField f(g);
        CHECK_THROWS(render_contour_svg(f, SvgOptions{}));
    }
    SUBCASE("arrows overlay") {
        const PdfField f = build_initial_condition(g, 1.0, 0.6, 0.5, 0.08);
        RateField rf(g);
        for (int id = 0; id < g.size(); ++id) {
            rf.u_m[id] = 0.1;
            rf.u_c[id] = -0.05;
        }
        SvgOptions opts;
        opts.rates = &rf;
        opts.arrow_stride_m = 8;
        opts.arrow_stride_c = 4;
        const std::string svg = render_contour_svg(f, opts);
        CHECK(svg.find("<line") != std::string::npos);
    }
}

TEST_CASE("formatted numbers carry nine significant digits") {
    CHECK(format_sci(1.0) == "1.00000000e+00");
    CHECK(format_sci(-0.125) == "-1.25000000e-01");
    CHECK(format_sci(12345.6789) == "1.23456789e+04");
}
