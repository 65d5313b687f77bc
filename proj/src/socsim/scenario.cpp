#include "socsim/scenario.hpp"

#include "socsim/contentment.hpp"
#include "socsim/csv.hpp"
#include "socsim/econ.hpp"
#include "socsim/svg.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;
using nlohmann::json;

namespace socsim {

void ScenarioConfig::validate() const {
    params.validate();
    if (!(t_end >= 0.0)) throw std::domain_error("config: t_end must be >= 0");
    if (sweep_l3.empty()) throw std::domain_error("config: sweep list must not be empty");
    for (double ts : snapshots)
        if (ts < 0.0 || ts > t_end + 1e-9)
            throw std::domain_error("config: snapshot times must lie within [0, t_end]");
    if (!(cfl > 0.0 && cfl < 1.0)) throw std::domain_error("config: cfl must be in (0,1)");
    if (!(dt_max > 0.0)) throw std::domain_error("config: dt_max must be positive");
    if (oracle_particles < 2) throw std::domain_error("config: oracle needs >= 2 particles");
}

namespace {

std::vector<double> parse_list(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw std::domain_error("config: expected boolean, got '" + v + "'");
}

void set_key(ScenarioConfig& c, const std::string& key, const std::string& v) {
    ModelParams& p = c.params;
    if (key == "grid.n_m") c.n_m = std::stoi(v);
    else if (key == "grid.n_c") c.n_c = std::stoi(v);
    else if (key == "grid.m_max") p.m_max = std::stod(v);
    else if (key == "ic.mean_m") c.ic_mean_m = std::stod(v);
    else if (key == "ic.rms_m") c.ic_rms_m = std::stod(v);
    else if (key == "ic.mean_c") c.ic_mean_c = std::stod(v);
    else if (key == "ic.rms_c") c.ic_rms_c = std::stod(v);
    else if (key == "params.k1") p.k1 = std::stod(v);
    else if (key == "params.k2") p.k2 = std::stod(v);
    else if (key == "params.k3_alpha_i") p.k3_alpha_i = std::stod(v);
    else if (key == "params.k4") p.k4 = std::stod(v);
    else if (key == "params.k5") p.k5 = std::stod(v);
    else if (key == "params.k6") p.k6 = std::stod(v);
    else if (key == "params.k7") p.k7 = std::stod(v);
    else if (key == "params.beta") p.beta = std::stod(v);
    else if (key == "params.gamma") p.gamma = std::stod(v);
    else if (key == "params.alpha_p1") p.alpha_p1 = std::stod(v);
    else if (key == "params.alpha_p2") p.alpha_p2 = std::stod(v);
    else if (key == "params.alpha_p3") p.alpha_p3 = std::stod(v);
    else if (key == "params.l_t") p.l_t = std::stod(v);
    else if (key == "params.l3") p.l3 = std::stod(v);
    else if (key == "params.m_w") p.m_w = std::stod(v);
    else if (key == "params.alpha_w") p.alpha_w = std::stod(v);
    else if (key == "params.tau_f") { p.tau_f = std::stod(v); c.marriage.tau_f = p.tau_f; }
    else if (key == "params.tw_exponent_scale") p.tw_exponent_scale = std::stod(v);
    else if (key == "params.target_top_growth") p.target_top_growth = std::stod(v);
    else if (key == "params.target_alienated_fraction") p.target_alienated_fraction = std::stod(v);
    else if (key == "params.target_mean_productivity") p.target_mean_productivity = std::stod(v);
    else if (key == "marriage.enabled") c.marriage.enabled = parse_bool(v);
    else if (key == "marriage.weight_normalization") {
        if (v == "unit-integral") c.marriage.weight_normalization = WeightNormalization::unit_integral;
        else if (v == "as-printed") c.marriage.weight_normalization = WeightNormalization::as_printed;
        else throw std::domain_error("config: unknown weight normalization '" + v + "'");
    }
    else if (key == "marriage.loss_kernel") {
        if (v == "half-gap") c.marriage.loss_kernel = LossKernel::half_gap;
        else if (v == "partner-wealth") c.marriage.loss_kernel = LossKernel::partner_wealth;
        else if (v == "gap") c.marriage.loss_kernel = LossKernel::gap;
        else throw std::domain_error("config: unknown loss kernel '" + v + "'");
    }
    else if (key == "sweep.l3") c.sweep_l3 = parse_list(v);
    else if (key == "run.t_end") c.t_end = std::stod(v);
    else if (key == "run.snapshots") c.snapshots = parse_list(v);
    else if (key == "run.cfl") c.cfl = std::stod(v);
    else if (key == "run.dt_max") c.dt_max = std::stod(v);
    else if (key == "run.renormalize") c.renormalize = parse_bool(v);
    else if (key == "solver.backend") {
        if (v == "line") c.backend = SolverBackend::line_implicit;
        else if (v == "direct") c.backend = SolverBackend::direct;
        else throw std::domain_error("config: unknown solver backend '" + v + "'");
    }
    else if (key == "output.dir") c.out_dir = v;
    else if (key == "output.svg") c.svg = parse_bool(v);
    else if (key == "oracle.particles") c.oracle_particles = std::stoi(v);
    else if (key == "oracle.seed") c.oracle_seed = std::stoull(v);
    else if (key == "oracle.dt") c.oracle_dt = std::stod(v);
    else throw std::domain_error("config: unknown key '" + key + "'");
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

} // namespace

ScenarioConfig load_config(const std::string& path) {
    ScenarioConfig cfg;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config: " + path);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config " + path + ":" + std::to_string(lineno) +
                                         ": expected key = value");
            set_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        }
    }
    cfg.validate();
    return cfg;
}

void apply_override(ScenarioConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::domain_error("override must be key=value: " + assignment);
    set_key(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

namespace {

std::string format_time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", t);
    return buf;
}

std::string format_l3_tag(double l3) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", l3);
    return buf;
}

void write_run_manifest(const RunResult& r, const ScenarioConfig& cfg) {
    json j;
    j["l3"] = r.l3;
    j["status"] = r.ok ? "ok" : "failed";
    if (!r.ok) j["error"] = r.error;
    j["grid"] = {{"n_m", r.grid.n_m}, {"n_c", r.grid.n_c}, {"m_max", r.grid.m_max}};
    j["t_end"] = r.t_end;
    j["snapshots_requested"] = cfg.snapshots;
    json snaps = json::array();
    for (const auto& s : r.snapshots)
        snaps.push_back({{"t_requested", s.t_requested},
                         {"t_actual", s.t_actual},
                         {"path", s.path}});
    j["snapshots"] = snaps;
    j["stats"] = {{"steps", r.stats.steps},
                  {"max_mass_deviation", r.stats.max_mass_deviation},
                  {"max_clipped", r.stats.max_clipped},
                  {"max_residual_a", r.stats.max_residual_a},
                  {"max_residual_b", r.stats.max_residual_b},
                  {"max_u2_neutrality", r.stats.max_u2_neutrality},
                  {"max_marriage_mass", r.stats.max_marriage_mass},
                  {"max_marriage_mean", r.stats.max_marriage_mean},
                  {"max_marriage_discarded", r.stats.max_marriage_discarded},
                  {"wall_seconds", r.stats.wall_seconds}};
    json arts = json::array();
    for (const std::string& a : r.artifacts)
        arts.push_back({{"path", a}, {"checksum", file_checksum(r.dir + "/" + a)}});
    j["artifacts"] = arts;
    std::ofstream out(r.dir + "/manifest.json", std::ios::binary);
    out << j.dump(2) << "\n";
}

} // namespace

RunResult run_single(const ScenarioConfig& cfg, double l3, const std::string& dir,
                     bool keep_fields) {
    RunResult res;
    res.l3 = l3;
    res.dir = dir;
    res.t_end = cfg.t_end;
    const auto t_start = std::chrono::steady_clock::now();

    try {
        ModelParams params = cfg.params;
        params.l3 = l3;
        params.l1 = calibrate_l1(params);
        params.validate();

        const Grid grid = cfg.make_grid();
        res.grid = grid;
        PdfField field = build_initial_condition(grid, cfg.ic_mean_m, cfg.ic_rms_m,
                                                 cfg.ic_mean_c, cfg.ic_rms_c);
        CalibrationState cal;
        StepControl ctl;
        ctl.cfl_limit = cfg.cfl;
        ctl.dt_max = cfg.dt_max;
        ctl.renormalize_every_step = cfg.renormalize;

        const bool writing = !dir.empty();
        std::unique_ptr<CsvWriter> moments_csv, steps_csv, calib_csv;
        if (writing) {
            fs::create_directories(dir);
            moments_csv = std::make_unique<CsvWriter>(dir + "/moments.csv");
            moments_csv->header("t,meanM,meanC,rmsM,rmsC");
            steps_csv = std::make_unique<CsvWriter>(dir + "/steps.csv");
            steps_csv->header("t,dt,mass_pre,clipped_mass,meanM,meanC,rmsM,rmsC");
            calib_csv = std::make_unique<CsvWriter>(dir + "/calibration.csv");
            calib_csv->header("t,L2,Ms,Mstar,L4,G,Tt,residual_a,residual_b");
            res.artifacts = {"moments.csv", "steps.csv", "calibration.csv"};
        }

        auto record_state = [&](double t, const MomentSet& mom) {
            res.t.push_back(t);
            res.moments.push_back(mom);
            if (moments_csv)
                moments_csv->row({t, mom.mean_m, mom.mean_c, mom.rms_m, mom.rms_c});
        };

        auto emit_snapshot = [&](double t_req) {
            SnapshotRecord snap;
            snap.t_requested = t_req;
            snap.t_actual = ctl.t;
            if (writing) {
                const std::string tag = format_time_tag(ctl.t);
                snap.path = "pdf_t" + tag + ".csv";
                write_snapshot_csv(field, dir + "/" + snap.path);
                res.artifacts.push_back(snap.path);

                // rate map of the snapshot state for the flow figures
                const MomentSet mom = compute_moments(field);
                CalibrationState scal = calibrate_redistribution(field, cal, params);
                scal.mean_m = mom.mean_m;
                scal.l4 = compute_l4(scal, params);
                scal.t_t = total_tax_intake(field, scal, params);
                scal.g = good_income(field, scal, params);
                const RateField rates = compute_rate_field(grid, scal, mom, params);
                const std::string rpath = "rates_t" + tag + ".csv";
                write_rate_field_csv(rates, dir + "/" + rpath);
                res.artifacts.push_back(rpath);
                if (cfg.svg) {
                    SvgOptions so;
                    so.rates = &rates;
                    so.title = "P(M,C) at t=" + tag + ", L3=" + format_l3_tag(l3);
                    const std::string spath = "pdf_t" + tag + ".svg";
                    write_svg(field, so, dir + "/" + spath);
                    res.artifacts.push_back(spath);
                }
            }
            if (keep_fields) snap.field = field;
            res.snapshots.push_back(std::move(snap));
        };

        std::vector<double> pending = cfg.snapshots;
        std::sort(pending.begin(), pending.end());
        std::size_t next_snap = 0;

        record_state(0.0, compute_moments(field));
        while (next_snap < pending.size() && pending[next_snap] <= 0.0) {
            emit_snapshot(pending[next_snap]);
            ++next_snap;
        }
        if (cfg.t_end == 0.0 && pending.empty()) emit_snapshot(0.0);

        while (ctl.t < cfg.t_end - 1e-12) {
            const StepResult sr = advance_step(field, cal, ctl, params, cfg.marriage,
                                               cfg.backend);
            if (calib_csv)
                calib_csv->row({ctl.t - sr.dt, sr.cal.l2, sr.cal.m_s, sr.cal.m_star,
                                sr.cal.l4, sr.cal.g, sr.cal.t_t, sr.cal.residual_a,
                                sr.cal.residual_b});
            const MomentSet mom = compute_moments(field);
            record_state(ctl.t, mom);
            if (steps_csv)
                steps_csv->row({ctl.t, sr.dt, sr.mass_pre, sr.clipped_mass, mom.mean_m,
                                mom.mean_c, mom.rms_m, mom.rms_c});

            RunStats& st = res.stats;
            ++st.steps;
            st.max_mass_deviation = std::max(st.max_mass_deviation,
                                             std::abs(sr.mass_pre - 1.0));
            st.max_clipped = std::max(st.max_clipped, sr.clipped_mass);
            st.max_residual_a = std::max(st.max_residual_a, std::abs(sr.cal.residual_a));
            st.max_residual_b = std::max(st.max_residual_b, std::abs(sr.cal.residual_b));
            st.max_u2_neutrality = std::max(st.max_u2_neutrality, sr.u2_neutrality);
            st.max_marriage_mass = std::max(st.max_marriage_mass,
                                            std::abs(sr.marriage_mass_rate));
            st.max_marriage_mean = std::max(
                st.max_marriage_mean,
                std::abs(sr.marriage_mean_rate) / std::max(sr.moments.mean_m, 1e-300));
            st.max_marriage_discarded = std::max(st.max_marriage_discarded,
                                                 sr.marriage_discarded);

            while (next_snap < pending.size() && ctl.t >= pending[next_snap] - 1e-12) {
                emit_snapshot(pending[next_snap]);
                ++next_snap;
            }
        }
        res.ok = true;
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
    }

    res.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    if (!dir.empty()) write_run_manifest(res, cfg);
    return res;
}

SweepResult run_scenario(const ScenarioConfig& cfg, bool keep_fields) {
    cfg.validate();
    fs::create_directories(cfg.out_dir);

    SweepResult sweep;
    sweep.runs.resize(cfg.sweep_l3.size());

    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers =
        std::min<unsigned>(hw, static_cast<unsigned>(cfg.sweep_l3.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cfg.sweep_l3.size()) return;
            const double l3 = cfg.sweep_l3[k];
            const std::string dir = cfg.out_dir + "/l3_" + format_l3_tag(l3);
            sweep.runs[k] = run_single(cfg, l3, dir, keep_fields);
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    json j;
    j["t_end"] = cfg.t_end;
    j["grid"] = {{"n_m", cfg.n_m}, {"n_c", cfg.n_c}, {"m_max", cfg.params.m_max}};
    j["sweep_l3"] = cfg.sweep_l3;
    json runs = json::array();
    sweep.all_ok = true;
    for (const RunResult& r : sweep.runs) {
        runs.push_back({{"l3", r.l3},
                        {"dir", fs::path(r.dir).filename().string()},
                        {"status", r.ok ? "ok" : "failed"},
                        {"error", r.error}});
        sweep.all_ok = sweep.all_ok && r.ok;
    }
    j["runs"] = runs;
    sweep.manifest_path = cfg.out_dir + "/manifest.json";
    std::ofstream out(sweep.manifest_path, std::ios::binary);
    out << j.dump(2) << "\n";
    return sweep;
}

MomentSet interpolate_moments(const std::vector<double>& t,
                              const std::vector<MomentSet>& m, double tq) {
    if (t.empty()) throw std::runtime_error("interpolate: empty series");
    if (tq <= t.front()) return m.front();
    if (tq >= t.back()) return m.back();
    const auto it = std::lower_bound(t.begin(), t.end(), tq);
    const std::size_t hi = static_cast<std::size_t>(it - t.begin());
    const std::size_t lo = hi - 1;
    const double w = (tq - t[lo]) / (t[hi] - t[lo]);
    MomentSet out;
    out.mean_m = m[lo].mean_m + w * (m[hi].mean_m - m[lo].mean_m);
    out.mean_c = m[lo].mean_c + w * (m[hi].mean_c - m[lo].mean_c);
    out.rms_m = m[lo].rms_m + w * (m[hi].rms_m - m[lo].rms_m);
    out.rms_c = m[lo].rms_c + w * (m[hi].rms_c - m[lo].rms_c);
    return out;
}

CompareReport compare_series(const RunResult& a, const RunResult& b) {
    if (!a.grid.same_layout(b.grid))
        throw std::runtime_error("compare: incompatible runs, different grids");
    if (std::abs(a.t_end - b.t_end) > 1e-9)
        throw std::runtime_error("compare: incompatible runs, different horizons");
    if (a.t.empty() || b.t.empty())
        throw std::runtime_error("compare: incompatible runs, empty series");

    CompareReport rep;
    rep.l3_a = a.l3;
    rep.l3_b = b.l3;
    const double horizon = std::min(a.t.back(), b.t.back());
    for (double tq = 0.0; tq < horizon + 0.5; tq += 1.0) {
        const double tt = std::min(tq, horizon);
        const MomentSet ma = interpolate_moments(a.t, a.moments, tt);
        const MomentSet mb = interpolate_moments(b.t, b.moments, tt);
        rep.t.push_back(tt);
        rep.d_mean_m.push_back(mb.mean_m - ma.mean_m);
        rep.d_mean_c.push_back(mb.mean_c - ma.mean_c);
        rep.d_rms_m.push_back(mb.rms_m - ma.rms_m);
        rep.d_rms_c.push_back(mb.rms_c - ma.rms_c);
        if (tt <= 20.0 + 1e-9) {
            const double mid = 0.5 * (ma.mean_m + mb.mean_m);
            rep.early_max_rel_mean_m = std::max(
                rep.early_max_rel_mean_m, std::abs(mb.mean_m - ma.mean_m) / mid);
        }
        if (tt >= horizon) break;
    }
    const MomentSet fa = interpolate_moments(a.t, a.moments, horizon);
    const MomentSet fb = interpolate_moments(b.t, b.moments, horizon);
    rep.final_mean_c_ratio = fb.mean_c / fa.mean_c;
    rep.b_higher_mean_c = fb.mean_c > fa.mean_c;
    rep.b_higher_mean_m = fb.mean_m > fa.mean_m;
    rep.b_lower_rms_m = fb.rms_m < fa.rms_m;
    rep.b_lower_rms_c = fb.rms_c < fa.rms_c;
    return rep;
}

namespace {

RunResult load_run(const std::string& dir) {
    std::ifstream mf(dir + "/manifest.json");
    if (!mf) throw std::runtime_error("compare: no manifest in " + dir);
    json j;
    mf >> j;
    RunResult r;
    r.dir = dir;
    r.l3 = j.at("l3").get<double>();
    r.ok = j.at("status").get<std::string>() == "ok";
    r.t_end = j.at("t_end").get<double>();
    r.grid = Grid(j.at("grid").at("m_max").get<double>(),
                  j.at("grid").at("n_m").get<int>(),
                  j.at("grid").at("n_c").get<int>());

    std::ifstream in(dir + "/moments.csv");
    if (!in) throw std::runtime_error("compare: no moments.csv in " + dir);
    std::string line;
    std::getline(in, line); // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        MomentSet m;
        double t;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%lf", &t, &m.mean_m, &m.mean_c,
                        &m.rms_m, &m.rms_c) != 5)
            throw std::runtime_error("compare: bad moments row in " + dir);
        r.t.push_back(t);
        r.moments.push_back(m);
    }
    return r;
}

} // namespace

CompareReport compare_runs(const std::string& dir_a, const std::string& dir_b) {
    return compare_series(load_run(dir_a), load_run(dir_b));
}

std::string format_report(const CompareReport& r) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "comparison: run A (L3=%g) vs run B (L3=%g)\n",
                  r.l3_a, r.l3_b);
    os << buf;
    os << "t, dMeanM, dMeanC, dRmsM, dRmsC  (B - A)\n";
    for (std::size_t k = 0; k < r.t.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%7.2f  %+.4e  %+.4e  %+.4e  %+.4e\n", r.t[k],
                      r.d_mean_m[k], r.d_mean_c[k], r.d_rms_m[k], r.d_rms_c[k]);
        os << buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "final <C> ratio B/A: %.4f\nB higher <C>: %s\nB higher <M>: %s\n"
                  "B lower rms M: %s\nB lower rms C: %s\n"
                  "max relative <M> gap for t <= 20: %.4e\n",
                  r.final_mean_c_ratio, r.b_higher_mean_c ? "yes" : "no",
                  r.b_higher_mean_m ? "yes" : "no", r.b_lower_rms_m ? "yes" : "no",
                  r.b_lower_rms_c ? "yes" : "no", r.early_max_rel_mean_m);
    os << buf;
    return os.str();
}

} // namespace socsim
