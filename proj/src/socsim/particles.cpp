#include "socsim/particles.hpp"
#include "socsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace socsim {

ParticleEnsemble sample_from_field(const PdfField& field, int n, std::uint64_t seed) {
    if (n < 2) throw std::domain_error("particles: need at least 2 particles");
    const Grid& g = field.grid;

    std::vector<double> cdf(g.size());
    double acc = 0.0;
    for (int id = 0; id < g.size(); ++id) {
        acc += std::max(field.values[id], 0.0);
        cdf[id] = acc;
    }
    if (acc <= 0.0) throw std::runtime_error("particles: cannot sample an empty field");

    ParticleEnsemble ens;
    ens.seed = seed;
    ens.rng.seed(seed);
    ens.m.resize(n);
    ens.c.resize(n);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < n; ++k) {
        const double u = uni(ens.rng) * acc;
        const int id = static_cast<int>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const int i = std::min(id / g.n_c, g.n_m - 1);
        const int j = id % g.n_c;
        ens.m[k] = (i + uni(ens.rng)) * g.dm;
        ens.c[k] = (j + uni(ens.rng)) * g.dc;
    }
    return ens;
}

MomentSet ensemble_moments(const ParticleEnsemble& ens) {
    const int n = ens.size();
    if (n < 2) throw std::runtime_error("particles: moments need n >= 2");
    double sm = 0.0, sm2 = 0.0, sc = 0.0, sc2 = 0.0;
    for (int k = 0; k < n; ++k) {
        sm += ens.m[k];
        sm2 += ens.m[k] * ens.m[k];
        sc += ens.c[k];
        sc2 += ens.c[k] * ens.c[k];
    }
    MomentSet mom;
    mom.mean_m = sm / n;
    mom.mean_c = sc / n;
    mom.rms_m = std::sqrt(std::max(0.0, sm2 / n - mom.mean_m * mom.mean_m));
    mom.rms_c = std::sqrt(std::max(0.0, sc2 / n - mom.mean_c * mom.mean_c));
    return mom;
}

WealthView ensemble_wealth_view(const ParticleEnsemble& ens, const Grid& grid,
                                const ModelParams& p) {
    WealthView view;
    view.m = grid.m_centers;
    view.w.assign(grid.n_m, 0.0);
    double su1 = 0.0;
    const int n = ens.size();
    for (int k = 0; k < n; ++k) {
        int bin = static_cast<int>(ens.m[k] / grid.dm);
        bin = std::clamp(bin, 0, grid.n_m - 1);
        view.w[bin] += 1.0;
        su1 += productivity_u1(ens.m[k], ens.c[k], p);
    }
    for (double& w : view.w) w /= n;
    view.mean_u1 = su1 / n;
    return view;
}

CalibrationState ensemble_calibration(const ParticleEnsemble& ens, const Grid& grid,
                                      const CalibrationState& warm, const ModelParams& p,
                                      const MomentSet& mom) {
    const WealthView view = ensemble_wealth_view(ens, grid, p);
    CalibrationState cal = calibrate_redistribution(view, warm, p);
    cal.mean_m = mom.mean_m;
    cal.l4 = compute_l4(cal, p);
    const int n = ens.size();
    double st = 0.0, sg = 0.0;
    for (int k = 0; k < n; ++k) {
        st += tax_paid(ens.m[k], ens.c[k], cal, p);
        sg += wealth_drift(ens.m[k], ens.c[k], cal, p);
    }
    cal.t_t = st / n;
    cal.g = sg / n;
    return cal;
}

void step_particles(ParticleEnsemble& ens, const CalibrationState& cal,
                    const MomentSet& mom, const ModelParams& p, double dt) {
    if (!(dt > 0.0)) throw std::domain_error("particles: dt must be positive");
    const int n = ens.size();
    const double noise = std::sqrt(p.gamma * dt);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < n; ++k) {
        const double dm = wealth_drift(ens.m[k], ens.c[k], cal, p) * dt;
        const double dc = contentment_drift(ens.m[k], ens.c[k], cal, mom, p) * dt +
                          noise * gauss(ens.rng);
        if (std::abs(dm) > p.m_max || std::abs(dc) > 1.0)
            throw std::runtime_error("particles: update exceeds the domain size");
        ens.m[k] = std::clamp(ens.m[k] + dm, 0.0, p.m_max);
        ens.c[k] = std::clamp(ens.c[k] + dc, 0.0, 1.0);
    }
    ens.time += dt;
}

void marry_particles(ParticleEnsemble& ens, double rms_m, double tau_f, double dt) {
    if (!(dt / tau_f < 0.5))
        throw std::domain_error("particles: dt/tau_f must stay below 0.5");
    if (rms_m < 1e-12) return; // a spread-less society has nothing to redistribute
    const int n = ens.size();
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, n - 1);
    const double p_marry = dt / tau_f;
    for (int i = 0; i < n; ++i) {
        if (uni(ens.rng) >= p_marry) continue;
        int partner = -1;
        for (int trial = 0; trial < 1000; ++trial) {
            const int j = pick(ens.rng);
            if (j == i) continue;
            if (uni(ens.rng) < std::exp(-std::abs(ens.m[i] - ens.m[j]) / rms_m)) {
                partner = j;
                break;
            }
        }
        if (partner < 0) continue;
        const double mean = 0.5 * (ens.m[i] + ens.m[partner]);
        ens.m[i] = mean;
        ens.m[partner] = mean;
        ens.c[i] = uni(ens.rng);
        ens.c[partner] = uni(ens.rng);
    }
}

namespace {

MomentSet bootstrap_se(const ParticleEnsemble& ens, int samples, std::mt19937_64& rng) {
    const int n = ens.size();
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::vector<double> mm(samples), mc(samples), rm(samples), rc(samples);
    for (int b = 0; b < samples; ++b) {
        double sm = 0.0, sm2 = 0.0, sc = 0.0, sc2 = 0.0;
        for (int k = 0; k < n; ++k) {
            const int id = pick(rng);
            sm += ens.m[id];
            sm2 += ens.m[id] * ens.m[id];
            sc += ens.c[id];
            sc2 += ens.c[id] * ens.c[id];
        }
        mm[b] = sm / n;
        mc[b] = sc / n;
        rm[b] = std::sqrt(std::max(0.0, sm2 / n - mm[b] * mm[b]));
        rc[b] = std::sqrt(std::max(0.0, sc2 / n - mc[b] * mc[b]));
    }
    auto sd = [&](const std::vector<double>& v) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double s = 0.0;
        for (double x : v) s += (x - mean) * (x - mean);
        return std::sqrt(s / (v.size() - 1));
    };
    MomentSet se;
    se.mean_m = sd(mm);
    se.mean_c = sd(mc);
    se.rms_m = sd(rm);
    se.rms_c = sd(rc);
    return se;
}

} // namespace

OracleSeries run_oracle(const PdfField& initial, const ModelParams& p,
                        const OracleConfig& cfg) {
    const Grid& grid = initial.grid;
    ParticleEnsemble ens = sample_from_field(initial, cfg.n_particles, cfg.seed);
    CalibrationState cal;

    std::vector<double> pending = cfg.checkpoints;
    std::sort(pending.begin(), pending.end());

    OracleSeries out;
    auto record = [&](double t) {
        out.t.push_back(t);
        out.moments.push_back(ensemble_moments(ens));
        out.stderr_boot.push_back(bootstrap_se(ens, cfg.bootstrap_samples, ens.rng));
    };
    std::size_t next = 0;
    while (next < pending.size() && pending[next] <= 0.0) {
        record(0.0);
        ++next;
    }

    const int n_steps = static_cast<int>(std::ceil(cfg.t_end / cfg.dt - 1e-12));
    for (int s = 0; s < n_steps; ++s) {
        const MomentSet mom = ensemble_moments(ens);
        cal = ensemble_calibration(ens, grid, cal, p, mom);
        step_particles(ens, cal, mom, p, cfg.dt);
        if (cfg.marriage) marry_particles(ens, mom.rms_m, p.tau_f, cfg.dt);
        while (next < pending.size() && ens.time >= pending[next] - 1e-12) {
            record(ens.time);
            ++next;
        }
    }
    return out;
}

void write_oracle_csv(const OracleSeries& s, const std::string& path) {
    CsvWriter w(path);
    w.header("t,meanM,seMeanM,meanC,seMeanC,rmsM,seRmsM,rmsC,seRmsC");
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        const MomentSet& m = s.moments[k];
        const MomentSet& e = s.stderr_boot[k];
        w.row({s.t[k], m.mean_m, e.mean_m, m.mean_c, e.mean_c,
               m.rms_m, e.rms_m, m.rms_c, e.rms_c});
    }
}

std::vector<MomentCheck> compare_to_pde(const OracleSeries& oracle,
                                        const std::vector<double>& pde_t,
                                        const std::vector<MomentSet>& pde_moments,
                                        double rel_tol, double z_limit) {
    if (pde_t.size() != oracle.t.size())
        throw std::runtime_error("compare: mismatched checkpoint counts");
    std::vector<MomentCheck> checks;
    for (std::size_t k = 0; k < oracle.t.size(); ++k) {
        if (std::abs(pde_t[k] - oracle.t[k]) > 0.05)
            throw std::runtime_error("compare: mismatched checkpoint times");
        const MomentSet& a = pde_moments[k];
        const MomentSet& b = oracle.moments[k];
        const MomentSet& e = oracle.stderr_boot[k];
        auto add = [&](const char* name, double pde, double mc, double se) {
            MomentCheck c;
            c.t = oracle.t[k];
            c.name = name;
            c.pde = pde;
            c.mc = mc;
            c.se = se;
            c.tol = std::max(z_limit * se, rel_tol * std::max(std::abs(pde), std::abs(mc)));
            c.pass = std::abs(pde - mc) <= c.tol;
            checks.push_back(c);
        };
        add("meanM", a.mean_m, b.mean_m, e.mean_m);
        add("meanC", a.mean_c, b.mean_c, e.mean_c);
        add("rmsM", a.rms_m, b.rms_m, e.rms_m);
        add("rmsC", a.rms_c, b.rms_c, e.rms_c);
    }
    return checks;
}

} // namespace socsim
