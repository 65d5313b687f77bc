#include "socsim/stepper.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace socsim {

double compute_dt(const RateField& rates, const Grid& grid, StepControl& ctl) {
    double max_um = 0.0, max_uc = 0.0;
    for (double v : rates.u_m) max_um = std::max(max_um, std::abs(v));
    for (double v : rates.u_c) max_uc = std::max(max_uc, std::abs(v));
    if (max_um < 1e-15 && max_uc < 1e-15) {
        if (!ctl.stagnation_logged) {
            std::fprintf(stderr, "stepper: stagnant velocity fields, using dt_max\n");
            ctl.stagnation_logged = true;
        }
        return ctl.dt_max;
    }
    const double dt = ctl.cfl_limit / (max_um / grid.dm + max_uc / grid.dc);
    return std::min(dt, ctl.dt_max);
}

LinearSystem assemble_system(const PdfField& field, const RateField& rates,
                             double gamma, double dt,
                             const std::vector<double>* source) {
    const Grid& g = field.grid;
    const int nm = g.n_m, nc = g.n_c, n = g.size();
    if (!(dt > 0.0)) throw std::domain_error("assemble: dt must be positive");
    for (int id = 0; id < n; ++id)
        if (!std::isfinite(rates.u_m[id]) || !std::isfinite(rates.u_c[id]))
            throw std::runtime_error("assemble: malformed rates, non-finite entry");

    LinearSystem sys;
    sys.grid = g;
    sys.diag.assign(n, 1.0);
    sys.west.assign(n, 0.0);
    sys.east.assign(n, 0.0);
    sys.south.assign(n, 0.0);
    sys.north.assign(n, 0.0);
    sys.rhs = field.values;
    if (source) {
        for (int id = 0; id < n; ++id) sys.rhs[id] += dt * (*source)[id];
    }

    const double rm = dt / g.dm, rc = dt / g.dc, rd = dt * gamma / (g.dc * g.dc);
    for (int i = 0; i < nm; ++i) {
        for (int j = 0; j < nc; ++j) {
            const int id = g.index(i, j);
            double d = 1.0;
            if (i + 1 < nm) { // east face in M
                const double uf = 0.5 * (rates.u_m[id] + rates.u_m[id + nc]);
                d += rm * std::max(uf, 0.0);
                sys.east[id] = rm * std::min(uf, 0.0);
            }
            if (i > 0) { // west face
                const double uf = 0.5 * (rates.u_m[id - nc] + rates.u_m[id]);
                d -= rm * std::min(uf, 0.0);
                sys.west[id] = -rm * std::max(uf, 0.0);
            }
            if (j + 1 < nc) { // north face in C
                const double vf = 0.5 * (rates.u_c[id] + rates.u_c[id + 1]);
                d += rc * std::max(vf, 0.0) + rd;
                sys.north[id] = rc * std::min(vf, 0.0) - rd;
            }
            if (j > 0) { // south face
                const double vf = 0.5 * (rates.u_c[id - 1] + rates.u_c[id]);
                d -= rc * std::min(vf, 0.0) - rd;
                sys.south[id] = -rc * std::max(vf, 0.0) - rd;
            }
            sys.diag[id] = d;
        }
    }
    return sys;
}

namespace {

double relative_residual(const LinearSystem& s, const std::vector<double>& x) {
    const Grid& g = s.grid;
    const int nm = g.n_m, nc = g.n_c;
    double rr = 0.0, bb = 0.0;
    for (int i = 0; i < nm; ++i) {
        for (int j = 0; j < nc; ++j) {
            const int id = g.index(i, j);
            double ax = s.diag[id] * x[id];
            if (i > 0) ax += s.west[id] * x[id - nc];
            if (i + 1 < nm) ax += s.east[id] * x[id + nc];
            if (j > 0) ax += s.south[id] * x[id - 1];
            if (j + 1 < nc) ax += s.north[id] * x[id + 1];
            const double r = s.rhs[id] - ax;
            rr += r * r;
            bb += s.rhs[id] * s.rhs[id];
        }
    }
    return bb > 0.0 ? std::sqrt(rr / bb) : std::sqrt(rr);
}

std::vector<double> solve_direct(const LinearSystem& s) {
    const Grid& g = s.grid;
    const int nm = g.n_m, nc = g.n_c, n = g.size();
    Eigen::SparseMatrix<double> A(n, n);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(n) * 5);
    for (int i = 0; i < nm; ++i) {
        for (int j = 0; j < nc; ++j) {
            const int id = g.index(i, j);
            trips.emplace_back(id, id, s.diag[id]);
            if (i > 0) trips.emplace_back(id, id - nc, s.west[id]);
            if (i + 1 < nm) trips.emplace_back(id, id + nc, s.east[id]);
            if (j > 0) trips.emplace_back(id, id - 1, s.south[id]);
            if (j + 1 < nc) trips.emplace_back(id, id + 1, s.north[id]);
        }
    }
    A.setFromTriplets(trips.begin(), trips.end());
    A.makeCompressed();

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve: singular system in direct factorization");
    Eigen::Map<const Eigen::VectorXd> b(s.rhs.data(), n);
    Eigen::VectorXd x = lu.solve(b);
    std::vector<double> out(x.data(), x.data() + n);
    const double res = relative_residual(s, out);
    if (!(res <= 1e-10))
        throw std::runtime_error("solve: direct residual above tolerance");
    return out;
}

// Tridiagonal C-line solves coupled by Gauss-Seidel across M columns,
// alternating sweep direction.  The system is an M-matrix, so the splitting
// converges; contraction follows the M-direction CFL share.
bool solve_lines(const LinearSystem& s, std::vector<double>& x) {
    const Grid& g = s.grid;
    const int nm = g.n_m, nc = g.n_c;
    std::vector<double> cp(nc), dp(nc);

    auto sweep_column = [&](int i) {
        const int base = g.index(i, 0);
        // Thomas on (south, diag, north), rhs minus the M-neighbour terms
        {
            const int id = base;
            double rhs = s.rhs[id];
            if (i > 0) rhs -= s.west[id] * x[id - nc];
            if (i + 1 < nm) rhs -= s.east[id] * x[id + nc];
            cp[0] = s.north[id] / s.diag[id];
            dp[0] = rhs / s.diag[id];
        }
        for (int j = 1; j < nc; ++j) {
            const int id = base + j;
            double rhs = s.rhs[id];
            if (i > 0) rhs -= s.west[id] * x[id - nc];
            if (i + 1 < nm) rhs -= s.east[id] * x[id + nc];
            const double denom = s.diag[id] - s.south[id] * cp[j - 1];
            cp[j] = s.north[id] / denom;
            dp[j] = (rhs - s.south[id] * dp[j - 1]) / denom;
        }
        x[base + nc - 1] = dp[nc - 1];
        for (int j = nc - 2; j >= 0; --j)
            x[base + j] = dp[j] - cp[j] * x[base + j + 1];
    };

    const int max_pairs = 200;
    for (int it = 0; it < max_pairs; ++it) {
        for (int i = 0; i < nm; ++i) sweep_column(i);
        for (int i = nm - 1; i >= 0; --i) sweep_column(i);
        const double res = relative_residual(s, x);
        if (!std::isfinite(res)) return false;
        if (res <= 3e-13) return true;
    }
    return relative_residual(s, x) <= 1e-10;
}

} // namespace

std::vector<double> solve_system(const LinearSystem& sys, SolverBackend backend) {
    if (backend == SolverBackend::direct) return solve_direct(sys);
    std::vector<double> x = sys.rhs; // warm start from the explicit update
    if (solve_lines(sys, x)) return x;
    return solve_direct(sys);
}

StepResult advance_step(PdfField& field, CalibrationState& cal, StepControl& ctl,
                        const ModelParams& params, const MarriageKernelConfig& mcfg,
                        SolverBackend backend) {
    const Grid& g = field.grid;
    StepResult res;

    res.moments = compute_moments(field);

    const WealthView view = make_wealth_view(field, params);
    cal = calibrate_redistribution(view, cal, params);
    cal.mean_m = res.moments.mean_m;
    cal.l4 = compute_l4(cal, params);
    cal.t_t = total_tax_intake(field, cal, params);
    cal.g = good_income(field, cal, params);
    res.u2_neutrality = std::abs(redistribution_mean(view, cal, params)) / view.mean_u1;
    res.cal = cal;

    const RateField rates = compute_rate_field(g, cal, res.moments, params);

    MarriageSource mar;
    const std::vector<double>* src = nullptr;
    if (mcfg.enabled) {
        mar = marriage_source(field, res.moments, mcfg);
        src = &mar.values;
        double s0 = 0.0, s1 = 0.0;
        for (int i = 0; i < g.n_m; ++i) {
            const double m = g.m_centers[i];
            const double* row = mar.values.data() + g.index(i, 0);
            for (int j = 0; j < g.n_c; ++j) {
                s0 += row[j];
                s1 += row[j] * m;
            }
        }
        res.marriage_mass_rate = s0 * g.cell_area();
        res.marriage_mean_rate = s1 * g.cell_area();
        res.marriage_discarded = mar.discarded_gain;
    }

    const double dt = compute_dt(rates, g, ctl);
    ctl.dt_current = dt;
    res.dt = dt;

    const LinearSystem sys = assemble_system(field, rates, params.gamma, dt, src);
    field.values = solve_system(sys, backend);

    res.mass_pre = integrate_2d(field);
    if (std::abs(res.mass_pre - 1.0) > 1e-3)
        throw std::runtime_error("advance_step: mass anomaly, pre-renormalization mass " +
                                 std::to_string(res.mass_pre));

    double clipped = 0.0, lowest = 0.0;
    for (double& v : field.values) {
        if (v < 0.0) {
            lowest = std::min(lowest, v);
            clipped -= v;
            v = 0.0;
        }
    }
    res.min_pre_clip = lowest;
    res.clipped_mass = clipped * g.cell_area();
    if (ctl.renormalize_every_step) renormalize(field);

    ctl.t += dt;
    field.time = ctl.t;
    return res;
}

} // namespace socsim
