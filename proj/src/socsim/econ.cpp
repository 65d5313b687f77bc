#include "socsim/econ.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace socsim {

namespace {

// pow with fast paths for the exponents the model actually uses
inline double pow_fast(double x, double a) {
    if (a == 1.0) return x;
    if (a == 2.0) return x * x;
    if (a == 3.0) return x * x * x;
    if (a == 0.5) return std::sqrt(x);
    if (a == 1.0 / 3.0) return std::cbrt(x);
    return std::pow(x, a);
}

} // namespace

double productivity_u1(double m, double c, const ModelParams& p) {
    return p.l1 * pow_fast(c, p.alpha_p1) * pow_fast(m, p.alpha_p2) *
           pow_fast(p.m_max - m, p.alpha_p3);
}

double calibrate_l1(const ModelParams& p) {
    if (!(p.m_max > 1.0))
        throw std::domain_error("calibrate_l1: m_max must exceed the average wealth 1");
    return p.target_mean_productivity / pow_fast(p.m_max - 1.0, p.alpha_p3);
}

double redistribution_u2(double m, const CalibrationState& cal, const ModelParams& p) {
    (void)p;
    return cal.l2 * std::expm1((m - cal.m_star) / cal.m_s);
}

double wealth_tax_tw(double m, const ModelParams& p) {
    if (m <= p.m_w) return 0.0;
    return p.l3 * std::exp(p.tw_scale() * (m - p.m_w) * (p.m_max - m));
}

double welfare_u4(double m, double mean_m, const CalibrationState& cal, const ModelParams& p) {
    if (m >= mean_m) return 0.0;
    return cal.l4 * pow_fast(1.0 - m / mean_m, p.alpha_w);
}

double compute_l4(const CalibrationState& cal, const ModelParams& p) {
    // exact negation of the net-of-tax redistribution drain at M = 0
    return -(1.0 - p.l_t) * (cal.l2 * std::expm1((0.0 - cal.m_star) / cal.m_s));
}

double tax_paid(double m, double c, const CalibrationState& cal, const ModelParams& p) {
    return p.l_t * (productivity_u1(m, c, p) + redistribution_u2(m, cal, p)) +
           wealth_tax_tw(m, p);
}

double disposable_income(double m, double c, const CalibrationState& cal, const ModelParams& p) {
    return (1.0 - p.l_t) * (productivity_u1(m, c, p) + redistribution_u2(m, cal, p)) -
           wealth_tax_tw(m, p);
}

double wealth_drift(double m, double c, const CalibrationState& cal, const ModelParams& p) {
    return disposable_income(m, c, cal, p) + welfare_u4(m, cal.mean_m, cal, p);
}

// ---- calibration ------------------------------------------------------------

WealthView make_wealth_view(const PdfField& field, const ModelParams& p) {
    const Grid& g = field.grid;
    WealthView view;
    view.m = g.m_centers;
    view.w.assign(g.n_m, 0.0);

    // per-axis factors of U1 keep the joint average a single pass
    std::vector<double> u1_m(g.n_m), u1_c(g.n_c);
    for (int i = 0; i < g.n_m; ++i)
        u1_m[i] = pow_fast(g.m_centers[i], p.alpha_p2) *
                  pow_fast(p.m_max - g.m_centers[i], p.alpha_p3);
    for (int j = 0; j < g.n_c; ++j)
        u1_c[j] = pow_fast(g.c_centers[j], p.alpha_p1);

    double total = 0.0, su1 = 0.0;
    for (int i = 0; i < g.n_m; ++i) {
        const double* row = field.values.data() + g.index(i, 0);
        double row_sum = 0.0, row_u1 = 0.0;
        for (int j = 0; j < g.n_c; ++j) {
            row_sum += row[j];
            row_u1 += row[j] * u1_c[j];
        }
        view.w[i] = row_sum;
        su1 += row_u1 * u1_m[i];
        total += row_sum;
    }
    if (total <= 0.0) throw std::runtime_error("wealth view: empty field");
    for (double& w : view.w) w /= total;
    view.mean_u1 = p.l1 * su1 / total;
    return view;
}

double solve_m_star(const std::vector<double>& m, const std::vector<double>& w, double m_s) {
    if (!(m_s > 0.0)) throw std::domain_error("solve_m_star: m_s must be positive");
    double m_top = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k)
        if (w[k] > 0.0) m_top = std::max(m_top, m[k]);
    double s = 0.0;
    for (std::size_t k = 0; k < m.size(); ++k)
        if (w[k] > 0.0) s += w[k] * std::exp((m[k] - m_top) / m_s);
    return m_top + m_s * std::log(s);
}

double solve_m_star(const WealthView& view, double m_s) {
    return solve_m_star(view.m, view.w, m_s);
}

double redistribution_mean(const WealthView& view, const CalibrationState& cal,
                           const ModelParams& p) {
    (void)p;
    double s = 0.0;
    for (std::size_t k = 0; k < view.m.size(); ++k)
        if (view.w[k] > 0.0)
            s += view.w[k] * std::expm1((view.m[k] - cal.m_star) / cal.m_s);
    return cal.l2 * s;
}

namespace {

// <max(exp((M - m_star)/m_s) - 1, 0)>, evaluated in log space so the top bins
// cannot overflow even when m_s is tiny
double positive_part_mean(const WealthView& v, double m_star, double m_s) {
    double s = 0.0;
    for (std::size_t k = 0; k < v.m.size(); ++k) {
        if (v.w[k] <= 0.0 || v.m[k] <= m_star) continue;
        const double x = (v.m[k] - m_star) / m_s;
        if (x > 500.0)
            s += std::exp(std::log(v.w[k]) + x) - v.w[k];
        else
            s += v.w[k] * std::expm1(x);
    }
    return s;
}

struct Residuals {
    double a = 0.0;
    double b = 0.0;
    double m_star = 0.0;
};

// closed form for l2 from the top-growth constraint at fixed m_s
double l2_from_constraint_a(double m_s, double m_star, const ModelParams& p) {
    const double rhs = p.target_top_growth * p.m_max + p.l3;
    const double x = std::min((p.m_max - m_star) / m_s, 600.0);
    return rhs / ((1.0 - p.l_t) * std::expm1(x));
}

Residuals eval_residuals(double l2, double m_s, const WealthView& v, const ModelParams& p) {
    Residuals r;
    r.m_star = solve_m_star(v, m_s);
    const double rhs_a = p.target_top_growth * p.m_max;
    const double x = std::min((p.m_max - r.m_star) / m_s, 600.0);
    const double lhs_a = (1.0 - p.l_t) * l2 * std::expm1(x) - p.l3;
    r.a = (lhs_a - rhs_a) / rhs_a;
    const double alienated = l2 * positive_part_mean(v, r.m_star, m_s) / v.mean_u1;
    r.b = (alienated - p.target_alienated_fraction) / p.target_alienated_fraction;
    return r;
}

} // namespace

CalibrationState calibrate_redistribution(const WealthView& view,
                                          const CalibrationState& warm,
                                          const ModelParams& p) {
    CalibrationState cal = warm;
    const double tol = 1e-6;

    if (p.target_alienated_fraction == 0.0) {
        // only l2 = 0 satisfies the alienation constraint, which leaves the
        // top-growth constraint unsatisfiable unless its target is -l3/m_max
        if (std::abs(p.target_top_growth * p.m_max + p.l3) > 0.0)
            throw CalibrationError(
                "calibration: infeasible, zero alienation target with nonzero top growth");
        cal.l2 = 0.0;
        cal.m_star = solve_m_star(view, cal.m_s);
        cal.residual_a = cal.residual_b = 0.0;
        return cal;
    }

    if (view.mean_u1 < 1e-12)
        throw CalibrationError("calibration: infeasible, mean productivity below 1e-12");

    double l2 = std::max(warm.l2, 1e-12);
    double m_s = std::clamp(warm.m_s, 1e-3, 1e6);
    Residuals r = eval_residuals(l2, m_s, view, p);
    int iters = 0;

    // damped Newton on (log l2, log m_s) with a finite-difference Jacobian
    for (; iters < 120; ++iters) {
        if (std::max(std::abs(r.a), std::abs(r.b)) <= tol) break;
        const double eps = 1e-7;
        const Residuals r1 = eval_residuals(l2 * std::exp(eps), m_s, view, p);
        const Residuals r2 = eval_residuals(l2, m_s * std::exp(eps), view, p);
        const double j11 = (r1.a - r.a) / eps, j12 = (r2.a - r.a) / eps;
        const double j21 = (r1.b - r.b) / eps, j22 = (r2.b - r.b) / eps;
        const double det = j11 * j22 - j12 * j21;
        if (!std::isfinite(det) || std::abs(det) < 1e-300) break;
        const double dx = -(j22 * r.a - j12 * r.b) / det;
        const double dy = -(-j21 * r.a + j11 * r.b) / det;

        const double norm0 = std::max(std::abs(r.a), std::abs(r.b));
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 10; ++k, lambda *= 0.5) {
            const double l2_try = l2 * std::exp(std::clamp(lambda * dx, -5.0, 5.0));
            const double ms_try = std::clamp(m_s * std::exp(std::clamp(lambda * dy, -5.0, 5.0)),
                                             1e-3, 1e6);
            const Residuals rt = eval_residuals(l2_try, ms_try, view, p);
            if (std::isfinite(rt.a) && std::isfinite(rt.b) &&
                std::max(std::abs(rt.a), std::abs(rt.b)) < norm0) {
                l2 = l2_try; m_s = ms_try; r = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }

    if (std::max(std::abs(r.a), std::abs(r.b)) > tol) {
        // fallback: constraint (a) is closed form in l2, bisect (b) on m_s
        double lo = 1e-3, hi = 1e6;
        auto rb = [&](double ms) {
            const double mstar = solve_m_star(view, ms);
            const double l2c = l2_from_constraint_a(ms, mstar, p);
            return (l2c * positive_part_mean(view, mstar, ms) / view.mean_u1 -
                    p.target_alienated_fraction) / p.target_alienated_fraction;
        };
        double flo = rb(lo), fhi = rb(hi);
        if (flo * fhi > 0.0) {
            // scan for a sign change on a log grid before giving up
            bool bracketed = false;
            double prev = lo, fprev = flo;
            for (double ms = lo * 2.0; ms <= hi; ms *= 2.0) {
                const double f = rb(ms);
                if (std::isfinite(f) && fprev * f <= 0.0) {
                    lo = prev; flo = fprev; hi = ms; fhi = f;
                    bracketed = true;
                    break;
                }
                prev = ms; fprev = f;
            }
            if (!bracketed) {
                char msg[160];
                std::snprintf(msg, sizeof(msg),
                              "calibration: no convergence, residuals a=%.3e b=%.3e",
                              r.a, r.b);
                throw CalibrationError(msg);
            }
        }
        for (; iters < 200; ++iters) {
            const double mid = std::sqrt(lo * hi);
            const double f = rb(mid);
            if (std::abs(f) <= tol || (hi - lo) < 1e-14 * hi) {
                m_s = mid;
                const double mstar = solve_m_star(view, m_s);
                l2 = l2_from_constraint_a(m_s, mstar, p);
                r = eval_residuals(l2, m_s, view, p);
                break;
            }
            if (flo * f <= 0.0) { hi = mid; fhi = f; }
            else { lo = mid; flo = f; }
        }
        if (std::max(std::abs(r.a), std::abs(r.b)) > tol) {
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "calibration: no convergence after 200 iterations, "
                          "residuals a=%.3e b=%.3e", r.a, r.b);
            throw CalibrationError(msg);
        }
    }

    cal.l2 = l2;
    cal.m_s = m_s;
    cal.m_star = r.m_star;
    cal.residual_a = r.a;
    cal.residual_b = r.b;
    cal.iterations = iters;
    return cal;
}

CalibrationState calibrate_redistribution(const PdfField& field,
                                          const CalibrationState& warm,
                                          const ModelParams& p) {
    return calibrate_redistribution(make_wealth_view(field, p), warm, p);
}

double total_tax_intake(const PdfField& field, const CalibrationState& cal,
                        const ModelParams& p) {
    const Grid& g = field.grid;
    double s = 0.0;
    for (int i = 0; i < g.n_m; ++i) {
        const double m = g.m_centers[i];
        const double u2 = redistribution_u2(m, cal, p);
        const double tw = wealth_tax_tw(m, p);
        const double mshape = pow_fast(m, p.alpha_p2) * pow_fast(p.m_max - m, p.alpha_p3);
        const double* row = field.values.data() + g.index(i, 0);
        for (int j = 0; j < g.n_c; ++j) {
            const double u1 = p.l1 * pow_fast(g.c_centers[j], p.alpha_p1) * mshape;
            s += row[j] * (p.l_t * (u1 + u2) + tw);
        }
    }
    return s * g.cell_area();
}

double good_income(const PdfField& field, const CalibrationState& cal, const ModelParams& p) {
    const Grid& g = field.grid;
    double s = 0.0;
    for (int i = 0; i < g.n_m; ++i) {
        const double m = g.m_centers[i];
        const double u2 = redistribution_u2(m, cal, p);
        const double tw = wealth_tax_tw(m, p);
        const double u4 = welfare_u4(m, cal.mean_m, cal, p);
        const double mshape = pow_fast(m, p.alpha_p2) * pow_fast(p.m_max - m, p.alpha_p3);
        const double* row = field.values.data() + g.index(i, 0);
        for (int j = 0; j < g.n_c; ++j) {
            const double u1 = p.l1 * pow_fast(g.c_centers[j], p.alpha_p1) * mshape;
            s += row[j] * ((1.0 - p.l_t) * (u1 + u2) - tw + u4);
        }
    }
    return s * g.cell_area();
}

} // namespace socsim
