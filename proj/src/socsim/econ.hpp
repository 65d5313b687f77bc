#pragma once

#include "socsim/grid.hpp"
#include "socsim/params.hpp"

#include <stdexcept>
#include <vector>

namespace socsim {

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---- pointwise wealth rates ------------------------------------------------
// All rates are wealth per year at a single (M, C) point.

// Productivity: L1 * C^a1 * M^a2 * (m_max - M)^a3.
double productivity_u1(double m, double c, const ModelParams& p);

// Fixes l1 so that productivity_u1(1, 1) equals the mean-productivity target.
double calibrate_l1(const ModelParams& p);

// Redistribution towards the elites: L2 * (exp((M - M*)/Ms) - 1).
double redistribution_u2(double m, const CalibrationState& cal, const ModelParams& p);

// Wealth tax: 0 up to m_w, then L3 * exp(s (M - m_w)(m_max - M)).
double wealth_tax_tw(double m, const ModelParams& p);

// Welfare: L4 * (1 - M/<M>)^alpha_w below the mean, 0 above.
double welfare_u4(double m, double mean_m, const CalibrationState& cal, const ModelParams& p);

// Welfare amplitude closing the net drift to zero at M = 0.
double compute_l4(const CalibrationState& cal, const ModelParams& p);

// Income plus wealth tax paid per year: L_T (U1 + U2) + T_w.
double tax_paid(double m, double c, const CalibrationState& cal, const ModelParams& p);

// Disposable income: (1 - L_T)(U1 + U2) - T_w.
double disposable_income(double m, double c, const CalibrationState& cal, const ModelParams& p);

// Total drift dM/dt = (1 - L_T)(U1 + U2) - T_w + U4.  Exactly zero at M = 0.
double wealth_drift(double m, double c, const CalibrationState& cal, const ModelParams& p);

// ---- self-consistent calibration -------------------------------------------

// Weighted wealth samples (weights sum to 1) plus the production average;
// the common face of the pdf marginal and the particle histogram.
struct WealthView {
    std::vector<double> m;
    std::vector<double> w;
    double mean_u1 = 0.0; // <U1> over the joint distribution
};

WealthView make_wealth_view(const PdfField& field, const ModelParams& p);

// Zero crossing of U2 from the log-mean-exp identity; max-shifted so any
// m/m_s ratio is safe.
double solve_m_star(const WealthView& view, double m_s);
double solve_m_star(const std::vector<double>& m, const std::vector<double>& w, double m_s);

// Finds (l2, m_s, m_star) satisfying the top-growth and alienated-fraction
// constraints to relative residual 1e-6.  Damped Newton on (log l2, log m_s)
// warm-started from `warm`, with a nested 1d bisection fallback.  Throws
// CalibrationError on no convergence after 200 iterations or an infeasible
// target set.
CalibrationState calibrate_redistribution(const WealthView& view,
                                          const CalibrationState& warm,
                                          const ModelParams& p);
CalibrationState calibrate_redistribution(const PdfField& field,
                                          const CalibrationState& warm,
                                          const ModelParams& p);

// Society totals over the joint density.
double total_tax_intake(const PdfField& field, const CalibrationState& cal, const ModelParams& p);
double good_income(const PdfField& field, const CalibrationState& cal, const ModelParams& p);

// <U2> against the view; diagnostics for the mean-neutrality identity.
double redistribution_mean(const WealthView& view, const CalibrationState& cal, const ModelParams& p);

} // namespace socsim
