#pragma once

#include <cmath>
#include <stdexcept>

namespace socsim {

// Fixed rate constants of the model.  Units: reciprocal years for the K's,
// wealth/year for the L's; wealth is measured in halves of the initial
// average household wealth.
struct ModelParams {
    // contentment rates
    double k1 = 0.1;          // satisfaction with own wealth
    double k2 = 0.15;         // satisfaction with income
    double k3_alpha_i = 0.05; // infrastructure: product of rate and budget fraction
    double k4 = 0.1;          // neighbourhood quality (no established value; see config)
    double k5 = 0.5;          // discontent with taxes
    double k6 = 0.1;          // discontent with inequality
    double k7 = 0.15;         // solace
    double beta = 2.0;        // solace exponent, > 1
    double gamma = 0.11;      // variance of short-time random contentment events

    // wealth rates
    double m_max = 12.0;
    double l1 = 0.0;          // productivity amplitude, set by calibrate_l1
    double alpha_p1 = 1.0 / 3.0;
    double alpha_p2 = 1.0;
    double alpha_p3 = 3.0;
    double l_t = 0.5;         // flat income-tax rate
    double l3 = 0.02;         // wealth-tax amplitude (sweep variable)
    double m_w = 2.5;         // wealth-tax threshold
    double alpha_w = 0.5;     // welfare taper exponent
    double tau_f = 80.0;      // years per marriage

    // wealth tax exponent scale; <= 0 means 1/(m_max - m_w)^2, 1 gives the
    // unbounded raw form (unusable for production runs, kept for experiments)
    double tw_exponent_scale = -1.0;

    // calibration targets
    double target_top_growth = 0.12;          // yearly, at M = m_max, net of tax
    double target_alienated_fraction = 0.22;  // redistributed share of production
    double target_mean_productivity = 0.2;    // U1 at M = 1, C = 1

    double tw_scale() const {
        if (tw_exponent_scale > 0.0) return tw_exponent_scale;
        const double w = m_max - m_w;
        return 1.0 / (w * w);
    }

    void validate() const {
        if (!(k1 >= 0 && k2 >= 0 && k3_alpha_i >= 0 && k4 >= 0 && k5 >= 0 &&
              k6 >= 0 && k7 >= 0))
            throw std::domain_error("params: rate constants must be >= 0");
        if (!(beta > 1.0)) throw std::domain_error("params: beta must be > 1");
        if (!(gamma >= 0.0)) throw std::domain_error("params: gamma must be >= 0");
        if (!(l_t > 0.0 && l_t < 1.0)) throw std::domain_error("params: l_t must be in (0,1)");
        if (!(m_w > 0.0 && m_w < m_max)) throw std::domain_error("params: m_w must be in (0,m_max)");
        if (!(tau_f > 0.0)) throw std::domain_error("params: tau_f must be > 0");
        if (!(l3 >= 0.0)) throw std::domain_error("params: l3 must be >= 0");
    }
};

// Society-level quantities recomputed self-consistently every step.
struct CalibrationState {
    double l2 = 0.2;     // redistribution amplitude
    double m_s = 2.5;    // redistribution scale
    double m_star = 1.0; // zero crossing of the redistribution term
    double l4 = 0.0;     // welfare amplitude
    double g = 0.0;      // "good income": society-average wealth growth
    double t_t = 0.0;    // total tax intake
    double mean_m = 1.0; // society mean wealth the snapshot was computed at

    double residual_a = 0.0; // top-growth constraint, relative
    double residual_b = 0.0; // alienated-fraction constraint, relative
    int iterations = 0;
};

} // namespace socsim
