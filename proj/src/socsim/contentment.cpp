#include "socsim/contentment.hpp"
#include "socsim/csv.hpp"

#include <cmath>
#include <stdexcept>

namespace socsim {

double w1_wealth_satisfaction(double m, const MomentSet& mom, const ModelParams& p) {
    return p.k1 * (m - mom.mean_m);
}

double w2_income_satisfaction(double m, double c, const CalibrationState& cal,
                              const ModelParams& p) {
    return p.k2 * (disposable_income(m, c, cal, p) - cal.g);
}

double w3_infrastructure(const CalibrationState& cal, const ModelParams& p) {
    return p.k3_alpha_i * cal.t_t;
}

double w4_neighbourhood(const MomentSet& mom, const ModelParams& p) {
    return p.k4 * (mom.mean_c - 0.5);
}

double w5_tax_discontent(double m, double c, const CalibrationState& cal,
                         const ModelParams& p) {
    return -p.k5 * tax_paid(m, c, cal, p);
}

double w6_inequality(const MomentSet& mom, const ModelParams& p) {
    if (mom.mean_m < 1e-12)
        throw std::runtime_error("w6: degenerate society, mean wealth below 1e-12");
    return -p.k6 * mom.rms_m / mom.mean_m;
}

double w7_solace(double c, const ModelParams& p) {
    const double d = 1.0 - c;
    if (p.beta == 2.0) return p.k7 * d * d;
    return p.k7 * std::pow(d, p.beta);
}

double contentment_drift(double m, double c, const CalibrationState& cal,
                         const MomentSet& mom, const ModelParams& p) {
    return w1_wealth_satisfaction(m, mom, p) + w2_income_satisfaction(m, c, cal, p) +
           w3_infrastructure(cal, p) + w4_neighbourhood(mom, p) +
           w5_tax_discontent(m, c, cal, p) + w6_inequality(mom, p) + w7_solace(c, p);
}

std::vector<double> assemble_contentment_drift(const PdfField& field,
                                               const CalibrationState& cal,
                                               const MomentSet& mom,
                                               const ModelParams& p) {
    const Grid& g = field.grid;
    std::vector<double> u_c(g.size());
    const double constant_terms =
        w3_infrastructure(cal, p) + w4_neighbourhood(mom, p) + w6_inequality(mom, p);
    for (int i = 0; i < g.n_m; ++i) {
        const double m = g.m_centers[i];
        const double w1 = w1_wealth_satisfaction(m, mom, p);
        for (int j = 0; j < g.n_c; ++j) {
            const double c = g.c_centers[j];
            u_c[g.index(i, j)] = w1 + w2_income_satisfaction(m, c, cal, p) +
                                 w5_tax_discontent(m, c, cal, p) + w7_solace(c, p) +
                                 constant_terms;
        }
    }
    return u_c;
}

RateField compute_rate_field(const Grid& grid, const CalibrationState& cal,
                             const MomentSet& mom, const ModelParams& p) {
    RateField rf(grid);
    const double constant_terms =
        w3_infrastructure(cal, p) + w4_neighbourhood(mom, p) + w6_inequality(mom, p);
    for (int i = 0; i < grid.n_m; ++i) {
        const double m = grid.m_centers[i];
        const double w1 = w1_wealth_satisfaction(m, mom, p);
        const double u2 = redistribution_u2(m, cal, p);
        const double tw = wealth_tax_tw(m, p);
        const double u4 = welfare_u4(m, cal.mean_m, cal, p);
        for (int j = 0; j < grid.n_c; ++j) {
            const double c = grid.c_centers[j];
            const double u1 = productivity_u1(m, c, p);
            const double income = (1.0 - p.l_t) * (u1 + u2) - tw;
            const double tax = p.l_t * (u1 + u2) + tw;
            const int id = grid.index(i, j);
            rf.u_m[id] = income + u4;
            rf.u_c[id] = w1 + p.k2 * (income - cal.g) - p.k5 * tax + w7_solace(c, p) +
                         constant_terms;
        }
    }
    return rf;
}

void write_rate_field_csv(const RateField& rates, const std::string& path) {
    CsvWriter w(path);
    w.header("M,C,uM,uC");
    const Grid& g = rates.grid;
    for (int i = 0; i < g.n_m; ++i)
        for (int j = 0; j < g.n_c; ++j) {
            const int id = g.index(i, j);
            w.row({g.m_centers[i], g.c_centers[j], rates.u_m[id], rates.u_c[id]});
        }
}

} // namespace socsim
