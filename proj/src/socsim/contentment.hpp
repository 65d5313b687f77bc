#pragma once

#include "socsim/econ.hpp"
#include "socsim/grid.hpp"
#include "socsim/params.hpp"

#include <string>
#include <vector>

namespace socsim {

// Cell-centered drift velocities for one calibration snapshot.
struct RateField {
    Grid grid;
    std::vector<double> u_m; // wealth drift, wealth/year
    std::vector<double> u_c; // contentment drift, 1/year

    RateField() = default;
    explicit RateField(const Grid& g)
        : grid(g), u_m(g.size(), 0.0), u_c(g.size(), 0.0) {}
};

// The seven deterministic contentment terms.  W8 is not here: its mean is
// zero and its autocorrelation becomes the gamma diffusion of the transport
// equation.
double w1_wealth_satisfaction(double m, const MomentSet& mom, const ModelParams& p);
double w2_income_satisfaction(double m, double c, const CalibrationState& cal, const ModelParams& p);
double w3_infrastructure(const CalibrationState& cal, const ModelParams& p);
double w4_neighbourhood(const MomentSet& mom, const ModelParams& p);
double w5_tax_discontent(double m, double c, const CalibrationState& cal, const ModelParams& p);
double w6_inequality(const MomentSet& mom, const ModelParams& p);
double w7_solace(double c, const ModelParams& p);

// Sum of W1..W7 at a point.
double contentment_drift(double m, double c, const CalibrationState& cal,
                         const MomentSet& mom, const ModelParams& p);

// Per-cell sum of W1..W7 on the grid.
std::vector<double> assemble_contentment_drift(const PdfField& field,
                                               const CalibrationState& cal,
                                               const MomentSet& mom,
                                               const ModelParams& p);

// Both drift components on the grid for one step.
RateField compute_rate_field(const Grid& grid, const CalibrationState& cal,
                             const MomentSet& mom, const ModelParams& p);

// Rate-field snapshot: M,C,uM,uC.
void write_rate_field_csv(const RateField& rates, const std::string& path);

} // namespace socsim
