#pragma once

#include "socsim/contentment.hpp"
#include "socsim/econ.hpp"
#include "socsim/grid.hpp"
#include "socsim/marriage.hpp"
#include "socsim/params.hpp"

#include <vector>

namespace socsim {

// Structured pentadiagonal system (I + dt A) x = rhs from the control-volume
// discretization; neighbours are west/east in M and south/north in C.
struct LinearSystem {
    Grid grid;
    std::vector<double> diag, west, east, south, north;
    std::vector<double> rhs;
};

struct StepControl {
    double cfl_limit = 0.8;
    double dt_max = 0.25;
    double dt_current = 0.0;
    double t = 0.0;
    bool renormalize_every_step = true;
    bool stagnation_logged = false;
};

enum class SolverBackend { line_implicit, direct };

// Advective CFL time step: cfl / (max|uM|/dm + max|uC|/dc), capped at dt_max.
// The scheme is implicit, so this limit governs accuracy, not stability.
double compute_dt(const RateField& rates, const Grid& grid, StepControl& ctl);

// Implicit upwind advection in M and C, central diffusion gamma in C, zero
// total flux through all four boundaries; optional explicit source on the rhs.
LinearSystem assemble_system(const PdfField& field, const RateField& rates,
                             double gamma, double dt,
                             const std::vector<double>* source);

// Solves to relative residual <= 1e-10.  The line backend sweeps tridiagonal
// C-lines with alternating Gauss-Seidel coupling in M and falls back to the
// sparse direct factorization if it stalls.
std::vector<double> solve_system(const LinearSystem& sys, SolverBackend backend);

struct StepResult {
    double dt = 0.0;
    double mass_pre = 0.0;          // mass after the solve, before renormalization
    double clipped_mass = 0.0;      // negative mass removed by clipping
    double min_pre_clip = 0.0;      // most negative solver output
    double marriage_mass_rate = 0.0; // integral of I_f
    double marriage_mean_rate = 0.0; // integral of M I_f
    double marriage_discarded = 0.0;
    double u2_neutrality = 0.0;     // |<U2>| / <U1>
    MomentSet moments;              // moments the step was computed from
    CalibrationState cal;           // calibration used for the step
};

// One full step: moments, calibration, rates, marriage source, dt, solve,
// clip and renormalize.  Mutates field, cal and ctl.
StepResult advance_step(PdfField& field, CalibrationState& cal, StepControl& ctl,
                        const ModelParams& params, const MarriageKernelConfig& mcfg,
                        SolverBackend backend = SolverBackend::line_implicit);

} // namespace socsim
