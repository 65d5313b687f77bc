#pragma once

#include "socsim/contentment.hpp"
#include "socsim/econ.hpp"
#include "socsim/grid.hpp"
#include "socsim/marriage.hpp"
#include "socsim/params.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace socsim {

// Monte Carlo validation population; every aggregate the drift terms need is
// computed from the ensemble itself.
struct ParticleEnsemble {
    std::vector<double> m;
    std::vector<double> c;
    double time = 0.0;
    std::uint64_t seed = 0;
    std::mt19937_64 rng;

    int size() const { return static_cast<int>(m.size()); }
};

// Draw n particles from the piecewise-constant density of the field.
ParticleEnsemble sample_from_field(const PdfField& field, int n, std::uint64_t seed);

MomentSet ensemble_moments(const ParticleEnsemble& ens);

// Histogram marginal on the grid's wealth bins plus the particle-average
// production, shaped for the common calibration routine.
WealthView ensemble_wealth_view(const ParticleEnsemble& ens, const Grid& grid,
                                const ModelParams& p);

// Calibration and society totals of the current ensemble state.
CalibrationState ensemble_calibration(const ParticleEnsemble& ens, const Grid& grid,
                                      const CalibrationState& warm, const ModelParams& p,
                                      const MomentSet& mom);

// Euler-Maruyama update of every particle with the frozen aggregates;
// positions are clamped to the domain.
void step_particles(ParticleEnsemble& ens, const CalibrationState& cal,
                    const MomentSet& mom, const ModelParams& p, double dt);

// Random marriages: each particle with probability dt/tau_f, partner accepted
// with weight exp(-|dM|/rms); both move to the pair mean wealth and draw a
// uniform contentment.
void marry_particles(ParticleEnsemble& ens, double rms_m, double tau_f, double dt);

// ---- oracle driver ----------------------------------------------------------

struct OracleConfig {
    int n_particles = 200000;
    std::uint64_t seed = 1;
    double dt = 0.005;
    double t_end = 10.0;
    std::vector<double> checkpoints{1.0, 5.0, 10.0};
    bool marriage = false;
    int bootstrap_samples = 200;
};

struct OracleSeries {
    std::vector<double> t;
    std::vector<MomentSet> moments;
    std::vector<MomentSet> stderr_boot; // bootstrap standard errors
};

OracleSeries run_oracle(const PdfField& initial, const ModelParams& p,
                        const OracleConfig& cfg);

void write_oracle_csv(const OracleSeries& s, const std::string& path);

// ---- pde cross-validation ---------------------------------------------------

struct MomentCheck {
    double t = 0.0;
    std::string name;
    double pde = 0.0, mc = 0.0, se = 0.0, tol = 0.0;
    bool pass = false;
};

// Per checkpoint and moment: |pde - mc| <= max(z_limit * SE, rel_tol * scale).
// Throws on mismatched checkpoint times.
std::vector<MomentCheck> compare_to_pde(const OracleSeries& oracle,
                                        const std::vector<double>& pde_t,
                                        const std::vector<MomentSet>& pde_moments,
                                        double rel_tol = 0.02, double z_limit = 3.0);

} // namespace socsim
