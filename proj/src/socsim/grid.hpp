#pragma once

#include <span>
#include <string>
#include <vector>

namespace socsim {

// Uniform cell-centered grid over [0, m_max] x [0, 1].
struct Grid {
    double m_max = 12.0;
    int n_m = 240;
    int n_c = 120;
    double dm = 0.0;
    double dc = 0.0;
    std::vector<double> m_centers;
    std::vector<double> c_centers;

    Grid() { init(); }
    Grid(double m_max_, int n_m_, int n_c_) : m_max(m_max_), n_m(n_m_), n_c(n_c_) { init(); }

    int size() const { return n_m * n_c; }
    int index(int i, int j) const { return i * n_c + j; }
    double cell_area() const { return dm * dc; }

    bool same_layout(const Grid& o) const {
        return n_m == o.n_m && n_c == o.n_c && m_max == o.m_max;
    }

private:
    void init();
};

// Discrete joint density P(M, C); values are cell averages.
struct PdfField {
    Grid grid;
    std::vector<double> values; // row-major, M outer, C inner
    double time = 0.0;

    PdfField() : values(grid.size(), 0.0) {}
    explicit PdfField(const Grid& g) : grid(g), values(g.size(), 0.0) {}

    double& at(int i, int j) { return values[grid.index(i, j)]; }
    double at(int i, int j) const { return values[grid.index(i, j)]; }
};

struct MomentSet {
    double mean_m = 0.0;
    double mean_c = 0.0;
    double rms_m = 0.0; // centered root-mean-square
    double rms_c = 0.0;
};

// ---- quadrature -----------------------------------------------------------

// Composite Simpson for uniformly spaced nodal samples (panel edges included).
// Odd interval counts close with a 3/8 panel; a single interval falls back to
// the trapezoid rule.
double simpson_uniform(std::span<const double> values, double h);

// Integral of the piecewise-constant finite-volume reconstruction.  This is
// the functional the zero-flux update conserves exactly, so normalisation and
// all field moments are defined against it.
double integrate_2d(const PdfField& field);

// Marginal over C: one value per M cell, P(M) = sum_j P(M,C_j) dc.
std::vector<double> marginal_wealth(const PdfField& field);
// Marginal over M.
std::vector<double> marginal_contentment(const PdfField& field);

// Mean and centered rms of both coordinates.  Throws on a degenerate field
// (integral below 1e-12).
MomentSet compute_moments(const PdfField& field);

// Scale values so integrate_2d == 1.  Returns the mass before scaling.
double renormalize(PdfField& field);

// Clipped product-Gaussian initial condition.  The underlying Gaussian
// parameters are adjusted so that the clipped, renormalised field reproduces
// the requested moments; for spreads irresolvable on the grid the raw
// parameters are kept.
PdfField build_initial_condition(const Grid& grid, double mean_m, double rms_m,
                                 double mean_c, double rms_c);

// ---- snapshot io ----------------------------------------------------------

void write_snapshot_csv(const PdfField& field, const std::string& path);
PdfField read_snapshot_csv(const std::string& path, const Grid& grid);

} // namespace socsim
