#include "socsim/grid.hpp"
#include "socsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace socsim {

void Grid::init() {
    if (n_m < 16 || n_c < 16)
        throw std::domain_error("grid: need at least 16 cells per direction");
    if (!(m_max > 0.0))
        throw std::domain_error("grid: m_max must be positive");
    dm = m_max / n_m;
    dc = 1.0 / n_c;
    m_centers.resize(n_m);
    c_centers.resize(n_c);
    for (int i = 0; i < n_m; ++i) m_centers[i] = (i + 0.5) * dm;
    for (int j = 0; j < n_c; ++j) c_centers[j] = (j + 0.5) * dc;
}

double simpson_uniform(std::span<const double> values, double h) {
    const int n = static_cast<int>(values.size());
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (values[0] + values[1]);
    const int intervals = n - 1;
    double total = 0.0;
    int last = intervals;
    if (intervals % 2 != 0) {
        // close with a 3/8 panel over the final three intervals
        last = intervals - 3;
        const double* v = values.data() + last;
        total += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
    }
    for (int k = 0; k + 2 <= last; k += 2)
        total += h / 3.0 * (values[k] + 4.0 * values[k + 1] + values[k + 2]);
    return total;
}

double integrate_2d(const PdfField& field) {
    double s = 0.0;
    for (double v : field.values) s += v;
    return s * field.grid.cell_area();
}

std::vector<double> marginal_wealth(const PdfField& field) {
    const Grid& g = field.grid;
    std::vector<double> out(g.n_m, 0.0);
    for (int i = 0; i < g.n_m; ++i) {
        double s = 0.0;
        const double* row = field.values.data() + g.index(i, 0);
        for (int j = 0; j < g.n_c; ++j) s += row[j];
        out[i] = s * g.dc;
    }
    return out;
}

std::vector<double> marginal_contentment(const PdfField& field) {
    const Grid& g = field.grid;
    std::vector<double> out(g.n_c, 0.0);
    for (int i = 0; i < g.n_m; ++i) {
        const double* row = field.values.data() + g.index(i, 0);
        for (int j = 0; j < g.n_c; ++j) out[j] += row[j];
    }
    for (double& v : out) v *= g.dm;
    return out;
}

MomentSet compute_moments(const PdfField& field) {
    const Grid& g = field.grid;
    const double mass = integrate_2d(field);
    if (mass < 1e-12)
        throw std::runtime_error("moments: degenerate field, integral < 1e-12");

    double sm = 0.0, sm2 = 0.0, sc = 0.0, sc2 = 0.0;
    for (int i = 0; i < g.n_m; ++i) {
        const double m = g.m_centers[i];
        double row_sum = 0.0;
        const double* row = field.values.data() + g.index(i, 0);
        for (int j = 0; j < g.n_c; ++j) {
            const double w = row[j];
            row_sum += w;
            const double c = g.c_centers[j];
            sc += w * c;
            sc2 += w * c * c;
        }
        sm += row_sum * m;
        sm2 += row_sum * m * m;
    }
    const double norm = g.cell_area() / mass;
    sm *= norm; sm2 *= norm; sc *= norm; sc2 *= norm;

    MomentSet mom;
    mom.mean_m = sm;
    mom.mean_c = sc;
    mom.rms_m = std::sqrt(std::max(0.0, sm2 - sm * sm));
    mom.rms_c = std::sqrt(std::max(0.0, sc2 - sc * sc));
    return mom;
}

double renormalize(PdfField& field) {
    const double mass = integrate_2d(field);
    if (mass < 1e-300)
        throw std::runtime_error("renormalize: field has no mass");
    const double inv = 1.0 / mass;
    for (double& v : field.values) v *= inv;
    return mass;
}

namespace {

PdfField eval_gaussian_product(const Grid& g, double mu_m, double sig_m,
                               double mu_c, double sig_c) {
    PdfField f(g);
    std::vector<double> gm(g.n_m), gc(g.n_c);
    for (int i = 0; i < g.n_m; ++i) {
        const double x = (g.m_centers[i] - mu_m) / sig_m;
        gm[i] = std::exp(-0.5 * x * x);
    }
    for (int j = 0; j < g.n_c; ++j) {
        const double x = (g.c_centers[j] - mu_c) / sig_c;
        gc[j] = std::exp(-0.5 * x * x);
    }
    for (int i = 0; i < g.n_m; ++i)
        for (int j = 0; j < g.n_c; ++j)
            f.at(i, j) = gm[i] * gc[j];
    renormalize(f);
    return f;
}

} // namespace

PdfField build_initial_condition(const Grid& grid, double mean_m, double rms_m,
                                 double mean_c, double rms_c) {
    if (!(mean_m > 0.0 && mean_m < grid.m_max))
        throw std::domain_error("initial condition: mean_m outside (0, m_max)");
    if (!(mean_c > 0.0 && mean_c < 1.0))
        throw std::domain_error("initial condition: mean_c outside (0, 1)");
    if (!(rms_m > 0.0 && rms_c > 0.0))
        throw std::domain_error("initial condition: rms values must be positive");

    double mu_m = mean_m, sig_m = rms_m, mu_c = mean_c, sig_c = rms_c;
    PdfField f = eval_gaussian_product(grid, mu_m, sig_m, mu_c, sig_c);

    // Clipping at the domain boundary shifts the moments; walk the underlying
    // parameters until the realised moments match the request.  Spreads below
    // the cell scale cannot be adjusted on the grid and are left as evaluated.
    const bool fit_m = rms_m > 0.75 * grid.dm;
    const bool fit_c = rms_c > 0.75 * grid.dc;
    const double sig_cap = 100.0 * std::max(grid.m_max, 1.0);
    for (int it = 0; it < 80 && (fit_m || fit_c); ++it) {
        const MomentSet mom = compute_moments(f);
        double err = 0.0;
        if (fit_m) {
            mu_m += mean_m - mom.mean_m;
            sig_m *= std::clamp(rms_m / std::max(mom.rms_m, 1e-12), 0.5, 2.0);
            sig_m = std::min(sig_m, sig_cap);
            mu_m = std::clamp(mu_m, -grid.m_max, 2.0 * grid.m_max);
            err = std::max(err, std::abs(mom.mean_m - mean_m) / mean_m);
            err = std::max(err, std::abs(mom.rms_m - rms_m) / rms_m);
            if (sig_m >= sig_cap) err = 0.0; // unreachable spread, keep the cap
        }
        if (fit_c) {
            mu_c += mean_c - mom.mean_c;
            sig_c *= std::clamp(rms_c / std::max(mom.rms_c, 1e-12), 0.5, 2.0);
            sig_c = std::min(sig_c, sig_cap);
            mu_c = std::clamp(mu_c, -1.0, 2.0);
            err = std::max(err, std::abs(mom.mean_c - mean_c) / mean_c);
            err = std::max(err, std::abs(mom.rms_c - rms_c) / rms_c);
            if (sig_c >= sig_cap) err = 0.0;
        }
        if (err < 1e-10) break;
        f = eval_gaussian_product(grid, mu_m, sig_m, mu_c, sig_c);
    }
    f.time = 0.0;
    return f;
}

void write_snapshot_csv(const PdfField& field, const std::string& path) {
    CsvWriter w(path);
    w.header("M,C,P");
    const Grid& g = field.grid;
    for (int i = 0; i < g.n_m; ++i)
        for (int j = 0; j < g.n_c; ++j)
            w.row({g.m_centers[i], g.c_centers[j], field.at(i, j)});
}

PdfField read_snapshot_csv(const std::string& path, const Grid& grid) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("M,C,P", 0) != 0)
        throw std::runtime_error("bad snapshot header in " + path);
    PdfField f(grid);
    for (int i = 0; i < grid.n_m; ++i)
        for (int j = 0; j < grid.n_c; ++j) {
            if (!std::getline(in, line))
                throw std::runtime_error("truncated snapshot: " + path);
            const auto c1 = line.find(',');
            const auto c2 = line.find(',', c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos)
                throw std::runtime_error("bad snapshot row: " + line);
            f.at(i, j) = std::stod(line.substr(c2 + 1));
        }
    return f;
}

} // namespace socsim
