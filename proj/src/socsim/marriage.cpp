#include "socsim/marriage.hpp"
#include "socsim/csv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace socsim {

double weight_f(double z, double rms_m, const MarriageKernelConfig& cfg) {
    if (rms_m < 1e-12)
        throw std::runtime_error("marriage weight: degenerate wealth spread");
    const double e = std::exp(-z / rms_m);
    return cfg.weight_normalization == WeightNormalization::unit_integral
               ? e / rms_m
               : e * rms_m;
}

namespace {

// Weights w_k with integral ~= h * sum w_k v_k over n equidistant nodes,
// matching simpson_uniform: odd interval counts close with a 3/8 panel,
// a single interval is the trapezoid.
std::vector<double> simpson_node_weights(int n) {
    std::vector<double> w(std::max(n, 1), 0.0);
    if (n < 2) return w;
    if (n == 2) { w[0] = w[1] = 0.5; return w; }
    const int intervals = n - 1;
    int last = intervals;
    if (intervals % 2 != 0) {
        last = intervals - 3;
        w[last] += 3.0 / 8.0;
        w[last + 1] += 9.0 / 8.0;
        w[last + 2] += 9.0 / 8.0;
        w[last + 3] += 3.0 / 8.0;
    }
    for (int k = 0; k + 2 <= last; k += 2) {
        w[k] += 1.0 / 3.0;
        w[k + 1] += 4.0 / 3.0;
        w[k + 2] += 1.0 / 3.0;
    }
    return w;
}

} // namespace

MarriageSource marriage_source(const PdfField& field, const MomentSet& mom,
                               const MarriageKernelConfig& cfg) {
    const Grid& g = field.grid;
    const double mass = integrate_2d(field);
    if (std::abs(mass - 1.0) > 1e-6)
        throw std::runtime_error("marriage source: field not normalized");

    const std::vector<double> pm = marginal_wealth(field);
    const double peak = *std::max_element(pm.begin(), pm.end());
    const double eps = cfg.marginal_epsilon * peak;
    const int nm = g.n_m;
    const double dm = g.dm;

    // gap weight sampled on the z grid z_k = k dm
    std::vector<double> f(nm);
    for (int k = 0; k < nm; ++k) f[k] = weight_f(k * dm, mom.rms_m, cfg);

    // node weights for every gain-integral length
    const int kmax = (nm - 1) / 2;
    std::vector<std::vector<double>> wtab(kmax + 1);
    for (int K = 0; K <= kmax; ++K) wtab[K] = simpson_node_weights(K + 1);

    // gain over pairs (M - z, M + z)
    std::vector<double> gain(nm, 0.0);
    for (int i = 0; i < nm; ++i) {
        const int K = std::min(i, nm - 1 - i);
        const std::vector<double>& w = wtab[K];
        double s = 0.0;
        for (int k = 0; k <= K; ++k) s += w[k] * f[k] * pm[i + k] * pm[i - k];
        gain[i] = s * dm;
    }

    // loss rate per unit probability; the half-gap kernel mirrors the gain's
    // pair weights so each marriage removes exactly what it creates
    std::vector<double> loss(nm, 0.0);
    if (cfg.loss_kernel == LossKernel::half_gap) {
        for (int j = 0; j < nm; ++j) {
            const int Kj = std::min(j, nm - 1 - j);
            double s = wtab[Kj][0] * f[0] * pm[j];
            for (int k = 1; 2 * k <= j; ++k) { // partner below, pair center j - k
                const int i = j - k;
                s += 0.5 * wtab[std::min(i, nm - 1 - i)][k] * f[k] * pm[j - 2 * k];
            }
            for (int k = 1; 2 * k <= nm - 1 - j; ++k) { // partner above
                const int i = j + k;
                s += 0.5 * wtab[std::min(i, nm - 1 - i)][k] * f[k] * pm[j + 2 * k];
            }
            loss[j] = s * dm;
        }
    } else if (cfg.loss_kernel == LossKernel::partner_wealth) {
        double s = 0.0; // integral independent of M as printed
        for (int l = 0; l < nm; ++l)
            s += weight_f(g.m_centers[l], mom.rms_m, cfg) * pm[l];
        std::fill(loss.begin(), loss.end(), 0.25 * s * dm);
    } else { // LossKernel::gap
        for (int j = 0; j < nm; ++j) {
            double s = 0.0;
            for (int l = 0; l < nm; ++l) s += f[std::abs(l - j)] * pm[l];
            loss[j] = 0.25 * s * dm;
        }
    }

    MarriageSource out;
    out.values.assign(g.size(), 0.0);
    const double inv_tau = 1.0 / cfg.tau_f;
    for (int i = 0; i < nm; ++i) {
        if (pm[i] < eps) {
            out.discarded_gain += gain[i] * dm * inv_tau;
            continue;
        }
        const double rate = (gain[i] / pm[i] - loss[i]) * inv_tau;
        const double* row = field.values.data() + g.index(i, 0);
        double* dst = out.values.data() + g.index(i, 0);
        for (int j = 0; j < g.n_c; ++j) dst[j] = row[j] * rate;
    }
    return out;
}

void write_marriage_source_csv(const PdfField& field, const MarriageSource& src,
                               const std::string& path) {
    CsvWriter w(path);
    w.header("M,C,If");
    const Grid& g = field.grid;
    for (int i = 0; i < g.n_m; ++i)
        for (int j = 0; j < g.n_c; ++j)
            w.row({g.m_centers[i], g.c_centers[j], src.values[g.index(i, j)]});
}

} // namespace socsim
