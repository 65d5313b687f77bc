#pragma once

#include "socsim/grid.hpp"

#include <string>
#include <vector>

namespace socsim {

enum class WeightNormalization {
    unit_integral, // (1/s) exp(-z/s); the choice the conservation identity needs
    as_printed     // s exp(-z/s), integral s^2; kept for fidelity experiments
};

// Argument of the weight function in the loss integral.  The pair-gain term
// fixes the pair rate at f(half gap); `half_gap` is the loss that removes
// exactly what the gain creates.  The other two readings appear in the source
// formula and prose and are kept selectable.
enum class LossKernel { half_gap, partner_wealth, gap };

struct MarriageKernelConfig {
    double tau_f = 80.0;
    WeightNormalization weight_normalization = WeightNormalization::unit_integral;
    LossKernel loss_kernel = LossKernel::half_gap;
    bool enabled = true;
    double marginal_epsilon = 1e-14; // relative to the peak marginal
};

// Marriage-probability weight as a function of the wealth gap z >= 0.
double weight_f(double z, double rms_m, const MarriageKernelConfig& cfg);

struct MarriageSource {
    std::vector<double> values;  // per-cell source, probability density / year
    double discarded_gain = 0.0; // gain landing where the marginal is below eps
};

// Pairwise-interaction source I_f.  Gain pairs (M - z, M + z) place probability
// at M with quadrature weights in z; the loss removes each pair's probability
// from both partners with the matching weights, so with the half-gap kernel
// total mass, mean wealth, and the variance-reduction sign hold to roundoff.
MarriageSource marriage_source(const PdfField& field, const MomentSet& mom,
                               const MarriageKernelConfig& cfg);

void write_marriage_source_csv(const PdfField& field, const MarriageSource& src,
                               const std::string& path);

} // namespace socsim
