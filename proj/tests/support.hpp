#pragma once

// Shared fixtures: the two-species reference network, its assembled vector
// field, the trajectory it generates, and coefficient comparison helpers.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "crnfit/crnfit.hpp"

namespace testsup {

// Rate constants of the reference network. Eight reactions carry mass; the
// resulting mean-field equations are
//   x' = 3.2039137 x - 3.249183 x^2 + 0.0596435 z^2 - 8.375243 x z
//   z' = 2.983428 z + 0.0582105 x^2 - 9.22702 z^2 - 3.855036 x z
inline crnfit::RateVector reference_rates() {
    crnfit::RateVector k(17, 0.0);
    k[4] = 3.2039137;  // X -> X + X
    k[6] = 2.983428;   // Z -> Z + Z
    k[8] = 3.132762;   // X + X -> 0
    k[9] = 9.107733;   // Z + Z -> 0
    k[11] = 0.116421;  // X + X -> Z
    k[13] = 0.119287;  // Z + Z -> X
    k[14] = 3.855036;  // X + Z -> 0
    k[16] = 4.520207;  // X + Z -> Z
    return k;
}

inline crnfit::PolynomialODE reference_generator() {
    return crnfit::assemble_polynomial(crnfit::enumerate_library(2), reference_rates());
}

// The generator integrated on the grid the reference scenario uses:
// `steps` steps of 2/135 from (x, z) = (0.001, 0.324), so t ends at 80/3 for
// the default 1800.
inline crnfit::TimeSeries reference_series(int steps = 1800) {
    crnfit::IntegrationConfig cfg;
    cfg.h = 2.0 / 135.0;
    cfg.t_end = cfg.h * steps;
    Eigen::VectorXd y0(2);
    y0 << 0.001, 0.324;
    return crnfit::integrate_rk4(reference_generator(), y0, cfg);
}

// Worst coefficient deviation of `got` from `ref`, measured per component
// against the largest reference coefficient magnitude in that component:
// dominant entries (at least 10% of that scale) compare relatively, smaller
// ones absolutely in units of the scale. A stray near-zero term therefore
// cannot dominate the comparison the way a raw relative error would let it.
inline double max_scaled_deviation(const crnfit::PolynomialODE& got,
                                   const crnfit::PolynomialODE& ref) {
    double worst = 0.0;
    for (int c = 0; c < ref.dimension; ++c) {
        const auto& rrow = ref.coefficients[static_cast<size_t>(c)];
        const auto& grow = got.coefficients[static_cast<size_t>(c)];
        double scale = 0.0;
        for (double v : rrow) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) scale = 1.0;
        for (size_t m = 0; m < rrow.size(); ++m) {
            double diff = std::abs(grow[m] - rrow[m]);
            double dev = std::abs(rrow[m]) >= 0.1 * scale ? diff / std::abs(rrow[m])
                                                          : diff / scale;
            worst = std::max(worst, dev);
        }
    }
    return worst;
}

} // namespace testsup
