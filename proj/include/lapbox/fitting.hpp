#pragma once

#include <vector>

#include "lapbox/common.hpp"

namespace lapbox {

// Least-squares power law |v| ~ prefactor * x^{-exponent} fitted in log-log
// coordinates. `exponent` is the decay rate (positive when values shrink) and
// `rms_residual` the root mean square misfit of log|v|, the quantity fit
// acceptance thresholds are written against.
struct DecayFit {
    double exponent = 0.0;
    double prefactor = 0.0;
    double rms_residual = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    std::size_t n_points = 0;
};

DecayFit fit_power_law(const std::vector<double>& abscissae,
                       const std::vector<double>& magnitudes);

// Plain y = a + b x least squares, returned as (a, b, rms residual).
struct LineFit {
    double intercept = 0.0;
    double slope = 0.0;
    double rms_residual = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lapbox
