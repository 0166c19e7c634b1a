#pragma once

#include <functional>
#include <vector>

#include "lapbox/common.hpp"

namespace lapbox {

// Gauss-Legendre nodes and weights on [-1,1], computed once per order by
// Newton iteration on the Legendre recurrence and cached.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(int order);

// Composite Gauss-Legendre over explicit panel breakpoints.
cplx integrate_panels(const std::function<cplx(double)>& f,
                      const std::vector<double>& breakpoints, int order);
double integrate_panels_real(const std::function<double(double)>& f,
                             const std::vector<double>& breakpoints, int order);

// Uniform panels of width at most `max_width` covering [a,b].
std::vector<double> uniform_breakpoints(double a, double b, double max_width);

// Geometrically growing panels covering [a,b] starting from width `first`,
// suited to integrands with a boundary layer at a.
std::vector<double> geometric_breakpoints(double a, double b, double first, double ratio);

// Richardson extrapolation for quantities with an asymptotic expansion
// value + c_1 h + c_2 h^2 + ... sampled on the halving schedule
// h, h/2, ..., h/2^stages (stages+1 samples). Returns the extrapolated value,
// an error estimate (magnitude of the last correction), and a divergence flag
// set when the corrections fail to shrink, the behaviour expected when no
// expansion exists (e.g. boundary values at a spectral critical point).
struct RichardsonResult {
    cplx value = 0.0;
    double residual = 0.0;
    bool diverged = false;
    std::vector<cplx> samples;
};
RichardsonResult richardson_extrapolate(const std::vector<cplx>& samples);

}  // namespace lapbox
