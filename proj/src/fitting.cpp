#include "lapbox/fitting.hpp"

#include <algorithm>
#include <cmath>

namespace lapbox {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw config_error("line fit needs at least two matched samples");
    double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    double det = n * sxx - sx * sx;
    if (std::abs(det) < 1e-14 * std::max(1.0, sxx * n))
        throw config_error("line fit abscissae are degenerate");
    LineFit fit;
    fit.slope = (n * sxy - sx * sy) / det;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - fit.intercept - fit.slope * x[i];
        ss += r * r;
    }
    fit.rms_residual = std::sqrt(ss / n);
    return fit;
}

DecayFit fit_power_law(const std::vector<double>& abscissae,
                       const std::vector<double>& magnitudes) {
    if (abscissae.size() != magnitudes.size() || abscissae.size() < 2)
        throw config_error("power law fit needs at least two matched samples");
    std::vector<double> lx, ly;
    lx.reserve(abscissae.size());
    ly.reserve(abscissae.size());
    for (std::size_t i = 0; i < abscissae.size(); ++i) {
        if (!(abscissae[i] > 0))
            throw config_error("power law fit requires positive abscissae");
        if (!(magnitudes[i] > 0))
            throw config_error("power law fit requires strictly positive magnitudes");
        lx.push_back(std::log(abscissae[i]));
        ly.push_back(std::log(magnitudes[i]));
    }
    LineFit line = fit_line(lx, ly);
    DecayFit fit;
    fit.exponent = -line.slope;
    fit.prefactor = std::exp(line.intercept);
    fit.rms_residual = line.rms_residual;
    auto mm = std::minmax_element(abscissae.begin(), abscissae.end());
    fit.window_lo = *mm.first;
    fit.window_hi = *mm.second;
    fit.n_points = abscissae.size();
    return fit;
}

}  // namespace lapbox
