#include "lapbox/oscillatory.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "lapbox/quadrature.hpp"
#include "lapbox/symbols.hpp"

namespace lapbox {

namespace {

double smoothstep_shape(double u, int order) {
    // Monotone polynomial ramps with C^order seams at u = 0 and u = 1.
    switch (order) {
        case 1:
            return u * u * (3.0 - 2.0 * u);
        case 2:
            return u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
        case 3:
            return u * u * u * u * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)));
        default:
            throw config_error("smoothstep order must be 1, 2, or 3");
    }
}

// Vertical derivative of the free symbol.
double vertical_slope(double xi_d) { return 4.0 * pi * std::sin(2.0 * pi * xi_d); }

// Sum of the per-axis symbol terms over the base coordinates.
double base_symbol(const std::vector<double>& base) {
    double acc = 0.0;
    for (double c : base) {
        const double s = std::sin(pi * c);
        acc += 4.0 * s * s;
    }
    return acc;
}

std::vector<double> with_height(const std::vector<double>& base, double xi_d) {
    std::vector<double> xi(base);
    xi.push_back(xi_d);
    return xi;
}

// Flattened composite Gauss rule on [lo, hi] with the requested node budget.
struct AxisRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

AxisRule axis_rule(double lo, double hi, long nodes_per_axis) {
    const int order = 10;
    const long panels = std::max<long>(1, (nodes_per_axis + order - 1) / order);
    const GaussRule& rule = gauss_legendre(order);
    AxisRule out;
    const double width = (hi - lo) / static_cast<double>(panels);
    for (long p = 0; p < panels; ++p) {
        const double a = lo + width * static_cast<double>(p);
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            out.nodes.push_back(a + 0.5 * width * (rule.nodes[i] + 1.0));
            out.weights.push_back(0.5 * width * rule.weights[i]);
        }
    }
    return out;
}

}  // namespace

double smooth_cutoff(double t, double plateau, double support, int smooth_order) {
    if (!(plateau >= 0.0) || !(support > plateau))
        throw config_error("cutoff needs 0 <= plateau < support");
    const double a = std::fabs(t);
    if (a <= plateau) return 1.0;
    if (a >= support) return 0.0;
    return 1.0 - smoothstep_shape((a - plateau) / (support - plateau), smooth_order);
}

GraphChart::GraphChart(int d, double lambda, PatchSpec patch, bool positive_branch,
                       int factor_order)
    : d_(d), lambda_(lambda), patch_(std::move(patch)), positive_(positive_branch),
      factor_order_(factor_order) {
    if (d_ < 2) throw config_error("graph charts need dimension >= 2");
    const std::size_t base_dim = static_cast<std::size_t>(d_ - 1);
    if (patch_.lo.size() != base_dim || patch_.hi.size() != base_dim)
        throw config_error("patch bounds must have d-1 components");
    for (std::size_t a = 0; a < base_dim; ++a)
        if (!(patch_.lo[a] < patch_.hi[a])) throw config_error("patch needs lo < hi on every axis");
    if (patch_.nodes_per_axis < 2) throw config_error("patch validation grid needs >= 2 nodes");
    if (factor_order_ < 4) throw config_error("slope factor quadrature order too small");

    // Closed-form validation sweep over the grid: the graph solve is exact up
    // to arcsin rounding, and every node must stay strictly inside the sheet.
    max_residual_ = 0.0;
    min_slope_ = std::numeric_limits<double>::infinity();
    min_factor_ = std::numeric_limits<double>::infinity();
    std::vector<long> idx(base_dim, 0);
    std::vector<double> base(base_dim, 0.0);
    const long n = patch_.nodes_per_axis;
    while (true) {
        for (std::size_t a = 0; a < base_dim; ++a)
            base[a] = patch_.lo[a] + (patch_.hi[a] - patch_.lo[a]) * static_cast<double>(idx[a]) /
                                         static_cast<double>(n - 1);
        const double h = height(base);
        max_residual_ =
            std::max(max_residual_, std::fabs(symbol_value(with_height(base, h)) - lambda_));
        min_slope_ = std::min(min_slope_, std::fabs(vertical_slope(h)));
        // Probe the slope factor on the graph and a step to each side, staying
        // on the sheet. The factor carries the sign of the vertical slope, so
        // orient it along the branch before taking the minimum.
        const double sheet_sign = positive_ ? 1.0 : -1.0;
        const double cap = 0.48;
        for (double probe : {h, sheet_sign * std::min(cap, sheet_sign * h + 0.08),
                             sheet_sign * std::max(0.02, sheet_sign * h - 0.08)})
            min_factor_ = std::min(min_factor_, sheet_sign * factor(base, probe));
        std::size_t axis = 0;
        while (axis < base_dim && ++idx[axis] == n) idx[axis++] = 0;
        if (axis == base_dim) break;
    }
    if (!(min_slope_ > 0.0) || !(min_factor_ > 0.0))
        throw config_error("level set tangent to the graph direction on this patch");
}

double GraphChart::height(const std::vector<double>& base) const {
    if (base.size() != static_cast<std::size_t>(d_ - 1))
        throw config_error("chart base point has the wrong dimension");
    const double rest = lambda_ - base_symbol(base);
    if (!(rest > 1e-12) || !(rest < 4.0 - 1e-12)) {
        std::ostringstream msg;
        msg << "level set leaves the graph sheet over the patch (vertical symbol share " << rest
            << " outside (0,4))";
        throw config_error(msg.str());
    }
    const double xi = std::asin(std::sqrt(rest / 4.0)) / pi;
    return positive_ ? xi : -xi;
}

std::vector<double> GraphChart::height_gradient(const std::vector<double>& base) const {
    // Implicit differentiation of h0(base, h) = lambda.
    const double h = height(base);
    const double slope = vertical_slope(h);
    std::vector<double> grad(base.size(), 0.0);
    for (std::size_t a = 0; a < base.size(); ++a)
        grad[a] = -4.0 * pi * std::sin(2.0 * pi * base[a]) / slope;
    return grad;
}

double GraphChart::factor(const std::vector<double>& base, double xi_d) const {
    const double h = height(base);
    const GaussRule& rule = gauss_legendre(factor_order_);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double t = 0.5 * (rule.nodes[i] + 1.0);
        acc += 0.5 * rule.weights[i] * vertical_slope(t * xi_d + (1.0 - t) * h);
    }
    return acc;
}

GraphChart graph_chart(int d, double lambda, const PatchSpec& patch, bool positive_branch,
                       int factor_order) {
    return GraphChart(d, lambda, patch, positive_branch, factor_order);
}

cplx surface_ft(const GraphChart& chart, const std::function<double(const std::vector<double>&)>& chi,
                const std::vector<long>& x, long nodes_per_axis) {
    const int d = chart.dim();
    if (x.size() != static_cast<std::size_t>(d))
        throw config_error("surface transform point has the wrong dimension");
    if (nodes_per_axis < 4) throw config_error("surface transform needs >= 4 nodes per axis");
    const std::size_t base_dim = static_cast<std::size_t>(d - 1);

    std::vector<AxisRule> rules;
    rules.reserve(base_dim);
    for (std::size_t a = 0; a < base_dim; ++a)
        rules.push_back(axis_rule(chart.patch().lo[a], chart.patch().hi[a], nodes_per_axis));

    std::vector<std::size_t> idx(base_dim, 0);
    std::vector<double> base(base_dim, 0.0);
    cplx acc(0.0, 0.0);
    while (true) {
        double weight = 1.0;
        for (std::size_t a = 0; a < base_dim; ++a) {
            base[a] = rules[a].nodes[idx[a]];
            weight *= rules[a].weights[idx[a]];
        }
        const double h = chart.height(base);
        const std::vector<double> grad = chart.height_gradient(base);
        double area_sq = 1.0;
        double phase = static_cast<double>(x[base_dim]) * h;
        for (std::size_t a = 0; a < base_dim; ++a) {
            area_sq += grad[a] * grad[a];
            phase += static_cast<double>(x[a]) * base[a];
        }
        const double density = chi(with_height(base, h));
        if (density != 0.0)
            acc += weight * density * std::sqrt(area_sq) *
                   std::exp(cplx(0.0, 2.0 * pi * phase));
        std::size_t axis = 0;
        while (axis < base_dim && ++idx[axis] == rules[axis].nodes.size()) idx[axis++] = 0;
        if (axis == base_dim) break;
    }
    return acc;
}

SurfaceDecay surface_decay_fit(const GraphChart& chart,
                               const std::function<double(const std::vector<double>&)>& chi,
                               const std::vector<double>& direction, double r_lo, double r_hi,
                               int samples, long nodes_per_axis) {
    if (direction.size() != static_cast<std::size_t>(chart.dim()))
        throw config_error("ray direction has the wrong dimension");
    if (!(0.0 < r_lo && r_lo < r_hi)) throw config_error("decay window needs 0 < r_lo < r_hi");
    if (samples < 2) throw config_error("decay fit needs at least two samples");

    SurfaceDecay out;
    std::vector<long> prev;
    for (int k = 0; k < samples; ++k) {
        const double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(k) /
                                                          static_cast<double>(samples - 1));
        std::vector<long> x(direction.size(), 0);
        double dist_sq = 0.0;
        for (std::size_t a = 0; a < direction.size(); ++a) {
            x[a] = std::lround(r * direction[a]);
            dist_sq += static_cast<double>(x[a]) * static_cast<double>(x[a]);
        }
        if (x == prev) continue;
        prev = x;
        out.distances.push_back(std::sqrt(dist_sq));
        out.magnitudes.push_back(std::abs(surface_ft(chart, chi, x, nodes_per_axis)));
    }
    out.fit = fit_power_law(out.distances, out.magnitudes);
    return out;
}

namespace {

void validate_profile(const GammaProfile& profile) {
    if (!(profile.plateau >= 0.0) || !(profile.support > profile.plateau))
        throw config_error("gamma profile needs 0 <= plateau < support");
    if (profile.smooth_order < 1 || profile.smooth_order > 3)
        throw config_error("gamma profile smoothness order must be 1, 2, or 3");
    // b stands for an inverse slope factor, so it must stay positive where the
    // cutoff lives.
    for (int i = -32; i <= 32; ++i) {
        const double t = profile.support * static_cast<double>(i) / 32.0;
        if (!(profile.b_at(t) > 0.0))
            throw config_error("gamma profile b must be positive on the cutoff support");
    }
}

// Panel layout for the boundary-layer integrand: geometric grading toward the
// pole at scale `layer`, a breakpoint pinned at the cutoff seam so no panel
// straddles the finite-smoothness point, then a split of any panel too wide
// for the oscillation e^{2 pi i x_d xi}.
std::vector<double> graded_breakpoints(double r, double layer, double x_d, int refine,
                                       double seam) {
    const double scale = std::pow(2.0, refine);
    const double first = std::max(1e-14, std::min(layer, r / 8.0) / scale);
    std::vector<double> right = geometric_breakpoints(0.0, r, first, 2.0);
    if (seam > 0.0 && seam < r) {
        const auto pos = std::lower_bound(right.begin(), right.end(), seam);
        if (pos == right.end() || std::fabs(*pos - seam) > 1e-15) right.insert(pos, seam);
    }
    const double cap = 0.25 / std::max(1.0, std::fabs(x_d)) / scale;
    std::vector<double> pts;
    pts.push_back(0.0);
    for (std::size_t i = 1; i < right.size(); ++i) {
        const double a = right[i - 1];
        const double b = right[i];
        const long cuts = std::max<long>(1, static_cast<long>(std::ceil((b - a) / cap)));
        for (long c = 1; c <= cuts; ++c)
            pts.push_back(a + (b - a) * static_cast<double>(c) / static_cast<double>(cuts));
    }
    std::vector<double> all;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) all.push_back(-*it);
    for (std::size_t i = 1; i < pts.size(); ++i) all.push_back(pts[i]);
    return all;
}

}  // namespace

cplx gamma_integral(const GammaProfile& profile, double eps, int half_plane, double x_d,
                    double tol) {
    validate_profile(profile);
    if (half_plane != 1 && half_plane != -1)
        throw config_error("gamma half-plane selector must be +1 or -1");
    if (!(eps >= 0.0)) throw config_error("gamma needs eps >= 0");
    if (!(tol > 0.0)) throw config_error("gamma needs tol > 0");
    const double r = profile.support;
    const double s = static_cast<double>(half_plane);

    cplx prev(0.0, 0.0);
    for (int refine = 0; refine < 7; ++refine) {
        cplx value(0.0, 0.0);
        if (eps > 0.0) {
            const auto integrand = [&](double xi) {
                return std::exp(cplx(0.0, 2.0 * pi * x_d * xi)) * profile.chi(xi) /
                       cplx(xi, -s * eps * profile.b_at(xi));
            };
            value = integrate_panels(
                integrand, graded_breakpoints(r, eps, x_d, refine, profile.plateau), 12);
        } else {
            // Principal value by odd folding: the chi(0) subtraction cancels
            // between +xi and -xi, leaving a smooth integrand on [0, r].
            const auto folded = [&](double xi) {
                const cplx plus = std::exp(cplx(0.0, 2.0 * pi * x_d * xi)) * profile.chi(xi);
                const cplx minus = std::exp(cplx(0.0, -2.0 * pi * x_d * xi)) * profile.chi(-xi);
                return (plus - minus) / xi;
            };
            value = integrate_panels(
                folded, graded_breakpoints(r, r / 8.0, x_d, refine, profile.plateau), 12);
            value = 0.5 * value + cplx(0.0, s * pi * profile.chi(0.0));
        }
        if (refine > 0 && std::abs(value - prev) <= tol * std::max(1.0, std::abs(value)))
            return value;
        prev = value;
    }
    throw budget_error("gamma quadrature did not settle within the refinement budget");
}

double pv_phase_mass(double frequency, double radius, double tol) {
    if (!(frequency > 0.0)) throw config_error("phase mass needs a positive frequency");
    if (!(tol > 0.0)) throw config_error("phase mass needs tol > 0");
    // Window chosen so the five-term asymptotic tail of the sine integral is
    // below tol; the quadrature covers [0, radius] panel by panel.
    double r = radius;
    if (r <= 0.0) r = std::max(600.0, std::pow(24.0 / tol, 0.2)) / (2.0 * pi * frequency);
    const double big_x = 2.0 * pi * frequency * r;
    if (big_x < 40.0) throw config_error("phase mass window too small for the tail series");

    const auto integrand = [&](double y) {
        const double u = 2.0 * pi * frequency * y;
        return u == 0.0 ? 2.0 * pi * frequency : std::sin(u) / y;
    };
    // Panels resolve the oscillation; the integrand is entire so order 12 on
    // quarter-period panels is far below tol.
    const double width = 0.25 / frequency;
    double body = integrate_panels_real(integrand, uniform_breakpoints(0.0, r, width), 12);

    const double c = std::cos(big_x);
    const double sn = std::sin(big_x);
    const double inv = 1.0 / big_x;
    const double inv2 = inv * inv;
    // int_X^inf sin(u)/u du = cos X/X + sin X/X^2 - 2 cos X/X^3 - 6 sin X/X^4
    //                         + 24 cos X/X^5 + O(X^-6).
    const double tail =
        c * inv + sn * inv2 - 2.0 * c * inv * inv2 - 6.0 * sn * inv2 * inv2 +
        24.0 * c * inv * inv2 * inv2;
    // p.v. over the real line: the even part cancels, twice the half-line sine
    // part remains on the imaginary axis.
    return std::abs(cplx(0.0, 2.0 * (body + tail)));
}

GammaScanReport gamma_bounds_scan(const GammaProfile& profile, const std::vector<double>& eps_grid,
                                  const std::vector<double>& xd_grid, int half_plane, double tol) {
    validate_profile(profile);
    if (eps_grid.size() < 3) throw config_error("gamma scan needs at least three eps values");
    if (xd_grid.empty()) throw config_error("gamma scan needs a nonempty x_d grid");
    for (double eps : eps_grid)
        if (!(eps >= 0.0)) throw config_error("gamma scan eps values must be nonnegative");

    GammaScanReport report;
    report.eps_grid = eps_grid;
    report.xd_grid = xd_grid;
    const std::size_t ne = eps_grid.size();
    const std::size_t nx = xd_grid.size();
    report.values.resize(ne * nx);

    double sup = 0.0;
    double sup_refined = 0.0;
    for (std::size_t i = 0; i < ne; ++i) {
        for (std::size_t j = 0; j < nx; ++j) {
            const cplx v = gamma_integral(profile, eps_grid[i], half_plane, xd_grid[j], tol);
            const cplx v2 =
                gamma_integral(profile, eps_grid[i], half_plane, xd_grid[j], tol / 16.0);
            report.values[i * nx + j] = v;
            sup = std::max(sup, std::abs(v));
            sup_refined = std::max(sup_refined, std::abs(v2));
        }
    }
    report.sup_abs = sup;
    report.sup_refined = sup_refined;
    report.sup_change = std::fabs(sup_refined - sup) / std::max(sup, 1e-300);
    report.sup_stable = report.sup_change < 0.10;

    // Hoelder fit per x_d over pairs separated by at most 0.1 in eps.
    double lipschitz = 0.0;
    for (std::size_t j = 0; j < nx; ++j) {
        std::vector<double> log_sep, log_diff;
        for (std::size_t i = 0; i < ne; ++i) {
            for (std::size_t k = i + 1; k < ne; ++k) {
                const double sep = std::fabs(eps_grid[k] - eps_grid[i]);
                if (!(sep > 0.0) || sep > 0.1 + 1e-12) continue;
                const double diff =
                    std::abs(report.values[k * nx + j] - report.values[i * nx + j]);
                if (diff < 1e-14) continue;
                log_sep.push_back(std::log(sep));
                log_diff.push_back(std::log(diff));
                lipschitz =
                    std::max(lipschitz, diff / ((1.0 + std::fabs(xd_grid[j])) * sep));
            }
        }
        if (log_sep.size() < 2)
            throw config_error("gamma scan eps grid leaves too few pairs within separation 0.1");
        const LineFit fit = fit_line(log_sep, log_diff);
        report.holder_slopes.push_back(fit.slope);
        report.holder_prefactors.push_back(std::exp(fit.intercept));
    }
    report.holder_slope =
        *std::min_element(report.holder_slopes.begin(), report.holder_slopes.end());
    report.holder_ok = report.holder_slope >= 0.9;

    std::vector<double> log_arg, log_pref;
    for (std::size_t j = 0; j < nx; ++j) {
        log_arg.push_back(std::log(1.0 + std::fabs(xd_grid[j])));
        log_pref.push_back(std::log(report.holder_prefactors[j]));
    }
    report.prefactor_growth = fit_line(log_arg, log_pref).slope;
    report.growth_ok = report.prefactor_growth <= 1.1;

    // Interpolated difference bound: every measured difference is at most
    // 2 sup and at most lipschitz * (1+|x_d|) * sep, so the geometric mix at
    // each delta must also dominate; the ratios certify that no pair slips
    // past the interpolation.
    report.interp_deltas = {0.25, 0.5, 1.0};
    report.interp_ratios.assign(report.interp_deltas.size(), 0.0);
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t i = 0; i < ne; ++i) {
            for (std::size_t k = i + 1; k < ne; ++k) {
                const double sep = std::fabs(eps_grid[k] - eps_grid[i]);
                if (!(sep > 0.0) || sep > 0.1 + 1e-12) continue;
                const double diff =
                    std::abs(report.values[k * nx + j] - report.values[i * nx + j]);
                for (std::size_t m = 0; m < report.interp_deltas.size(); ++m) {
                    const double delta = report.interp_deltas[m];
                    const double bound =
                        std::pow(2.0 * report.sup_abs, 1.0 - delta) *
                        std::pow(lipschitz * (1.0 + std::fabs(xd_grid[j])) * sep, delta);
                    report.interp_ratios[m] =
                        std::max(report.interp_ratios[m], diff / std::max(bound, 1e-300));
                }
            }
        }
    }
    report.interp_ok = true;
    for (double ratio : report.interp_ratios) report.interp_ok &= ratio <= 1.0 + 1e-9;
    return report;
}

}  // namespace lapbox
