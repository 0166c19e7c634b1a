#pragma once

#include <functional>
#include <vector>

#include "lapbox/common.hpp"
#include "lapbox/fitting.hpp"

namespace lapbox {

// Polynomial smoothstep cutoff: 1 on |t| <= plateau, 0 on |t| >= support,
// monotone in between with smooth_order continuous derivatives at the seams
// (1 cubic, 2 quintic, 3 septic).
double smooth_cutoff(double t, double plateau, double support, int smooth_order = 2);

// Base rectangle in the first d-1 dual axes together with the validation grid
// density used when a chart is accepted.
struct PatchSpec {
    std::vector<double> lo;
    std::vector<double> hi;
    long nodes_per_axis = 17;
};

// The level set {h0 = lambda} written as a graph xi_d = height(xi') over the
// patch, on the sheet where the xi_d-derivative of h0 keeps one sign (the
// positive branch lives at xi_d in (0,1/2)). Construction solves the graph in
// closed form at every validation node and records the worst level-set
// residual, the smallest vertical slope |d h0 / d xi_d| on the graph, and the
// smallest slope factor seen near the graph; patches where the level set
// leaves the sheet are rejected outright.
class GraphChart {
public:
    GraphChart(int d, double lambda, PatchSpec patch, bool positive_branch, int factor_order);

    int dim() const { return d_; }
    double energy() const { return lambda_; }
    bool positive_branch() const { return positive_; }
    const PatchSpec& patch() const { return patch_; }

    // Graph height h(xi') and its gradient (by implicit differentiation, so
    // both are closed forms).
    double height(const std::vector<double>& base) const;
    std::vector<double> height_gradient(const std::vector<double>& base) const;

    // Slope factor e((base, xi_d), lambda): the average of the vertical
    // derivative of h0 along the segment from the graph to xi_d, computed by
    // quadrature, so that h0(xi) - lambda = factor * (xi_d - height(base)).
    double factor(const std::vector<double>& base, double xi_d) const;

    double max_residual() const { return max_residual_; }
    double min_slope() const { return min_slope_; }
    double min_factor() const { return min_factor_; }

private:
    int d_;
    double lambda_;
    PatchSpec patch_;
    bool positive_;
    int factor_order_;
    double max_residual_ = 0.0;
    double min_slope_ = 0.0;
    double min_factor_ = 0.0;
};

GraphChart graph_chart(int d, double lambda, const PatchSpec& patch, bool positive_branch = true,
                       int factor_order = 33);

// Fourier transform of the surface measure carried by the chart, weighted by
// the cutoff: the graph-coordinate quadrature of
//   e^{2 pi i (x'.xi' + x_d h(xi'))} chi(xi', h(xi')) sqrt(1 + |grad h|^2)
// over the patch. chi receives the full d-component point on the graph.
cplx surface_ft(const GraphChart& chart, const std::function<double(const std::vector<double>&)>& chi,
                const std::vector<long>& x, long nodes_per_axis = 160);

// Power-law fit of |surface_ft| along a lattice ray: samples log-spaced radii
// in [r_lo, r_hi], rounds r * direction to lattice points, and fits
// |F| ~ C |x|^{-exponent}. Curvature of the level set drives the exponent.
struct SurfaceDecay {
    DecayFit fit;
    std::vector<double> distances;
    std::vector<double> magnitudes;
};
SurfaceDecay surface_decay_fit(const GraphChart& chart,
                               const std::function<double(const std::vector<double>&)>& chi,
                               const std::vector<double>& direction, double r_lo, double r_hi,
                               int samples, long nodes_per_axis = 160);

// Profile data for the one-dimensional boundary-layer integrals: a smoothstep
// cutoff with recorded radii and smoothness order, and a positive smooth
// profile b standing in for the inverse slope factor. An empty b means the
// shipped profile 1 + 0.3 t^2.
struct GammaProfile {
    double plateau = 0.1;
    double support = 0.2;
    int smooth_order = 2;
    std::function<double(double)> b;

    double chi(double t) const { return smooth_cutoff(t, plateau, support, smooth_order); }
    double b_at(double t) const { return b ? b(t) : 1.0 + 0.3 * t * t; }
};

// gamma(eps, s, x_d) = int e^{2 pi i x_d xi} chi(xi) / (xi - i s eps b(xi)) dxi
// with s = +1 for the upper half-plane and -1 for the lower. For eps > 0 the
// quadrature grades its panels at scale eps around the pole; at eps = 0 the
// principal value is taken by odd-part cancellation (subtract chi(0), fold
// the domain) plus the residue term s * i pi chi(0). The two paths meet
// continuously as eps -> 0.
cplx gamma_integral(const GammaProfile& profile, double eps, int half_plane, double x_d,
                    double tol = 1e-10);

// Modulus of p.v. int e^{2 pi i f y} / y dy: quadrature over |y| <= radius
// completed by the analytic large-argument tail of the sine integral. Equals
// pi for every positive frequency; radius 0 picks a window large enough for
// the tail series to settle below tol.
double pv_phase_mass(double frequency, double radius = 0.0, double tol = 1e-12);

// Grid scan backing the uniformity and Hoelder claims for gamma: values over
// an (eps, x_d) grid, sup stability under quadrature refinement, per-x_d
// Hoelder fits of log|gamma_z - gamma_w| against log|eps_z - eps_w| with
// separations capped at 0.1, the growth of the fitted prefactor in
// (1 + |x_d|), and the interpolated difference bound at the listed deltas.
struct GammaScanReport {
    std::vector<double> eps_grid;
    std::vector<double> xd_grid;
    std::vector<cplx> values;           // row-major over (eps, x_d)
    double sup_abs = 0.0;
    double sup_refined = 0.0;
    double sup_change = 0.0;            // relative change under refinement
    std::vector<double> holder_slopes;  // one fit per x_d
    std::vector<double> holder_prefactors;
    double holder_slope = 0.0;          // worst (smallest) slope
    double prefactor_growth = 0.0;      // fitted exponent in (1 + |x_d|)
    std::vector<double> interp_deltas;
    std::vector<double> interp_ratios;  // worst bound ratio per delta (<= 1)
    bool sup_stable = false;
    bool holder_ok = false;
    bool growth_ok = false;
    bool interp_ok = false;
};

GammaScanReport gamma_bounds_scan(const GammaProfile& profile, const std::vector<double>& eps_grid,
                                  const std::vector<double>& xd_grid, int half_plane = +1,
                                  double tol = 1e-10);

}  // namespace lapbox
