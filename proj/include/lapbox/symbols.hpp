#pragma once

#include <boost/rational.hpp>

#include <vector>

#include "lapbox/common.hpp"

namespace lapbox {

// Symbol of the lattice kinetic operator, h0(xi) = 4 sum_j sin^2(pi xi_j),
// with range [0, 4d] and critical values {0, 4, ..., 4d}.
double symbol_value(const std::vector<double>& xi);
std::vector<double> symbol_gradient(const std::vector<double>& xi);
std::vector<double> critical_values(int d);
double spectrum_top(int d);

// Euclidean torus distance from xi to the critical-point set {0, +-1/2}^d of
// the symbol, a lower bound certificate for the group velocity on a window.
double distance_to_critical_points(const std::vector<double>& xi);

using rational = boost::rational<long long>;

// Admissible exponent region for decay order k:
//   1/q <= 1/p - 1/(k+1),  1/p > (1+k)/(1+2k),  1/q < k/(1+2k).
// The float overload resolves boundary cases only up to `tol`; the rational
// overload is exact, which is what the region scenario reports for boundary
// probes. k enters as a rational so half-integer orders stay exact.
bool in_admissible_region(double inv_p, double inv_q, double k, double tol = 1e-12);
bool in_admissible_region(const rational& inv_p, const rational& inv_q, const rational& k);

// Largest p on the duality line q = p* admitted by decay order k: 2(k+1)/(k+2).
double duality_line_pmax(double k);
rational duality_line_pmax(const rational& k);

// Smoothness trade: giving up delta of the decay order buys Holder exponent
// beta = (2/p - 1) delta while the usable order drops to k - delta.
double holder_beta(double p, double delta);
double reduced_decay_order(double k, double delta);

// Endpoint exponents of the uniform resolvent bound, (2d/(d+3), 2d/(d-3));
// only meaningful for d >= 4 and rejected otherwise.
struct EndpointPair {
    double p;
    double q;
};
EndpointPair uniform_resolvent_endpoints(int d);

// Endpoint of the Holder-smoothing range, p = 2d/(3 delta + d + 3).
double holder_endpoint_p(int d, double delta);

// Energy windows on which the level sets carry curvature of full order
// k = (d-1)/2. The printed intervals are empty when read as intersections,
// so both readings are exposed and nothing is silently chosen.
enum class WindowReading { intersection_as_printed, union_of_windows };
bool in_curvature_window(int d, double lambda, WindowReading reading);
double curvature_decay_order(int d);

}  // namespace lapbox
