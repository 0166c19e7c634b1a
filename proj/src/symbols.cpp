#include "lapbox/symbols.hpp"

#include <cmath>

namespace lapbox {

double symbol_value(const std::vector<double>& xi) {
    double v = 0.0;
    for (double c : xi) {
        double s = std::sin(pi * c);
        v += 4.0 * s * s;
    }
    return v;
}

std::vector<double> symbol_gradient(const std::vector<double>& xi) {
    std::vector<double> g(xi.size());
    for (std::size_t a = 0; a < xi.size(); ++a)
        g[a] = 4.0 * pi * std::sin(2.0 * pi * xi[a]);
    return g;
}

std::vector<double> critical_values(int d) {
    if (d < 1) throw config_error("dimension must be positive");
    std::vector<double> vals(static_cast<std::size_t>(d) + 1);
    for (int k = 0; k <= d; ++k) vals[static_cast<std::size_t>(k)] = 4.0 * k;
    return vals;
}

double spectrum_top(int d) {
    if (d < 1) throw config_error("dimension must be positive");
    return 4.0 * d;
}

double distance_to_critical_points(const std::vector<double>& xi) {
    // The critical set is the product {0, 1/2}^d on the torus, so the nearest
    // point factorizes over axes.
    double s = 0.0;
    for (double c : xi) {
        double d0 = std::abs(torus_wrap(c));
        double d1 = std::abs(torus_wrap(c - 0.5));
        double m = std::min(d0, d1);
        s += m * m;
    }
    return std::sqrt(s);
}

bool in_admissible_region(double inv_p, double inv_q, double k, double tol) {
    if (!(k > 0)) throw config_error("decay order k must be positive");
    return inv_q <= inv_p - 1.0 / (k + 1.0) + tol &&
           inv_p > (1.0 + k) / (1.0 + 2.0 * k) - tol &&
           inv_q < k / (1.0 + 2.0 * k) + tol;
}

bool in_admissible_region(const rational& inv_p, const rational& inv_q, const rational& k) {
    if (!(k > rational(0))) throw config_error("decay order k must be positive");
    rational one(1);
    return inv_q <= inv_p - one / (k + one) &&
           inv_p > (one + k) / (one + 2 * k) &&
           inv_q < k / (one + 2 * k);
}

double duality_line_pmax(double k) {
    if (!(k > 0)) throw config_error("decay order k must be positive");
    return 2.0 * (k + 1.0) / (k + 2.0);
}

rational duality_line_pmax(const rational& k) {
    if (!(k > rational(0))) throw config_error("decay order k must be positive");
    return 2 * (k + 1) / (k + 2);
}

double holder_beta(double p, double delta) {
    if (!(p >= 1.0)) throw config_error("holder trade requires p >= 1");
    if (!(delta > 0.0)) throw config_error("holder trade requires delta > 0");
    return (2.0 / p - 1.0) * delta;
}

double reduced_decay_order(double k, double delta) {
    if (!(delta > 0.0) || !(delta < k))
        throw config_error("holder trade requires 0 < delta < k");
    return k - delta;
}

EndpointPair uniform_resolvent_endpoints(int d) {
    if (d <= 3)
        throw config_error("uniform resolvent endpoints require dimension at least 4");
    return {2.0 * d / (d + 3.0), 2.0 * d / (d - 3.0)};
}

double holder_endpoint_p(int d, double delta) {
    if (d < 1) throw config_error("dimension must be positive");
    if (!(delta > 0.0)) throw config_error("delta must be positive");
    return 2.0 * d / (3.0 * delta + d + 3.0);
}

bool in_curvature_window(int d, double lambda, WindowReading reading) {
    if (d < 2) throw config_error("curvature windows require dimension at least 2");
    double a_lo = 0.0, a_hi, b_lo, b_hi;
    if (d == 2) {
        a_hi = 4.0;
        b_lo = 4.0 * (d - 1);
        b_hi = 4.0 * d;
    } else {
        a_hi = 2.0;
        b_lo = 4.0 * d - 2.0;
        b_hi = 4.0 * d;
    }
    bool in_low = lambda > a_lo && lambda < a_hi;
    bool in_high = lambda > b_lo && lambda < b_hi;
    if (reading == WindowReading::intersection_as_printed) return in_low && in_high;
    return in_low || in_high;
}

double curvature_decay_order(int d) {
    if (d < 2) throw config_error("curvature order requires dimension at least 2");
    return 0.5 * (d - 1);
}

}  // namespace lapbox
