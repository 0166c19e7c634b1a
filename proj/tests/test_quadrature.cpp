#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lapbox/fitting.hpp"
#include "lapbox/quadrature.hpp"

using namespace lapbox;

TEST_CASE("gauss rule integrates polynomials of degree 2n-1") {
    const GaussRule& rule = gauss_legendre(5);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double x = rule.nodes[i];
        acc += rule.weights[i] * (x * x * x * x * x * x * x * x);  // x^8, even
    }
    CHECK(acc == doctest::Approx(2.0 / 9.0).epsilon(1e-14));
    double wsum = 0.0;
    for (double w : rule.weights) wsum += w;
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("composite panels handle smooth oscillation") {
    auto f = [](double x) { return std::exp(cplx(0.0, x)); };
    cplx got = integrate_panels(f, uniform_breakpoints(0.0, 10.0, 0.5), 16);
    cplx want = (std::exp(cplx(0.0, 10.0)) - 1.0) / cplx(0.0, 1.0);
    CHECK(std::abs(got - want) <= 1e-12);

    double cubic = integrate_panels_real([](double x) { return x * x * x; },
                                         uniform_breakpoints(0.0, 1.0, 0.1), 8);
    CHECK(cubic == doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("geometric panels start small and cover the interval") {
    auto bp = geometric_breakpoints(0.0, 100.0, 0.5, 2.0);
    CHECK(bp.front() == 0.0);
    CHECK(bp.back() == 100.0);
    CHECK(bp[1] == doctest::Approx(0.5));
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) CHECK(bp[i] < bp[i + 1]);

    // Integrable boundary layer: int_0^1 log(x) dx = -1.
    double v = integrate_panels_real([](double x) { return std::log(x); },
                                     geometric_breakpoints(0.0, 1.0, 1e-7, 1.7), 16);
    CHECK(v == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("richardson removes leading orders") {
    // f(h) = 1 + h + h^2 + h^3 at h = 0.1, 0.05, 0.025: two stages leave an
    // h^3/8 defect of 1.25e-4.
    auto f = [](double h) { return cplx(1.0 + h + h * h + h * h * h, 0.0); };
    std::vector<cplx> samples{f(0.1), f(0.05), f(0.025)};
    auto r = richardson_extrapolate(samples);
    CHECK_FALSE(r.diverged);
    CHECK(std::abs(r.value - cplx(1.000125, 0.0)) <= 1e-12);
    CHECK(r.residual > 0.0);
}

TEST_CASE("richardson flags power-law divergence") {
    // eps^{-1/2} has no limit; increments grow under halving.
    std::vector<cplx> samples;
    for (double e : {1e-2, 5e-3, 2.5e-3}) samples.push_back(cplx(1.0 / std::sqrt(e), 0.0));
    auto r = richardson_extrapolate(samples);
    CHECK(r.diverged);
}

TEST_CASE("power law fit recovers planted decay") {
    std::vector<double> xs, ys;
    for (double x : {4.0, 8.0, 16.0, 32.0, 64.0}) {
        xs.push_back(x);
        ys.push_back(2.5 * std::pow(x, -1.5));
    }
    DecayFit fit = fit_power_law(xs, ys);
    CHECK(fit.exponent == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(fit.prefactor == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(fit.rms_residual <= 1e-13);
    CHECK(fit.window_lo == 4.0);
    CHECK(fit.window_hi == 64.0);

    CHECK_THROWS_AS(fit_power_law({1.0, 2.0}, {0.0, 1.0}), config_error);
}

TEST_CASE("line fit is exact on affine data") {
    LineFit fit = fit_line({0.0, 1.0, 2.0, 3.0}, {1.0, 3.0, 5.0, 7.0});
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.rms_residual <= 1e-14);
}
