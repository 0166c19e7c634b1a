#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lapbox/resolvent.hpp"
#include "lapbox/rng.hpp"

using namespace lapbox;

namespace {

std::vector<std::vector<long>> ray(int d, long lo, long hi) {
    std::vector<std::vector<long>> xs;
    for (long r = lo; r <= hi; ++r) {
        std::vector<long> x(static_cast<std::size_t>(d), 0);
        x[0] = r;
        xs.push_back(std::move(x));
    }
    return xs;
}

}  // namespace

TEST_CASE("spectral point validation and conjugation") {
    CHECK_THROWS_AS(SpectralPoint(1.0, -0.5), config_error);
    SpectralPoint z(1.0, 0.25, HalfPlane::lower);
    CHECK(z.value() == cplx(1.0, -0.25));
    CHECK(SpectralPoint::from(cplx(2.0, -0.1)).side == HalfPlane::lower);
}

TEST_CASE("closed form at pinned points") {
    // z = -1: r + 1/r = 3, r = (3 - sqrt 5)/2, G(0) = 1/sqrt 5.
    CHECK(std::abs(green_1d_closed_form(0, -1.0) - cplx(0.44721359549995794, 0.0)) <= 1e-14);
    double r = (3.0 - std::sqrt(5.0)) / 2.0;
    cplx ratio = green_1d_closed_form(3, -1.0) / green_1d_closed_form(2, -1.0);
    CHECK(std::abs(ratio - cplx(r, 0.0)) <= 1e-13);
    // Inside the band the boundary value at x = 0 is purely imaginary:
    // G(0; lambda + i eps) -> i / (2 sin theta), cos theta = 1 - lambda/2.
    cplx g = green_1d_closed_form(0, cplx(2.0, 1e-9));
    CHECK(std::abs(g.real()) <= 1e-8);
    CHECK(g.imag() == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("torus engine reproduces the 1d closed form off the spectrum") {
    QuadratureSpec spec;
    spec.engine = GreenEngine::torus_grid;
    double residual = 0.0;
    auto values = green_values(1, ray(1, 0, 20), SpectralPoint(-1.0, 0.0), spec, &residual);
    for (long x = 0; x <= 20; ++x) {
        cplx want = green_1d_closed_form(x, -1.0);
        CHECK(std::abs(values[static_cast<std::size_t>(x)] - want) <= 1e-10);
    }
    CHECK(residual <= 1e-9);
}

TEST_CASE("off-spectrum kernels are real and even") {
    QuadratureSpec spec;
    GreenKernel k = green_kernel(2, LatticeBox(2, 3), SpectralPoint(-3.0, 0.0), spec);
    k.box.for_each_site([&](std::size_t idx, const std::vector<long>& x) {
        CHECK(std::abs(k.values[idx].imag()) <= 1e-10);
        std::vector<long> neg{-x[0], -x[1]};
        CHECK(std::abs(k.values[idx] - k.at(neg)) <= 1e-12);
    });
}

TEST_CASE("second order Neumann oracle in two dimensions") {
    // -1/z - mean(h0)/z^2 with mean(h0) = 2d: at z = -100 this is 0.0096.
    QuadratureSpec spec;
    cplx g = green_point(2, {0, 0}, SpectralPoint(-100.0, 0.0), spec);
    CHECK(std::abs(g - cplx(0.0096, 0.0)) <= 2e-4);
}

TEST_CASE("kernel conjugation symmetry between half planes") {
    QuadratureSpec spec;
    GreenKernel up = green_kernel(2, LatticeBox(2, 2), SpectralPoint(1.5, 0.05), spec);
    GreenKernel dn =
        green_kernel(2, LatticeBox(2, 2), SpectralPoint(1.5, 0.05, HalfPlane::lower), spec);
    for (std::size_t i = 0; i < up.values.size(); ++i)
        CHECK(std::abs(up.values[i] - std::conj(dn.values[i])) <= 1e-10);
}

TEST_CASE("time integral engine agrees with the closed form") {
    QuadratureSpec spec;
    spec.engine = GreenEngine::time_integral;
    spec.tol = 1e-10;
    double residual = 0.0;
    auto values =
        green_values(1, ray(1, 0, 10), SpectralPoint(1.0, 0.05), spec, &residual);
    for (long x = 0; x <= 10; ++x) {
        cplx want = green_1d_closed_form(x, cplx(1.0, 0.05));
        CHECK(std::abs(values[static_cast<std::size_t>(x)] - want) <= 2e-9);
    }
    CHECK(residual <= 1e-8);
}

TEST_CASE("time integral and torus engines agree in two dimensions") {
    std::vector<std::vector<long>> xs{{0, 0}, {1, 0}, {2, 1}, {3, 3}, {-2, 4}};
    QuadratureSpec torus;
    torus.engine = GreenEngine::torus_grid;
    QuadratureSpec timeint;
    timeint.engine = GreenEngine::time_integral;
    timeint.tol = 1e-9;
    SpectralPoint z(2.0, 0.1);
    auto a = green_values(2, xs, z, torus);
    auto b = green_values(2, xs, z, timeint);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 2e-8);
}

TEST_CASE("heat transform engine handles both sides of the band") {
    QuadratureSpec spec;
    spec.engine = GreenEngine::laplace_transform;
    for (long x = 0; x <= 6; ++x) {
        cplx below = green_point(1, {x}, SpectralPoint(-1.0, 0.0), spec);
        CHECK(std::abs(below - green_1d_closed_form(x, -1.0)) <= 1e-10);
        cplx above = green_point(1, {x}, SpectralPoint(5.0, 0.0), spec);
        CHECK(std::abs(above - green_1d_closed_form(x, 5.0)) <= 1e-10);
    }
    // Cross-engine agreement in d=2 just below the band.
    std::vector<std::vector<long>> xs{{0, 0}, {1, 0}, {1, 1}, {3, 2}};
    QuadratureSpec torus;
    torus.engine = GreenEngine::torus_grid;
    auto heat = green_values(2, xs, SpectralPoint(-0.5, 0.0), spec);
    auto grid = green_values(2, xs, SpectralPoint(-0.5, 0.0), torus);
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::abs(heat[i] - grid[i]) <= 1e-9);
}

TEST_CASE("multi-energy batches match single evaluations") {
    std::vector<std::vector<long>> xs{{0, 0, 0}, {1, 0, 0}, {2, 1, 0}};
    std::vector<double> lambdas{0.8, 1.0, 1.3};
    QuadratureSpec spec;
    spec.engine = GreenEngine::time_integral;
    auto batch = green_values_multi_lambda(3, xs, lambdas, 0.05, HalfPlane::upper, spec);
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        auto single = green_values(3, xs, SpectralPoint(lambdas[l], 0.05), spec);
        for (std::size_t i = 0; i < xs.size(); ++i)
            CHECK(std::abs(batch[l][i] - single[i]) <= 1e-12);
    }
}

TEST_CASE("boundary values via the eps schedule match the closed form") {
    QuadratureSpec spec;
    spec.eps0 = 2e-3;
    spec.richardson_stages = 3;
    for (double lambda : {1.0, 2.0, 3.0}) {
        BoundaryValues bv = limiting_absorption(1, ray(1, 0, 10), lambda, HalfPlane::upper, spec);
        CHECK_FALSE(bv.diverged);
        double theta = std::acos(1.0 - lambda / 2.0);
        for (long x = 0; x <= 10; ++x) {
            // G(x; lambda + i0) = i e^{i theta x} / (2 sin theta).
            cplx want = cplx(0.0, 1.0) * std::exp(cplx(0.0, theta * x)) / (2.0 * std::sin(theta));
            CHECK(std::abs(bv.values[static_cast<std::size_t>(x)] - want) <= 1e-8);
        }
    }
}

TEST_CASE("boundary schedule diverges at a critical energy") {
    QuadratureSpec spec;
    spec.eps0 = 4e-3;
    BoundaryValues bv = limiting_absorption(1, {{0}}, 4.0, HalfPlane::upper, spec);
    CHECK(bv.diverged);
}

TEST_CASE("grid resolvent identity holds to near roundoff") {
    for (int d : {1, 2, 3}) {
        DualGrid grid(d, 64);
        LatticeBox box(d, 10);
        Rng rng(100 + static_cast<std::uint64_t>(d));
        LatticeFunction f(box);
        for (auto& v : f.values) v = rng.complex_normal();
        double r = resolvent_identity_residual(f, grid, SpectralPoint(1.0, 0.1));
        CHECK(r <= 1e-10);
    }
}

TEST_CASE("first resolvent identity on the grid") {
    DualGrid grid(2, 32);
    Rng rng(7);
    std::vector<cplx> f(grid.size());
    for (auto& v : f) v = rng.complex_normal();
    SpectralPoint z(1.0, 0.2), w(3.0, 0.4, HalfPlane::lower);
    auto rz = resolvent_apply_grid(f, grid, z);
    auto rw = resolvent_apply_grid(f, grid, w);
    auto rzw = resolvent_apply_grid(rw, grid, z);
    double err = 0.0, scale = grid_l2(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        cplx lhs = rz[i] - rw[i];
        cplx rhs = (z.value() - w.value()) * rzw[i];
        err = std::max(err, std::abs(lhs - rhs));
    }
    CHECK(err / scale <= 1e-12);
}

TEST_CASE("error paths name their remedy") {
    QuadratureSpec spec;
    CHECK_THROWS_AS(green_point(1, {0}, SpectralPoint(2.0, 0.0), spec), config_error);
    CHECK_THROWS_AS(
        resolvent_apply_grid(std::vector<cplx>(16), DualGrid(1, 16), SpectralPoint(1.0, 0.0)),
        config_error);
    QuadratureSpec tight;
    tight.engine = GreenEngine::torus_grid;
    tight.max_grid_points = 64;
    CHECK_THROWS_AS(green_point(2, {0, 0}, SpectralPoint(1.0, 0.1), tight), budget_error);
}

TEST_CASE("decay fit rejects exponential kernels and accepts power tails") {
    QuadratureSpec spec;
    KernelDecayResult off = kernel_decay_fit(1, SpectralPoint(-1.0, 0.0), {1}, 4, 24, spec);
    CHECK_FALSE(off.accepted);
    CHECK(off.reason.find("residual") != std::string::npos);

    KernelDecayResult on = kernel_decay_fit(2, SpectralPoint(1.0, 0.0), {1, 0}, 4, 16, spec);
    CHECK(on.accepted);
    CHECK(on.fit.exponent > 0.2);
    CHECK(on.fit.exponent < 0.8);
}
