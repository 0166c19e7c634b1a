#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "lapbox/evolution.hpp"
#include "lapbox/lattice.hpp"

using namespace lapbox;

namespace {

LatticeFunction delta_at_origin(int d) {
    LatticeFunction f(LatticeBox(d, 1));
    f.at(std::vector<long>(static_cast<std::size_t>(d), 0)) = 1.0;
    return f;
}

double max_diff(const LatticeFunction& a, const LatticeFunction& b) {
    REQUIRE(a.box == b.box);
    double m = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

}  // namespace

TEST_CASE("grid propagation reproduces the Bessel kernel in one dimension") {
    for (double t : {0.5, 5.0, 50.0}) {
        LatticeFunction psi0 = delta_at_origin(1);
        DualGrid grid = free_propagation_grid(psi0.box, t);
        LatticeFunction psi = free_propagate(psi0, t, grid);
        double worst = 0.0;
        psi.box.for_each_site([&](std::size_t idx, const std::vector<long>& x) {
            worst = std::max(worst, std::abs(psi.values[idx] - free_kernel_1d(x[0], t)));
        });
        CAPTURE(t);
        CHECK(worst <= 1e-9);
    }
}

TEST_CASE("two dimensional kernel factors into the tensor product") {
    const double t = 6.0;
    LatticeFunction psi0 = delta_at_origin(2);
    LatticeFunction psi = free_propagate(psi0, t, free_propagation_grid(psi0.box, t));
    double worst = 0.0;
    psi.box.for_each_site([&](std::size_t idx, const std::vector<long>& x) {
        worst = std::max(worst, std::abs(psi.values[idx] - free_kernel(x, t)));
    });
    CHECK(worst <= 1e-9);
}

TEST_CASE("free propagation conserves mass on the certified box") {
    LatticeFunction psi0 = delta_at_origin(2);
    psi0.at({1, 0}) = cplx(0.3, -0.4);
    const double norm0 = lp_norm(psi0, 2.0);
    LatticeFunction psi = free_propagate(psi0, 12.0, free_propagation_grid(psi0.box, 12.0));
    CHECK(std::fabs(lp_norm(psi, 2.0) - norm0) <= 1e-9);
}

TEST_CASE("undersized grids are rejected with the required size") {
    LatticeFunction psi0 = delta_at_origin(1);
    CHECK_THROWS_AS(free_propagate(psi0, 50.0, DualGrid(1, 64)), budget_error);
}

TEST_CASE("polynomial propagator matches the free one when the potential vanishes") {
    const double t = 10.0;
    BoxHamiltonian h(LatticeBox(1, 80), {});
    LatticeFunction psi0(h.box());
    psi0.at({0}) = 1.0;
    ChebyshevPlan plan;
    LatticeFunction cheb = propagate_chebyshev(h, t, psi0, 1e-12, &plan);
    CHECK(plan.tail_bound <= 1e-12);
    CHECK(plan.n_terms > static_cast<int>(plan.rho));

    LatticeFunction seed = delta_at_origin(1);
    LatticeFunction free_psi = free_propagate(seed, t, free_propagation_grid(seed.box, t, 1e-12), 1e-12);
    // both surrogates agree with the infinite lattice within their certified
    // truncation and wraparound budgets
    double worst = 0.0;
    for (long x = -40; x <= 40; ++x)
        worst = std::max(worst, std::abs(cheb.at({x}) - free_psi.at({x})));
    CHECK(worst <= 5e-11);
}

TEST_CASE("polynomial propagator is unitary and satisfies the small-time expansion") {
    BoxHamiltonian h(LatticeBox(1, 30), {{{0}, -1.0}, {{3}, 0.5}});
    LatticeFunction psi0(h.box());
    psi0.at({0}) = cplx(0.8, 0.0);
    psi0.at({1}) = cplx(0.0, 0.6);
    const double norm0 = lp_norm(psi0, 2.0);

    LatticeFunction psi = propagate_chebyshev(h, 7.5, psi0, 1e-11);
    CHECK(std::fabs(lp_norm(psi, 2.0) - norm0) <= 1e-9);

    const double dt = 1e-3;
    LatticeFunction small = propagate_chebyshev(h, dt, psi0, 1e-13);
    std::vector<cplx> hpsi = h.apply(psi0.values);
    double diff = 0.0;
    for (std::size_t i = 0; i < small.values.size(); ++i)
        diff = std::max(diff,
                        std::abs(small.values[i] - (psi0.values[i] - cplx(0.0, dt) * hpsi[i])));
    // the linearization error is (t ||H psi||)^2 / 2 at leading order
    CHECK(diff <= 5e-5);
    CHECK(diff >= 1e-8);
}

TEST_CASE("propagation composes over time splits including a backward leg") {
    BoxHamiltonian h(LatticeBox(1, 40), {{{-2}, 0.7}, {{5}, -0.4}});
    LatticeFunction psi0(h.box());
    psi0.at({0}) = 1.0;
    psi0.at({-1}) = cplx(0.2, 0.1);

    LatticeFunction direct = propagate_chebyshev(h, 1.8, psi0, 1e-12);
    LatticeFunction first = propagate_chebyshev(h, 2.5, psi0, 1e-12);
    LatticeFunction both = propagate_chebyshev(h, -0.7, first, 1e-12);
    CHECK(max_diff(direct, both) <= 1e-10);
}

TEST_CASE("Rayleigh sampling rejects an interval that misses the spectrum") {
    BoxHamiltonian h(LatticeBox(1, 12), {});
    LatticeFunction psi0(h.box());
    psi0.at({0}) = 1.0;
    const std::pair<double, double> bad{0.5, 3.0};
    CHECK_THROWS_AS(propagate_chebyshev(h, 1.0, psi0, 1e-10, nullptr, &bad), config_error);
    const std::pair<double, double> good{-0.5, 4.5};
    CHECK_NOTHROW(propagate_chebyshev(h, 1.0, psi0, 1e-10, nullptr, &good));
}

TEST_CASE("sup norm of the free evolution decays at the cube root rate per axis") {
    DispersiveFit fit1 = dispersive_decay_fit(1, 8.0, 60.0, 7);
    CHECK(fit1.fit.exponent >= 0.28);
    CHECK(fit1.fit.exponent <= 0.38);

    DispersiveFit refined = dispersive_decay_fit(1, 8.0, 60.0, 7, 2.0);
    CHECK(std::fabs(refined.fit.exponent - fit1.fit.exponent) <= 0.02);
}

TEST_CASE("potential sites must lie inside the Hamiltonian box") {
    CHECK_THROWS_AS(BoxHamiltonian(LatticeBox(1, 3), {{{5}, 1.0}}), config_error);
}
