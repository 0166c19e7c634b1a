#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lapbox/rng.hpp"
#include "lapbox/symbols.hpp"

using namespace lapbox;

TEST_CASE("symbol values at pinned points") {
    CHECK(symbol_value({0.25, 0.0}) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(symbol_value({0.0, 0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(symbol_value({0.5, 0.5}) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(spectrum_top(3) == doctest::Approx(12.0));
}

TEST_CASE("symbol gradient matches finite differences") {
    auto g = symbol_gradient({0.25, 0.0});
    CHECK(g[0] == doctest::Approx(4.0 * pi).epsilon(1e-13));
    CHECK(g[1] == doctest::Approx(0.0));

    Rng rng(19);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> xi{rng.uniform(), rng.uniform(), rng.uniform()};
        auto grad = symbol_gradient(xi);
        const double h = 1e-6;
        for (std::size_t a = 0; a < xi.size(); ++a) {
            auto hi = xi, lo = xi;
            hi[a] += h;
            lo[a] -= h;
            double fd = (symbol_value(hi) - symbol_value(lo)) / (2.0 * h);
            CHECK(grad[a] == doctest::Approx(fd).epsilon(1e-7));
        }
    }
}

TEST_CASE("critical values enumerate 4k") {
    auto v = critical_values(2);
    REQUIRE(v.size() == 3u);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 4.0);
    CHECK(v[2] == 8.0);
}

TEST_CASE("distance to the critical point set") {
    CHECK(distance_to_critical_points({0.25, 0.25}) ==
          doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
    CHECK(distance_to_critical_points({0.0, 0.0}) == doctest::Approx(0.0));
    CHECK(distance_to_critical_points({0.5, 0.0}) == doctest::Approx(0.0));
    CHECK(distance_to_critical_points({-0.5, 0.9}) == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("admissible region with exact boundary handling") {
    // Interior point of the k=1 region; the first constraint holds with equality.
    CHECK(in_admissible_region(0.75, 0.25, 1.0));
    CHECK(in_admissible_region(rational(3, 4), rational(1, 4), rational(1)));

    // Strict boundaries are excluded exactly in rational mode.
    CHECK_FALSE(in_admissible_region(rational(2, 3), rational(1, 4), rational(1)));
    CHECK_FALSE(in_admissible_region(rational(3, 4), rational(1, 3), rational(1)));

    // Non-strict boundary is included exactly.
    CHECK(in_admissible_region(rational(7, 10), rational(1, 5), rational(1)));

    // Half-integer order stays exact: k = 1/2 gives 1/p > 3/4, 1/q < 1/4,
    // 1/q <= 1/p - 2/3.
    CHECK(in_admissible_region(rational(9, 10), rational(1, 5), rational(1, 2)));
    CHECK_FALSE(in_admissible_region(rational(3, 4), rational(1, 5), rational(1, 2)));

    CHECK_THROWS_AS(in_admissible_region(0.5, 0.5, -1.0), config_error);
}

TEST_CASE("duality line endpoint") {
    CHECK(duality_line_pmax(1.0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(duality_line_pmax(rational(1)) == rational(4, 3));
    CHECK(duality_line_pmax(rational(1, 2)) == rational(6, 5));
}

TEST_CASE("holder trade bookkeeping") {
    CHECK(holder_beta(1.0, 1.0) == doctest::Approx(1.0));
    CHECK(holder_beta(4.0 / 3.0, 0.5) == doctest::Approx(0.25));
    CHECK(reduced_decay_order(1.0, 0.5) == doctest::Approx(0.5));
    CHECK_THROWS_AS(reduced_decay_order(1.0, 1.5), config_error);
}

TEST_CASE("uniform resolvent endpoints") {
    auto ep = uniform_resolvent_endpoints(4);
    CHECK(ep.p == doctest::Approx(8.0 / 7.0).epsilon(1e-15));
    CHECK(ep.q == doctest::Approx(8.0).epsilon(1e-15));
    CHECK_THROWS_AS(uniform_resolvent_endpoints(3), config_error);
}

TEST_CASE("holder endpoint exponent") {
    CHECK(holder_endpoint_p(6, 1.0) == doctest::Approx(1.0));
    CHECK(holder_endpoint_p(4, 1.0 / 3.0) == doctest::Approx(1.0));
}

TEST_CASE("curvature windows expose both readings") {
    // As printed, the two ranges do not overlap in either dimension family.
    CHECK_FALSE(in_curvature_window(2, 1.0, WindowReading::intersection_as_printed));
    CHECK_FALSE(in_curvature_window(3, 1.0, WindowReading::intersection_as_printed));

    CHECK(in_curvature_window(2, 1.0, WindowReading::union_of_windows));
    CHECK(in_curvature_window(2, 5.0, WindowReading::union_of_windows));
    CHECK_FALSE(in_curvature_window(2, 4.0, WindowReading::union_of_windows));
    CHECK(in_curvature_window(3, 1.0, WindowReading::union_of_windows));
    CHECK_FALSE(in_curvature_window(3, 5.0, WindowReading::union_of_windows));
    CHECK(in_curvature_window(3, 11.0, WindowReading::union_of_windows));

    CHECK(curvature_decay_order(3) == doctest::Approx(1.0));
    CHECK(curvature_decay_order(2) == doctest::Approx(0.5));
}
