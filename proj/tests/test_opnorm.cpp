#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "lapbox/opnorm.hpp"
#include "lapbox/operators.hpp"
#include "lapbox/rng.hpp"
#include "lapbox/symbols.hpp"

using namespace lapbox;

namespace {

constexpr double kinf = std::numeric_limits<double>::infinity();

DenseOperator random_dense(const LatticeBox& box, std::uint64_t seed) {
    Rng rng = SeedStream(seed).rng(0);
    std::vector<cplx> entries(box.size() * box.size());
    for (cplx& e : entries) e = rng.complex_normal();
    return DenseOperator(box, box, std::move(entries));
}

DenseOperator adjoint_of(const KernelOperator& k) {
    std::vector<cplx> entries(k.domain().size() * k.codomain().size());
    for (std::size_t i = 0; i < k.domain().size(); ++i)
        for (std::size_t j = 0; j < k.codomain().size(); ++j)
            entries[i * k.codomain().size() + j] = std::conj(k.entry(j, i));
    return DenseOperator(k.domain(), k.codomain(), std::move(entries));
}

double power_iteration_norm(const KernelOperator& k, int iters) {
    Rng rng = SeedStream(0xABCDu).rng(1);
    std::vector<cplx> v(k.domain().size());
    for (cplx& x : v) x = rng.complex_normal();
    double sigma = 0.0;
    for (int it = 0; it < iters; ++it) {
        std::vector<cplx> w = k.apply_adjoint(k.apply(v));
        double n2 = 0.0;
        for (const cplx& x : w) n2 += std::norm(x);
        const double nn = std::sqrt(n2);
        if (nn == 0.0) return 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = w[i] / nn;
        sigma = std::sqrt(nn);
    }
    return sigma;
}

QuadratureSpec boundary_quad() {
    QuadratureSpec quad;
    quad.tol = 1e-6;
    quad.eps0 = 4e-3;
    quad.richardson_stages = 2;
    return quad;
}

}  // namespace

TEST_CASE("exact norms reproduce identity and rank-one closed forms") {
    const LatticeBox box(1, 3);
    const DenseOperator id = DenseOperator::identity(box);
    CHECK(opnorm_exact(id, 1.0, 1.0).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(opnorm_exact(id, 2.0, 2.0).value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(opnorm_exact(id, kinf, kinf).value == doctest::Approx(1.0).epsilon(1e-14));

    // rank one u (x) conj(v): norm is ||u||_q ||v||_{p*}
    Rng rng = SeedStream(7).rng(0);
    std::vector<cplx> u(box.size()), v(box.size());
    for (cplx& x : u) x = rng.complex_normal();
    for (cplx& x : v) x = rng.complex_normal();
    std::vector<cplx> entries(box.size() * box.size());
    for (std::size_t i = 0; i < box.size(); ++i)
        for (std::size_t j = 0; j < box.size(); ++j)
            entries[i * box.size() + j] = u[i] * std::conj(v[j]);
    const DenseOperator rank_one(box, box, std::move(entries));
    const auto nrm = [](const std::vector<cplx>& w, double p) {
        if (p == kinf) {
            double m = 0;
            for (const cplx& x : w) m = std::max(m, std::abs(x));
            return m;
        }
        double s = 0;
        for (const cplx& x : w) s += std::pow(std::abs(x), p);
        return std::pow(s, 1.0 / p);
    };
    CHECK(opnorm_exact(rank_one, 1.0, 2.0).value ==
          doctest::Approx(nrm(u, 2.0) * nrm(v, kinf)).epsilon(1e-12));
    CHECK(opnorm_exact(rank_one, 2.0, kinf).value ==
          doctest::Approx(nrm(u, kinf) * nrm(v, 2.0)).epsilon(1e-12));
    CHECK(opnorm_exact(rank_one, 2.0, 2.0).value ==
          doctest::Approx(nrm(u, 2.0) * nrm(v, 2.0)).epsilon(1e-10));

    CHECK_THROWS_AS(opnorm_exact(rank_one, 1.5, 3.0), config_error);
}

TEST_CASE("spectral norm matches a power iteration oracle") {
    const DenseOperator k = random_dense(LatticeBox(1, 3), 11);
    const double exact = opnorm_exact(k, 2.0, 2.0).value;
    CHECK(std::fabs(exact - power_iteration_norm(k, 400)) <= 1e-8 * exact);
}

TEST_CASE("ascent lower bounds meet the exact classes and never exceed them") {
    const DenseOperator k = random_dense(LatticeBox(1, 3), 23);
    for (auto [p, q] : std::vector<std::pair<double, double>>{
             {1.0, 2.0}, {2.0, 2.0}, {1.5, kinf}}) {
        const double exact = opnorm_exact(k, p, q).value;
        const NormEstimate low = opnorm_lower(k, p, q, 16, 5);
        CAPTURE(p);
        CAPTURE(q);
        CHECK(low.value <= exact * (1.0 + 1e-10));
        CHECK(low.value >= exact * (1.0 - 1e-6));
        CHECK(low.status == NormStatus::lower_bound);
        CHECK_FALSE(low.witness.empty());
    }
}

TEST_CASE("ascent respects a supplied start and grows with restarts") {
    const DenseOperator k = random_dense(LatticeBox(1, 4), 31);
    std::vector<cplx> f(k.domain().size(), cplx(0.0, 0.0));
    f[2] = 1.0;
    const std::vector<cplx> g = k.apply(f);
    double ratio = 0.0;
    for (const cplx& x : g) ratio += std::pow(std::abs(x), 3.0);
    ratio = std::pow(ratio, 1.0 / 3.0);
    const NormEstimate with_start = opnorm_lower(k, 2.0, 3.0, 0, 5, &f);
    CHECK(with_start.value >= ratio * (1.0 - 1e-12));

    const double few = opnorm_lower(k, 1.3, 2.7, 2, 5).value;
    const double more = opnorm_lower(k, 1.3, 2.7, 6, 5).value;
    CHECK(more >= few * (1.0 - 1e-12));
}

TEST_CASE("exact classes satisfy the duality relation") {
    const DenseOperator k = random_dense(LatticeBox(1, 3), 47);
    const DenseOperator ks = adjoint_of(k);
    for (double q : {1.5, 2.0, 4.0}) {
        const double qstar = q / (q - 1.0);
        CHECK(opnorm_exact(k, 1.0, q).value ==
              doctest::Approx(opnorm_exact(ks, qstar, kinf).value).epsilon(1e-12));
    }
}

TEST_CASE("identity kernel gives unit slice and composition constants") {
    const LatticeBox box(2, 2);
    const DenseOperator id = DenseOperator::identity(box);
    const AssumptionConstants sc = slice_constants(id, 1.0);
    CHECK(sc.C0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sc.C1 == doctest::Approx(1.0).epsilon(1e-12));
    const AssumptionConstants cc = composition_constants(id, 1.0);
    CHECK(cc.C2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cc.C3 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pointwise_constant(id, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("separable rank-one kernel matches hand-computed constants") {
    // K(x, y) = phi(x) conj(psi(y)) with phi two sites at ordinate 1 and psi a
    // delta at ordinate -2
    const LatticeBox box(std::vector<long>{1, 2});
    LatticeFunction phi(box), psi(box);
    phi.at({0, 1}) = 1.0;
    phi.at({1, 1}) = 1.0;
    psi.at({0, -2}) = 1.0;
    const DenseOperator k = DenseOperator::from_function(
        box, box, [&](const std::vector<long>& x, const std::vector<long>& y) {
            return phi.at(x) * std::conj(psi.at(y));
        });
    const double decay_k = 1.5;
    const AssumptionConstants sc = slice_constants(k, decay_k);
    // sections are rank one: norm ||phi(.,xd)||_2 ||psi(.,yd)||_2, peaking at
    // xd = 1, yd = -2 with values sqrt(2) and 1
    CHECK(sc.C0 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sc.C1 == doctest::Approx(std::pow(4.0, decay_k)).epsilon(1e-12));
    const double c4 = pointwise_constant(k, decay_k);
    // farthest pair with |K| = 1 is (1,1) vs (0,-2)
    CHECK(c4 == doctest::Approx(std::pow(1.0 + std::sqrt(10.0), decay_k)).epsilon(1e-12));
}

TEST_CASE("translation invariance collapses composition onto slice constants") {
    QuadratureSpec quad;
    const ConvolutionOperator k =
        green_operator(2, LatticeBox(2, 3), SpectralPoint{-1.0, 0.0, HalfPlane::upper}, quad);
    const AssumptionConstants sc = slice_constants(k, 1.0);
    const AssumptionConstants cc = composition_constants(k, 1.0);
    // sup over compositions of sections equals the squared section sup
    CHECK(std::fabs(cc.C2 - sc.C0) <= 1e-9 * sc.C0);

    const double dual = slice_constant_dual(k);
    CHECK(sc.C0 <= dual * (1.0 + 1e-9));
    CHECK(sc.C0 >= 0.8 * dual);
}

TEST_CASE("local average functional reproduces hand values") {
    LatticeFunction delta(LatticeBox(1, 4));
    delta.at({0}) = 1.0;
    CHECK(local_l2_average(delta) == doctest::Approx(1.0).epsilon(1e-12));
    LatticeFunction flat(LatticeBox(1, 4));
    for (cplx& v : flat.values) v = 1.0;
    // R = 1 ball holds three unit sites
    CHECK(local_l2_average(flat) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-12));
}

TEST_CASE("off-duality classifier picks the printed regimes") {
    AssumptionConstants c;
    c.C2 = 2.0;
    c.C3 = 3.0;
    c.C4 = 4.0;
    const DenseOperator id = DenseOperator::identity(LatticeBox(2, 1));
    // p = 1, q = 4 sits in the first regime: C3 * C4^{1/2}
    BoundReport r1 = verify_bound(id, c, 1.0, 4.0, 1.0, BoundKind::off_duality, 2, 3);
    CHECK(r1.case_index == 1);
    CHECK(r1.c_combination == doctest::Approx(3.0 * 2.0).epsilon(1e-12));
    // 1/p = 0.7, 1/q = 0.2 sits in the middle regime
    BoundReport r2 = verify_bound(id, c, 1.0 / 0.7, 5.0, 1.0, BoundKind::off_duality, 2, 3);
    CHECK(r2.case_index == 2);
    CHECK(r2.c_combination == doctest::Approx(std::pow(2.0, 2.0 / 3.0) *
                                              std::pow(3.0, 1.0 / 3.0) *
                                              std::pow(4.0, 2.0 / 3.0))
                                  .epsilon(1e-12));
    // 1/p = 0.7, 1/q = 0.1 sits in the third regime
    BoundReport r3 = verify_bound(id, c, 1.0 / 0.7, 10.0, 1.0, BoundKind::off_duality, 2, 3);
    CHECK(r3.case_index == 3);
    CHECK(r3.c_combination == doctest::Approx(std::pow(2.0, 0.2) * std::pow(3.0, 0.8) *
                                              std::pow(4.0, 0.4))
                                  .epsilon(1e-12));
    // too-small gap matches no regime
    CHECK_THROWS_AS(verify_bound(id, c, 1.0 / 0.55, 2.0, 1.0, BoundKind::off_duality, 2, 3),
                    config_error);
    CHECK_THROWS_AS(verify_bound(id, c, 4.0, 2.0, 1.0, BoundKind::off_duality, 2, 3),
                    config_error);
}

TEST_CASE("zero kernel yields zero ratios under any bound") {
    const LatticeBox box(2, 1);
    const DenseOperator zero(box, box, std::vector<cplx>(box.size() * box.size(), 0.0));
    AssumptionConstants c;
    c.C0 = c.C1 = c.C2 = c.C3 = c.C4 = 1.0;
    const BoundReport r = verify_bound(zero, c, 1.0, kinf, 1.0, BoundKind::duality_line, 4, 9);
    CHECK(r.max_ratio == 0.0);
}

TEST_CASE("boundary Green family keeps the duality-line ratio stable") {
    const double decay_k = 1.0;
    const double p = 4.0 / 3.0;
    std::vector<double> ratios;
    for (double lambda : {0.8, 1.2}) {
        const ConvolutionOperator k = green_boundary_operator(
            3, LatticeBox(3, 3), lambda, HalfPlane::upper, boundary_quad());
        const AssumptionConstants c = measure_constants(k, decay_k);
        CHECK(c.C0 > 0.0);
        CHECK(std::fabs(c.C2 - c.C0) <= 1e-6 * c.C0);
        const BoundReport r =
            verify_bound(k, c, p, 4.0, decay_k, BoundKind::duality_line, 6, 17);
        ratios.push_back(r.max_ratio);

        const BoundReport ls =
            verify_bound(k, c, p, 2.0, decay_k, BoundKind::local_smoothing, 4, 17);
        CHECK(ls.max_ratio > 0.0);
        CHECK(ls.max_ratio < 10.0);
    }
    CHECK(std::fabs(ratios[1] - ratios[0]) <= 0.25 * std::max(ratios[0], ratios[1]));
}

TEST_CASE("interpolation bound is never violated on Green sections") {
    const ConvolutionOperator k = green_boundary_operator(3, LatticeBox(3, 3), 1.0,
                                                          HalfPlane::upper, boundary_quad());
    const AssumptionConstants c = slice_constants(k, 1.0);
    const InterpolationCheck chk = riesz_thorin_check(k, c, 1.0, 25, 99);
    CHECK(chk.violations == 0);
    CHECK(chk.worst_margin <= 1.0 + 1e-8);
}

TEST_CASE("dyadic partition identity is exact and the normalization sits in range") {
    for (int j : {0, 1, 3, 5}) {
        const PartitionReport r = dyadic_partition_check(triangle_bump, j);
        CAPTURE(j);
        CHECK(r.max_error <= 1e-12);
        CHECK(r.in_range);
    }
    CHECK(dyadic_partition_check(triangle_bump, 3).l_j == doctest::Approx(24.0).epsilon(1e-12));
    CHECK(chi2_cutoff(0.5) == 1.0);
    CHECK(chi2_cutoff(2.5) == 0.0);
    CHECK(chi2_cutoff(1.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dyadic convolution cutoffs grow no faster than the square-root rate") {
    QuadratureSpec quad;
    quad.tol = 1e-6;
    const SpectralPoint z{1.0, 0.05, HalfPlane::upper};
    const ConvolutionOperator k =
        green_operator(2, LatticeBox(std::vector<long>{3, 32}), z, quad);
    const GrowthReport r =
        dyadic_growth_check(k, triangle_bump, 4.0 / 3.0, {0, 1, 2, 3, 4, 5}, 2, 5);
    for (double n : r.norms) CHECK(n > 0.0);
    CHECK(r.slope <= 0.6);
}

TEST_CASE("multiplier operators have exact spectral norm") {
    const DualGrid grid(1, 8);
    const MultiplierOperator m(grid, [](const std::vector<double>& xi) {
        return 1.0 / (symbol_value(xi) - cplx(-1.0, 0.0));
    });
    CHECK(m.norm_2_2() == doctest::Approx(1.0).epsilon(1e-12));
}
