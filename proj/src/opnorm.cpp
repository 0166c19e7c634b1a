#include "lapbox/opnorm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lapbox/fitting.hpp"
#include "lapbox/rng.hpp"

namespace lapbox {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double vec_lp(const std::vector<cplx>& v, double p) {
    if (p < 1.0) throw config_error("norm exponent must be >= 1");
    if (p == inf) {
        double m = 0.0;
        for (const cplx& x : v) m = std::max(m, std::abs(x));
        return m;
    }
    long double acc = 0.0L;
    for (const cplx& x : v) acc += std::pow(static_cast<long double>(std::abs(x)), p);
    return static_cast<double>(std::pow(acc, 1.0L / p));
}

double dual_exponent(double p) {
    if (p == 1.0) return inf;
    if (p == inf) return 1.0;
    return p / (p - 1.0);
}

// phase(v_i) (|v_i|/max)^expo entrywise; expo = inf collapses to the
// coordinate of largest magnitude, the l^1/l^inf endpoint of the dual map
std::vector<cplx> power_phase(const std::vector<cplx>& v, double expo) {
    std::vector<cplx> out(v.size(), cplx(0.0, 0.0));
    double m = 0.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]);
        if (a > m) {
            m = a;
            arg = i;
        }
    }
    if (m == 0.0) return out;
    if (expo == inf) {
        out[arg] = phase_of(v[arg]);
        return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double a = std::abs(v[i]) / m;
        if (a > 0.0) out[i] = phase_of(v[i]) * std::pow(a, expo);
    }
    return out;
}

double svd_norm(const KernelOperator& k) {
    const std::size_t rows = k.codomain().size();
    const std::size_t cols = k.domain().size();
    if (rows * cols > 16000000u)
        throw budget_error("dense decomposition exceeds the entry budget");
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = k.entry(i, j);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

Eigen::MatrixXcd section_matrix(const KernelOperator& k, long xd, long yd) {
    const DenseOperator t = section_operator(k, xd, yd);
    const std::size_t rows = t.codomain().size();
    const std::size_t cols = t.domain().size();
    Eigen::MatrixXcd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = t.entry(i, j);
    return m;
}

double matrix_two_norm(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues()(0);
}

double matrix_max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

double euclid(const std::vector<long>& u) {
    double s = 0.0;
    for (long c : u) s += static_cast<double>(c) * static_cast<double>(c);
    return std::sqrt(s);
}

long random_ordinate(Rng& rng, long half) {
    if (half == 0) return 0;
    const long n = 2 * half + 1;
    long idx = static_cast<long>(rng.uniform() * static_cast<double>(n));
    idx = std::min(idx, n - 1);
    return idx - half;
}

}  // namespace

NormEstimate opnorm_exact(const KernelOperator& k, double p, double q) {
    if (p < 1.0 || q < 1.0) throw config_error("norm exponents must be >= 1");
    NormEstimate out;
    out.status = NormStatus::exact;
    const std::size_t rows = k.codomain().size();
    const std::size_t cols = k.domain().size();
    if (p == 1.0) {
        // max over columns of the codomain l^q norm
        double best = 0.0;
        std::vector<cplx> col(rows);
        for (std::size_t j = 0; j < cols; ++j) {
            for (std::size_t i = 0; i < rows; ++i) col[i] = k.entry(i, j);
            best = std::max(best, vec_lp(col, q));
        }
        out.value = best;
        return out;
    }
    if (q == inf) {
        // max over rows of the domain dual-exponent norm
        const double pstar = dual_exponent(p);
        double best = 0.0;
        std::vector<cplx> row(cols);
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) row[j] = k.entry(i, j);
            best = std::max(best, vec_lp(row, pstar));
        }
        out.value = best;
        return out;
    }
    if (p == 2.0 && q == 2.0) {
        out.value = svd_norm(k);
        return out;
    }
    throw config_error("exact operator norms cover only (1,q), (p,inf) and (2,2)");
}

NormEstimate opnorm_lower(const KernelOperator& k, double p, double q, int restarts,
                          std::uint64_t seed, const std::vector<cplx>* start,
                          int max_iterations, double stagnation) {
    if (p < 1.0 || q < 1.0) throw config_error("norm exponents must be >= 1");
    if (restarts < 0) throw config_error("restarts must be nonnegative");
    NormEstimate best;
    best.status = NormStatus::lower_bound;
    const double expo_u = (q == inf) ? inf : q - 1.0;
    const double expo_f = (p == 1.0) ? inf : ((p == inf) ? 0.0 : 1.0 / (p - 1.0));

    const auto ascend = [&](std::vector<cplx> f) {
        double fn = vec_lp(f, p);
        if (fn == 0.0) return;
        for (cplx& v : f) v /= fn;
        double prev = -1.0;
        for (int it = 0; it < max_iterations; ++it) {
            const std::vector<cplx> g = k.apply(f);
            const double r = vec_lp(g, q);
            if (r > best.value) {
                best.value = r;
                best.witness = f;
            }
            if (r == 0.0) return;
            if (prev >= 0.0 && std::fabs(r - prev) <= stagnation * std::max(1.0, r)) return;
            prev = r;
            const std::vector<cplx> u = power_phase(g, expo_u);
            const std::vector<cplx> h = k.apply_adjoint(u);
            f = power_phase(h, expo_f);
            fn = vec_lp(f, p);
            if (fn == 0.0) return;
            for (cplx& v : f) v /= fn;
        }
    };

    if (start != nullptr) {
        if (start->size() != k.domain().size())
            throw config_error("start witness size mismatch");
        ascend(*start);
    }
    SeedStream streams(seed);
    for (int r = 0; r < restarts; ++r) {
        Rng rng = streams.rng(static_cast<std::uint64_t>(r));
        std::vector<cplx> f(k.domain().size());
        for (cplx& v : f) v = rng.complex_normal();
        ascend(std::move(f));
    }
    return best;
}

DenseOperator section_operator(const KernelOperator& k, long xd, long yd) {
    const int d = k.codomain().dim();
    if (d < 2 || k.domain().dim() != d)
        throw config_error("section operators need matching dimension >= 2");
    const long lo = k.codomain().half_width(d - 1);
    const long li = k.domain().half_width(d - 1);
    if (std::labs(xd) > lo || std::labs(yd) > li)
        throw config_error("section ordinate outside the box");
    std::vector<long> out_half(k.codomain().half_widths().begin(),
                               k.codomain().half_widths().end() - 1);
    std::vector<long> in_half(k.domain().half_widths().begin(),
                              k.domain().half_widths().end() - 1);
    LatticeBox out_box(out_half);
    LatticeBox in_box(in_half);
    // row-major with the last axis fastest, so a full-box index splits as
    // transverse_index * last_extent + (ordinate + half_width)
    const std::size_t stride_out = static_cast<std::size_t>(2 * lo + 1);
    const std::size_t stride_in = static_cast<std::size_t>(2 * li + 1);
    const std::size_t off_out = static_cast<std::size_t>(xd + lo);
    const std::size_t off_in = static_cast<std::size_t>(yd + li);
    std::vector<cplx> entries(out_box.size() * in_box.size());
    for (std::size_t i = 0; i < out_box.size(); ++i)
        for (std::size_t j = 0; j < in_box.size(); ++j)
            entries[i * in_box.size() + j] =
                k.entry(i * stride_out + off_out, j * stride_in + off_in);
    return DenseOperator(std::move(out_box), std::move(in_box), std::move(entries));
}

AssumptionConstants slice_constants(const KernelOperator& k, double decay_k) {
    AssumptionConstants out;
    out.k = decay_k;
    const int d = k.codomain().dim();
    const long lo = k.codomain().half_width(d - 1);
    const long li = k.domain().half_width(d - 1);
    const auto visit = [&](long xd, long yd) {
        const DenseOperator t = section_operator(k, xd, yd);
        const double n22 = svd_norm(t);
        double n1inf = 0.0;
        for (const cplx& e : t.entries()) n1inf = std::max(n1inf, std::abs(e));
        out.C0 = std::max(out.C0, n22);
        out.C1 = std::max(
            out.C1, std::pow(1.0 + std::fabs(static_cast<double>(xd - yd)), decay_k) * n1inf);
    };
    if (k.translation_invariant()) {
        // sections depend on the ordinate difference only
        for (long delta = -(lo + li); delta <= lo + li; ++delta) {
            const long xd = std::max(-lo, delta - li);
            visit(xd, xd - delta);
        }
    } else {
        for (long xd = -lo; xd <= lo; ++xd)
            for (long yd = -li; yd <= li; ++yd) visit(xd, yd);
    }
    return out;
}

AssumptionConstants composition_constants(const KernelOperator& k, double decay_k) {
    AssumptionConstants out;
    out.k = decay_k;
    const int d = k.codomain().dim();
    const long lo = k.codomain().half_width(d - 1);
    const long li = k.domain().half_width(d - 1);
    double c2sq = 0.0, c3sq = 0.0;
    const auto visit = [&](const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b, long sep) {
        const Eigen::MatrixXcd s = a.adjoint() * b;
        c2sq = std::max(c2sq, matrix_two_norm(s));
        c3sq = std::max(c3sq, std::pow(1.0 + std::fabs(static_cast<double>(sep)), decay_k) *
                                   matrix_max_abs(s));
    };
    if (k.translation_invariant()) {
        // compositions depend on the two ordinate differences only
        std::map<long, Eigen::MatrixXcd> cache;
        const auto section_of = [&](long delta) -> const Eigen::MatrixXcd& {
            auto it = cache.find(delta);
            if (it == cache.end()) {
                const long xd = std::max(-lo, delta - li);
                it = cache.emplace(delta, section_matrix(k, xd, xd - delta)).first;
            }
            return it->second;
        };
        for (long a = -(lo + li); a <= lo + li; ++a)
            for (long b = -(lo + li); b <= lo + li; ++b)
                visit(section_of(a), section_of(b), b - a);
    } else {
        for (long xd = -lo; xd <= lo; ++xd) {
            std::vector<Eigen::MatrixXcd> secs;
            secs.reserve(static_cast<std::size_t>(2 * li + 1));
            for (long yd = -li; yd <= li; ++yd) secs.push_back(section_matrix(k, xd, yd));
            for (long yd = -li; yd <= li; ++yd)
                for (long zd = -li; zd <= li; ++zd)
                    visit(secs[static_cast<std::size_t>(yd + li)],
                          secs[static_cast<std::size_t>(zd + li)], yd - zd);
        }
    }
    out.C2 = std::sqrt(c2sq);
    out.C3 = std::sqrt(c3sq);
    return out;
}

double pointwise_constant(const KernelOperator& k, double decay_k) {
    double c4 = 0.0;
    if (const auto* conv = dynamic_cast<const ConvolutionOperator*>(&k)) {
        conv->kernel().box.for_each_site([&](std::size_t idx, const std::vector<long>& u) {
            c4 = std::max(c4, std::pow(1.0 + euclid(u), decay_k) *
                                  std::abs(conv->kernel().values[idx]));
        });
        return c4;
    }
    std::vector<std::vector<long>> rows(k.codomain().size());
    k.codomain().for_each_site(
        [&](std::size_t i, const std::vector<long>& x) { rows[i] = x; });
    k.domain().for_each_site([&](std::size_t j, const std::vector<long>& y) {
        std::vector<long> u(y.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            for (std::size_t a = 0; a < y.size(); ++a) u[a] = rows[i][a] - y[a];
            c4 = std::max(c4, std::pow(1.0 + euclid(u), decay_k) * std::abs(k.entry(i, j)));
        }
    });
    return c4;
}

AssumptionConstants measure_constants(const KernelOperator& k, double decay_k) {
    AssumptionConstants out = slice_constants(k, decay_k);
    const AssumptionConstants comp = composition_constants(k, decay_k);
    out.C2 = comp.C2;
    out.C3 = comp.C3;
    out.C4 = pointwise_constant(k, decay_k);
    return out;
}

double slice_constant_dual(const ConvolutionOperator& k, long oversample) {
    const int d = k.codomain().dim();
    if (d < 2) throw config_error("section constants need dimension >= 2");
    if (oversample < 1) throw config_error("oversample factor must be >= 1");
    const LatticeFunction& ker = k.kernel();
    const long ld = ker.box.half_width(d - 1);
    std::vector<long> trans_half(ker.box.half_widths().begin(),
                                 ker.box.half_widths().end() - 1);
    const LatticeBox trans_box(trans_half);
    std::vector<long> n(trans_half.size());
    for (std::size_t a = 0; a < n.size(); ++a)
        n[a] = next_fast_even(oversample * trans_box.extent(static_cast<int>(a)));
    const DualGrid grid(n);
    double c0 = 0.0;
    const std::size_t stride = static_cast<std::size_t>(2 * ld + 1);
    for (long delta = -ld; delta <= ld; ++delta) {
        LatticeFunction slice(trans_box);
        for (std::size_t i = 0; i < trans_box.size(); ++i)
            slice.values[i] = ker.values[i * stride + static_cast<std::size_t>(delta + ld)];
        const std::vector<cplx> hat = dft_forward(slice, grid);
        for (const cplx& v : hat) c0 = std::max(c0, std::abs(v));
    }
    return c0;
}

double local_l2_average(const LatticeFunction& f) {
    const std::size_t n = f.box.size();
    const int d = f.box.dim();
    std::vector<long> coords(n * static_cast<std::size_t>(d));
    std::vector<double> w(n);
    f.box.for_each_site([&](std::size_t i, const std::vector<long>& x) {
        for (int a = 0; a < d; ++a) coords[i * static_cast<std::size_t>(d) + a] = x[a];
        w[i] = std::norm(f.values[i]);
    });
    double diam = 0.0;
    for (int a = 0; a < d; ++a) {
        const double e = static_cast<double>(2 * f.box.half_width(a));
        diam += e * e;
    }
    const long rmax = static_cast<long>(std::ceil(std::sqrt(diam))) + 1;
    double best = 0.0;
    std::vector<double> acc(static_cast<std::size_t>(rmax) + 1);
    for (std::size_t c = 0; c < n; ++c) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double dist2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double u = static_cast<double>(
                    coords[i * static_cast<std::size_t>(d) + a] -
                    coords[c * static_cast<std::size_t>(d) + a]);
                dist2 += u * u;
            }
            const long b = std::max(1L, static_cast<long>(std::ceil(std::sqrt(dist2) - 1e-12)));
            acc[static_cast<std::size_t>(b)] += w[i];
        }
        double run = 0.0;
        for (long r = 1; r <= rmax; ++r) {
            run += acc[static_cast<std::size_t>(r)];
            best = std::max(best, run / static_cast<double>(r));
        }
    }
    return std::sqrt(best);
}

namespace {

struct OffDualityCase {
    int index;
    double c;
};

OffDualityCase off_duality_constant(const AssumptionConstants& c, double p, double q, double k) {
    const double tol = 1e-12;
    const double ip = 1.0 / p;
    const double iq = (q == inf) ? 0.0 : 1.0 / q;
    if (ip - iq <= tol) throw config_error("general (p,q) bound needs 1/p > 1/q");
    // first regime: p small, q large, below the interpolation corner
    if (ip + tol >= (k * k + 3.0 * k + 1.0) / ((k + 1.0) * (2.0 * k + 1.0)) &&
        iq < k / (1.0 + 2.0 * k) - tol && (k + 1.0) / k * (1.0 - ip) <= iq + tol) {
        return {1, std::pow(c.C2, 2.0 * (1.0 - ip)) * std::pow(c.C3, 2.0 * ip - 1.0) *
                       std::pow(c.C4, 1.0 - 2.0 * iq)};
    }
    // middle regime indexed by the gap length l = 1/(1/p - 1/q)
    const double l = 1.0 / (ip - iq);
    if (l >= 1.0 - tol && l <= k + 1.0 + tol && k / (k + 1.0) * iq < (1.0 - ip) - tol &&
        (1.0 - ip) < (k + 1.0) / k * iq - tol) {
        const double gap = ip - iq;
        return {2, std::pow(c.C2, 2.0 * (k + 1.0) / (2.0 * k + 1.0) * (1.0 - gap)) *
                       std::pow(c.C3, (2.0 * (k + 1.0) * gap - 1.0) / (2.0 * k + 1.0)) *
                       std::pow(c.C4, (1.0 + 2.0 * k * gap) / (2.0 * k + 1.0))};
    }
    // third regime: dual of the first
    if (ip > (k + 1.0) / (2.0 * k + 1.0) + tol &&
        iq <= k * k / ((2.0 * k + 1.0) * (k + 1.0)) + tol &&
        (k + 1.0) / k * iq <= (1.0 - ip) + tol) {
        return {3, std::pow(c.C2, 2.0 * iq) * std::pow(c.C3, 1.0 - 2.0 * iq) *
                       std::pow(c.C4, 2.0 * ip - 1.0)};
    }
    std::ostringstream msg;
    msg << "exponent pair (1/p, 1/q) = (" << ip << ", " << iq
        << ") lies in none of the three admissible regimes for decay order " << k;
    throw config_error(msg.str());
}

}  // namespace

BoundReport verify_bound(const KernelOperator& k, const AssumptionConstants& c, double p,
                         double q, double decay_k, BoundKind which, int trials,
                         std::uint64_t seed) {
    if (trials < 1) throw config_error("bound verification needs at least one trial");
    BoundReport report;
    report.which = which;
    report.p = p;
    report.q = q;
    report.k = decay_k;
    const double p_cap = 2.0 * (decay_k + 1.0) / (decay_k + 2.0);
    double target_q = q;
    switch (which) {
        case BoundKind::duality_line: {
            if (p < 1.0 || p > p_cap + 1e-12)
                throw config_error("duality-line bound needs 1 <= p <= 2(k+1)/(k+2)");
            if (std::fabs(q - dual_exponent(p)) > 1e-9 && !(p == 1.0 && q == inf))
                throw config_error("duality-line bound needs q = p*");
            report.c_combination =
                std::pow(c.C0, 2.0 - 2.0 / p) * std::pow(c.C1, 2.0 / p - 1.0);
            target_q = dual_exponent(p);
            break;
        }
        case BoundKind::local_smoothing: {
            if (p < 1.0 || p > p_cap + 1e-12)
                throw config_error("local-smoothing bound needs 1 <= p <= 2(k+1)/(k+2)");
            if (q != 2.0) throw config_error("local-smoothing bound targets the local l2 average");
            report.c_combination =
                std::pow(c.C2, 2.0 - 2.0 / p) * std::pow(c.C3, 2.0 / p - 1.0);
            break;
        }
        case BoundKind::off_duality: {
            const OffDualityCase oc = off_duality_constant(c, p, q, decay_k);
            report.case_index = oc.index;
            report.c_combination = oc.c;
            break;
        }
    }
    if (report.c_combination <= 0.0)
        throw config_error("bound verification needs positive measured constants");

    SeedStream streams(seed);
    for (int t = 0; t < trials; ++t) {
        Rng rng = streams.rng(static_cast<std::uint64_t>(t));
        std::vector<cplx> f(k.domain().size());
        for (cplx& v : f) v = rng.complex_normal();
        const double src = vec_lp(f, p);
        const std::vector<cplx> g = k.apply(f);
        double lhs = 0.0;
        if (which == BoundKind::local_smoothing)
            lhs = local_l2_average(LatticeFunction(k.codomain(), g));
        else
            lhs = vec_lp(g, target_q);
        report.ratios.push_back(lhs / (report.c_combination * src));
    }
    report.max_ratio = *std::max_element(report.ratios.begin(), report.ratios.end());
    return report;
}

InterpolationCheck riesz_thorin_check(const KernelOperator& k, const AssumptionConstants& c,
                                      double decay_k, int samples, std::uint64_t seed) {
    if (samples < 1) throw config_error("interpolation check needs at least one sample");
    const int d = k.codomain().dim();
    if (d < 2) throw config_error("interpolation check needs dimension >= 2");
    const long lo = k.codomain().half_width(d - 1);
    const long li = k.domain().half_width(d - 1);
    InterpolationCheck out;
    out.samples = samples;
    SeedStream streams(seed);
    for (int s = 0; s < samples; ++s) {
        Rng rng = streams.rng(static_cast<std::uint64_t>(s));
        const double p = rng.uniform(1.05, 1.95);
        const long xd = random_ordinate(rng, lo);
        const long yd = random_ordinate(rng, li);
        const DenseOperator t = section_operator(k, xd, yd);
        const double measured =
            opnorm_lower(t, p, dual_exponent(p), 3, seed ^ (0x9e3779b97f4a7c15ull + s), nullptr,
                         80)
                .value;
        const double bound =
            std::pow(c.C0, 2.0 - 2.0 / p) * std::pow(c.C1, 2.0 / p - 1.0) *
            std::pow(1.0 + std::fabs(static_cast<double>(xd - yd)), -decay_k * (2.0 / p - 1.0));
        const double margin = bound > 0.0 ? measured / bound : (measured > 0.0 ? inf : 0.0);
        out.worst_margin = std::max(out.worst_margin, margin);
        if (measured > bound * (1.0 + 1e-8)) ++out.violations;
    }
    return out;
}

double chi2_cutoff(double t) {
    const double a = std::fabs(t);
    if (a <= 1.0) return 1.0;
    if (a >= 2.0) return 0.0;
    const double s = 2.0 - a;
    return s * s * (3.0 - 2.0 * s);
}

double triangle_bump(double t) { return std::max(0.0, 1.0 - std::fabs(t)); }

PartitionReport dyadic_partition_check(const std::function<double(double)>& profile, int j) {
    if (j < 0 || j > 20) throw config_error("dyadic level out of range");
    PartitionReport out;
    const long scale = 1L << j;
    const long zr = 2 * scale;
    long double lj = 0.0L;
    for (long z = -zr; z <= zr; ++z)
        lj += chi2_cutoff(static_cast<double>(z) / static_cast<double>(scale));
    out.l_j = static_cast<double>(lj);
    out.in_range = out.l_j >= static_cast<double>(scale) - 1e-9 &&
                   out.l_j <= 4.0 * static_cast<double>(scale) + 1e-9;
    const long w = 2 * scale + 2;
    const double s2 = static_cast<double>(2 * scale);
    double max_err = 0.0;
    for (long xd = -w; xd <= w; ++xd) {
        for (long yd = -w; yd <= w; ++yd) {
            const double lhs =
                profile(static_cast<double>(xd - yd) / static_cast<double>(scale)) * out.l_j;
            const long base = xd + yd;
            double rhs = 0.0;
            for (long z = base - zr; z <= base + zr; ++z) {
                const double a = static_cast<double>(2 * xd - z) / s2;
                const double b = static_cast<double>(2 * yd - z) / s2;
                rhs += profile(a - b) * chi2_cutoff(a + b);
            }
            max_err = std::max(max_err, std::fabs(lhs - rhs));
        }
    }
    out.max_error = max_err;
    return out;
}

GrowthReport dyadic_growth_check(const KernelOperator& k,
                                 const std::function<double(double)>& profile, double p,
                                 const std::vector<int>& levels, int restarts,
                                 std::uint64_t seed) {
    if (levels.size() < 2) throw config_error("growth check needs at least two levels");
    GrowthReport out;
    out.levels = levels;
    const int d = k.codomain().dim();
    const auto* conv = dynamic_cast<const ConvolutionOperator*>(&k);
    std::vector<double> xs, ys;
    for (int j : levels) {
        if (j < 0 || j > 20) throw config_error("dyadic level out of range");
        const double scale = static_cast<double>(1L << j);
        double norm = 0.0;
        if (conv != nullptr) {
            LatticeFunction ker = conv->kernel();
            ker.box.for_each_site([&](std::size_t idx, const std::vector<long>& u) {
                ker.values[idx] *=
                    profile(static_cast<double>(u[static_cast<std::size_t>(d - 1)]) / scale);
            });
            const ConvolutionOperator kc(k.codomain(), k.domain(), std::move(ker));
            norm = opnorm_lower(kc, p, 2.0, restarts, seed + static_cast<std::uint64_t>(j)).value;
        } else {
            const DenseOperator kd = DenseOperator::from_function(
                k.codomain(), k.domain(),
                [&](const std::vector<long>& x, const std::vector<long>& y) {
                    return k.entry(k.codomain().index_of(x), k.domain().index_of(y)) *
                           profile(static_cast<double>(x[static_cast<std::size_t>(d - 1)] -
                                                       y[static_cast<std::size_t>(d - 1)]) /
                                   scale);
                });
            norm = opnorm_lower(kd, p, 2.0, restarts, seed + static_cast<std::uint64_t>(j)).value;
        }
        out.norms.push_back(norm);
        if (norm > 0.0) {
            xs.push_back(static_cast<double>(j));
            ys.push_back(std::log2(norm));
        }
    }
    if (xs.size() >= 2) out.slope = fit_line(xs, ys).slope;
    return out;
}

}  // namespace lapbox
