#include "lapbox/resolvent.hpp"

#include <gsl/gsl_sf_bessel.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "lapbox/fft.hpp"
#include "lapbox/quadrature.hpp"

namespace lapbox {

SpectralPoint::SpectralPoint(double lambda_, double eps_, HalfPlane side_)
    : lambda(lambda_), eps(eps_), side(side_) {
    if (!(eps >= 0.0) || !std::isfinite(eps) || !std::isfinite(lambda))
        throw config_error("spectral point needs finite lambda and eps >= 0");
}

SpectralPoint SpectralPoint::from(cplx z) {
    return SpectralPoint(z.real(), std::abs(z.imag()),
                         z.imag() >= 0.0 ? HalfPlane::upper : HalfPlane::lower);
}

namespace {

double band_distance(double lambda, int d) {
    if (lambda < 0.0) return -lambda;
    double top = 4.0 * d;
    if (lambda > top) return lambda - top;
    return 0.0;
}

// The integral engines depend on a displacement only through the multiset of
// |x_a| (and the parity-carrying total P = sum |x_a|), so evaluation runs on
// deduplicated sorted keys and scatters back.
struct KeyedSet {
    std::vector<std::vector<long>> keys;  // sorted absolute tuples
    std::vector<long> key_total;          // P per key
    std::vector<std::size_t> to_key;      // displacement index -> key index
    long max_order = 0;                   // largest |x_a| over the set
};

KeyedSet build_keys(int d, const std::vector<std::vector<long>>& xs) {
    KeyedSet set;
    set.to_key.resize(xs.size());
    std::map<std::vector<long>, std::size_t> seen;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (static_cast<int>(xs[i].size()) != d)
            throw config_error("displacement dimension mismatch");
        std::vector<long> key(xs[i].size());
        for (std::size_t a = 0; a < key.size(); ++a) key[a] = std::labs(xs[i][a]);
        std::sort(key.begin(), key.end());
        auto it = seen.find(key);
        if (it == seen.end()) {
            std::size_t id = set.keys.size();
            seen.emplace(key, id);
            long total = 0;
            for (long v : key) total += v;
            set.max_order = std::max(set.max_order, key.empty() ? 0 : key.back());
            set.key_total.push_back(total);
            set.keys.push_back(std::move(key));
            set.to_key[i] = id;
        } else {
            set.to_key[i] = it->second;
        }
    }
    return set;
}

// ---------------------------------------------------------------------------
// Torus engine: G_N(x) = N^{-d} sum_j e^{+2pi i x.j/N} / (h0(j/N) - z).

long torus_mesh_size(int d, const SpectralPoint& z, const QuadratureSpec& spec,
                     long max_coord) {
    double eps_eff = z.eps > 0.0 ? z.eps : band_distance(z.lambda, d);
    if (!(eps_eff > 0.0))
        throw config_error("torus mesh rule needs eps > 0 or an off-band energy");
    long n = spec.n_per_axis > 0
                 ? spec.n_per_axis
                 : static_cast<long>(std::ceil(spec.mesh_safety / eps_eff));
    n = std::max({n, 2 * max_coord + 2, 4L});
    return next_fast_even(n);
}

bool grid_fits(long n, int d, long max_points) {
    long double v = 1.0L;
    for (int a = 0; a < d; ++a) v *= static_cast<long double>(n);
    return v <= static_cast<long double>(max_points);
}

// Reciprocal symbol sampled over the full grid, inverse transformed in place.
std::vector<cplx> torus_kernel_grid(int d, long n, cplx z) {
    std::vector<long> dims(static_cast<std::size_t>(d), n);
    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(n);
    std::vector<double> table(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) {
        double s = std::sin(pi * static_cast<double>(j) / static_cast<double>(n));
        table[static_cast<std::size_t>(j)] = 4.0 * s * s;
    }
    std::vector<cplx> data(total);
    std::vector<long> idx(static_cast<std::size_t>(d), 0);
    std::size_t flat = 0;
    while (flat < total) {
        double base = 0.0;
        for (int a = 0; a + 1 < d; ++a) base += table[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
        for (long j = 0; j < n; ++j) {
            data[flat++] = 1.0 / (cplx(base + table[static_cast<std::size_t>(j)]) - z);
        }
        for (int a = d - 2; a >= 0; --a) {
            if (++idx[static_cast<std::size_t>(a)] < n) break;
            idx[static_cast<std::size_t>(a)] = 0;
        }
    }
    fft_inplace(data, dims, +1);
    double scale = 1.0 / static_cast<double>(total);
    for (cplx& v : data) v *= scale;
    return data;
}

std::vector<cplx> torus_gather(const std::vector<cplx>& grid, int d, long n,
                               const std::vector<std::vector<long>>& xs) {
    std::vector<cplx> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::size_t flat = 0;
        for (int a = 0; a < d; ++a) {
            long m = ((xs[i][static_cast<std::size_t>(a)] % n) + n) % n;
            flat = flat * static_cast<std::size_t>(n) + static_cast<std::size_t>(m);
        }
        out[i] = grid[flat];
    }
    return out;
}

std::vector<cplx> torus_values(int d, const std::vector<std::vector<long>>& xs,
                               const SpectralPoint& z, const QuadratureSpec& spec,
                               long max_coord, double* residual) {
    long n = torus_mesh_size(d, z, spec, max_coord);
    long n2 = next_fast_even(2 * n);
    if (!grid_fits(n2, d, spec.max_grid_points))
        throw budget_error("torus grid (with its doubled-mesh check) exceeds the point budget");
    auto coarse = torus_gather(torus_kernel_grid(d, n, z.value()), d, n, xs);
    auto fine = torus_gather(torus_kernel_grid(d, n2, z.value()), d, n2, xs);
    double diff = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
        diff = std::max(diff, std::abs(fine[i] - coarse[i]));
    if (residual) *residual = diff;
    return fine;
}

// ---------------------------------------------------------------------------
// Time-integral engine, upper half-plane:
//   G(x; lambda + i eps) = i^{P+1} int_0^inf e^{i(lambda-2d)s} e^{-eps s}
//                          prod_a J_{|x_a|}(2s) ds,  P = sum_a |x_a|.
// The uniform bound |J_n(y)| <= 0.6749 y^{-1/3} certifies the truncation tail.

double bessel_envelope(double s, int d) {
    double e = std::min(1.0, 0.6749 / std::cbrt(2.0 * s));
    return std::pow(e, d);
}

struct TimePlan {
    double cutoff = 0.0;
    double panel = 0.0;
    int order = 16;
    double tail = 0.0;
};

TimePlan plan_time_integral(int d, long max_order, double lambda_scale, double eps,
                            double tol) {
    TimePlan plan;
    double omega = lambda_scale + 2.0 * d + 1.0;
    plan.panel = std::min(1.0, 4.5 / omega);
    double s = std::max(8.0, 8.0 + 0.75 * static_cast<double>(max_order));
    double target = 0.4 * tol;
    while (bessel_envelope(s, d) * std::exp(-eps * s) / eps > target && s < 1e9) s *= 1.25;
    plan.cutoff = s;
    plan.tail = bessel_envelope(s, d) * std::exp(-eps * s) / eps;
    return plan;
}

// One quadrature sweep: acc[l][k] = int_0^S e^{i(lambda_l - 2d)s} e^{-eps s}
// prod_a J_{key_a}(2s) ds over the given panel width.
std::vector<std::vector<cplx>> time_sweep(int d, const std::vector<std::vector<long>>& keys,
                                          const std::vector<double>& lambdas, double eps,
                                          double cutoff, double panel, int order) {
    const GaussRule& rule = gauss_legendre(order);
    long panels = static_cast<long>(std::ceil(cutoff / panel));
    std::size_t nk = keys.size(), nl = lambdas.size();
    long max_order = 0;
    for (const auto& k : keys) max_order = std::max(max_order, k.empty() ? 0 : k.back());

    std::vector<std::vector<cplx>> acc(nl, std::vector<cplx>(nk, cplx(0.0, 0.0)));
    std::vector<double> bessel(static_cast<std::size_t>(max_order) + 1);
    std::vector<double> prod(nk);
    std::vector<double> shifted(nl);
    for (std::size_t l = 0; l < nl; ++l) shifted[l] = lambdas[l] - 2.0 * d;

    for (long p = 0; p < panels; ++p) {
        double a = panel * static_cast<double>(p);
        double b = std::min(cutoff, a + panel);
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            double s = mid + half * rule.nodes[q];
            double w = half * rule.weights[q] * std::exp(-eps * s);
            gsl_sf_bessel_Jn_array(0, static_cast<int>(max_order), 2.0 * s, bessel.data());
            for (std::size_t k = 0; k < nk; ++k) {
                double pr = 1.0;
                for (long ord : keys[k]) pr *= bessel[static_cast<std::size_t>(ord)];
                prod[k] = pr;
            }
            for (std::size_t l = 0; l < nl; ++l) {
                double ang = shifted[l] * s;
                cplx c = w * cplx(std::cos(ang), std::sin(ang));
                cplx* row = acc[l].data();
                for (std::size_t k = 0; k < nk; ++k) row[k] += c * prod[k];
            }
        }
    }
    return acc;
}

std::vector<std::vector<cplx>> time_integral_values(
    int d, const KeyedSet& set, const std::vector<double>& lambdas, double eps,
    const QuadratureSpec& spec, double* residual) {
    if (!(eps > 0.0)) throw config_error("time integral engine needs eps > 0");
    double lambda_scale = 0.0;
    for (double l : lambdas) lambda_scale = std::max(lambda_scale, std::abs(l - 2.0 * d));
    TimePlan plan = plan_time_integral(d, set.max_order, lambda_scale, eps, spec.tol);

    double quad_err = 0.0;
    std::vector<std::vector<cplx>> acc;
    for (int attempt = 0; attempt < 3; ++attempt) {
        acc = time_sweep(d, set.keys, lambdas, eps, plan.cutoff, plan.panel, plan.order);

        // Panel-halving error probe on a key subsample; the panel error is
        // uniform over the integrand family, so a stride sample suffices.
        std::vector<std::vector<long>> probe_keys;
        std::vector<std::size_t> probe_ids;
        std::size_t stride = std::max<std::size_t>(1, set.keys.size() / 24);
        for (std::size_t k = 0; k < set.keys.size(); k += stride) {
            probe_keys.push_back(set.keys[k]);
            probe_ids.push_back(k);
        }
        auto probe = time_sweep(d, probe_keys, lambdas, eps, plan.cutoff, plan.panel * 0.5,
                                plan.order);
        quad_err = 0.0;
        for (std::size_t l = 0; l < lambdas.size(); ++l)
            for (std::size_t k = 0; k < probe_ids.size(); ++k)
                quad_err = std::max(quad_err, std::abs(probe[l][k] - acc[l][probe_ids[k]]));
        if (quad_err <= 0.6 * spec.tol) break;
        plan.panel *= 0.5;
    }
    if (residual) *residual = quad_err + plan.tail;

    for (std::size_t l = 0; l < lambdas.size(); ++l)
        for (std::size_t k = 0; k < set.keys.size(); ++k)
            acc[l][k] *= unit_power_i(set.key_total[k] + 1);
    return acc;
}

// ---------------------------------------------------------------------------
// Heat-semigroup engine for real energies off the band:
//   G(x; E) = int_0^inf e^{Et} prod_a e^{-2t} I_{|x_a|}(2t) dt,  E < 0,
// and G(x; E) = -(-1)^P G(x; 4d - E) for E > 4d by the parity conjugation
// that maps H0 to 4d - H0.

std::vector<double> heat_sweep(int d, const std::vector<std::vector<long>>& keys, double e_neg,
                               const std::vector<double>& breakpoints, int order) {
    const GaussRule& rule = gauss_legendre(order);
    long max_order = 0;
    for (const auto& k : keys) max_order = std::max(max_order, k.empty() ? 0 : k.back());
    std::vector<double> bessel(static_cast<std::size_t>(max_order) + 1);
    std::vector<double> acc(keys.size(), 0.0);
    for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        double a = breakpoints[p], b = breakpoints[p + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            double t = mid + half * rule.nodes[q];
            if (t <= 0.0) continue;
            double w = half * rule.weights[q] * std::exp(e_neg * t);
            gsl_sf_bessel_In_scaled_array(0, static_cast<int>(max_order), 2.0 * t,
                                          bessel.data());
            for (std::size_t k = 0; k < keys.size(); ++k) {
                double pr = w;
                for (long ord : keys[k]) pr *= bessel[static_cast<std::size_t>(ord)];
                acc[k] += pr;
            }
        }
    }
    return acc;
}

std::vector<cplx> laplace_values(int d, const KeyedSet& set, double energy,
                                 const QuadratureSpec& spec, double* residual) {
    double top = 4.0 * d;
    bool flipped = energy > top;
    double e_neg = flipped ? top - energy : energy;
    if (!(e_neg < 0.0))
        throw config_error("heat-transform engine needs a real energy outside the band");
    double gap = -e_neg;

    // Truncation so that int_T^inf e^{-gap t} (4 pi t)^{-d/2} dt <= 0.4 tol.
    double t_cut = 4.0;
    auto tail_at = [&](double t) {
        return std::exp(-gap * t) * std::min(1.0, std::pow(4.0 * pi * t, -0.5 * d)) / gap;
    };
    while (tail_at(t_cut) > 0.4 * spec.tol && t_cut < 1e13) t_cut *= 1.4;

    auto bp = geometric_breakpoints(0.0, t_cut, 0.25, 1.35);
    auto coarse = heat_sweep(d, set.keys, e_neg, bp, 24);
    auto fine = heat_sweep(d, set.keys, e_neg, bp, 32);
    double diff = 0.0;
    for (std::size_t k = 0; k < set.keys.size(); ++k)
        diff = std::max(diff, std::abs(fine[k] - coarse[k]));
    if (residual) *residual = diff + tail_at(t_cut) * gap;

    std::vector<cplx> out(set.keys.size());
    for (std::size_t k = 0; k < set.keys.size(); ++k) {
        double v = fine[k];
        if (flipped) v = (set.key_total[k] % 2 == 0) ? -v : v;
        out[k] = cplx(v, 0.0);
    }
    return out;
}

std::vector<cplx> scatter_to_displacements(const std::vector<cplx>& per_key,
                                           const KeyedSet& set) {
    std::vector<cplx> out(set.to_key.size());
    for (std::size_t i = 0; i < set.to_key.size(); ++i) out[i] = per_key[set.to_key[i]];
    return out;
}

GreenEngine resolve_engine(int d, const SpectralPoint& z, const QuadratureSpec& spec,
                           long max_coord) {
    if (spec.engine != GreenEngine::automatic) return spec.engine;
    if (z.on_axis()) return GreenEngine::laplace_transform;
    long n = torus_mesh_size(d, z, spec, max_coord);
    if (grid_fits(next_fast_even(2 * n), d, spec.max_grid_points))
        return GreenEngine::torus_grid;
    return GreenEngine::time_integral;
}

void validate_point(int d, const SpectralPoint& z) {
    if (d < 1) throw config_error("dimension must be positive");
    if (z.on_axis() && band_distance(z.lambda, d) == 0.0)
        throw config_error(
            "eps = 0 inside the band has no direct kernel; use limiting_absorption");
}

}  // namespace

std::vector<cplx> green_values(int d, const std::vector<std::vector<long>>& xs,
                               SpectralPoint z, const QuadratureSpec& spec,
                               double* residual) {
    if (xs.empty()) return {};
    validate_point(d, z);
    KeyedSet set = build_keys(d, xs);
    GreenEngine engine = resolve_engine(d, z, spec, set.max_order);

    switch (engine) {
        case GreenEngine::torus_grid:
            return torus_values(d, xs, z, spec, set.max_order, residual);
        case GreenEngine::time_integral: {
            if (z.on_axis())
                throw config_error("time integral engine needs eps > 0");
            auto per_key =
                time_integral_values(d, set, {z.lambda}, z.eps, spec, residual)[0];
            if (z.side == HalfPlane::lower)
                for (cplx& v : per_key) v = std::conj(v);
            return scatter_to_displacements(per_key, set);
        }
        case GreenEngine::laplace_transform: {
            if (!z.on_axis())
                throw config_error("heat-transform engine handles real energies only");
            auto per_key = laplace_values(d, set, z.lambda, spec, residual);
            return scatter_to_displacements(per_key, set);
        }
        default:
            throw config_error("unresolved kernel engine");
    }
}

std::vector<std::vector<cplx>> green_values_multi_lambda(
    int d, const std::vector<std::vector<long>>& xs, const std::vector<double>& lambdas,
    double eps, HalfPlane side, const QuadratureSpec& spec, double* residual) {
    if (xs.empty() || lambdas.empty()) return {};
    if (!(eps > 0.0))
        throw config_error("multi-energy kernel batches require eps > 0");
    KeyedSet set = build_keys(d, xs);
    SpectralPoint probe(lambdas.front(), eps, side);
    GreenEngine engine = resolve_engine(d, probe, spec, set.max_order);

    if (engine == GreenEngine::time_integral) {
        auto per_key = time_integral_values(d, set, lambdas, eps, spec, residual);
        std::vector<std::vector<cplx>> out(lambdas.size());
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            if (side == HalfPlane::lower)
                for (cplx& v : per_key[l]) v = std::conj(v);
            out[l] = scatter_to_displacements(per_key[l], set);
        }
        return out;
    }
    std::vector<std::vector<cplx>> out(lambdas.size());
    double worst = 0.0;
    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        double r = 0.0;
        out[l] = green_values(d, xs, SpectralPoint(lambdas[l], eps, side), spec, &r);
        worst = std::max(worst, r);
    }
    if (residual) *residual = worst;
    return out;
}

cplx green_point(int d, const std::vector<long>& x, SpectralPoint z,
                 const QuadratureSpec& spec, double* residual) {
    return green_values(d, {x}, z, spec, residual)[0];
}

GreenKernel green_kernel(int d, const LatticeBox& displacement_box, SpectralPoint z,
                         const QuadratureSpec& spec) {
    if (displacement_box.dim() != d)
        throw config_error("displacement box dimension mismatch");
    validate_point(d, z);
    GreenKernel kernel(d, z, displacement_box);
    std::vector<std::vector<long>> xs;
    xs.reserve(displacement_box.size());
    displacement_box.for_each_site(
        [&](std::size_t, const std::vector<long>& x) { xs.push_back(x); });
    double residual = 0.0;
    kernel.values = green_values(d, xs, z, spec, &residual);
    kernel.residual_estimate = residual;
    kernel.engine_used = resolve_engine(d, z, spec, build_keys(d, xs).max_order);
    return kernel;
}

cplx green_1d_closed_form(long x, cplx z) {
    cplx b = 2.0 - z;  // r + 1/r
    cplx disc = std::sqrt(b * b - 4.0);
    cplx r = 0.5 * (b - disc);
    if (std::abs(r) > 1.0) r = 0.5 * (b + disc);
    if (std::abs(r) >= 1.0)
        throw config_error("closed form needs z off the spectrum or strictly complex");
    return std::pow(r, std::labs(x)) / (1.0 / r - r);
}

BoundaryValues limiting_absorption(int d, const std::vector<std::vector<long>>& xs,
                                   double lambda, HalfPlane side, QuadratureSpec spec) {
    if (xs.empty()) return {};
    KeyedSet set = build_keys(d, xs);
    double eps0 = spec.eps0;
    if (!(eps0 > 0.0)) {
        eps0 = 0.15 / (1.0 + static_cast<double>(set.max_order));
        eps0 = std::min(0.02, std::max(5e-4, eps0));
    }
    int stages = std::max(1, spec.richardson_stages);

    BoundaryValues out;
    out.eps_schedule.resize(static_cast<std::size_t>(stages) + 1);
    QuadratureSpec sample_spec = spec;
    sample_spec.tol = 0.25 * spec.tol;

    std::vector<std::vector<cplx>> samples(out.eps_schedule.size());
    double sample_residual = 0.0;
    for (std::size_t k = 0; k < out.eps_schedule.size(); ++k) {
        double eps = eps0 * std::exp2(-static_cast<double>(k));
        out.eps_schedule[k] = eps;
        double r = 0.0;
        samples[k] = green_values(d, xs, SpectralPoint(lambda, eps, side), sample_spec, &r);
        sample_residual = std::max(sample_residual, r);
    }

    out.values.resize(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        std::vector<cplx> series(samples.size());
        for (std::size_t k = 0; k < samples.size(); ++k) series[k] = samples[k][i];
        RichardsonResult r = richardson_extrapolate(series);
        out.values[i] = r.value;
        out.residual = std::max(out.residual, r.residual);
        out.diverged = out.diverged || r.diverged;
    }
    out.residual += sample_residual;
    return out;
}

BoundaryValuesMulti limiting_absorption_multi(int d, const std::vector<std::vector<long>>& xs,
                                              const std::vector<double>& lambdas,
                                              HalfPlane side, QuadratureSpec spec) {
    BoundaryValuesMulti out;
    out.per_lambda.resize(lambdas.size());
    if (xs.empty() || lambdas.empty()) return out;
    KeyedSet set = build_keys(d, xs);
    double eps0 = spec.eps0;
    if (!(eps0 > 0.0)) {
        eps0 = 0.15 / (1.0 + static_cast<double>(set.max_order));
        eps0 = std::min(0.02, std::max(5e-4, eps0));
    }
    int stages = std::max(1, spec.richardson_stages);

    out.eps_schedule.resize(static_cast<std::size_t>(stages) + 1);
    QuadratureSpec sample_spec = spec;
    sample_spec.tol = 0.25 * spec.tol;

    // samples[k][l][i] = G(xs[i]; lambdas[l] + i eps_k); one engine pass per k
    std::vector<std::vector<std::vector<cplx>>> samples(out.eps_schedule.size());
    double sample_residual = 0.0;
    for (std::size_t k = 0; k < out.eps_schedule.size(); ++k) {
        double eps = eps0 * std::exp2(-static_cast<double>(k));
        out.eps_schedule[k] = eps;
        double r = 0.0;
        samples[k] = green_values_multi_lambda(d, xs, lambdas, eps, side, sample_spec, &r);
        sample_residual = std::max(sample_residual, r);
    }

    for (std::size_t l = 0; l < lambdas.size(); ++l) {
        BoundaryValues& bv = out.per_lambda[l];
        bv.eps_schedule = out.eps_schedule;
        bv.values.resize(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            std::vector<cplx> series(samples.size());
            for (std::size_t k = 0; k < samples.size(); ++k) series[k] = samples[k][l][i];
            RichardsonResult r = richardson_extrapolate(series);
            bv.values[i] = r.value;
            bv.residual = std::max(bv.residual, r.residual);
            bv.diverged = bv.diverged || r.diverged;
        }
        bv.residual += sample_residual;
    }
    return out;
}

std::vector<cplx> shifted_hamiltonian_apply_periodic(const std::vector<cplx>& in,
                                                     const std::vector<long>& dims,
                                                     cplx shift) {
    std::size_t total = 1;
    for (long v : dims) total *= static_cast<std::size_t>(v);
    if (in.size() != total) throw config_error("grid data does not match its shape");
    int d = static_cast<int>(dims.size());
    std::vector<cplx> out(in.size());
    cplx diag = cplx(2.0 * d, 0.0) - shift;
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = diag * in[i];

    std::vector<std::size_t> stride(dims.size());
    std::size_t s = 1;
    for (std::size_t a = dims.size(); a-- > 0;) {
        stride[a] = s;
        s *= static_cast<std::size_t>(dims[a]);
    }
    for (std::size_t a = 0; a < dims.size(); ++a) {
        std::size_t n = static_cast<std::size_t>(dims[a]);
        std::size_t inner = stride[a];
        std::size_t block = inner * n;
        for (std::size_t base = 0; base < total; base += block) {
            for (std::size_t j = 0; j < n; ++j) {
                std::size_t up = (j + 1 == n) ? 0 : j + 1;
                std::size_t down = (j == 0) ? n - 1 : j - 1;
                const cplx* src_up = in.data() + base + up * inner;
                const cplx* src_down = in.data() + base + down * inner;
                cplx* dst = out.data() + base + j * inner;
                for (std::size_t i = 0; i < inner; ++i) dst[i] -= src_up[i] + src_down[i];
            }
        }
    }
    return out;
}

std::vector<cplx> resolvent_apply_grid(const std::vector<cplx>& data, const DualGrid& grid,
                                       SpectralPoint z) {
    if (z.on_axis())
        throw config_error("resolvent_apply needs eps > 0; boundary values go through "
                           "limiting_absorption");
    if (data.size() != grid.size())
        throw config_error("grid data does not match the dual grid size");
    std::vector<cplx> work = data;
    const auto& dims = grid.points_per_axis();
    fft_inplace(work, dims, -1);

    cplx zz = z.value();
    std::vector<std::vector<double>> tables(dims.size());
    for (std::size_t a = 0; a < dims.size(); ++a) {
        tables[a].resize(static_cast<std::size_t>(dims[a]));
        for (long j = 0; j < dims[a]; ++j) {
            double sn = std::sin(pi * static_cast<double>(j) / static_cast<double>(dims[a]));
            tables[a][static_cast<std::size_t>(j)] = 4.0 * sn * sn;
        }
    }
    std::vector<long> idx(dims.size(), 0);
    std::size_t flat = 0;
    std::size_t last = dims.size() - 1;
    while (flat < work.size()) {
        double base = 0.0;
        for (std::size_t a = 0; a < last; ++a) base += tables[a][static_cast<std::size_t>(idx[a])];
        for (long j = 0; j < dims[last]; ++j) {
            work[flat] /= cplx(base + tables[last][static_cast<std::size_t>(j)]) - zz;
            ++flat;
        }
        for (std::size_t a = last; a-- > 0;) {
            if (++idx[a] < dims[a]) break;
            idx[a] = 0;
        }
    }
    fft_inplace(work, dims, +1);
    double scale = 1.0 / static_cast<double>(grid.size());
    for (cplx& v : work) v *= scale;
    return work;
}

LatticeFunction resolvent_apply(const LatticeFunction& f, const DualGrid& grid,
                                SpectralPoint z) {
    auto data = embed_on_grid(f, grid);
    auto applied = resolvent_apply_grid(data, grid, z);
    return sample_from_grid(applied, grid, f.box);
}

double resolvent_identity_residual(const LatticeFunction& f, const DualGrid& grid,
                                   SpectralPoint z) {
    auto data = embed_on_grid(f, grid);
    double norm = grid_l2(data);
    if (!(norm > 0.0)) throw config_error("identity residual needs a nonzero function");
    auto applied = resolvent_apply_grid(data, grid, z);
    auto back = shifted_hamiltonian_apply_periodic(applied, grid.points_per_axis(), z.value());
    long double acc = 0.0L;
    for (std::size_t i = 0; i < back.size(); ++i) acc += std::norm(back[i] - data[i]);
    return static_cast<double>(std::sqrt(acc)) / norm;
}

KernelDecayResult kernel_decay_fit(int d, SpectralPoint z, const std::vector<long>& direction,
                                   long r_lo, long r_hi, const QuadratureSpec& spec,
                                   double max_rms) {
    if (static_cast<int>(direction.size()) != d)
        throw config_error("direction dimension mismatch");
    long dir_norm2 = 0;
    for (long c : direction) dir_norm2 += c * c;
    if (dir_norm2 == 0) throw config_error("direction must be nonzero");
    if (r_lo < 1 || r_hi <= r_lo) throw config_error("radius window must satisfy 1 <= lo < hi");

    KernelDecayResult out;
    std::vector<std::vector<long>> xs;
    for (long r = r_lo; r <= r_hi; ++r) {
        std::vector<long> x(direction.size());
        for (std::size_t a = 0; a < direction.size(); ++a) x[a] = r * direction[a];
        xs.push_back(std::move(x));
        out.radii.push_back(static_cast<double>(r) * std::sqrt(static_cast<double>(dir_norm2)));
    }

    if (z.on_axis() && band_distance(z.lambda, d) == 0.0) {
        BoundaryValues bv = limiting_absorption(d, xs, z.lambda, z.side, spec);
        out.values = bv.values;
        out.boundary_residual = bv.residual;
        out.diverged = bv.diverged;
    } else {
        double r = 0.0;
        out.values = green_values(d, xs, z, spec, &r);
        out.boundary_residual = r;
    }

    std::vector<double> mags;
    mags.reserve(out.values.size());
    for (const cplx& v : out.values) mags.push_back(std::abs(v));
    try {
        out.fit = fit_power_law(out.radii, mags);
    } catch (const config_error& err) {
        out.accepted = false;
        out.reason = err.what();
        return out;
    }
    if (out.fit.rms_residual > max_rms) {
        out.accepted = false;
        out.reason = "log-log rms residual " + fmt_g17(out.fit.rms_residual) +
                     " exceeds threshold " + fmt_g17(max_rms) +
                     "; decay is not power-like on this window";
    } else {
        out.accepted = true;
    }
    return out;
}

}  // namespace lapbox
