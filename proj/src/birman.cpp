#include "lapbox/birman.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lapbox/common.hpp"

namespace lapbox {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

bool in_band(double lambda, int d) { return lambda >= 0.0 && lambda <= 4.0 * d; }

Eigen::MatrixXcd to_eigen(const BSMatrix& m) {
    Eigen::MatrixXcd a(m.n, m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t j = 0; j < m.n; ++j) a(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j)) =
            m.entries[i * m.n + j];
    return a;
}

}  // namespace

Potential::Potential(int d, const std::vector<std::pair<std::vector<long>, double>>& sites,
                     double support_threshold)
    : d_(d), threshold_(support_threshold) {
    if (d < 1) throw config_error("dimension must be positive");
    if (!(support_threshold >= 0.0)) throw config_error("support threshold must be >= 0");
    std::map<std::vector<long>, double> acc;
    for (const auto& [x, v] : sites) {
        if (static_cast<int>(x.size()) != d)
            throw config_error("potential site dimension mismatch");
        acc[x] += v;
    }
    for (const auto& [x, v] : acc) {
        if (std::fabs(v) < threshold_) continue;
        sites_.push_back(x);
        values_.push_back(v);
    }
}

Potential Potential::from_profile(int d, const LatticeBox& window,
                                  const std::function<double(const std::vector<long>&)>& v,
                                  double support_threshold) {
    if (window.dim() != d) throw config_error("profile window dimension mismatch");
    std::vector<std::pair<std::vector<long>, double>> sites;
    window.for_each_site([&](std::size_t, const std::vector<long>& x) {
        const double val = v(x);
        if (std::fabs(val) >= support_threshold) sites.emplace_back(x, val);
    });
    return Potential(d, sites, support_threshold);
}

double Potential::w1(std::size_t i) const {
    return sign_of(values_[i]) * std::sqrt(std::fabs(values_[i]));
}

double Potential::w2(std::size_t i) const { return std::sqrt(std::fabs(values_[i])); }

long Potential::truncation_radius() const {
    long r = -1;
    for (const auto& x : sites_)
        for (long c : x) r = std::max(r, std::labs(c));
    return r;
}

double Potential::min_value() const {
    double m = 0.0;
    for (double v : values_) m = std::min(m, v);
    return m;
}

double Potential::max_value() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, v);
    return m;
}

bool Potential::attractive() const {
    if (values_.empty()) return false;
    for (double v : values_)
        if (v >= 0.0) return false;
    return true;
}

bool Potential::repulsive() const {
    if (values_.empty()) return false;
    for (double v : values_)
        if (v <= 0.0) return false;
    return true;
}

LatticeBox Potential::bounding_box() const {
    // Smallest valid box containing the support; boxes never shrink below
    // half-width one, so a potential concentrated at the origin still gets a
    // usable box.
    std::vector<long> half(static_cast<std::size_t>(d_), 1);
    for (const auto& x : sites_)
        for (int a = 0; a < d_; ++a)
            half[static_cast<std::size_t>(a)] =
                std::max(half[static_cast<std::size_t>(a)], std::labs(x[static_cast<std::size_t>(a)]));
    return LatticeBox(half);
}

BSMatrix bs_matrix(const Potential& v, SpectralPoint z, const QuadratureSpec& quad) {
    BSMatrix out;
    out.z = z;
    out.n = v.size();
    if (out.n == 0) return out;

    const std::size_t n = out.n;
    std::map<std::vector<long>, std::size_t> index;
    std::vector<std::vector<long>> xs;
    std::vector<std::size_t> pair_key(n * n);
    std::vector<long> diff(static_cast<std::size_t>(v.dim()));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            for (int a = 0; a < v.dim(); ++a)
                diff[static_cast<std::size_t>(a)] = v.sites()[i][static_cast<std::size_t>(a)] -
                                                    v.sites()[j][static_cast<std::size_t>(a)];
            auto [it, fresh] = index.emplace(diff, xs.size());
            if (fresh) xs.push_back(diff);
            pair_key[i * n + j] = it->second;
        }
    }

    std::vector<cplx> g;
    if (z.on_axis() && in_band(z.lambda, v.dim())) {
        BoundaryValues bv = limiting_absorption(v.dim(), xs, z.lambda, z.side, quad);
        g = std::move(bv.values);
        out.residual = bv.residual;
        out.diverged = bv.diverged;
    } else {
        double r = 0.0;
        g = green_values(v.dim(), xs, z, quad, &r);
        out.residual = r;
    }

    out.entries.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.entries[i * n + j] = v.w1(i) * g[pair_key[i * n + j]] * v.w2(j);
    return out;
}

double bs_min_singular(const BSMatrix& m) {
    if (m.n == 0) return 1.0;
    Eigen::MatrixXcd a = to_eigen(m);
    for (std::size_t i = 0; i < m.n; ++i)
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += 1.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(a);
    return svd.singularValues().minCoeff();
}

double bs_norm(const BSMatrix& m) {
    if (m.n == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
    return svd.singularValues().maxCoeff();
}

std::vector<double> bs_singular_values(const BSMatrix& m) {
    if (m.n == 0) return {};
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(to_eigen(m));
    std::vector<double> out(m.n);
    for (std::size_t i = 0; i < m.n; ++i)
        out[i] = svd.singularValues()(static_cast<Eigen::Index>(i));
    return out;
}

std::vector<double> dense_hamiltonian(const Potential& v, const LatticeBox& box) {
    if (box.dim() != v.dim()) throw config_error("box dimension mismatch");
    std::map<std::vector<long>, double> pot;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!box.contains(v.sites()[i]))
            throw config_error("potential support must lie inside the eigensolve box");
        pot[v.sites()[i]] = v.values()[i];
    }
    const std::size_t n = box.size();
    const int d = box.dim();
    std::vector<double> h(n * n, 0.0);
    box.for_each_site([&](std::size_t i, const std::vector<long>& x) {
        double diag = 2.0 * d;
        auto it = pot.find(x);
        if (it != pot.end()) diag += it->second;
        h[i * n + i] = diag;
        std::vector<long> y = x;
        for (int a = 0; a < d; ++a) {
            for (long step : {-1L, 1L}) {
                y[static_cast<std::size_t>(a)] = x[static_cast<std::size_t>(a)] + step;
                if (box.contains(y)) h[i * n + box.index_of(y)] = -1.0;
            }
            y[static_cast<std::size_t>(a)] = x[static_cast<std::size_t>(a)];
        }
    });
    return h;
}

BoxSpectrum boxed_bound_states(const Potential& v, const LatticeBox& box, double margin,
                               bool want_vectors) {
    const std::vector<double> h = dense_hamiltonian(v, box);
    const Eigen::Index n = static_cast<Eigen::Index>(box.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            m(i, j) = h[static_cast<std::size_t>(i) * box.size() + static_cast<std::size_t>(j)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        m, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    BoxSpectrum out;
    const double hi = 4.0 * box.dim();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = es.eigenvalues()(i);
        if (e > -margin && e < hi + margin) continue;
        out.energies.push_back(e);
        if (want_vectors) {
            LatticeFunction psi(box);
            for (Eigen::Index r = 0; r < n; ++r)
                psi.values[static_cast<std::size_t>(r)] = es.eigenvectors()(r, i);
            out.vectors.push_back(std::move(psi));
        }
    }
    return out;
}

namespace {

// Displacement list of the support, shared by every energy evaluation of the
// bound-state search.
struct SupportGeometry {
    std::vector<std::vector<long>> xs;
    std::vector<std::size_t> pair_key;  // n*n lookup into xs
    std::size_t n = 0;
};

SupportGeometry support_geometry(const Potential& v) {
    SupportGeometry geo;
    geo.n = v.size();
    std::map<std::vector<long>, std::size_t> index;
    std::vector<long> diff(static_cast<std::size_t>(v.dim()));
    geo.pair_key.resize(geo.n * geo.n);
    for (std::size_t i = 0; i < geo.n; ++i) {
        for (std::size_t j = 0; j < geo.n; ++j) {
            for (int a = 0; a < v.dim(); ++a)
                diff[static_cast<std::size_t>(a)] = v.sites()[i][static_cast<std::size_t>(a)] -
                                                    v.sites()[j][static_cast<std::size_t>(a)];
            auto [it, fresh] = index.emplace(diff, geo.xs.size());
            if (fresh) geo.xs.push_back(diff);
            geo.pair_key[i * geo.n + j] = it->second;
        }
    }
    return geo;
}

Eigen::MatrixXd real_bs_matrix(const Potential& v, const SupportGeometry& geo, double e,
                               const QuadratureSpec& quad) {
    std::vector<cplx> g = green_values(v.dim(), geo.xs, SpectralPoint(e, 0.0), quad);
    Eigen::MatrixXd k(static_cast<Eigen::Index>(geo.n), static_cast<Eigen::Index>(geo.n));
    for (std::size_t i = 0; i < geo.n; ++i)
        for (std::size_t j = 0; j < geo.n; ++j)
            k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                v.w1(i) * g[geo.pair_key[i * geo.n + j]].real() * v.w2(j);
    return k;
}

// Ordered eigenvalues of the symmetric sign-definite matrix K(e).
Eigen::VectorXd branch_values(const Potential& v, const SupportGeometry& geo, double e,
                              const QuadratureSpec& quad) {
    Eigen::MatrixXd k = real_bs_matrix(v, geo, e, quad);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double det_condition(const Potential& v, const SupportGeometry& geo, double e,
                     const QuadratureSpec& quad) {
    Eigen::MatrixXd m = real_bs_matrix(v, geo, e, quad);
    m += Eigen::MatrixXd::Identity(m.rows(), m.cols());
    return Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant();
}

double bisect_root(const std::function<double(double)>& g, double a, double b, double ga,
                   double tol) {
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        const double m = 0.5 * (a + b);
        const double gm = g(m);
        if ((gm > 0.0) == (ga > 0.0)) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

BoundStates bound_states(const Potential& v, const QuadratureSpec& quad, double root_tol,
                         long dense_half, double edge_gap, double sensitivity_target) {
    BoundStates out;
    out.edge_gap = edge_gap;
    out.monotone_search = v.sign_definite();
    if (v.size() == 0) return out;
    if (!(edge_gap > 0.0)) throw config_error("edge gap must be positive");

    const SupportGeometry geo = support_geometry(v);
    const double band_hi = 4.0 * v.dim();
    const double lo_floor = v.min_value() - 0.5;   // no spectrum below min V
    const double hi_ceil = band_hi + v.max_value() + 0.5;

    if (v.sign_definite()) {
        // every ordered branch of K(e) is monotone in e, so each branch that
        // has crossed -1 at the probe yields one bisection problem
        const bool below = v.attractive();
        const double probe = below ? -edge_gap : band_hi + edge_gap;
        const double far = below ? lo_floor : hi_ceil;
        const Eigen::VectorXd at_probe = branch_values(v, geo, probe, quad);
        for (Eigen::Index k = 0; k < at_probe.size(); ++k) {
            if (at_probe(k) >= -1.0) continue;
            const auto g = [&](double e) {
                return branch_values(v, geo, e, quad)(k) + 1.0;
            };
            const double g_far = g(far);
            if (g_far <= 0.0) continue;  // no crossing inside the window
            const double a = std::min(far, probe);
            const double b = std::max(far, probe);
            const double ga = (far < probe) ? g_far : g(probe);
            out.energies.push_back(bisect_root(g, a, b, ga, root_tol));
        }
    } else {
        // indefinite sandwich: bracket sign changes of det(I + K(e)) on fine
        // grids on both sides of the band
        const auto scan_side = [&](double a, double b) {
            const int steps = 256;
            double prev_e = a;
            double prev_det = det_condition(v, geo, a, quad);
            for (int s = 1; s <= steps; ++s) {
                const double e = a + (b - a) * static_cast<double>(s) / steps;
                const double de = det_condition(v, geo, e, quad);
                if ((de > 0.0) != (prev_det > 0.0)) {
                    const auto g = [&](double t) { return det_condition(v, geo, t, quad); };
                    out.energies.push_back(bisect_root(g, prev_e, e, prev_det, root_tol));
                }
                prev_e = e;
                prev_det = de;
            }
        };
        if (v.min_value() < 0.0) scan_side(lo_floor, -edge_gap);
        if (v.max_value() > 0.0) scan_side(band_hi + edge_gap, hi_ceil);
    }
    std::sort(out.energies.begin(), out.energies.end());

    // dense cross-check: grow the box until the out-of-band eigenvalues settle
    const int d = v.dim();
    const std::size_t site_cap = 2200;
    const auto fits = [&](long h) {
        double total = 1.0;
        for (int a = 0; a < d; ++a) total *= static_cast<double>(2 * h + 1);
        return total <= static_cast<double>(site_cap);
    };
    const auto solve_at = [&](long h) {
        return boxed_bound_states(v, LatticeBox(d, h), edge_gap).energies;
    };
    const auto gap = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return inf;
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
        return m;
    };

    long half;
    std::vector<double> prev, cur;
    if (dense_half > 0) {
        half = dense_half;
        const long lean = std::max(v.truncation_radius() + 2, half - std::max(8L, half / 8));
        prev = solve_at(lean);
        cur = solve_at(half);
        out.boundary_sensitivity = gap(prev, cur);
    } else {
        half = std::max<long>(v.truncation_radius() + 8, d == 1 ? 32 : 10);
        while (!fits(half)) --half;
        prev = solve_at(half);
        out.boundary_sensitivity = inf;
        for (int round = 0; round < 6; ++round) {
            long next = d == 1 ? half * 2 : half + std::max(4L, half / 2);
            while (!fits(next) && next > half + 1) --next;
            if (next <= half) break;
            cur = solve_at(next);
            out.boundary_sensitivity = gap(prev, cur);
            prev = cur;
            half = next;
            if (out.boundary_sensitivity < sensitivity_target) break;
        }
        cur = prev;
    }
    out.dense_half = half;
    out.dense_energies = cur;

    if (out.energies.size() == out.dense_energies.size()) {
        for (std::size_t i = 0; i < out.energies.size(); ++i)
            out.max_mismatch =
                std::max(out.max_mismatch, std::fabs(out.energies[i] - out.dense_energies[i]));
    } else {
        out.max_mismatch = inf;
    }
    return out;
}

namespace {

// Smallest singular values of I + K over an energy list, batching the in-band
// boundary evaluations through one shared eps schedule.
std::vector<double> scan_minimums(const Potential& v, const SupportGeometry& geo,
                                  const std::vector<double>& lambdas, HalfPlane side,
                                  const QuadratureSpec& quad, double& max_residual,
                                  bool& any_diverged) {
    std::vector<double> out(lambdas.size(), 1.0);
    std::vector<std::size_t> band_pos;
    std::vector<double> band_lambdas;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (in_band(lambdas[i], v.dim())) {
            band_pos.push_back(i);
            band_lambdas.push_back(lambdas[i]);
        }
    }

    const auto assemble = [&](const std::vector<cplx>& g, SpectralPoint z) {
        BSMatrix m;
        m.z = z;
        m.n = geo.n;
        m.entries.resize(geo.n * geo.n);
        for (std::size_t i = 0; i < geo.n; ++i)
            for (std::size_t j = 0; j < geo.n; ++j)
                m.entries[i * geo.n + j] = v.w1(i) * g[geo.pair_key[i * geo.n + j]] * v.w2(j);
        return bs_min_singular(m);
    };

    if (!band_lambdas.empty()) {
        BoundaryValuesMulti bv =
            limiting_absorption_multi(v.dim(), geo.xs, band_lambdas, side, quad);
        for (std::size_t l = 0; l < band_lambdas.size(); ++l) {
            out[band_pos[l]] = assemble(bv.per_lambda[l].values,
                                        SpectralPoint(band_lambdas[l], 0.0, side));
            max_residual = std::max(max_residual, bv.per_lambda[l].residual);
            any_diverged = any_diverged || bv.per_lambda[l].diverged;
        }
    }
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (in_band(lambdas[i], v.dim())) continue;
        double r = 0.0;
        const SpectralPoint z(lambdas[i], 0.0, side);
        const std::vector<cplx> g = green_values(v.dim(), geo.xs, z, quad, &r);
        out[i] = assemble(g, z);
        max_residual = std::max(max_residual, r);
    }
    return out;
}

}  // namespace

ScanResult bs_scan(const Potential& v, const std::vector<double>& grid, HalfPlane side,
                   const QuadratureSpec& quad, double threshold, int refine_levels) {
    if (grid.size() < 2) throw config_error("scan grid needs at least two energies");
    ScanResult out;
    out.threshold = threshold;
    out.grid = grid;
    std::sort(out.grid.begin(), out.grid.end());
    out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());

    if (v.size() == 0) {
        out.min_singular.assign(out.grid.size(), 1.0);
        return out;
    }
    const SupportGeometry geo = support_geometry(v);
    out.min_singular =
        scan_minimums(v, geo, out.grid, side, quad, out.max_residual, out.any_diverged);

    // group consecutive below-threshold grid points into dips
    std::size_t i = 0;
    while (i < out.grid.size()) {
        if (out.min_singular[i] >= threshold) {
            ++i;
            continue;
        }
        std::size_t j = i;
        std::size_t best = i;
        while (j < out.grid.size() && out.min_singular[j] < threshold) {
            if (out.min_singular[j] < out.min_singular[best]) best = j;
            ++j;
        }
        ScanDip dip;
        dip.lambda = out.grid[best];
        dip.value = out.min_singular[best];
        double h = 0.0;
        if (best + 1 < out.grid.size()) h = out.grid[best + 1] - out.grid[best];
        if (best > 0) h = std::max(h, out.grid[best] - out.grid[best - 1]);
        dip.refined_lambda = dip.lambda;
        dip.refined_value = dip.value;
        for (int level = 0; level < refine_levels && h > 0.0; ++level) {
            std::vector<double> local;
            for (int s = -4; s <= 4; ++s)
                local.push_back(dip.refined_lambda + h * static_cast<double>(s) / 4.0);
            double resid = 0.0;
            bool div = false;
            const std::vector<double> vals = scan_minimums(v, geo, local, side, quad, resid, div);
            out.max_residual = std::max(out.max_residual, resid);
            out.any_diverged = out.any_diverged || div;
            for (std::size_t t = 0; t < local.size(); ++t) {
                dip.refined_grid.push_back(local[t]);
                dip.refined_values.push_back(vals[t]);
                if (vals[t] < dip.refined_value) {
                    dip.refined_value = vals[t];
                    dip.refined_lambda = local[t];
                }
            }
            h /= 4.0;
        }
        out.dips.push_back(std::move(dip));
        i = j;
    }
    return out;
}

HolderReport holder_fit(const Potential& v, double lambda0, HalfPlane side,
                        const std::vector<double>& separations, double p_shape, double delta,
                        const QuadratureSpec& quad, double max_rms) {
    if (v.size() == 0) throw config_error("Holder fit needs a nonzero potential");
    if (separations.size() < 2) throw config_error("Holder fit needs at least two separations");
    if (!(p_shape >= 1.0) || !(delta > 0.0) || delta > 1.0)
        throw config_error("Holder fit needs p >= 1 and 0 < delta <= 1");
    for (double s : separations)
        if (!(s > 0.0)) throw config_error("separations must be positive");

    HolderReport out;
    out.beta_target = (2.0 / p_shape - 1.0) * delta;
    out.separations = separations;
    std::sort(out.separations.begin(), out.separations.end());

    const SupportGeometry geo = support_geometry(v);
    std::vector<double> lambdas = {lambda0};
    for (double s : out.separations) lambdas.push_back(lambda0 + s);

    std::vector<std::vector<cplx>> values(lambdas.size());
    if (std::all_of(lambdas.begin(), lambdas.end(),
                    [&](double l) { return in_band(l, v.dim()); })) {
        BoundaryValuesMulti bv =
            limiting_absorption_multi(v.dim(), geo.xs, lambdas, side, quad);
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            values[l] = std::move(bv.per_lambda[l].values);
            out.max_residual = std::max(out.max_residual, bv.per_lambda[l].residual);
        }
    } else {
        for (std::size_t l = 0; l < lambdas.size(); ++l) {
            double r = 0.0;
            values[l] = green_values(v.dim(), geo.xs, SpectralPoint(lambdas[l], 0.0, side),
                                     quad, &r);
            out.max_residual = std::max(out.max_residual, r);
        }
    }

    const auto assemble = [&](const std::vector<cplx>& g) {
        Eigen::MatrixXcd k(static_cast<Eigen::Index>(geo.n), static_cast<Eigen::Index>(geo.n));
        for (std::size_t i = 0; i < geo.n; ++i)
            for (std::size_t j = 0; j < geo.n; ++j)
                k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                    v.w1(i) * g[geo.pair_key[i * geo.n + j]] * v.w2(j);
        return k;
    };

    const Eigen::MatrixXcd base = assemble(values[0]);
    std::vector<double> xs, ys;
    for (std::size_t s = 0; s < out.separations.size(); ++s) {
        const Eigen::MatrixXcd diff = assemble(values[s + 1]) - base;
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(diff);
        const double norm = svd.singularValues().maxCoeff();
        out.differences.push_back(norm);
        if (norm > 0.0) {
            xs.push_back(std::log(out.separations[s]));
            ys.push_back(std::log(norm));
        }
    }
    if (xs.size() < 2) throw config_error("Holder fit has too few nonzero differences");
    const LineFit line = fit_line(xs, ys);
    out.fit.exponent = line.slope;  // growth exponent, positive for Holder continuity
    out.fit.prefactor = std::exp(line.intercept);
    out.fit.rms_residual = line.rms_residual;
    out.fit.window_lo = out.separations.front();
    out.fit.window_hi = out.separations.back();
    out.fit.n_points = xs.size();
    out.accepted = line.rms_residual <= max_rms;
    return out;
}

}  // namespace lapbox
