#include "lapbox/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

namespace lapbox {

namespace {

// Torus distance per axis: representatives differ by an integer shift.
double torus_axis_distance(double a, double b) {
    double diff = std::fabs(a - b);
    diff -= std::floor(diff);
    return std::min(diff, 1.0 - diff);
}

double torus_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double dj = torus_axis_distance(a[j], b[j]);
        sq += dj * dj;
    }
    return std::sqrt(sq);
}

// Distance from the window centre to the nearest stationary point of the free
// symbol; the stationary set is {0, 1/2}^d on the torus.
double stationary_clearance(const std::vector<double>& center) {
    const std::size_t d = center.size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> corner(d, 0.0);
    const std::size_t corners = std::size_t(1) << d;
    for (std::size_t mask = 0; mask < corners; ++mask) {
        for (std::size_t j = 0; j < d; ++j) corner[j] = (mask >> j & 1u) ? 0.5 : 0.0;
        best = std::min(best, torus_distance(center, corner));
    }
    return best;
}

std::vector<std::pair<std::vector<long>, double>> potential_pairs(const Potential& v) {
    std::vector<std::pair<std::vector<long>, double>> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out.emplace_back(v.sites()[i], v.values()[i]);
    return out;
}

void check_schedule(const std::vector<double>& t_schedule) {
    if (t_schedule.empty()) throw config_error("time schedule must not be empty");
    double prev = -1.0;
    for (double t : t_schedule) {
        if (!(t >= 0.0)) throw config_error("time schedule entries must be nonnegative");
        if (!(t > prev) && prev >= 0.0)
            throw config_error("time schedule must be strictly increasing");
        prev = t;
    }
}

// Evolution box shared by every leg: the packet support padded by the
// ballistic reach and skin of each propagator leg, clamped so the potential
// support always fits.
LatticeBox padded_box(const LatticeBox& support, const Potential& v, double total_reach,
                      double margins, long extra_half, std::size_t max_sites) {
    const int d = support.dim();
    std::vector<long> halves(static_cast<std::size_t>(d), 0);
    const long pad = static_cast<long>(std::ceil(total_reach)) +
                     static_cast<long>(std::ceil(margins)) + extra_half;
    for (int a = 0; a < d; ++a) {
        long half = support.half_width(a) + pad;
        if (v.size() > 0) {
            const LatticeBox vbox = v.bounding_box();
            half = std::max(half, vbox.half_width(a) + 1);
        }
        halves[static_cast<std::size_t>(a)] = half;
    }
    LatticeBox box(halves);
    if (box.size() > max_sites) {
        std::ostringstream msg;
        msg << "evolution box needs " << box.size() << " sites but the budget allows "
            << max_sites << "; raise max_sites or shorten the schedule";
        throw budget_error(msg.str());
    }
    return box;
}

double l2_norm(const LatticeFunction& f) { return lp_norm(f, 2.0); }

cplx inner(const LatticeFunction& a, const LatticeFunction& b) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = 0; i < a.values.size(); ++i) acc += std::conj(a.values[i]) * b.values[i];
    return acc;
}

}  // namespace

LatticeFunction zero_extend(const LatticeFunction& f, const LatticeBox& target) {
    if (target.dim() != f.box.dim()) throw config_error("zero extension dimension mismatch");
    for (int a = 0; a < target.dim(); ++a) {
        if (target.half_width(a) < f.box.half_width(a))
            throw config_error("zero extension target must contain the source box");
    }
    LatticeFunction out(target);
    f.box.for_each_site([&](std::size_t i, const std::vector<long>& x) {
        out.values[target.index_of(x)] = f.values[i];
    });
    return out;
}

double l2_distance(const LatticeFunction& f, const LatticeFunction& g) {
    if (f.box.dim() != g.box.dim()) throw config_error("l2 distance dimension mismatch");
    std::vector<long> halves(static_cast<std::size_t>(f.box.dim()), 0);
    for (int a = 0; a < f.box.dim(); ++a)
        halves[static_cast<std::size_t>(a)] = std::max(f.box.half_width(a), g.box.half_width(a));
    const LatticeBox hull(halves);
    const LatticeFunction fe = zero_extend(f, hull);
    const LatticeFunction ge = zero_extend(g, hull);
    double sq = 0.0;
    for (std::size_t i = 0; i < fe.values.size(); ++i) sq += std::norm(fe.values[i] - ge.values[i]);
    return std::sqrt(sq);
}

double local_mass(const LatticeFunction& f, double radius) {
    if (!(radius >= 0.0)) throw config_error("local mass needs radius >= 0");
    const double r2 = radius * radius * (1.0 + 1e-12) + 1e-12;
    double sq = 0.0;
    f.box.for_each_site([&](std::size_t i, const std::vector<long>& x) {
        double dist2 = 0.0;
        for (long c : x) dist2 += static_cast<double>(c) * static_cast<double>(c);
        if (dist2 <= r2) sq += std::norm(f.values[i]);
    });
    return std::sqrt(sq);
}

WavePacket gaussian_packet(int d, const std::vector<double>& center, double sigma, double radius,
                           long half_width, double mass_tol, double min_clearance) {
    if (d < 1) throw config_error("wave packet needs dimension >= 1");
    if (center.size() != static_cast<std::size_t>(d))
        throw config_error("wave packet centre length must match the dimension");
    if (!(sigma > 0.0)) throw config_error("wave packet width must be positive");
    if (!(radius > 0.0)) throw config_error("momentum window radius must be positive");
    if (!(mass_tol > 0.0)) throw config_error("window mass tolerance must be positive");

    // Truncating the envelope also leaks Fourier mass outside the window, so
    // the support box keeps the discarded tail well below mass_tol.
    const long half = half_width > 0 ? half_width : static_cast<long>(std::ceil(6.5 * sigma));
    LatticeBox box(d, half);

    WavePacket packet{LatticeFunction(box), center, radius, sigma, 0.0, 0.0};
    box.for_each_site([&](std::size_t i, const std::vector<long>& x) {
        double phase = 0.0;
        double dist2 = 0.0;
        for (int a = 0; a < d; ++a) {
            const double c = static_cast<double>(x[static_cast<std::size_t>(a)]);
            phase += center[static_cast<std::size_t>(a)] * c;
            dist2 += c * c;
        }
        packet.psi0.values[i] = std::exp(cplx(0.0, 2.0 * pi * phase)) *
                                std::exp(cplx(-dist2 / (4.0 * sigma * sigma), 0.0));
    });
    const double norm = l2_norm(packet.psi0);
    for (cplx& value : packet.psi0.values) value /= norm;

    // Measured window leakage on a no-aliasing dual grid; Parseval makes the
    // node sum proportional to the l2 mass.
    const long n = std::max<long>(2 * half + 2, 64);
    const DualGrid grid(d, n % 2 == 0 ? n : n + 1);
    const std::vector<cplx> fhat = dft_forward(packet.psi0, grid);
    double total = 0.0;
    double outside = 0.0;
    grid.for_each_node([&](std::size_t i, const std::vector<double>& node) {
        const double mass = std::norm(fhat[i]);
        total += mass;
        if (torus_distance(node, center) > radius) outside += mass;
    });
    packet.outside_mass = outside / total;
    packet.clearance = stationary_clearance(center) - radius;

    if (!(packet.outside_mass < mass_tol)) {
        std::ostringstream msg;
        msg << "wave packet leaks Fourier mass " << packet.outside_mass
            << " outside its declared window (tolerance " << mass_tol
            << "); widen the envelope or the window";
        throw config_error(msg.str());
    }
    if (!(packet.clearance >= min_clearance)) {
        std::ostringstream msg;
        msg << "momentum window clears the stationary set by only " << packet.clearance
            << " (required " << min_clearance << "); move the centre or shrink the window";
        throw config_error(msg.str());
    }
    return packet;
}

WaveTrace wave_apply(const Potential& v, const WavePacket& packet,
                     const std::vector<double>& t_schedule, const WaveBudget& budget) {
    const int d = packet.psi0.box.dim();
    if (v.dim() != d) throw config_error("potential dimension must match the packet");
    check_schedule(t_schedule);
    if (!(budget.tol > 0.0)) throw config_error("wave budget needs tol > 0");

    // One free leg and one interacting leg, each reaching at most 2 t_max plus
    // its dispersive skin.
    const double t_max = t_schedule.back();
    const double margin = static_cast<double>(ballistic_margin(t_max, budget.tol));
    const LatticeBox box = padded_box(packet.psi0.box, v, 2.0 * (2.0 * t_max), 2.0 * margin,
                                      budget.extra_half, budget.max_sites);
    const BoxHamiltonian h(box, potential_pairs(v));

    WaveTrace trace;
    trace.times = t_schedule;
    trace.box_half = box.half_width(0);
    for (double t : t_schedule) {
        const DualGrid grid = free_propagation_grid(packet.psi0.box, t, budget.tol);
        const LatticeFunction free_leg = free_propagate(packet.psi0, t, grid, budget.tol);
        ChebyshevPlan plan;
        // The polynomial propagator computes e^{-itH}, so the return leg runs
        // it with the time negated.
        LatticeFunction state =
            propagate_chebyshev(h, -t, zero_extend(free_leg, box), budget.tol, &plan);
        trace.certified_tail = std::max(trace.certified_tail, plan.tail_bound);
        trace.norms.push_back(l2_norm(state));
        trace.states.push_back(std::move(state));
    }
    for (std::size_t j = 0; j + 1 < trace.states.size(); ++j)
        trace.increments.push_back(l2_distance(trace.states[j + 1], trace.states[j]));
    return trace;
}

double intertwining_check(const Potential& v, const WavePacket& packet, double t, double s,
                          const WaveBudget& budget) {
    const int d = packet.psi0.box.dim();
    if (v.dim() != d) throw config_error("potential dimension must match the packet");
    if (!(budget.tol > 0.0)) throw config_error("wave budget needs tol > 0");

    const double longest = std::max({std::fabs(t), std::fabs(s), std::fabs(t - s)});
    const double margin = static_cast<double>(ballistic_margin(longest, budget.tol));
    const double reach = 2.0 * (2.0 * std::fabs(t) + std::fabs(s) + std::fabs(t - s));
    const LatticeBox box =
        padded_box(packet.psi0.box, v, reach, 3.0 * margin, budget.extra_half, budget.max_sites);
    const BoxHamiltonian h(box, potential_pairs(v));

    // Left side: evolve the packet with W(t), then forward by s under the full
    // Hamiltonian.
    const DualGrid grid_t = free_propagation_grid(packet.psi0.box, t, budget.tol);
    const LatticeFunction free_t = free_propagate(packet.psi0, t, grid_t, budget.tol);
    const LatticeFunction wt = propagate_chebyshev(h, -t, zero_extend(free_t, box), budget.tol);
    const LatticeFunction lhs = propagate_chebyshev(h, s, wt, budget.tol);

    // Right side: free-evolve by s first, then apply W(t-s).
    const DualGrid grid_s = free_propagation_grid(packet.psi0.box, s, budget.tol);
    const LatticeFunction free_s = free_propagate(packet.psi0, s, grid_s, budget.tol);
    const DualGrid grid_ts = free_propagation_grid(free_s.box, t - s, budget.tol);
    const LatticeFunction free_ts = free_propagate(free_s, t - s, grid_ts, budget.tol);
    const LatticeFunction rhs =
        propagate_chebyshev(h, -(t - s), zero_extend(free_ts, box), budget.tol);

    return l2_distance(lhs, rhs);
}

CompletenessReport completeness_diagnostic(const Potential& v, const LatticeFunction& phi0,
                                           const std::vector<double>& t_schedule, double radius,
                                           bool remove_bound, const WaveBudget& budget,
                                           long bound_half) {
    const int d = phi0.box.dim();
    if (v.dim() != d) throw config_error("potential dimension must match the state");
    check_schedule(t_schedule);
    if (!(radius >= 0.0)) throw config_error("completeness diagnostic needs radius >= 0");
    if (!(budget.tol > 0.0)) throw config_error("wave budget needs tol > 0");
    if (bound_half < 1) throw config_error("bound-state box half-width must be positive");

    const double t_max = t_schedule.back();
    const double margin = static_cast<double>(ballistic_margin(t_max, budget.tol));
    std::vector<long> halves(static_cast<std::size_t>(d), 0);
    const long pad =
        static_cast<long>(std::ceil(2.0 * t_max)) + static_cast<long>(margin) + budget.extra_half;
    long support_half = bound_half;
    if (v.size() > 0) {
        const LatticeBox vbox = v.bounding_box();
        for (int a = 0; a < d; ++a) support_half = std::max(support_half, vbox.half_width(a) + 1);
    }
    for (int a = 0; a < d; ++a)
        halves[static_cast<std::size_t>(a)] = std::max(phi0.box.half_width(a) + pad, support_half);
    const LatticeBox box(halves);
    if (box.size() > budget.max_sites) {
        std::ostringstream msg;
        msg << "evolution box needs " << box.size() << " sites but the budget allows "
            << budget.max_sites;
        throw budget_error(msg.str());
    }

    LatticeFunction state = zero_extend(phi0, box);
    const double initial = l2_norm(state);
    if (!(initial > 0.0)) throw config_error("completeness diagnostic needs a nonzero state");
    for (cplx& value : state.values) value /= initial;

    CompletenessReport report;
    report.box_half = box.half_width(0);
    if (remove_bound && v.size() > 0) {
        // Bound states are exponentially localised near the potential, so a
        // modest dense box resolves their vectors; the eigensolver returns
        // them orthonormal and zero extension preserves that.
        long vectors_half = bound_half;
        const LatticeBox vbox = v.bounding_box();
        for (int a = 0; a < d; ++a) vectors_half = std::max(vectors_half, vbox.half_width(a) + 1);
        const BoxSpectrum spectrum =
            boxed_bound_states(v, LatticeBox(d, vectors_half), 1e-8, true);
        double removed_sq = 0.0;
        for (std::size_t k = 0; k < spectrum.energies.size(); ++k) {
            const LatticeFunction bound = zero_extend(spectrum.vectors[k], box);
            const cplx overlap = inner(bound, state);
            removed_sq += std::norm(overlap);
            for (std::size_t i = 0; i < state.values.size(); ++i)
                state.values[i] -= overlap * bound.values[i];
            report.bound_energies.push_back(spectrum.energies[k]);
        }
        report.removed_mass = std::sqrt(removed_sq);
        const double remaining = l2_norm(state);
        if (!(remaining > 1e-8))
            throw config_error("state is entirely bound; nothing left to evolve");
        for (cplx& value : state.values) value /= remaining;
    }

    const BoxHamiltonian h(box, potential_pairs(v));
    double prev_t = 0.0;
    double mass_sum = 0.0;
    for (double t : t_schedule) {
        state = propagate_chebyshev(h, t - prev_t, state, budget.tol);
        prev_t = t;
        const double mass = local_mass(state, radius);
        report.times.push_back(t);
        report.local_mass_history.push_back(mass);
        mass_sum += mass;
        report.norm_drift = std::max(report.norm_drift, std::fabs(l2_norm(state) - 1.0));
    }
    report.averaged_local_mass = mass_sum / static_cast<double>(t_schedule.size());
    return report;
}

}  // namespace lapbox
