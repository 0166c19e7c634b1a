#pragma once

#include <cstddef>
#include <vector>

#include "lapbox/birman.hpp"
#include "lapbox/common.hpp"
#include "lapbox/evolution.hpp"
#include "lapbox/lattice.hpp"

namespace lapbox {

// Copy f onto a larger box, filling the new sites with zeros. The target must
// contain the source box axis by axis.
LatticeFunction zero_extend(const LatticeFunction& f, const LatticeBox& target);

// l2 distance between two states; boxes may differ, the smaller one is
// zero-extended onto the union box before subtracting.
double l2_distance(const LatticeFunction& f, const LatticeFunction& g);

// l2 mass of f restricted to the Euclidean ball |x| <= radius.
double local_mass(const LatticeFunction& f, double radius);

// Gaussian wave packet e^{2pi i c.x} e^{-|x|^2/(4 sigma^2)} normalised in l2,
// together with its declared momentum window: the Euclidean ball of the given
// radius around c on the torus. Construction measures the Fourier mass outside
// the window and the clearance between the window and the stationary points
// {0,1/2}^d of the free symbol (where the group velocity vanishes), and
// rejects packets that leak more than mass_tol or sit closer than
// min_clearance; both checks keep every demo inside the regime where the
// packet leaves the scatterer at a uniformly positive speed.
struct WavePacket {
    LatticeFunction psi0;
    std::vector<double> window_center;
    double window_radius = 0.0;
    double sigma = 0.0;
    double outside_mass = 0.0;   // Fourier mass fraction outside the window
    double clearance = 0.0;      // torus distance from window to stationary set
};

WavePacket gaussian_packet(int d, const std::vector<double>& center, double sigma,
                           double radius, long half_width = 0, double mass_tol = 1e-8,
                           double min_clearance = 0.25);

// Shared numeric budget for the propagator compositions below.
struct WaveBudget {
    double tol = 1e-10;                            // per-leg propagator tolerance
    long extra_half = 0;                           // additional box padding per axis
    std::size_t max_sites = std::size_t(1) << 22;  // cap on the evolution box size
};

// Trace of the finite-time wave operator W(t) = e^{itH} e^{-itH0} applied to a
// packet along an increasing time schedule. All states live on one common box
// sized for the final time, so consecutive states subtract directly; the
// increment sequence ||W(t_{j+1}) psi - W(t_j) psi||_2 is the Cauchy
// diagnostic for convergence of the wave operator.
struct WaveTrace {
    std::vector<double> times;
    std::vector<LatticeFunction> states;
    std::vector<double> norms;       // ||W(t) psi||_2, unitarity check
    std::vector<double> increments;  // one per consecutive pair of times
    long box_half = 0;               // common evolution box half-width
    double certified_tail = 0.0;     // worst propagator truncation tail used
};

WaveTrace wave_apply(const Potential& v, const WavePacket& packet,
                     const std::vector<double>& t_schedule, const WaveBudget& budget = {});

// Residual of the intertwining identity
//   e^{-isH} W(t) psi = W(t-s) e^{-isH0} psi,
// which holds exactly for the finite-time operators; the returned l2 residual
// only carries the certified propagator tails of the legs involved.
double intertwining_check(const Potential& v, const WavePacket& packet, double t, double s,
                          const WaveBudget& budget = {});

// Local-mass history of e^{-itH} phi with the bound-state component of phi
// projected out first: asymptotic completeness predicts the time-averaged mass
// in any fixed ball to decay, while a residual bound component would pin mass
// near the scatterer forever. Passing remove_bound = false inverts the
// diagnostic (feed a bound state and watch the mass stay put).
struct CompletenessReport {
    std::vector<double> times;
    std::vector<double> local_mass_history;  // ||chi_{|x|<=radius} e^{-itH} phi||_2
    double averaged_local_mass = 0.0;        // mean over the schedule
    std::vector<double> bound_energies;      // energies of the projected states
    double removed_mass = 0.0;               // l2 mass of the removed component
    double norm_drift = 0.0;                 // max | ||phi(t)||_2 - 1 |
    long box_half = 0;
};

CompletenessReport completeness_diagnostic(const Potential& v, const LatticeFunction& phi0,
                                           const std::vector<double>& t_schedule, double radius,
                                           bool remove_bound = true, const WaveBudget& budget = {},
                                           long bound_half = 12);

}  // namespace lapbox
