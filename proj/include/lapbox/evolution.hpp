#pragma once

#include <utility>
#include <vector>

#include "lapbox/common.hpp"
#include "lapbox/fitting.hpp"
#include "lapbox/lattice.hpp"

namespace lapbox {

// Free evolution kernel e^{-itH0} delta_0: in one dimension
// K_t(x) = e^{-2it} i^{|x|} J_{|x|}(2t), and the d-dimensional kernel is the
// tensor product over coordinates.
cplx free_kernel_1d(long x, double t);
cplx free_kernel(const std::vector<long>& x, double t);

// Half-width padding needed so that evolving for time |t| keeps wraparound
// leakage below tol: ballistic range 2|t| plus an Airy-regime skin of width
// O(t^{1/3} log^{2/3}(1/tol)).
long ballistic_margin(double t, double tol);

// e^{-itH0} psi0 through the grid multiplier e^{-i t h0}. The grid must cover
// the support box plus the ballistic margin on every axis, otherwise a
// budget_error explains the required size. The result lives on the enlarged
// box covering the certified support.
LatticeFunction free_propagate(const LatticeFunction& psi0, double t, const DualGrid& grid,
                               double tol = 1e-9);

// Smallest even fast grid that free_propagate will accept for this support
// box and time.
DualGrid free_propagation_grid(const LatticeBox& support, double t, double tol = 1e-9);

// Sup-norm decay fit of e^{-itH0} delta_0 over a log-spaced time window.
struct DispersiveFit {
    DecayFit fit;
    std::vector<double> times;
    std::vector<double> sup_norms;
};
DispersiveFit dispersive_decay_fit(int d, double t_lo, double t_hi, int samples,
                                   double grid_scale = 1.0);

// H = H0 + V on a box with periodic wrap; V is given by its support sites.
class BoxHamiltonian {
public:
    BoxHamiltonian(LatticeBox box,
                   const std::vector<std::pair<std::vector<long>, double>>& sites);

    const LatticeBox& box() const { return box_; }
    const std::vector<double>& potential() const { return potential_; }
    double potential_min() const { return v_min_; }
    double potential_max() const { return v_max_; }

    void apply(const cplx* in, cplx* out) const;
    std::vector<cplx> apply(const std::vector<cplx>& in) const;

private:
    LatticeBox box_;
    std::vector<double> potential_;
    double v_min_ = 0.0, v_max_ = 0.0;
};

// Polynomial plan for e^{-itH}: degree, spectral interval and the certified
// truncation tail sum_{k>n} 2|J_k(rho)|.
struct ChebyshevPlan {
    double a = 0.0;
    double b = 0.0;
    double rho = 0.0;
    int n_terms = 0;
    double tail_bound = 0.0;
};
ChebyshevPlan plan_chebyshev(double a, double b, double t, double tol);

// e^{-itH} psi0 by the Chebyshev expansion on the plan's interval; negative t
// gives the adjoint propagator through conjugation (H is real). An explicit
// interval override is sampled against Rayleigh quotients of H and rejected
// when it fails to enclose them.
LatticeFunction propagate_chebyshev(const BoxHamiltonian& h, double t,
                                    const LatticeFunction& psi0, double tol = 1e-10,
                                    ChebyshevPlan* plan_out = nullptr,
                                    const std::pair<double, double>* interval_override = nullptr);

}  // namespace lapbox
