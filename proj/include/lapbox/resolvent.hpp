#pragma once

#include <vector>

#include "lapbox/common.hpp"
#include "lapbox/fitting.hpp"
#include "lapbox/lattice.hpp"

namespace lapbox {

// A spectral parameter z = lambda +- i eps. eps = 0 marks a point on the real
// axis: legitimate for real energies outside [0, 4d], and the target of the
// limiting absorption path for energies inside the band.
enum class HalfPlane { upper, lower };

struct SpectralPoint {
    double lambda = 0.0;
    double eps = 0.0;
    HalfPlane side = HalfPlane::upper;

    SpectralPoint() = default;
    SpectralPoint(double lambda_, double eps_, HalfPlane side_ = HalfPlane::upper);
    static SpectralPoint from(cplx z);

    cplx value() const {
        return {lambda, side == HalfPlane::upper ? eps : -eps};
    }
    bool on_axis() const { return eps == 0.0; }
};

enum class GreenEngine { automatic, torus_grid, time_integral, laplace_transform };

// Accuracy and engine controls shared by every kernel evaluation. The torus
// rule keeps the spec'd mesh rule N >= mesh_safety / eps; the integral
// engines target `tol` with certified tails. eps0/richardson_stages steer the
// boundary-value schedule eps0, eps0/2, ..., eps0/2^stages.
struct QuadratureSpec {
    GreenEngine engine = GreenEngine::automatic;
    long n_per_axis = 0;              // torus grid override; 0 derives from the mesh rule
    double mesh_safety = 32.0;
    double tol = 1e-9;
    double eps0 = 0.0;                // 0 picks a scale from the displacement range
    int richardson_stages = 2;
    long max_grid_points = 1L << 24;  // refuse to materialize larger torus grids
};

// Values of the lattice Green function G(x; z) on a displacement box,
// together with the engine's own error estimate.
struct GreenKernel {
    int d = 0;
    SpectralPoint z;
    LatticeBox box;
    std::vector<cplx> values;
    double residual_estimate = 0.0;
    GreenEngine engine_used = GreenEngine::automatic;

    GreenKernel(int d_, SpectralPoint z_, LatticeBox box_)
        : d(d_), z(z_), box(std::move(box_)), values(box.size(), cplx(0.0, 0.0)) {}
    cplx at(const std::vector<long>& x) const { return values[box.index_of(x)]; }
};

// Green function at an explicit displacement set. Requires eps > 0 or a real
// z outside [0, 4d]; boundary energies inside the band are rejected with a
// pointer to limiting_absorption. Multiple energies sharing one eps evaluate
// in a single pass (the integral engines reuse their Bessel products).
std::vector<cplx> green_values(int d, const std::vector<std::vector<long>>& xs,
                               SpectralPoint z, const QuadratureSpec& spec,
                               double* residual = nullptr);
std::vector<std::vector<cplx>> green_values_multi_lambda(
    int d, const std::vector<std::vector<long>>& xs, const std::vector<double>& lambdas,
    double eps, HalfPlane side, const QuadratureSpec& spec, double* residual = nullptr);

cplx green_point(int d, const std::vector<long>& x, SpectralPoint z,
                 const QuadratureSpec& spec, double* residual = nullptr);

GreenKernel green_kernel(int d, const LatticeBox& displacement_box, SpectralPoint z,
                         const QuadratureSpec& spec);

// Reference solution in one dimension: G(x; z) = r^{|x|} / (1/r - r) with
// r + 1/r = 2 - z and |r| < 1, the contraction branch. Used as the oracle the
// quadrature engines are validated against.
cplx green_1d_closed_form(long x, cplx z);

// Boundary values G(x; lambda +- i0) by Richardson extrapolation along the
// eps-halving schedule. `diverged` reports schedules whose corrections grow,
// the expected behaviour at the critical energies {0, 4, ..., 4d}.
struct BoundaryValues {
    std::vector<cplx> values;
    double residual = 0.0;
    bool diverged = false;
    std::vector<double> eps_schedule;
};
BoundaryValues limiting_absorption(int d, const std::vector<std::vector<long>>& xs,
                                   double lambda, HalfPlane side, QuadratureSpec spec);

// Boundary values for a whole energy grid sharing one eps schedule, so the
// Bessel-product passes are reused across energies. Entry [i] matches
// limiting_absorption at lambdas[i] with the same spec.
struct BoundaryValuesMulti {
    std::vector<BoundaryValues> per_lambda;
    std::vector<double> eps_schedule;
};
BoundaryValuesMulti limiting_absorption_multi(int d, const std::vector<std::vector<long>>& xs,
                                              const std::vector<double>& lambdas,
                                              HalfPlane side, QuadratureSpec spec);

// (H0 - shift) applied on the periodic grid, where H0 f(x) =
// sum_{|x-y|=1} (f(x) - f(y)) is the operator with symbol 4 sum_j sin^2(pi xi_j).
std::vector<cplx> shifted_hamiltonian_apply_periodic(const std::vector<cplx>& in,
                                                     const std::vector<long>& dims,
                                                     cplx shift);

// Resolvent as a grid multiplier: data / (h0(xi) - z) in frequency space.
// Requires eps > 0; the convenience overload restricts the periodic result
// back to the function's own box.
std::vector<cplx> resolvent_apply_grid(const std::vector<cplx>& data, const DualGrid& grid,
                                       SpectralPoint z);
LatticeFunction resolvent_apply(const LatticeFunction& f, const DualGrid& grid,
                                SpectralPoint z);

// || (H0 - z) R0(z) f - f ||_2 / ||f||_2 measured entirely on the grid,
// the defect of the resolvent identity under the chosen discretization.
double resolvent_identity_residual(const LatticeFunction& f, const DualGrid& grid,
                                   SpectralPoint z);

// Power-law fit of |G(r * direction; lambda +- i0)| over integer radii in
// [r_lo, r_hi]. The fit is rejected (accepted = false) when the log-log rms
// residual exceeds `max_rms`, e.g. for exponentially decaying off-spectrum
// kernels.
struct KernelDecayResult {
    DecayFit fit;
    bool accepted = false;
    std::string reason;
    std::vector<double> radii;
    std::vector<cplx> values;
    double boundary_residual = 0.0;
    bool diverged = false;
};
KernelDecayResult kernel_decay_fit(int d, SpectralPoint z, const std::vector<long>& direction,
                                   long r_lo, long r_hi, const QuadratureSpec& spec,
                                   double max_rms = 0.2);

}  // namespace lapbox
