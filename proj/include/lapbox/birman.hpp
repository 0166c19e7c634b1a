#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "lapbox/fitting.hpp"
#include "lapbox/lattice.hpp"
#include "lapbox/resolvent.hpp"

namespace lapbox {

// Real potential with finite support after truncation. The factorization
// W1 = sgn(V)|V|^{1/2}, W2 = |V|^{1/2} satisfies W1 W2 = V and sandwiches the
// free resolvent in the Birman-Schwinger matrix. Sites with |V| below the
// support threshold are dropped and the kept radius is recorded.
class Potential {
public:
    Potential(int d, const std::vector<std::pair<std::vector<long>, double>>& sites,
              double support_threshold = 1e-10);
    static Potential from_profile(int d, const LatticeBox& window,
                                  const std::function<double(const std::vector<long>&)>& v,
                                  double support_threshold = 1e-10);

    int dim() const { return d_; }
    std::size_t size() const { return sites_.size(); }
    const std::vector<std::vector<long>>& sites() const { return sites_; }
    const std::vector<double>& values() const { return values_; }
    double w1(std::size_t i) const;
    double w2(std::size_t i) const;
    double support_threshold() const { return threshold_; }
    // max Chebyshev radius of the kept support, -1 when V = 0
    long truncation_radius() const;
    double min_value() const;
    double max_value() const;
    bool attractive() const;     // every kept value < 0
    bool repulsive() const;      // every kept value > 0
    bool sign_definite() const { return attractive() || repulsive(); }
    LatticeBox bounding_box() const;

private:
    int d_ = 0;
    std::vector<std::vector<long>> sites_;  // kept sites in lexicographic order
    std::vector<double> values_;
    double threshold_ = 1e-10;
};

// Dense Birman-Schwinger matrix K(z) with entries W1(x) G(x - y; z) W2(y)
// over the kept support; the identity is not included. Green values are
// evaluated once per displacement and scattered onto the matrix.
struct BSMatrix {
    SpectralPoint z;
    std::size_t n = 0;
    std::vector<cplx> entries;  // row-major n x n
    double residual = 0.0;      // engine error estimate
    bool diverged = false;      // boundary-value extrapolation divergence flag
};

BSMatrix bs_matrix(const Potential& v, SpectralPoint z, const QuadratureSpec& quad);

// Smallest singular value of I + K; an empty matrix gives 1.
double bs_min_singular(const BSMatrix& m);

// Largest singular value of K itself (operator norm on l2 of the support).
double bs_norm(const BSMatrix& m);

// Singular values of K in decreasing order, the compactness diagnostic.
std::vector<double> bs_singular_values(const BSMatrix& m);

// Eigenvalues of H0 + V outside [0, 4d]. The search solves the scalar
// condition "I + K(E) singular" along real E outside the band: for
// sign-definite V every ordered eigenvalue branch of the symmetrized matrix
// is monotone in E, so each crossing of -1 is bisected directly; indefinite
// potentials fall back to sign-change bracketing of det(I + K(E)) on a fine
// grid. Each energy is cross-checked against a dense eigensolve of H0 + V
// restricted to a box whose half-width grows until the eigenvalues move less
// than sensitivity_target. Energies closer to the band than edge_gap are not
// searched for (the scalar condition degenerates at the edge).
struct BoundStates {
    std::vector<double> energies;        // from the Birman-Schwinger condition
    std::vector<double> dense_energies;  // from the boxed eigensolve
    double max_mismatch = 0.0;           // worst paired |difference|
    long dense_half = 0;                 // final box half-width
    double boundary_sensitivity = 0.0;   // eigenvalue movement at the last growth
    bool monotone_search = true;         // false = bracketing fallback used
    double edge_gap = 0.0;               // excluded margin around the band edges
};

BoundStates bound_states(const Potential& v, const QuadratureSpec& quad,
                         double root_tol = 1e-10, long dense_half = 0,
                         double edge_gap = 1e-3, double sensitivity_target = 1e-8);

// Holder continuity of z -> K(z) on one side of the band: the (2,2) norm of
// K(lambda0 + s) - K(lambda0) is fitted against s over the separation grid.
// beta_target = (2/p - 1) delta is the predicted exponent for an l^p shaped
// potential at smoothing order delta.
struct HolderReport {
    DecayFit fit;
    double beta_target = 0.0;
    std::vector<double> separations;
    std::vector<double> differences;
    bool accepted = false;
    double max_residual = 0.0;  // worst engine residual over the grid
};

HolderReport holder_fit(const Potential& v, double lambda0, HalfPlane side,
                        const std::vector<double>& separations, double p_shape, double delta,
                        const QuadratureSpec& quad, double max_rms = 0.2);

// Invertibility scan: smallest singular value of I + K(lambda +- i0) per grid
// energy. Runs of consecutive grid points below the threshold are grouped
// into one dip each and re-scanned on refine_levels successively finer local
// grids around the minimizer.
struct ScanDip {
    double lambda = 0.0;  // coarse-grid minimizer
    double value = 0.0;
    double refined_lambda = 0.0;
    double refined_value = 0.0;
    std::vector<double> refined_grid;
    std::vector<double> refined_values;
};

struct ScanResult {
    std::vector<double> grid;
    std::vector<double> min_singular;
    std::vector<ScanDip> dips;
    double threshold = 0.0;
    double max_residual = 0.0;
    bool any_diverged = false;
};

ScanResult bs_scan(const Potential& v, const std::vector<double>& grid, HalfPlane side,
                   const QuadratureSpec& quad, double threshold = 1e-3, int refine_levels = 2);

// Dense symmetric H0 + V on the box (compression with the diagonal kept at
// 2d + V), returned row-major; the building block of the eigensolve
// cross-check, exposed for the scattering diagnostics.
std::vector<double> dense_hamiltonian(const Potential& v, const LatticeBox& box);

// All eigenvalues of H0 + V on the box that lie outside [0, 4d] by more than
// margin, in increasing order, with optional eigenvectors (column i of
// vectors matches energies[i], stored as LatticeFunctions on the box).
struct BoxSpectrum {
    std::vector<double> energies;
    std::vector<LatticeFunction> vectors;
};
BoxSpectrum boxed_bound_states(const Potential& v, const LatticeBox& box, double margin = 1e-9,
                               bool want_vectors = false);

}  // namespace lapbox
