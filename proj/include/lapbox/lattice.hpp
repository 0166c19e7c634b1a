#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "lapbox/common.hpp"

namespace lapbox {

// Finite centered box {-L_1..L_1} x ... x {-L_d..L_d} on the integer lattice,
// with a row-major site index (last axis fastest). Half-widths may differ per
// axis; the common cubic case has a dedicated constructor.
class LatticeBox {
public:
    LatticeBox(int d, long half_width);
    explicit LatticeBox(std::vector<long> half_widths);

    int dim() const { return static_cast<int>(half_.size()); }
    long half_width(int axis) const { return half_[static_cast<std::size_t>(axis)]; }
    long extent(int axis) const { return 2 * half_width(axis) + 1; }
    const std::vector<long>& half_widths() const { return half_; }
    std::vector<long> extents() const;
    std::size_t size() const { return size_; }

    bool contains(const std::vector<long>& x) const;
    std::size_t index_of(const std::vector<long>& x) const;
    std::vector<long> site_of(std::size_t index) const;

    // Linear sweep in index order; `site` is reused between calls, so the
    // callback must not retain the reference.
    void for_each_site(const std::function<void(std::size_t, const std::vector<long>&)>& fn) const;

    bool operator==(const LatticeBox& other) const { return half_ == other.half_; }

private:
    std::vector<long> half_;
    std::size_t size_;
};

// Complex-valued function on a box, stored in box index order.
struct LatticeFunction {
    LatticeBox box;
    std::vector<cplx> values;

    explicit LatticeFunction(LatticeBox b)
        : box(std::move(b)), values(box.size(), cplx(0.0, 0.0)) {}
    LatticeFunction(LatticeBox b, std::vector<cplx> v);

    cplx& at(const std::vector<long>& x) { return values[box.index_of(x)]; }
    cplx at(const std::vector<long>& x) const { return values[box.index_of(x)]; }
};

// l^p norm for p in [1, inf]; pass std::numeric_limits<double>::infinity()
// for the sup norm. p < 1 is rejected.
double lp_norm(const LatticeFunction& f, double p);

// Weighted-shell norms on dyadic annuli of the Euclidean distance:
// D_0 = {|x| <= 1} and D_j = {2^{j-1} <= |x| < 2^j}, each site assigned to the
// lowest shell containing it.
//   B     = sum_j 2^{j/2}  ||f||_{l2(D_j)}
//   Bstar = sup_j 2^{-j/2} ||f||_{l2(D_j)}
enum class BesovVariant { weighted_sum, weighted_sup };
double besov_norm(const LatticeFunction& f, BesovVariant variant);

// Uniform dual grid {j/N : 0 <= j < N} per axis with N even, the sampling of
// the torus used by every multiplier operation.
class DualGrid {
public:
    DualGrid(int d, long n);
    explicit DualGrid(std::vector<long> n_per_axis);

    int dim() const { return static_cast<int>(n_.size()); }
    long points(int axis) const { return n_[static_cast<std::size_t>(axis)]; }
    const std::vector<long>& points_per_axis() const { return n_; }
    std::size_t size() const { return size_; }

    // Frequency node of a linear index, components in [0,1).
    std::vector<double> node(std::size_t index) const;

    // Same sweep order as the data layout used by dft_forward.
    void for_each_node(const std::function<void(std::size_t, const std::vector<double>&)>& fn) const;

private:
    std::vector<long> n_;
    std::size_t size_;
};

// Forward transform fhat(j/N) = sum_x f(x) e^{-2pi i x.j/N} sampled on the
// grid. Requires N >= 2L+1 on every axis so that box sites occupy distinct
// residues (no aliasing); violations raise config_error.
std::vector<cplx> dft_forward(const LatticeFunction& f, const DualGrid& grid);

// Inverse transform f(x) = N^{-d} sum_j fhat(j/N) e^{+2pi i x.j/N} read off on
// `box` (coordinates taken modulo N). Exact round trip with dft_forward under
// the same no-aliasing condition.
LatticeFunction dft_inverse(const std::vector<cplx>& fhat, const DualGrid& grid,
                            const LatticeBox& box);

// Periodization helpers shared by the resolvent and propagator paths: a box
// function laid out on the grid's residue classes, and the grid samples read
// back onto a box.
std::vector<cplx> embed_on_grid(const LatticeFunction& f, const DualGrid& grid);
LatticeFunction sample_from_grid(const std::vector<cplx>& data, const DualGrid& grid,
                                 const LatticeBox& box);

// l2 norm of a raw grid array (used where no box structure exists).
double grid_l2(const std::vector<cplx>& data);

}  // namespace lapbox
