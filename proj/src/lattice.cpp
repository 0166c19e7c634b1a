#include "lapbox/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lapbox/fft.hpp"

namespace lapbox {
namespace {

std::size_t checked_volume(const std::vector<long>& extents) {
    std::size_t total = 1;
    for (long e : extents) {
        std::size_t next = total * static_cast<std::size_t>(e);
        if (e > 0 && next / static_cast<std::size_t>(e) != total)
            throw budget_error("lattice box volume overflows the index type");
        total = next;
    }
    return total;
}

}  // namespace

LatticeBox::LatticeBox(int d, long half_width)
    : LatticeBox(std::vector<long>(static_cast<std::size_t>(d > 0 ? d : 0), half_width)) {
    if (d <= 0) throw config_error("lattice dimension must be positive");
}

LatticeBox::LatticeBox(std::vector<long> half_widths) : half_(std::move(half_widths)) {
    if (half_.empty()) throw config_error("lattice dimension must be positive");
    for (long h : half_) {
        if (h < 1) throw config_error("lattice box half-width must be at least 1");
    }
    size_ = checked_volume(extents());
}

std::vector<long> LatticeBox::extents() const {
    std::vector<long> e(half_.size());
    for (std::size_t a = 0; a < half_.size(); ++a) e[a] = 2 * half_[a] + 1;
    return e;
}

bool LatticeBox::contains(const std::vector<long>& x) const {
    if (x.size() != half_.size()) return false;
    for (std::size_t a = 0; a < half_.size(); ++a) {
        if (x[a] < -half_[a] || x[a] > half_[a]) return false;
    }
    return true;
}

std::size_t LatticeBox::index_of(const std::vector<long>& x) const {
    if (!contains(x)) throw std::out_of_range("lattice site outside box");
    std::size_t idx = 0;
    for (std::size_t a = 0; a < half_.size(); ++a) {
        idx = idx * static_cast<std::size_t>(2 * half_[a] + 1) +
              static_cast<std::size_t>(x[a] + half_[a]);
    }
    return idx;
}

std::vector<long> LatticeBox::site_of(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("lattice index outside box");
    std::vector<long> x(half_.size());
    for (std::size_t a = half_.size(); a-- > 0;) {
        long ext = 2 * half_[a] + 1;
        x[a] = static_cast<long>(index % static_cast<std::size_t>(ext)) - half_[a];
        index /= static_cast<std::size_t>(ext);
    }
    return x;
}

void LatticeBox::for_each_site(
    const std::function<void(std::size_t, const std::vector<long>&)>& fn) const {
    std::vector<long> x(half_.size());
    for (std::size_t a = 0; a < half_.size(); ++a) x[a] = -half_[a];
    for (std::size_t idx = 0; idx < size_; ++idx) {
        fn(idx, x);
        // Odometer increment, last axis fastest, matching index_of.
        for (std::size_t a = half_.size(); a-- > 0;) {
            if (x[a] < half_[a]) {
                ++x[a];
                break;
            }
            x[a] = -half_[a];
        }
    }
}

LatticeFunction::LatticeFunction(LatticeBox b, std::vector<cplx> v)
    : box(std::move(b)), values(std::move(v)) {
    if (values.size() != box.size())
        throw config_error("lattice function data does not match its box size");
}

double lp_norm(const LatticeFunction& f, double p) {
    if (!(p >= 1.0)) throw std::invalid_argument("lp_norm requires p >= 1");
    if (std::isinf(p)) {
        double m = 0.0;
        for (const cplx& v : f.values) m = std::max(m, std::abs(v));
        return m;
    }
    long double acc = 0.0L;
    if (p == 1.0) {
        for (const cplx& v : f.values) acc += std::abs(v);
        return static_cast<double>(acc);
    }
    if (p == 2.0) {
        for (const cplx& v : f.values) acc += std::norm(v);
        return static_cast<double>(std::sqrt(acc));
    }
    for (const cplx& v : f.values) {
        double a = std::abs(v);
        if (a > 0) acc += std::pow(static_cast<long double>(a), static_cast<long double>(p));
    }
    return static_cast<double>(std::pow(acc, 1.0L / static_cast<long double>(p)));
}

namespace {

// Shell index of the squared Euclidean distance: 0 for |x| <= 1, otherwise
// the unique j >= 1 with 4^{j-1} <= |x|^2 < 4^j.
int shell_of_squared_radius(long long s) {
    if (s <= 1) return 0;
    int j = 1;
    long long cap = 4;
    while (s >= cap) {
        cap *= 4;
        ++j;
    }
    return j;
}

}  // namespace

double besov_norm(const LatticeFunction& f, BesovVariant variant) {
    std::vector<long double> shell_mass;
    f.box.for_each_site([&](std::size_t idx, const std::vector<long>& x) {
        long long s = 0;
        for (long c : x) s += static_cast<long long>(c) * c;
        int j = shell_of_squared_radius(s);
        if (shell_mass.size() <= static_cast<std::size_t>(j))
            shell_mass.resize(static_cast<std::size_t>(j) + 1, 0.0L);
        shell_mass[static_cast<std::size_t>(j)] += std::norm(f.values[idx]);
    });
    if (variant == BesovVariant::weighted_sum) {
        long double total = 0.0L;
        for (std::size_t j = 0; j < shell_mass.size(); ++j)
            total += std::exp2(0.5L * j) * std::sqrt(shell_mass[j]);
        return static_cast<double>(total);
    }
    long double best = 0.0L;
    for (std::size_t j = 0; j < shell_mass.size(); ++j)
        best = std::max(best, std::exp2(-0.5L * j) * std::sqrt(shell_mass[j]));
    return static_cast<double>(best);
}

DualGrid::DualGrid(int d, long n)
    : DualGrid(std::vector<long>(static_cast<std::size_t>(d > 0 ? d : 0), n)) {
    if (d <= 0) throw config_error("dual grid dimension must be positive");
}

DualGrid::DualGrid(std::vector<long> n_per_axis) : n_(std::move(n_per_axis)) {
    if (n_.empty()) throw config_error("dual grid dimension must be positive");
    for (long n : n_) {
        if (n < 2 || n % 2 != 0)
            throw config_error("dual grid size must be even and at least 2");
    }
    size_ = checked_volume(n_);
}

std::vector<double> DualGrid::node(std::size_t index) const {
    if (index >= size_) throw std::out_of_range("dual grid index outside grid");
    std::vector<double> xi(n_.size());
    for (std::size_t a = n_.size(); a-- > 0;) {
        long n = n_[a];
        xi[a] = static_cast<double>(index % static_cast<std::size_t>(n)) / static_cast<double>(n);
        index /= static_cast<std::size_t>(n);
    }
    return xi;
}

void DualGrid::for_each_node(
    const std::function<void(std::size_t, const std::vector<double>&)>& fn) const {
    std::vector<long> j(n_.size(), 0);
    std::vector<double> xi(n_.size(), 0.0);
    for (std::size_t idx = 0; idx < size_; ++idx) {
        fn(idx, xi);
        for (std::size_t a = n_.size(); a-- > 0;) {
            if (++j[a] < n_[a]) {
                xi[a] = static_cast<double>(j[a]) / static_cast<double>(n_[a]);
                break;
            }
            j[a] = 0;
            xi[a] = 0.0;
        }
    }
}

namespace {

void require_no_aliasing(const LatticeBox& box, const DualGrid& grid) {
    if (box.dim() != grid.dim())
        throw config_error("box and dual grid dimensions differ");
    for (int a = 0; a < box.dim(); ++a) {
        if (grid.points(a) < box.extent(a))
            throw config_error("dual grid too coarse for the box: need N >= 2L+1 per axis");
    }
}

}  // namespace

std::vector<cplx> embed_on_grid(const LatticeFunction& f, const DualGrid& grid) {
    require_no_aliasing(f.box, grid);
    std::vector<cplx> data(grid.size(), cplx(0.0, 0.0));
    const auto& n = grid.points_per_axis();
    f.box.for_each_site([&](std::size_t idx, const std::vector<long>& x) {
        std::size_t g = 0;
        for (std::size_t a = 0; a < n.size(); ++a) {
            long m = ((x[a] % n[a]) + n[a]) % n[a];
            g = g * static_cast<std::size_t>(n[a]) + static_cast<std::size_t>(m);
        }
        data[g] = f.values[idx];
    });
    return data;
}

LatticeFunction sample_from_grid(const std::vector<cplx>& data, const DualGrid& grid,
                                 const LatticeBox& box) {
    if (data.size() != grid.size())
        throw config_error("grid data does not match the dual grid size");
    require_no_aliasing(box, grid);
    LatticeFunction out(box);
    const auto& n = grid.points_per_axis();
    box.for_each_site([&](std::size_t idx, const std::vector<long>& x) {
        std::size_t g = 0;
        for (std::size_t a = 0; a < n.size(); ++a) {
            long m = ((x[a] % n[a]) + n[a]) % n[a];
            g = g * static_cast<std::size_t>(n[a]) + static_cast<std::size_t>(m);
        }
        out.values[idx] = data[g];
    });
    return out;
}

std::vector<cplx> dft_forward(const LatticeFunction& f, const DualGrid& grid) {
    std::vector<cplx> data = embed_on_grid(f, grid);
    fft_inplace(data, grid.points_per_axis(), -1);
    return data;
}

LatticeFunction dft_inverse(const std::vector<cplx>& fhat, const DualGrid& grid,
                            const LatticeBox& box) {
    if (fhat.size() != grid.size())
        throw config_error("spectrum size does not match the dual grid");
    std::vector<cplx> data = fhat;
    fft_inplace(data, grid.points_per_axis(), +1);
    double scale = 1.0 / static_cast<double>(grid.size());
    for (cplx& v : data) v *= scale;
    return sample_from_grid(data, grid, box);
}

double grid_l2(const std::vector<cplx>& data) {
    long double acc = 0.0L;
    for (const cplx& v : data) acc += std::norm(v);
    return static_cast<double>(std::sqrt(acc));
}

}  // namespace lapbox
