#include "lapbox/operators.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace lapbox {

std::vector<cplx> KernelOperator::apply(const std::vector<cplx>& f) const {
    if (f.size() != domain_.size()) throw config_error("operator input size mismatch");
    std::vector<cplx> out(codomain_.size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < out.size(); ++i) {
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < f.size(); ++j) acc += entry(i, j) * f[j];
        out[i] = acc;
    }
    return out;
}

std::vector<cplx> KernelOperator::apply_adjoint(const std::vector<cplx>& g) const {
    if (g.size() != codomain_.size()) throw config_error("operator adjoint input size mismatch");
    std::vector<cplx> out(domain_.size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx gi = g[i];
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += std::conj(entry(i, j)) * gi;
    }
    return out;
}

DenseOperator::DenseOperator(LatticeBox codomain, LatticeBox domain, std::vector<cplx> entries)
    : KernelOperator(std::move(codomain), std::move(domain)), entries_(std::move(entries)) {
    if (entries_.size() != codomain_.size() * domain_.size())
        throw config_error("dense operator entry count mismatch");
}

DenseOperator DenseOperator::from_function(
    const LatticeBox& codomain, const LatticeBox& domain,
    const std::function<cplx(const std::vector<long>&, const std::vector<long>&)>& k) {
    std::vector<cplx> entries(codomain.size() * domain.size());
    codomain.for_each_site([&](std::size_t i, const std::vector<long>& x) {
        const std::vector<long> xc = x;
        domain.for_each_site([&](std::size_t j, const std::vector<long>& y) {
            entries[i * domain.size() + j] = k(xc, y);
        });
    });
    return DenseOperator(codomain, domain, std::move(entries));
}

DenseOperator DenseOperator::identity(const LatticeBox& box) {
    std::vector<cplx> entries(box.size() * box.size(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < box.size(); ++i) entries[i * box.size() + i] = 1.0;
    return DenseOperator(box, box, std::move(entries));
}

std::vector<cplx> DenseOperator::apply(const std::vector<cplx>& f) const {
    if (f.size() != domain_.size()) throw config_error("operator input size mismatch");
    std::vector<cplx> out(codomain_.size(), cplx(0.0, 0.0));
    const std::size_t n = domain_.size();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const cplx* row = entries_.data() + i * n;
        cplx acc(0.0, 0.0);
        for (std::size_t j = 0; j < n; ++j) acc += row[j] * f[j];
        out[i] = acc;
    }
    return out;
}

std::vector<cplx> DenseOperator::apply_adjoint(const std::vector<cplx>& g) const {
    if (g.size() != codomain_.size()) throw config_error("operator adjoint input size mismatch");
    std::vector<cplx> out(domain_.size(), cplx(0.0, 0.0));
    const std::size_t n = domain_.size();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx* row = entries_.data() + i * n;
        const cplx gi = g[i];
        for (std::size_t j = 0; j < n; ++j) out[j] += std::conj(row[j]) * gi;
    }
    return out;
}

ConvolutionOperator::ConvolutionOperator(LatticeBox codomain, LatticeBox domain,
                                         LatticeFunction kernel)
    : KernelOperator(std::move(codomain), std::move(domain)), kernel_(std::move(kernel)) {
    const int d = codomain_.dim();
    if (domain_.dim() != d || kernel_.box.dim() != d)
        throw config_error("convolution operator dimension mismatch");
    pad_.resize(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) {
        if (kernel_.box.half_width(a) < codomain_.half_width(a) + domain_.half_width(a))
            throw config_error("convolution kernel box must cover the difference box");
        // zero-padding long enough that the circular product equals the linear
        // convolution on every codomain site
        pad_[static_cast<std::size_t>(a)] =
            next_fast_even(domain_.extent(a) + kernel_.box.extent(a));
    }
    const DualGrid grid(pad_);
    kernel_hat_ = dft_forward(kernel_, grid);
    LatticeFunction reflected(kernel_.box);
    kernel_.box.for_each_site([&](std::size_t idx, const std::vector<long>& u) {
        std::vector<long> neg(u.size());
        for (std::size_t a = 0; a < u.size(); ++a) neg[a] = -u[a];
        reflected.values[reflected.box.index_of(neg)] = std::conj(kernel_.values[idx]);
    });
    adjoint_hat_ = dft_forward(reflected, grid);
}

cplx ConvolutionOperator::entry(std::size_t row, std::size_t col) const {
    const std::vector<long> x = codomain_.site_of(row);
    std::vector<long> u = domain_.site_of(col);
    for (std::size_t a = 0; a < u.size(); ++a) u[a] = x[a] - u[a];
    return kernel_.at(u);
}

std::vector<cplx> ConvolutionOperator::convolve(const std::vector<cplx>& f, bool adjoint) const {
    const LatticeBox& in_box = adjoint ? codomain_ : domain_;
    const LatticeBox& out_box = adjoint ? domain_ : codomain_;
    if (f.size() != in_box.size()) throw config_error("operator input size mismatch");
    const DualGrid grid(pad_);
    std::vector<cplx> fhat = dft_forward(LatticeFunction(in_box, f), grid);
    const std::vector<cplx>& khat = adjoint ? adjoint_hat_ : kernel_hat_;
    for (std::size_t i = 0; i < fhat.size(); ++i) fhat[i] *= khat[i];
    return dft_inverse(fhat, grid, out_box).values;
}

std::vector<cplx> ConvolutionOperator::apply(const std::vector<cplx>& f) const {
    return convolve(f, false);
}

std::vector<cplx> ConvolutionOperator::apply_adjoint(const std::vector<cplx>& g) const {
    return convolve(g, true);
}

ConvolutionOperator green_operator(int d, const LatticeBox& box, SpectralPoint z,
                                   const QuadratureSpec& quad, double* residual) {
    std::vector<long> diff_half(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) diff_half[static_cast<std::size_t>(a)] = 2 * box.half_width(a);
    GreenKernel g = green_kernel(d, LatticeBox(diff_half), z, quad);
    if (residual != nullptr) *residual = g.residual_estimate;
    return ConvolutionOperator(box, box, LatticeFunction(g.box, std::move(g.values)));
}

ConvolutionOperator green_boundary_operator(int d, const LatticeBox& box, double lambda,
                                            HalfPlane side, const QuadratureSpec& quad,
                                            double* residual, bool* diverged) {
    std::vector<long> diff_half(static_cast<std::size_t>(d));
    for (int a = 0; a < d; ++a) diff_half[static_cast<std::size_t>(a)] = 2 * box.half_width(a);
    const LatticeBox diff_box(diff_half);
    std::vector<std::vector<long>> xs(diff_box.size());
    diff_box.for_each_site([&](std::size_t idx, const std::vector<long>& x) { xs[idx] = x; });
    BoundaryValues bv = limiting_absorption(d, xs, lambda, side, quad);
    if (residual != nullptr) *residual = bv.residual;
    if (diverged != nullptr) *diverged = bv.diverged;
    return ConvolutionOperator(box, box, LatticeFunction(diff_box, std::move(bv.values)));
}

MultiplierOperator::MultiplierOperator(DualGrid grid,
                                       const std::function<cplx(const std::vector<double>&)>& m)
    : grid_(std::move(grid)), values_(grid_.size()) {
    grid_.for_each_node(
        [&](std::size_t idx, const std::vector<double>& xi) { values_[idx] = m(xi); });
}

std::vector<cplx> MultiplierOperator::apply(const std::vector<cplx>& grid_data) const {
    if (grid_data.size() != values_.size()) throw config_error("multiplier input size mismatch");
    std::vector<cplx> out(grid_data.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i] * grid_data[i];
    return out;
}

double MultiplierOperator::norm_2_2() const {
    double m = 0.0;
    for (const cplx& v : values_) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace lapbox
