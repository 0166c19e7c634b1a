#pragma once

#include <functional>
#include <vector>

#include "lapbox/lattice.hpp"
#include "lapbox/resolvent.hpp"

namespace lapbox {

// Linear map between functions on two boxes, exposed through entry access for
// the slice machinery and through apply for norm ascent. Dense storage is the
// default; translation-invariant kernels get an FFT-backed subclass so large
// boxes never materialize |box|^2 entries.
class KernelOperator {
public:
    virtual ~KernelOperator() = default;

    const LatticeBox& codomain() const { return codomain_; }
    const LatticeBox& domain() const { return domain_; }

    virtual cplx entry(std::size_t row, std::size_t col) const = 0;
    virtual bool translation_invariant() const { return false; }

    virtual std::vector<cplx> apply(const std::vector<cplx>& f) const;
    virtual std::vector<cplx> apply_adjoint(const std::vector<cplx>& g) const;

protected:
    KernelOperator(LatticeBox codomain, LatticeBox domain)
        : codomain_(std::move(codomain)), domain_(std::move(domain)) {}

    LatticeBox codomain_;
    LatticeBox domain_;
};

class DenseOperator final : public KernelOperator {
public:
    // entries in row-major order, rows indexed by the codomain box
    DenseOperator(LatticeBox codomain, LatticeBox domain, std::vector<cplx> entries);

    static DenseOperator from_function(
        const LatticeBox& codomain, const LatticeBox& domain,
        const std::function<cplx(const std::vector<long>&, const std::vector<long>&)>& k);
    static DenseOperator identity(const LatticeBox& box);

    cplx entry(std::size_t row, std::size_t col) const override {
        return entries_[row * domain_.size() + col];
    }
    const std::vector<cplx>& entries() const { return entries_; }

    std::vector<cplx> apply(const std::vector<cplx>& f) const override;
    std::vector<cplx> apply_adjoint(const std::vector<cplx>& g) const override;

private:
    std::vector<cplx> entries_;
};

// K(x, y) = kernel(x - y) with x in the codomain box and y in the domain box;
// the kernel must be given on the full difference box. apply runs a
// zero-padded FFT convolution, so only O(N log N) work per application.
class ConvolutionOperator final : public KernelOperator {
public:
    ConvolutionOperator(LatticeBox codomain, LatticeBox domain, LatticeFunction kernel);

    cplx entry(std::size_t row, std::size_t col) const override;
    bool translation_invariant() const override { return true; }
    const LatticeFunction& kernel() const { return kernel_; }

    std::vector<cplx> apply(const std::vector<cplx>& f) const override;
    std::vector<cplx> apply_adjoint(const std::vector<cplx>& g) const override;

private:
    std::vector<cplx> convolve(const std::vector<cplx>& f, bool adjoint) const;

    LatticeFunction kernel_;
    std::vector<long> pad_;
    std::vector<cplx> kernel_hat_;
    std::vector<cplx> adjoint_hat_;
};

// Green kernel of the shifted lattice Laplacian as a convolution operator on
// a box, the finite section used by the norm scans.
ConvolutionOperator green_operator(int d, const LatticeBox& box, SpectralPoint z,
                                   const QuadratureSpec& quad, double* residual = nullptr);

// Same finite section at a boundary point lambda +- i0, built from the
// extrapolated limiting-absorption values.
ConvolutionOperator green_boundary_operator(int d, const LatticeBox& box, double lambda,
                                            HalfPlane side, const QuadratureSpec& quad,
                                            double* residual = nullptr,
                                            bool* diverged = nullptr);

// Fourier-diagonal operator on a dual grid; its l2 -> l2 norm is exactly the
// max of |m| over the nodes.
class MultiplierOperator {
public:
    MultiplierOperator(DualGrid grid, const std::function<cplx(const std::vector<double>&)>& m);

    const DualGrid& grid() const { return grid_; }
    std::vector<cplx> apply(const std::vector<cplx>& grid_data) const;
    double norm_2_2() const;

private:
    DualGrid grid_;
    std::vector<cplx> values_;
};

}  // namespace lapbox
