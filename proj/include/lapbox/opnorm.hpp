#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "lapbox/operators.hpp"

namespace lapbox {

enum class NormStatus { exact, lower_bound };

struct NormEstimate {
    double value = 0.0;
    NormStatus status = NormStatus::lower_bound;
    std::vector<cplx> witness;  // extremizing input when status = lower_bound
};

// Closed-form operator norms: (1, q) is the max column l^q norm, (p, inf) the
// max row l^{p*} norm, (2, 2) the largest singular value. Other pairs raise
// config_error and must go through opnorm_lower.
NormEstimate opnorm_exact(const KernelOperator& k, double p, double q);

// Certified lower bound on ||K||_{p -> q} by alternating dual-norm ascent:
// each iterate's ratio ||Kf||_q / ||f||_p is a valid bound, the best one and
// its witness are returned. Deterministic under (restarts, seed); an optional
// start vector is ascended first, so the result is never below its ratio.
NormEstimate opnorm_lower(const KernelOperator& k, double p, double q, int restarts = 16,
                          std::uint64_t seed = 1, const std::vector<cplx>* start = nullptr,
                          int max_iterations = 200, double stagnation = 1e-10);

// Constants of the slicing framework: C0/C1 bound the section operators in
// (2,2) and weighted (1,inf), C2/C3 bound the compositions section* x section,
// C4 the pointwise weighted kernel size; k is the decay order used in the
// weights.
struct AssumptionConstants {
    double C0 = 0.0, C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;
    double k = 0.0;
};

// Section operator along the last axis: T_{x_d, y_d} acting between the
// (d-1)-dimensional transverse boxes. Requires d >= 2.
DenseOperator section_operator(const KernelOperator& k, long xd, long yd);

AssumptionConstants slice_constants(const KernelOperator& k, double decay_k);
AssumptionConstants composition_constants(const KernelOperator& k, double decay_k);
double pointwise_constant(const KernelOperator& k, double decay_k);
AssumptionConstants measure_constants(const KernelOperator& k, double decay_k);

// Dual computation path for C0 on translation-invariant kernels: sup over
// transverse frequencies of the partial Fourier transform of the kernel.
double slice_constant_dual(const ConvolutionOperator& k, long oversample = 4);

// Discrete local l2 average (sup over integer radii R >= 1 and centers x0 of
// R^{-1} sum_{|x-x0|<=R} |f|^2)^{1/2}, the target functional of the
// local-smoothing bound.
double local_l2_average(const LatticeFunction& f);

// Which printed estimate to check: the duality-line bound ||Kf||_{p*} with
// constant C0^{2-2/p} C1^{2/p-1}, the local-smoothing bound with
// C2^{2-2/p} C3^{2/p-1}, or the general (p,q) bound with the three-case
// piecewise constant.
enum class BoundKind { duality_line, local_smoothing, off_duality };

struct BoundReport {
    BoundKind which = BoundKind::duality_line;
    double p = 0.0, q = 0.0, k = 0.0;
    int case_index = 0;  // 1-based classifier case for off_duality, else 0
    double c_combination = 0.0;
    std::vector<double> ratios;
    double max_ratio = 0.0;
};

BoundReport verify_bound(const KernelOperator& k, const AssumptionConstants& c, double p,
                         double q, double decay_k, BoundKind which, int trials,
                         std::uint64_t seed);

// Interpolation consistency: measured ||T_{x_d,y_d}||_{p -> p*} never exceeds
// C0^{2-2/p} C1^{2/p-1} (1+|x_d-y_d|)^{-k(2/p-1)} over random (p, slice)
// samples.
struct InterpolationCheck {
    int samples = 0;
    int violations = 0;
    double worst_margin = 0.0;  // max of measured / bound over the samples
};
InterpolationCheck riesz_thorin_check(const KernelOperator& k, const AssumptionConstants& c,
                                      double decay_k, int samples, std::uint64_t seed);

// Plateau cutoff on the line: 1 on |t| <= 1, 0 on |t| >= 2, cubic smoothstep
// between.
double chi2_cutoff(double t);

// Exact partition identity behind the dyadic convolution cutoffs:
// F((x_d-y_d)/2^j) * L_j = sum_z psi((2x_d-z)/2^{j+1}, (2y_d-z)/2^{j+1}) with
// psi(a, b) = F(a-b) chi2(a+b) and L_j = sum_z chi2(z/2^j); L_j must land in
// [2^j, 2^{j+2}].
struct PartitionReport {
    double l_j = 0.0;
    double max_error = 0.0;
    bool in_range = false;
};
PartitionReport dyadic_partition_check(const std::function<double(double)>& profile, int j);

// Growth of || F((x_d-y_d)/2^j) K ||_{p -> 2} in j, fitted as a slope in
// log2 against j; the dyadic lemma predicts at most 1/2.
struct GrowthReport {
    std::vector<int> levels;
    std::vector<double> norms;
    double slope = 0.0;
};
GrowthReport dyadic_growth_check(const KernelOperator& k,
                                 const std::function<double(double)>& profile, double p,
                                 const std::vector<int>& levels, int restarts,
                                 std::uint64_t seed);

// Compactly supported test profile used by the dyadic checks.
double triangle_bump(double t);

}  // namespace lapbox
