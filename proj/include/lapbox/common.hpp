#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lapbox {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// Raised when a configuration file or an API precondition names an invalid
// request (unknown key, eps = 0 where a strictly off-axis point is required,
// aliasing box vs grid, ...). The CLI maps this to exit code 2.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a computation cannot meet its declared runtime or resource
// budget (wraparound box too small, grid too large to materialize, spectral
// interval violated). The CLI maps this to exit code 3.
class budget_error : public std::runtime_error {
public:
    explicit budget_error(const std::string& what) : std::runtime_error(what) {}
};

inline int sign_of(double x) { return (x > 0) - (x < 0); }

// Unit modulus direction of a complex number, with the 0 -> 1 convention used
// by the dual ascent maps.
inline cplx phase_of(cplx v) {
    double a = std::abs(v);
    return a > 0 ? v / a : cplx(1.0, 0.0);
}

// i^k for integer k, exact.
inline cplx unit_power_i(long k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

// Smallest even integer >= n whose prime factors are all in {2,3,5,7};
// keeps FFT sizes cheap without changing any contract.
long next_fast_even(long n);

// Shortest-distance representative of t in [-1/2, 1/2), used for torus metrics.
double torus_wrap(double t);

// printf "%.17g" formatting, the round-trip safe float format used by the
// CSV and JSON emitters and by log lines that feed regression comparisons.
std::string fmt_g17(double v);

}  // namespace lapbox
