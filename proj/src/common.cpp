#include "lapbox/common.hpp"

#include <cmath>
#include <cstdio>

namespace lapbox {

long next_fast_even(long n) {
    if (n < 2) return 2;
    long candidate = n + (n % 2);
    auto smooth = [](long v) {
        for (long f : {2L, 3L, 5L, 7L}) {
            while (v % f == 0) v /= f;
        }
        return v == 1;
    };
    while (!smooth(candidate)) candidate += 2;
    return candidate;
}

double torus_wrap(double t) {
    double w = t - std::floor(t);
    if (w >= 0.5) w -= 1.0;
    return w;
}

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace lapbox
