#include "lapbox/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace lapbox {

const GaussRule& gauss_legendre(int order) {
    if (order < 1 || order > 128) throw config_error("gauss rule order must be in [1,128]");
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(order));
    rule.weights.resize(static_cast<std::size_t>(order));
    int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-like initial guess, then Newton on P_n.
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -x;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    auto res = cache.emplace(order, std::move(rule));
    return res.first->second;
}

cplx integrate_panels(const std::function<cplx(double)>& f,
                      const std::vector<double>& breakpoints, int order) {
    const GaussRule& rule = gauss_legendre(order);
    cplx total = 0.0;
    for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        double a = breakpoints[p], b = breakpoints[p + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        cplx acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += half * acc;
    }
    return total;
}

double integrate_panels_real(const std::function<double(double)>& f,
                             const std::vector<double>& breakpoints, int order) {
    const GaussRule& rule = gauss_legendre(order);
    double total = 0.0;
    for (std::size_t p = 0; p + 1 < breakpoints.size(); ++p) {
        double a = breakpoints[p], b = breakpoints[p + 1];
        double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
        total += half * acc;
    }
    return total;
}

std::vector<double> uniform_breakpoints(double a, double b, double max_width) {
    if (!(b > a)) throw config_error("integration interval is empty");
    if (!(max_width > 0)) throw config_error("panel width must be positive");
    long panels = static_cast<long>(std::ceil((b - a) / max_width));
    if (panels < 1) panels = 1;
    std::vector<double> bp(static_cast<std::size_t>(panels) + 1);
    for (long i = 0; i <= panels; ++i)
        bp[static_cast<std::size_t>(i)] = a + (b - a) * static_cast<double>(i) / panels;
    return bp;
}

std::vector<double> geometric_breakpoints(double a, double b, double first, double ratio) {
    if (!(b > a)) throw config_error("integration interval is empty");
    if (!(first > 0) || !(ratio > 1.0)) throw config_error("invalid geometric panel spec");
    std::vector<double> bp{a};
    double width = first;
    double x = a;
    while (x + width < b) {
        x += width;
        bp.push_back(x);
        width *= ratio;
    }
    bp.push_back(b);
    return bp;
}

RichardsonResult richardson_extrapolate(const std::vector<cplx>& samples) {
    if (samples.size() < 2)
        throw config_error("richardson extrapolation needs at least two samples");
    std::size_t k = samples.size();
    std::vector<std::vector<cplx>> t(k);
    for (std::size_t i = 0; i < k; ++i) {
        t[i].resize(i + 1);
        t[i][0] = samples[i];
        for (std::size_t j = 1; j <= i; ++j) {
            double f = std::exp2(static_cast<double>(j));
            t[i][j] = (f * t[i][j - 1] - t[i - 1][j - 1]) / (f - 1.0);
        }
    }
    RichardsonResult out;
    out.samples = samples;
    out.value = t[k - 1][k - 1];
    out.residual = std::abs(t[k - 1][k - 1] - t[k - 1][k - 2]);

    // Diagonal increments should shrink when the expansion is valid.
    double scale = std::abs(out.value);
    double prev = -1.0;
    for (std::size_t j = 1; j < k; ++j) {
        double inc = std::abs(t[j][j] - t[j - 1][j - 1]);
        if (prev >= 0.0 && inc > prev && inc > 1e-13 * std::max(1.0, scale))
            out.diverged = true;
        prev = inc;
    }
    return out;
}

}  // namespace lapbox
