#include "lapbox/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>

namespace lapbox {
namespace {

// FFTW's planner is not thread-safe, and planning is far more expensive than
// execution for the repeated small transforms the ascent loops perform, so
// plans are cached per shape. FFTW_UNALIGNED lets one plan serve any buffer.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan plan_for(const std::vector<long>& dims, int sign) {
    static std::map<std::pair<std::vector<long>, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(planner_mutex());
    auto key = std::make_pair(dims, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::vector<int> n(dims.begin(), dims.end());
    std::size_t total = 1;
    for (long v : dims) total *= static_cast<std::size_t>(v);
    std::vector<cplx> scratch(total);
    auto* raw = reinterpret_cast<fftw_complex*>(scratch.data());
    fftw_plan plan = fftw_plan_dft(static_cast<int>(n.size()), n.data(), raw, raw,
                                   sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!plan) throw budget_error("fftw refused to plan the requested transform shape");
    cache.emplace(std::move(key), plan);
    return plan;
}

}  // namespace

void fft_inplace(std::vector<cplx>& data, const std::vector<long>& dims, int sign) {
    std::size_t total = 1;
    for (long v : dims) {
        if (v <= 0) throw config_error("fft dimensions must be positive");
        total *= static_cast<std::size_t>(v);
    }
    if (data.size() != total) throw config_error("fft buffer does not match its declared shape");
    fftw_plan plan = plan_for(dims, sign);
    auto* raw = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, raw, raw);
}

}  // namespace lapbox
