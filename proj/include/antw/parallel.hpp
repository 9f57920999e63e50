#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#if ANTW_HAVE_OPENMP
#include <omp.h>
#endif

namespace antw {

// Runtime switch between the OpenMP kernels and the serial reference path.
// Results are identical by construction: every reduction is an argmin/argmax
// over values computed independently per index, merged in index order.
struct ParallelConfig {
    bool enabled = true;
    int threads = 0;  // 0 = library default

    static ParallelConfig serial() { return {false, 0}; }
};

namespace detail {
inline bool use_omp(const ParallelConfig& cfg) {
#if ANTW_HAVE_OPENMP
    return cfg.enabled;
#else
    (void)cfg;
    return false;
#endif
}
}  // namespace detail

template <typename F>
void parallel_for(std::size_t n, const ParallelConfig& cfg, F&& body) {
    if (!detail::use_omp(cfg)) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
#if ANTW_HAVE_OPENMP
    if (cfg.threads > 0) {
#pragma omp parallel for schedule(dynamic) num_threads(cfg.threads)
        for (long long i = 0; i < static_cast<long long>(n); ++i) body(static_cast<std::size_t>(i));
    } else {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(n); ++i) body(static_cast<std::size_t>(i));
    }
#endif
}

// Evaluates value(i) for i in [0,n) and returns the index-ordered minimum:
// ties broken by the smaller index, independent of thread schedule.
template <typename ValueFn>
std::pair<std::size_t, double> parallel_argmin(std::size_t n, const ParallelConfig& cfg,
                                               ValueFn&& value) {
    std::vector<double> vals(n);
    parallel_for(n, cfg, [&](std::size_t i) { vals[i] = value(i); });
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i)
        if (vals[i] < vals[best]) best = i;
    return {best, n ? vals[best] : 0.0};
}

}  // namespace antw
