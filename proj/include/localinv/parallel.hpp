#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace localinv::par {

/// Effective thread cap: programmatic override, else LOCALINV_THREADS,
/// else the OpenMP default (1 when built without OpenMP).
int thread_limit();

/// Override the thread cap in-process (0 restores env/default behaviour).
void set_thread_override(int n);

/// Per-chunk map-reduce. Partials are computed independently per chunk and
/// folded in ascending chunk order, so the result is identical for the
/// serial and parallel paths and for any thread count.
template <class T, class PerChunk, class Better>
T scan_chunks_serial(std::size_t n_chunks, PerChunk&& per_chunk, T acc, Better&& better) {
    for (std::size_t c = 0; c < n_chunks; ++c) {
        acc = better(std::move(acc), per_chunk(c));
    }
    return acc;
}

template <class T, class PerChunk, class Better>
T scan_chunks_parallel(std::size_t n_chunks, PerChunk&& per_chunk, T acc, Better&& better) {
#ifdef _OPENMP
    std::vector<T> partials(n_chunks);
    const int threads = thread_limit();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
        partials[static_cast<std::size_t>(c)] = per_chunk(static_cast<std::size_t>(c));
    }
    for (std::size_t c = 0; c < n_chunks; ++c) {
        acc = better(std::move(acc), std::move(partials[c]));
    }
    return acc;
#else
    return scan_chunks_serial(n_chunks, std::forward<PerChunk>(per_chunk), std::move(acc),
                              std::forward<Better>(better));
#endif
}

template <class T, class PerChunk, class Better>
T scan_chunks(std::size_t n_chunks, PerChunk&& per_chunk, T acc, Better&& better) {
    if (thread_limit() > 1 && n_chunks > 1) {
        return scan_chunks_parallel(n_chunks, std::forward<PerChunk>(per_chunk), std::move(acc),
                                    std::forward<Better>(better));
    }
    return scan_chunks_serial(n_chunks, std::forward<PerChunk>(per_chunk), std::move(acc),
                              std::forward<Better>(better));
}

/// Elementwise parallel loop; fn(i) must only touch slot i of its outputs.
template <class Fn>
void for_each_index(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
    if (thread_limit() > 1 && n > 1) {
        const int threads = thread_limit();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
            fn(static_cast<std::size_t>(i));
        }
        return;
    }
#endif
    for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace localinv::par
