#pragma once

#include <cstdint>
#include <functional>

#include "localinv/common.hpp"
#include "localinv/spaces.hpp"

namespace localinv::kernels {

using MapFn = std::function<Vec(const Vec&)>;

/// Best sample found by a scan: the extremal value, the chunk that produced
/// it, and the witness point(s). Chunk partials are merged in chunk order
/// with ties broken toward the smaller chunk index, so serial and parallel
/// runs agree bitwise.
struct ScanWitness {
    double value = 0.0;
    std::uint64_t chunk = UINT64_MAX;
    Vec a;
    Vec b;
    bool valid() const { return chunk != UINT64_MAX; }
};

struct ScanConfig {
    std::uint64_t samples = 2048;  // rounded up to whole chunks
    int chunk_size = 256;
    int refine_steps = 128;  // deterministic local refinement per chunk
    std::uint64_t seed = 0;
};

/// Largest difference quotient norm(f(x)-f(x'))/norm(x-x') over sampled
/// pairs in the body, with per-chunk hill-climb refinement. A lower bound
/// on the Lipschitz constant, nondecreasing in the sample budget.
ScanWitness lipschitz_scan_serial(const MapFn& f, const spaces::Body& body, const ScanConfig& cfg);
ScanWitness lipschitz_scan_parallel(const MapFn& f, const spaces::Body& body,
                                    const ScanConfig& cfg);
ScanWitness lipschitz_scan(const MapFn& f, const spaces::Body& body, const ScanConfig& cfg);

/// Worst containment violation of f as a self-map of the body (0 when all
/// sampled images stay inside; otherwise max boundary overshoot).
ScanWitness selfmap_scan_serial(const MapFn& f, const spaces::Body& body, const ScanConfig& cfg);
ScanWitness selfmap_scan_parallel(const MapFn& f, const spaces::Body& body, const ScanConfig& cfg);
ScanWitness selfmap_scan(const MapFn& f, const spaces::Body& body, const ScanConfig& cfg);

/// Smallest 1 - ||x+y||/2 over sampled unit pairs with ||x-y|| >= eps
/// (modulus-of-convexity search). Nonincreasing in the sample budget.
ScanWitness modulus_scan_serial(const spaces::Space& space, double eps, const ScanConfig& cfg);
ScanWitness modulus_scan_parallel(const spaces::Space& space, double eps, const ScanConfig& cfg);
ScanWitness modulus_scan(const spaces::Space& space, double eps, const ScanConfig& cfg);

/// Exhaustive residual scan norm(f(x)-x) over the delta-grid intersected
/// with the body (dimension <= 3). Throws GridTooLarge beyond 1e8 nodes.
struct GridScanResult {
    double min_residual = 0.0;
    Vec argmin;
    std::uint64_t nodes_visited = 0;
};
GridScanResult grid_scan_serial(const MapFn& f, const spaces::Body& body, double step);
GridScanResult grid_scan_parallel(const MapFn& f, const spaces::Body& body, double step);
GridScanResult grid_scan(const MapFn& f, const spaces::Body& body, double step);

/// Grid points whose value fn(x) falls below the threshold, in grid order.
std::vector<Vec> grid_collect(const std::function<double(const Vec&)>& fn,
                              const spaces::Body& body, double step, double threshold);

}  // namespace localinv::kernels
