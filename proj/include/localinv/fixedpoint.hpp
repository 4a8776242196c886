#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "localinv/common.hpp"
#include "localinv/spaces.hpp"

namespace localinv::fixedpoint {

using SelfMap = std::function<Vec(const Vec&)>;

enum class IterStatus {
    converged,
    max_iter,
    escaped_body,
    two_cycle,  // raw iteration detected a period-2 orbit
    non_convergent,
};

const char* to_string(IterStatus s);

enum class IterMode { banach, krasnoselskii_mann, grid };

struct IterLogEntry {
    int k = 0;
    double residual = 0.0;
    double step = 0.0;
};

struct Result {
    Vec point;
    double residual = 0.0;
    int iterations = 0;
    IterMode mode = IterMode::banach;
    std::optional<double> apriori_bound;  // L^k/(1-L) * |x1-x0| when L < 1 known
    bool converged = false;
    IterStatus status = IterStatus::non_convergent;
    std::vector<IterLogEntry> log;
    std::vector<Vec> iterates;  // filled when Options::keep_iterates
};

struct Options {
    double tol = 1e-12;
    int max_iter = 10000;
    std::optional<double> lipschitz;      // a-posteriori stopping when < 1
    std::optional<spaces::Body> body;     // iterates must stay inside
    double relaxation = 0.5;              // KM relaxation in (0,1)
    bool keep_iterates = false;
};

Result banach_iterate(const SelfMap& map, const spaces::Space& space, const Vec& x0,
                      const Options& options = {});

Result km_iterate(const SelfMap& map, const spaces::Space& space, const Vec& x0,
                  const Options& options = {});

/// Banach iteration with automatic KM fallback when a 2-cycle is detected
/// (nonexpansive maps such as x -> -x cycle under raw iteration).
Result solve(const SelfMap& map, const spaces::Space& space, const Vec& x0,
             const Options& options = {});

enum class SetVerdict { empty, singleton, convex_segment, convex_set, nonconvex };

const char* to_string(SetVerdict v);

struct FixedPointSet {
    std::vector<Vec> points;  // pairwise distance > cluster_radius
    SetVerdict verdict = SetVerdict::empty;
    double worst_combination_residual = 0.0;
};

struct ProbeOptions {
    int n_starts = 16;
    double fp_tol = 1e-10;
    int max_iter = 2000;
    double relaxation = 0.5;
    /// Dedup radius as a fraction of the body diameter.
    double cluster_fraction = 1e-6;
};

/// Multistart search (center + axis points + random fill, Banach with KM
/// fallback), clustered; convexity tested on 11 sampled combinations per
/// pair of found points. Empty set is a verdict, not an error.
FixedPointSet probe_fixed_point_set(const SelfMap& map, const spaces::Body& body,
                                    std::uint64_t seed, const ProbeOptions& options = {});

struct GridScan {
    double min_residual = 0.0;
    Vec argmin;
    std::uint64_t nodes = 0;
};

/// Exhaustive min of norm(map(x) - x) over the delta-grid in the body
/// (dimension <= 3; throws GridTooLarge beyond 1e8 nodes).
GridScan grid_min_residual(const SelfMap& map, const spaces::Body& body, double grid_step);

}  // namespace localinv::fixedpoint
