#include "localinv/fixedpoint.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "localinv/kernels.hpp"
#include "localinv/parallel.hpp"
#include "localinv/rng.hpp"

namespace localinv::fixedpoint {

const char* to_string(IterStatus s) {
    switch (s) {
        case IterStatus::converged: return "converged";
        case IterStatus::max_iter: return "max_iter";
        case IterStatus::escaped_body: return "escaped_body";
        case IterStatus::two_cycle: return "two_cycle";
        default: return "non_convergent";
    }
}

const char* to_string(SetVerdict v) {
    switch (v) {
        case SetVerdict::empty: return "empty";
        case SetVerdict::singleton: return "singleton";
        case SetVerdict::convex_segment: return "convex_segment";
        case SetVerdict::convex_set: return "convex_set";
        default: return "nonconvex";
    }
}

namespace {

bool inside(const spaces::Body& body, const Vec& x) {
    if (body.contains(x)) return true;
    return body.boundary_distance(x) <= 1e-9 * std::max(1.0, body.diameter());
}

}  // namespace

Result banach_iterate(const SelfMap& map, const spaces::Space& space, const Vec& x0,
                      const Options& options) {
    Result res;
    res.mode = IterMode::banach;
    Vec x = x0;
    if (options.keep_iterates) res.iterates.push_back(x);

    const double L = options.lipschitz.value_or(-1.0);
    const bool contraction = L >= 0.0 && L < 1.0;
    // a-posteriori stopping: |x_{k+1}-x_k| <= tol (1-L)/max(L, tol)
    const double step_tol =
        contraction ? options.tol * (1.0 - L) / std::max(L, options.tol) : options.tol;

    double first_step = 0.0;
    Vec x_prev;
    for (int k = 1; k <= options.max_iter; ++k) {
        if (options.body && !inside(*options.body, x)) {
            res.status = IterStatus::escaped_body;
            res.point = x;
            res.iterations = k - 1;
            return res;
        }
        Vec xn = map(x);
        const double step = space.norm(xn - x);
        if (k == 1) first_step = step;
        res.log.push_back({k, step, step});
        if (options.keep_iterates) res.iterates.push_back(xn);

        if (step <= std::max(step_tol, options.tol)) {
            const double residual = space.norm(map(xn) - xn);
            if (residual <= options.tol) {
                res.point = xn;
                res.residual = residual;
                res.iterations = k;
                res.converged = true;
                res.status = IterStatus::converged;
                if (contraction && first_step > 0.0) {
                    res.apriori_bound = std::pow(L, k) / (1.0 - L) * first_step;
                }
                return res;
            }
        }
        if (k >= 2 && step > options.tol && space.norm(xn - x_prev) <= options.tol) {
            res.status = IterStatus::two_cycle;
            res.point = x;
            res.iterations = k;
            return res;
        }
        x_prev = x;
        x = std::move(xn);
    }
    res.point = x;
    res.residual = space.norm(map(x) - x);
    res.iterations = options.max_iter;
    res.status = IterStatus::max_iter;
    return res;
}

Result km_iterate(const SelfMap& map, const spaces::Space& space, const Vec& x0,
                  const Options& options) {
    Result res;
    res.mode = IterMode::krasnoselskii_mann;
    const double lambda = options.relaxation;
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error("KM relaxation must be in (0, 1)");
    Vec x = x0;
    if (options.keep_iterates) res.iterates.push_back(x);

    for (int k = 1; k <= options.max_iter; ++k) {
        if (options.body && !inside(*options.body, x)) {
            res.status = IterStatus::escaped_body;
            res.point = x;
            res.iterations = k - 1;
            return res;
        }
        const Vec mx = map(x);
        const double residual = space.norm(mx - x);
        res.log.push_back({k, residual, lambda * residual});
        if (residual <= options.tol) {
            res.point = x;
            res.residual = residual;
            res.iterations = k;
            res.converged = true;
            res.status = IterStatus::converged;
            return res;
        }
        x = (1.0 - lambda) * x + lambda * mx;
        if (options.keep_iterates) res.iterates.push_back(x);
    }
    res.point = x;
    res.residual = space.norm(map(x) - x);
    res.iterations = options.max_iter;
    res.status = IterStatus::max_iter;
    return res;
}

Result solve(const SelfMap& map, const spaces::Space& space, const Vec& x0,
             const Options& options) {
    Result banach = banach_iterate(map, space, x0, options);
    if (banach.status != IterStatus::two_cycle && banach.status != IterStatus::max_iter) {
        return banach;
    }
    // Raw iteration cycled or stalled; average it out.
    Vec start = x0;
    if (banach.status == IterStatus::two_cycle) {
        start = 0.5 * (banach.point + map(banach.point));
        if (options.body) start = options.body->clamp(start);
    }
    Result km = km_iterate(map, space, start, options);
    return km.converged ? km : (banach.converged ? banach : km);
}

FixedPointSet probe_fixed_point_set(const SelfMap& map, const spaces::Body& body,
                                    std::uint64_t seed, const ProbeOptions& options) {
    const spaces::Space& space = body.space();
    const int dim = space.dim();
    const double diam = body.diameter();

    std::vector<Vec> starts;
    starts.push_back(body.center());
    const Vec hw = body.box_halfwidths();
    for (int i = 0; i < dim; ++i) {
        Vec e = body.center();
        e[i] += 0.5 * hw[i];
        starts.push_back(body.clamp(e));
        e[i] -= hw[i];
        starts.push_back(body.clamp(e));
    }
    Rng rng(mix_seed(seed, 0x53545254ULL));
    while (static_cast<int>(starts.size()) < std::max(options.n_starts, 1)) {
        starts.push_back(body.sample_interior(rng));
    }

    Options iter;
    iter.tol = options.fp_tol * 0.5;
    iter.max_iter = options.max_iter;
    iter.body = body;
    iter.relaxation = options.relaxation;

    std::vector<Result> results(starts.size());
    par::for_each_index(starts.size(),
                        [&](std::size_t i) { results[i] = solve(map, space, starts[i], iter); });

    FixedPointSet set;
    const double cluster_radius = options.cluster_fraction * std::max(diam, 1e-300);
    for (const Result& r : results) {
        if (!r.converged) continue;
        if (!inside(body, r.point)) continue;
        bool dup = false;
        for (const Vec& p : set.points) {
            if (space.norm(p - r.point) <= cluster_radius) {
                dup = true;
                break;
            }
        }
        if (!dup) set.points.push_back(r.point);
    }

    if (set.points.empty()) {
        set.verdict = SetVerdict::empty;
        return set;
    }
    if (set.points.size() == 1) {
        set.verdict = SetVerdict::singleton;
        return set;
    }

    // Convexity check: sampled combinations of every pair must be fixed.
    double worst = 0.0;
    for (std::size_t i = 0; i < set.points.size(); ++i) {
        for (std::size_t j = i + 1; j < set.points.size(); ++j) {
            for (int t = 0; t <= 10; ++t) {
                const double lam = static_cast<double>(t) / 10.0;
                const Vec p = (1.0 - lam) * set.points[i] + lam * set.points[j];
                worst = std::max(worst, space.norm(map(p) - p));
            }
        }
    }
    set.worst_combination_residual = worst;
    if (worst > options.fp_tol) {
        set.verdict = SetVerdict::nonconvex;
        return set;
    }
    // Segment or higher-dimensional convex set: affine rank of the points.
    Mat diffs(dim, static_cast<Eigen::Index>(set.points.size()) - 1);
    for (std::size_t i = 1; i < set.points.size(); ++i) {
        diffs.col(static_cast<Eigen::Index>(i) - 1) = set.points[i] - set.points[0];
    }
    Eigen::JacobiSVD<Mat> svd(diffs);
    const auto& sv = svd.singularValues();
    const double rank_tol = 1e-8 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv[i] > rank_tol) ++rank;
    }
    set.verdict = rank <= 1 ? SetVerdict::convex_segment : SetVerdict::convex_set;
    return set;
}

GridScan grid_min_residual(const SelfMap& map, const spaces::Body& body, double grid_step) {
    if (body.space().dim() > 3) {
        throw Error("grid oracle requires dimension <= 3");
    }
    const kernels::GridScanResult r = kernels::grid_scan(map, body, grid_step);
    GridScan out;
    out.min_residual = r.min_residual;
    out.argmin = r.argmin;
    out.nodes = r.nodes_visited;
    return out;
}

}  // namespace localinv::fixedpoint
