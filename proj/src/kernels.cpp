#include "localinv/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "localinv/parallel.hpp"
#include "localinv/rng.hpp"

namespace localinv::kernels {

namespace {

using spaces::Body;
using spaces::Space;

// Stream tags decorrelating kernels that share a master seed.
constexpr std::uint64_t kTagLipschitz = 0x4C495053ULL;
constexpr std::uint64_t kTagSelfmap = 0x53454C46ULL;
constexpr std::uint64_t kTagModulus = 0x4D4F4455ULL;

std::size_t chunk_count(const ScanConfig& cfg) {
    const std::uint64_t cs = static_cast<std::uint64_t>(std::max(cfg.chunk_size, 1));
    return static_cast<std::size_t>((std::max<std::uint64_t>(cfg.samples, 1) + cs - 1) / cs);
}

ScanWitness merge_max(ScanWitness acc, ScanWitness cand) {
    if (!cand.valid()) return acc;
    if (!acc.valid() || cand.value > acc.value) return cand;
    return acc;
}

ScanWitness merge_min(ScanWitness acc, ScanWitness cand) {
    if (!cand.valid()) return acc;
    if (!acc.valid() || cand.value < acc.value) return cand;
    return acc;
}

// --------------------------------------------------------------------------
// Lipschitz scan

ScanWitness lipschitz_chunk(const MapFn& f, const Body& body, const ScanConfig& cfg,
                            std::size_t chunk) {
    Rng rng(mix_seed(mix_seed(cfg.seed, kTagLipschitz), chunk));
    const Space& sp = body.space();
    const int dim = sp.dim();
    const double diam = body.diameter();
    if (diam <= 0.0) return {};
    const double gap_floor = 1e-12 * diam;

    ScanWitness best;
    auto consider = [&](const Vec& u, const Vec& v) {
        const double gap = sp.norm(u - v);
        if (!(gap > gap_floor)) return;
        const double ratio = sp.norm(f(u) - f(v)) / gap;
        if (!best.valid() || ratio > best.value) best = ScanWitness{ratio, chunk, u, v};
    };

    for (int i = 0; i < cfg.chunk_size; ++i) {
        Vec u, v;
        switch (i % 3) {
            case 0:  // independent pair
                u = body.sample_interior(rng);
                v = body.sample_interior(rng);
                break;
            case 1: {  // nearby pair (difference quotients localize the sup)
                u = body.sample_interior(rng);
                const double scale = diam * std::pow(10.0, -1.0 - 4.0 * rng.uniform());
                v = body.clamp(u + scale * rng.cube(dim));
                break;
            }
            default: {  // boundary-hugging pair
                u = body.sample_boundary(rng);
                v = body.clamp(u + (0.05 * diam * rng.uniform()) * rng.cube(dim));
                break;
            }
        }
        consider(u, v);
    }

    if (best.valid()) {
        const int steps = std::max(cfg.refine_steps, 0);
        for (int k = 0; k < steps; ++k) {
            const double sigma =
                diam * std::pow(0.5, 1.0 + 10.0 * static_cast<double>(k) / std::max(steps, 1));
            Vec u = best.a, v = best.b;
            switch (k % 3) {
                case 0:  // contract the gap toward u
                    v = u + 0.5 * (v - u);
                    break;
                case 1:  // jitter both endpoints
                    u += sigma * rng.cube(dim);
                    v += sigma * rng.cube(dim);
                    break;
                default: {  // translate the pair rigidly
                    const Vec t = sigma * rng.cube(dim);
                    u += t;
                    v += t;
                    break;
                }
            }
            consider(body.clamp(u), body.clamp(v));
        }
    }
    return best;
}

// --------------------------------------------------------------------------
// Self-map scan

ScanWitness selfmap_chunk(const MapFn& f, const Body& body, const ScanConfig& cfg,
                          std::size_t chunk) {
    Rng rng(mix_seed(mix_seed(cfg.seed, kTagSelfmap), chunk));
    const int dim = body.space().dim();
    const double diam = body.diameter();

    ScanWitness worst;
    auto consider = [&](const Vec& x) {
        const Vec y = f(x);
        const auto [inside, bd] = body.query(y);
        const double violation = inside ? 0.0 : bd;
        if (!worst.valid() || violation > worst.value) worst = ScanWitness{violation, chunk, x, y};
    };

    if (chunk == 0) {
        // deterministic probes: center and clamped axis extremes
        consider(body.center());
        const Vec hw = body.box_halfwidths();
        for (int i = 0; i < dim; ++i) {
            Vec e = body.center();
            e[i] += hw[i];
            consider(body.clamp(e));
            e[i] -= 2.0 * hw[i];
            consider(body.clamp(e));
        }
    }

    for (int i = 0; i < cfg.chunk_size; ++i) {
        consider(i % 2 == 0 ? body.sample_boundary(rng) : body.sample_interior(rng));
    }

    if (worst.valid() && diam > 0.0) {
        const int steps = std::max(cfg.refine_steps / 4, 8);
        for (int k = 0; k < steps; ++k) {
            const double sigma =
                diam * std::pow(0.5, 1.0 + 8.0 * static_cast<double>(k) / steps);
            consider(body.clamp(worst.a + sigma * rng.cube(dim)));
        }
    }
    return worst;
}

// --------------------------------------------------------------------------
// Modulus-of-convexity scan

ScanWitness modulus_chunk(const Space& space, double eps, const ScanConfig& cfg,
                          std::size_t chunk) {
    Rng rng(mix_seed(mix_seed(cfg.seed, kTagModulus), chunk));
    const int dim = space.dim();

    ScanWitness best;
    auto consider = [&](Vec x, Vec y) {
        const double nx = space.norm(x);
        const double ny = space.norm(y);
        if (nx < 1e-9 || ny < 1e-9) return;
        x /= nx;
        y /= ny;
        if (space.norm(x - y) < eps - 1e-12) return;
        const double value = 1.0 - space.norm(x + y) / 2.0;
        if (!best.valid() || value < best.value) best = ScanWitness{value, chunk, x, y};
    };

    // Designed candidates: antipodal pair (always admissible), coincident
    // pair (admissible at eps = 0), axis pairs, and the exact flat-face
    // witnesses of the l1 and max norms.
    {
        Vec e1 = Vec::Zero(dim);
        e1[0] = 1.0;
        consider(e1, -e1);
        consider(e1, e1);
        for (int j = 1; j < std::min(dim, 4); ++j) {
            Vec ej = Vec::Zero(dim);
            ej[j] = 1.0;
            consider(e1, ej);
            consider(e1, -ej);
        }
        if (!space.is_product() && dim >= 2) {
            const double p = space.pexp();
            if (p == 1.0) {
                Vec y = Vec::Zero(dim);
                y[0] = 1.0 - eps / 2.0;
                y[1] = eps / 2.0;
                consider(e1, y);
            } else if (p == std::numeric_limits<double>::infinity()) {
                Vec x = Vec::Zero(dim);
                x[0] = 1.0;
                x[1] = 1.0;
                Vec y = x;
                y[1] = 1.0 - eps;
                consider(x, y);
            }
        }
    }

    for (int i = 0; i < cfg.chunk_size; ++i) {
        Vec x = space.random_unit(rng);
        Vec y;
        if (i % 2 == 0) {
            y = space.random_unit(rng);
        } else {
            // hug the admissibility constraint ||x - y|| ~ eps
            y = x + (eps + 0.5 * rng.uniform()) * space.random_unit(rng);
        }
        consider(x, y);
    }

    if (best.valid()) {
        const int steps = std::max(cfg.refine_steps, 0);
        for (int k = 0; k < steps; ++k) {
            const double sigma = std::pow(0.5, 1.0 + 10.0 * static_cast<double>(k) / std::max(steps, 1));
            Vec x = best.a + sigma * rng.cube(dim);
            Vec y = best.b + sigma * rng.cube(dim);
            consider(x, y);
        }
    }
    return best;
}

template <class PerChunk>
ScanWitness run_scan(std::size_t n_chunks, PerChunk&& per_chunk, bool minimize, int mode) {
    auto merge = minimize ? merge_min : merge_max;
    switch (mode) {
        case 0:
            return par::scan_chunks_serial(n_chunks, per_chunk, ScanWitness{}, merge);
        case 1:
            return par::scan_chunks_parallel(n_chunks, per_chunk, ScanWitness{}, merge);
        default:
            return par::scan_chunks(n_chunks, per_chunk, ScanWitness{}, merge);
    }
}

// --------------------------------------------------------------------------
// Grid scan

struct GridGeometry {
    Vec origin;
    std::vector<std::int64_t> counts;
    double step = 0.0;
    std::uint64_t total = 0;

    Vec node(std::uint64_t flat) const {
        const std::size_t d = counts.size();
        Vec x(static_cast<Eigen::Index>(d));
        for (std::size_t i = d; i-- > 0;) {
            const auto c = static_cast<std::uint64_t>(counts[i]);
            x[static_cast<Eigen::Index>(i)] =
                origin[static_cast<Eigen::Index>(i)] + static_cast<double>(flat % c) * step;
            flat /= c;
        }
        return x;
    }
};

GridGeometry make_grid(const Body& body, double step) {
    if (!(step > 0.0)) throw Error("grid step must be positive");
    const Vec hw = body.box_halfwidths();
    const Vec& c = body.center();
    GridGeometry g;
    g.step = step;
    g.origin = Vec(c.size());
    g.counts.resize(static_cast<std::size_t>(c.size()));
    g.total = 1;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        const auto k = static_cast<std::int64_t>(std::floor(hw[i] / step + 1e-6));
        if (2 * k + 1 > 100'000'000LL) {
            throw GridTooLarge("grid scan would visit more than 1e8 nodes");
        }
        g.counts[static_cast<std::size_t>(i)] = 2 * k + 1;
        g.origin[i] = c[i] - static_cast<double>(k) * step;
        g.total *= static_cast<std::uint64_t>(2 * k + 1);
        if (g.total > 100'000'000ULL) {
            throw GridTooLarge("grid scan would visit more than 1e8 nodes");
        }
    }
    return g;
}

struct GridPartial {
    ScanWitness best;
    std::uint64_t visited = 0;
};

GridScanResult grid_scan_impl(const MapFn& f, const Body& body, double step, int mode) {
    const GridGeometry g = make_grid(body, step);
    const Space& sp = body.space();
    const double slack = 1e-12 * std::max(1.0, body.diameter());
    const std::uint64_t chunk_nodes = 8192;
    const std::size_t n_chunks = static_cast<std::size_t>((g.total + chunk_nodes - 1) / chunk_nodes);

    auto per_chunk = [&](std::size_t chunk) {
        GridPartial part;
        const std::uint64_t begin = static_cast<std::uint64_t>(chunk) * chunk_nodes;
        const std::uint64_t end = std::min(g.total, begin + chunk_nodes);
        for (std::uint64_t flat = begin; flat < end; ++flat) {
            Vec x = g.node(flat);
            if (!body.contains(x) && body.boundary_distance(x) > slack) continue;
            ++part.visited;
            const double residual = sp.norm(f(x) - x);
            if (!part.best.valid() || residual < part.best.value) {
                part.best = ScanWitness{residual, chunk, x, Vec()};
            }
        }
        return part;
    };
    auto merge = [](GridPartial acc, GridPartial cand) {
        acc.visited += cand.visited;
        acc.best = merge_min(std::move(acc.best), std::move(cand.best));
        return acc;
    };

    GridPartial out;
    switch (mode) {
        case 0:
            out = par::scan_chunks_serial(n_chunks, per_chunk, GridPartial{}, merge);
            break;
        case 1:
            out = par::scan_chunks_parallel(n_chunks, per_chunk, GridPartial{}, merge);
            break;
        default:
            out = par::scan_chunks(n_chunks, per_chunk, GridPartial{}, merge);
            break;
    }

    GridScanResult res;
    res.nodes_visited = out.visited;
    if (out.best.valid()) {
        res.min_residual = out.best.value;
        res.argmin = out.best.a;
    } else {
        res.min_residual = std::numeric_limits<double>::infinity();
        res.argmin = body.center();
    }
    return res;
}

}  // namespace

ScanWitness lipschitz_scan_serial(const MapFn& f, const Body& body, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return lipschitz_chunk(f, body, cfg, c); },
                    false, 0);
}
ScanWitness lipschitz_scan_parallel(const MapFn& f, const Body& body, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return lipschitz_chunk(f, body, cfg, c); },
                    false, 1);
}
ScanWitness lipschitz_scan(const MapFn& f, const Body& body, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return lipschitz_chunk(f, body, cfg, c); },
                    false, 2);
}

ScanWitness selfmap_scan_serial(const MapFn& f, const Body& body, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return selfmap_chunk(f, body, cfg, c); },
                    false, 0);
}
ScanWitness selfmap_scan_parallel(const MapFn& f, const Body& body, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return selfmap_chunk(f, body, cfg, c); },
                    false, 1);
}
ScanWitness selfmap_scan(const MapFn& f, const Body& body, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return selfmap_chunk(f, body, cfg, c); },
                    false, 2);
}

ScanWitness modulus_scan_serial(const Space& space, double eps, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return modulus_chunk(space, eps, cfg, c); },
                    true, 0);
}
ScanWitness modulus_scan_parallel(const Space& space, double eps, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return modulus_chunk(space, eps, cfg, c); },
                    true, 1);
}
ScanWitness modulus_scan(const Space& space, double eps, const ScanConfig& cfg) {
    return run_scan(chunk_count(cfg), [&](std::size_t c) { return modulus_chunk(space, eps, cfg, c); },
                    true, 2);
}

GridScanResult grid_scan_serial(const MapFn& f, const Body& body, double step) {
    return grid_scan_impl(f, body, step, 0);
}
GridScanResult grid_scan_parallel(const MapFn& f, const Body& body, double step) {
    return grid_scan_impl(f, body, step, 1);
}
GridScanResult grid_scan(const MapFn& f, const Body& body, double step) {
    return grid_scan_impl(f, body, step, 2);
}

std::vector<Vec> grid_collect(const std::function<double(const Vec&)>& fn, const Body& body,
                              double step, double threshold) {
    const GridGeometry g = make_grid(body, step);
    const double slack = 1e-12 * std::max(1.0, body.diameter());
    const std::uint64_t chunk_nodes = 8192;
    const std::size_t n_chunks = static_cast<std::size_t>((g.total + chunk_nodes - 1) / chunk_nodes);

    auto per_chunk = [&](std::size_t chunk) {
        std::vector<Vec> hits;
        const std::uint64_t begin = static_cast<std::uint64_t>(chunk) * chunk_nodes;
        const std::uint64_t end = std::min(g.total, begin + chunk_nodes);
        for (std::uint64_t flat = begin; flat < end; ++flat) {
            Vec x = g.node(flat);
            if (!body.contains(x) && body.boundary_distance(x) > slack) continue;
            if (fn(x) <= threshold) hits.push_back(std::move(x));
        }
        return hits;
    };
    auto merge = [](std::vector<Vec> acc, std::vector<Vec> cand) {
        acc.insert(acc.end(), std::make_move_iterator(cand.begin()),
                   std::make_move_iterator(cand.end()));
        return acc;
    };
    return par::scan_chunks(n_chunks, per_chunk, std::vector<Vec>{}, merge);
}

}  // namespace localinv::kernels
