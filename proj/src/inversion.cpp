#include "localinv/inversion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "localinv/kernels.hpp"
#include "localinv/parallel.hpp"
#include "localinv/rng.hpp"

namespace localinv::inversion {

const char* to_string(ChartMode m) {
    switch (m) {
        case ChartMode::strong: return "strong";
        case ChartMode::nonexpansive_fpp: return "nonexpansive_fpp";
        default: return "weak_quasi";
    }
}

namespace {

constexpr std::uint64_t kTagChart = 0x43485254ULL;
constexpr std::uint64_t kTagSheets = 0x53484545ULL;
constexpr std::uint64_t kTagHL = 0x484C4559ULL;

std::optional<ChartMode> mode_for(cert::Classification c, bool allow_fpp,
                                  const spaces::Space& domain) {
    switch (c) {
        case cert::Classification::strong_a:
            return ChartMode::strong;
        case cert::Classification::nonexpansive_a:
            if (allow_fpp && domain.fixed_point_property()) return ChartMode::nonexpansive_fpp;
            return std::nullopt;
        case cert::Classification::weak_a_quasi:
            // mirrors the strict-convexity gate of the weak branch
            if (allow_fpp && domain.fixed_point_property() && domain.strictly_convex()) {
                return ChartMode::weak_quasi;
            }
            return std::nullopt;
        default:
            return std::nullopt;
    }
}

}  // namespace

Chart build_chart(const maps::Map& f, const Vec& a, const ChartOptions& options) {
    maps::LinearMap aux = options.auxiliary
                              ? *options.auxiliary
                              : maps::inverse_jacobian_map(f, a, options.tolerances.sigma_rel_tol);
    const Vec fa = f(a);

    std::uint64_t combo = 0;
    for (const double r : options.ladder) {
        for (const double rho_factor : {0.5, 0.25}) {
            const double rho = r * rho_factor;
            if (f.region() &&
                (!f.region()->contains(a) || f.region()->boundary_distance(a) < rho)) {
                continue;
            }
            const spaces::Body body = spaces::Body::ball(f.domain(), a, rho);
            for (const double s_factor : options.s_factors) {
                const double s = rho * s_factor;
                cert::CertifyOptions co;
                co.budgets = options.budgets;
                co.tolerances = options.tolerances;
                cert::Certificate c = cert::certify(f, a, aux, body, s,
                                                    mix_seed(options.seed, kTagChart, combo), co);
                ++combo;
                const auto mode = mode_for(c.classification, options.allow_fpp_modes, f.domain());
                if (!mode) continue;
                Chart chart{f, a, fa, body, aux, s, c, *mode, 0.0};
                chart.inv_tol = 1e-9 * std::max(aux.operator_norm(), 1e-30);
                return chart;
            }
        }
    }
    throw CertificationFailed("no body on the radius ladder certified the anchor");
}

Vec invert(const Chart& chart, const Vec& y, const std::optional<Vec>& start,
           double tol_override) {
    const maps::Map& f = chart.map;
    require_dim(y, f.codomain().dim(), "invert target");
    if (f.codomain().norm(y - chart.image) >= chart.s) {
        throw OutOfChart("target is outside the certified image ball");
    }
    const cert::TildeMap tilde(f, chart.anchor, y, chart.aux, chart.body);
    auto fn = [&tilde](const Vec& x) { return tilde(x); };

    const double inv_tol = tol_override > 0.0 ? tol_override : chart.inv_tol;
    // tilde residual |A(f(x)-y)| >= sigma_min(A) |f(x)-y|
    const double sigma_min = std::max(chart.aux.smallest_singular_value(), 1e-300);
    fixedpoint::Options opts;
    opts.tol = 0.5 * inv_tol * sigma_min;
    opts.body = chart.body;
    opts.max_iter = 20000;
    if (chart.mode == ChartMode::strong) {
        opts.lipschitz = chart.certificate.lipschitz_bound;
    }

    const Vec x0 = chart.body.clamp(start.value_or(chart.body.center()));
    fixedpoint::Result res = chart.mode == ChartMode::strong
                                 ? fixedpoint::banach_iterate(fn, f.domain(), x0, opts)
                                 : fixedpoint::solve(fn, f.domain(), x0, opts);
    if (!res.converged) {
        throw NonConvergent(std::string("inversion iteration did not converge: ") +
                            fixedpoint::to_string(res.status));
    }
    const double f_residual = f.codomain().norm(f(res.point) - y);
    if (f_residual > inv_tol) {
        std::ostringstream os;
        os << "inverse residual " << f_residual << " above tolerance " << inv_tol;
        throw NonConvergent(os.str());
    }
    return res.point;
}

Mat inverse_derivative(const Chart& chart, const Vec& y, double sigma_rel_tol) {
    const Vec x = invert(chart, y);
    return maps::inverse_jacobian_map(chart.map, x, sigma_rel_tol).matrix();
}

// ---------------------------------------------------------------------------
// Preimage finding

namespace {

/// Damped-Newton preimage refinement; returns a point with
/// |f(x) - y| <= tol or nullopt.
std::optional<Vec> newton_refine(const maps::Map& f, const Vec& y, const Vec& start, double tol,
                                 int max_iter, const spaces::Body& search_body) {
    Vec x = start;
    const double guard = 2.0 * search_body.diameter();
    for (int k = 0; k < max_iter; ++k) {
        if (search_body.space().norm(x - search_body.center()) > guard) return std::nullopt;
        Vec r;
        try {
            r = f(x) - y;
        } catch (const OutsideDomain&) {
            return std::nullopt;
        }
        const double rn = f.codomain().norm(r);
        if (rn <= tol) return x;
        maps::JacobianEstimate j;
        try {
            j = maps::jacobian(f, x);
        } catch (const Error&) {
            return std::nullopt;
        }
        if (!j.invertible()) return std::nullopt;
        const Vec step = j.matrix.partialPivLu().solve(r);
        x -= step;
    }
    return std::nullopt;
}

std::vector<Vec> cluster_points(const spaces::Space& space, std::vector<Vec> points,
                                double radius) {
    std::vector<Vec> reps;
    for (Vec& p : points) {
        bool dup = false;
        for (const Vec& q : reps) {
            if (space.norm(p - q) <= radius) {
                dup = true;
                break;
            }
        }
        if (!dup) reps.push_back(std::move(p));
    }
    return reps;
}

std::vector<Vec> find_preimages(const maps::Map& f, const Vec& y, const spaces::Body& body,
                                const ProbeOptions& options, std::uint64_t seed) {
    std::vector<Vec> starts;
    const int dim = body.space().dim();
    if (dim <= 3) {
        // coarse lattice seeding
        const double step = std::max(body.diameter() / 16.0, 1e-9);
        auto residual = [&](const Vec& x) {
            try {
                return f.codomain().norm(f(x) - y);
            } catch (const OutsideDomain&) {
                return std::numeric_limits<double>::infinity();
            }
        };
        double jac_scale = 1.0;
        std::vector<Vec> probes{body.center()};
        const Vec hw = body.box_halfwidths();
        for (int i = 0; i < dim; ++i) {
            Vec e = body.center();
            e[i] += 0.5 * hw[i];
            probes.push_back(body.clamp(e));
            e[i] -= hw[i];
            probes.push_back(body.clamp(e));
        }
        for (const Vec& p : probes) {
            try {
                jac_scale = std::max(jac_scale, maps::jacobian(f, p).operator_norm);
            } catch (const Error&) {
            }
        }
        const double cutoff = 3.0 * step * jac_scale;
        starts = kernels::grid_collect(residual, body, step, cutoff);
    }
    Rng rng(mix_seed(seed, 0x50524549ULL));
    const int n_random = std::max(options.multistart, 4);
    for (int i = 0; i < n_random; ++i) starts.push_back(body.sample_interior(rng));

    const double tol = options.residual_tol * std::max(1.0, f.codomain().norm(y));
    std::vector<std::optional<Vec>> found(starts.size());
    par::for_each_index(starts.size(), [&](std::size_t i) {
        found[i] = newton_refine(f, y, starts[i], tol, options.refine_max_iter, body);
    });

    std::vector<Vec> hits;
    for (auto& h : found) {
        if (!h) continue;
        if (!body.contains(*h) &&
            body.boundary_distance(*h) > 1e-6 * std::max(1.0, body.diameter())) {
            continue;
        }
        hits.push_back(std::move(*h));
    }
    return cluster_points(body.space(), std::move(hits),
                          1e-5 * std::max(1.0, body.diameter()));
}

}  // namespace

Clusters discreteness_probe(const maps::Map& f, const Vec& y, const spaces::Body& body,
                            const ProbeOptions& options) {
    Clusters out;
    out.points = find_preimages(f, y, body, options, mix_seed(options.seed, 0x44495343ULL));
    double min_sep = 0.0;
    if (out.points.size() >= 2) {
        min_sep = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < out.points.size(); ++i) {
            for (std::size_t j = i + 1; j < out.points.size(); ++j) {
                min_sep = std::min(min_sep, body.space().norm(out.points[i] - out.points[j]));
            }
        }
    }
    out.min_pairwise_separation = min_sep;
    return out;
}

SheetCounts preimage_count(const maps::Map& f, const spaces::Body& domain_body,
                           const Sampler& y_sampler, int n_targets, std::uint64_t seed,
                           const ProbeOptions& options) {
    SheetCounts out;
    for (int t = 0; t < n_targets; ++t) {
        Rng rng(mix_seed(seed, kTagSheets, static_cast<std::uint64_t>(t)));
        const Vec y = y_sampler(rng);
        const auto preimages =
            find_preimages(f, y, domain_body, options, mix_seed(seed, kTagSheets + 1, t));
        out.counts.emplace_back(y, static_cast<int>(preimages.size()));
    }
    if (!out.counts.empty()) {
        out.sheet_count = out.counts.front().second;
        for (const auto& [y, n] : out.counts) {
            if (n != out.sheet_count) {
                out.constant = false;
                break;
            }
        }
    }
    return out;
}

HadamardLevyReport hadamard_levy(const maps::Map& f, const spaces::Body& sample_region,
                                 double s_max, double delta_s, std::uint64_t seed,
                                 const HadamardLevyOptions& options) {
    if (!(s_max > 0.0) || !(delta_s > 0.0)) throw Error("s_max and delta_s must be positive");
    HadamardLevyReport rep;
    rep.s_max = s_max;
    rep.delta_s = delta_s;
    rep.measure = options.measure;

    const std::uint64_t n = std::max<std::uint64_t>(options.n_samples, 2);
    std::vector<Vec> xs(n);
    xs[0] = sample_region.center();
    for (std::uint64_t i = 1; i < n; ++i) {
        Rng rng(mix_seed(seed, kTagHL, i));
        xs[i] = sample_region.sample_interior(rng);
    }

    std::vector<double> image_norm(n), measure(n);
    par::for_each_index(n, [&](std::size_t i) {
        image_norm[i] = f.codomain().norm(f(xs[i]));
        const maps::JacobianEstimate j = maps::jacobian(f, xs[i]);
        measure[i] = options.measure == DerivativeMeasure::operator_norm
                         ? j.operator_norm
                         : j.smallest_singular_value;
    });

    // m(s) = min of the measure over samples with |f(x)| <= s, via a sweep
    // over samples sorted by image norm.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (image_norm[a] != image_norm[b]) return image_norm[a] < image_norm[b];
        return a < b;
    });

    const int rungs = static_cast<int>(std::llround(s_max / delta_s));
    rep.profile.resize(rungs, 0.0);
    double running_min = std::numeric_limits<double>::infinity();
    std::size_t next = 0;
    double bound = 0.0;
    double min_profile = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= rungs; ++k) {
        const double s = static_cast<double>(k) * delta_s;
        while (next < n && image_norm[order[next]] <= s) {
            running_min = std::min(running_min, measure[order[next]]);
            ++next;
        }
        const double m = std::isfinite(running_min) ? running_min : 0.0;
        rep.profile[k - 1] = m;
        bound += m * delta_s;
        min_profile = std::min(min_profile, m);
    }
    rep.integral_lower_bound = bound;
    rep.min_profile_value = std::isfinite(min_profile) ? min_profile : 0.0;
    rep.verdict =
        rep.min_profile_value >= options.positivity_floor ? "divergence-consistent" : "not-established";
    rep.note =
        "criterion uses the stated derivative magnitude (operator norm by default; smallest "
        "singular value optional); divergence cannot be proven from samples";
    return rep;
}

DenseScaleReport dense_scale_check(const maps::Map& f, const std::vector<Vec>& sample_points,
                                   std::uint64_t seed, const DenseScaleOptions& options) {
    DenseScaleReport rep;
    if (sample_points.empty()) return rep;

    cert::AuxProvider provider = [&f, &options](const Vec& p) {
        return maps::inverse_jacobian_map(f, p, options.scales.tolerances.sigma_rel_tol);
    };

    double a_min = std::numeric_limits<double>::infinity(), a_max = 0.0;
    double b_min = a_min, b_max = 0.0;
    double e_min = a_min, e_max = 0.0;
    double g_min = a_min, g_max = 0.0;
    bool all_ok = true;
    for (std::size_t i = 0; i < sample_points.size(); ++i) {
        cert::ScaleProfile prof = cert::certify_on_scales(
            f, sample_points[i], provider, options.ladder, mix_seed(seed, 0x44454E53ULL, i),
            options.scales);
        if (!prof.certified) {
            all_ok = false;
            std::ostringstream os;
            os << "point " << i << ": " << prof.note;
            if (rep.failure_point.empty()) rep.failure_point = os.str();
        } else {
            a_min = std::min(a_min, prof.alpha);
            a_max = std::max(a_max, prof.alpha);
            b_min = std::min(b_min, prof.beta);
            b_max = std::max(b_max, prof.beta);
            e_min = std::min(e_min, prof.eta);
            e_max = std::max(e_max, prof.eta);
            g_min = std::min(g_min, prof.gamma);
            g_max = std::max(g_max, prof.gamma);
        }
        rep.profiles.emplace_back(sample_points[i], std::move(prof));
    }
    const bool uniform = all_ok && (a_max - a_min) <= options.cluster_tol &&
                         (b_max - b_min) <= options.cluster_tol &&
                         (e_max - e_min) <= options.cluster_tol &&
                         (g_max - g_min) <= options.cluster_tol;
    rep.pass = all_ok && uniform;
    if (all_ok) {
        rep.alpha = a_min;
        rep.beta = b_min;
        rep.eta = e_min;
        rep.gamma = g_max;
        const double r_min = *std::min_element(options.ladder.begin(), options.ladder.end());
        rep.image_ball_radius = 0.5 * rep.alpha * rep.eta * r_min;
    }
    return rep;
}

SegmentReport segment_nondegeneracy_probe(const maps::Map& f, const Vec& p0, const Vec& p1,
                                          int n_grid, double dd_floor) {
    SegmentReport rep;
    rep.n_grid = std::max(n_grid, 1);
    const Vec dir = p1 - p0;
    const double len = f.domain().norm(dir);
    if (len <= 0.0) throw Error("segment endpoints coincide");
    const Vec v = dir / len;

    int nondegenerate = 0;
    int run = 0, longest = 0;
    for (int i = 0; i < rep.n_grid; ++i) {
        const double t = (static_cast<double>(i) + 0.5) / static_cast<double>(rep.n_grid);
        const Vec x = p0 + t * dir;
        const maps::DirectionalDerivative dd =
            maps::directional_derivative(f, x, v, maps::Side::plus);
        const double mag = f.codomain().norm(dd.slope);
        if (mag > dd_floor) {
            ++nondegenerate;
            run = 0;
        } else {
            ++run;
            longest = std::max(longest, run);
        }
    }
    rep.fraction_nondegenerate =
        static_cast<double>(nondegenerate) / static_cast<double>(rep.n_grid);
    rep.longest_vanishing_run = longest;
    rep.collapsed = longest >= 2;
    return rep;
}

}  // namespace localinv::inversion
