#include "localinv/cert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "localinv/fixedpoint.hpp"
#include "localinv/kernels.hpp"
#include "localinv/rng.hpp"

namespace localinv::cert {

namespace {
constexpr std::uint64_t kTagTargets = 0x59424C4CULL;
constexpr std::uint64_t kTagLip = 0x4C495031ULL;
constexpr std::uint64_t kTagSelf = 0x53454C31ULL;
constexpr std::uint64_t kTagProbe = 0x50524F42ULL;
constexpr std::uint64_t kTagQuasi = 0x51554153ULL;
constexpr std::uint64_t kTagRung = 0x52554E47ULL;

int classification_rank(Classification c) {
    switch (c) {
        case Classification::strong_a: return 4;
        case Classification::nonexpansive_a: return 3;
        case Classification::weak_a_quasi: return 2;
        case Classification::weak_a_no_fixed_point: return 2;
        default: return 0;
    }
}
}  // namespace

const char* to_string(Classification c) {
    switch (c) {
        case Classification::strong_a: return "strong_a";
        case Classification::nonexpansive_a: return "nonexpansive_a";
        case Classification::weak_a_quasi: return "weak_a_quasi";
        case Classification::weak_a_no_fixed_point: return "weak_a_no_fixed_point";
        default: return "uncertified";
    }
}

// ---------------------------------------------------------------------------
// TildeMap

TildeMap::TildeMap(maps::Map f, Vec anchor, Vec target, maps::LinearMap aux, spaces::Body body)
    : f_(std::move(f)),
      anchor_(std::move(anchor)),
      target_(std::move(target)),
      linear_aux_(std::move(aux)),
      body_(std::move(body)) {
    require_dim(anchor_, f_.domain().dim(), "tilde anchor");
    require_dim(target_, f_.codomain().dim(), "tilde target");
    if (body_.space().dim() != f_.domain().dim()) {
        throw DimensionMismatch("tilde body must live in the map domain");
    }
    const maps::LinearMap& A = *linear_aux_;
    if (A.matrix().rows() != f_.domain().dim() || A.matrix().cols() != f_.codomain().dim()) {
        throw DimensionMismatch("auxiliary map has wrong shape");
    }
    if (!A.injective()) {
        throw DegenerateDerivative("auxiliary linear map is not injective within the margin");
    }
    aux_ = [A](const Vec& r) { return A(r); };
}

TildeMap::TildeMap(maps::Map f, Vec anchor, Vec target, std::function<Vec(const Vec&)> aux,
                   spaces::Body body)
    : f_(std::move(f)),
      anchor_(std::move(anchor)),
      target_(std::move(target)),
      aux_(std::move(aux)),
      body_(std::move(body)) {
    require_dim(anchor_, f_.domain().dim(), "tilde anchor");
    require_dim(target_, f_.codomain().dim(), "tilde target");
    if (!aux_) throw Error("auxiliary map must be callable");
}

Vec TildeMap::operator()(const Vec& x) const { return x - aux_(f_(x) - target_); }

Vec TildeMap::aux_of_residual(const Vec& x) const { return aux_(f_(x) - target_); }

TildeMap TildeMap::with_target(Vec y) const {
    TildeMap copy = *this;
    require_dim(y, f_.codomain().dim(), "tilde target");
    copy.target_ = std::move(y);
    return copy;
}

TildeMap build_tilde(const maps::Map& f, const Vec& a, const Vec& y, const maps::LinearMap& aux,
                     const spaces::Body& body, double sigma_rel_tol) {
    if (!aux.injective(sigma_rel_tol)) {
        throw DegenerateDerivative("auxiliary linear map is not injective within the margin");
    }
    return TildeMap(f, a, y, aux, body);
}

// ---------------------------------------------------------------------------
// Scans

double estimate_lipschitz(const std::function<Vec(const Vec&)>& fn, const spaces::Body& body,
                          std::uint64_t budget, std::uint64_t seed, int refine_steps) {
    kernels::ScanConfig cfg;
    cfg.samples = std::max<std::uint64_t>(budget, 2);
    cfg.seed = seed;
    cfg.refine_steps = refine_steps;
    const kernels::ScanWitness best = kernels::lipschitz_scan(fn, body, cfg);
    return best.valid() ? best.value : 0.0;
}

std::pair<bool, double> check_self_map(const std::function<Vec(const Vec&)>& fn,
                                       const spaces::Body& body, std::uint64_t budget,
                                       std::uint64_t seed, double selfmap_tol) {
    kernels::ScanConfig cfg;
    cfg.samples = std::max<std::uint64_t>(budget, 1);
    cfg.seed = seed;
    const kernels::ScanWitness worst = kernels::selfmap_scan(fn, body, cfg);
    const double violation = worst.valid() ? worst.value : 0.0;
    return {violation <= selfmap_tol, violation};
}

std::pair<bool, double> quasi_nonexpansive_check(const TildeMap& map, const spaces::Body& body,
                                                 const std::vector<Vec>& fixed_points,
                                                 std::uint64_t budget, std::uint64_t seed,
                                                 const Tolerances& tol) {
    if (fixed_points.empty()) throw Error("quasi-nonexpansive check needs at least one fixed point");
    const spaces::Space& sp = body.space();
    for (const Vec& p : fixed_points) {
        if (sp.norm(map(p) - p) > tol.fp_tol) {
            throw Error("quasi-nonexpansive check: supplied point is not fixed within fp_tol");
        }
    }
    Rng rng(mix_seed(seed, kTagQuasi));
    const double floor = 1e-12 * std::max(1.0, body.diameter());
    double worst = 0.0;
    for (std::uint64_t i = 0; i < std::max<std::uint64_t>(budget, 8); ++i) {
        const Vec x = (i % 4 == 0) ? body.sample_boundary(rng) : body.sample_interior(rng);
        const Vec mx = map(x);
        for (const Vec& p : fixed_points) {
            const double dist = sp.norm(x - p);
            if (dist < floor) continue;
            worst = std::max(worst, sp.norm(mx - p) / dist);
        }
    }
    return {worst <= 1.0 + tol.lip_tol, worst};
}

// ---------------------------------------------------------------------------
// Certification

Certificate certify(const maps::Map& f, const Vec& a, const maps::LinearMap& aux,
                    const spaces::Body& body, double s, std::uint64_t seed,
                    const CertifyOptions& options) {
    const Budgets& B = options.budgets;
    const Tolerances& T = options.tolerances;

    Certificate cert;
    cert.s_radius = s;
    cert.seed = seed;
    cert.pair_samples = B.lipschitz_pairs;

    if (!body.contains(a) || body.boundary_distance(a) <= 0.0) {
        cert.classification = Classification::uncertified;
        cert.reason = "anchor is not interior to the body";
        return cert;
    }

    const Vec fa = f(a);
    const Vec center = options.target_center.value_or(fa);
    std::vector<Vec> targets = options.explicit_targets;
    if (targets.empty()) {
        const spaces::Body target_ball = spaces::Body::ball(f.codomain(), center, s);
        Rng yr(mix_seed(seed, kTagTargets));
        for (int i = 0; i < B.n_targets; ++i) {
            targets.push_back(i % 2 == 0 ? target_ball.sample_boundary(yr)
                                         : target_ball.sample_interior(yr));
        }
    }
    cert.y_samples = static_cast<int>(targets.size());

    double lip_max = 0.0;
    double violation_max = 0.0;
    bool selfmap_all = true;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const TildeMap tilde(f, a, targets[t], aux, body);
        auto fn = [&tilde](const Vec& x) { return tilde(x); };
        lip_max = std::max(lip_max, estimate_lipschitz(fn, body, B.lipschitz_pairs,
                                                       mix_seed(seed, kTagLip, t), B.refine_steps));
        const auto [ok, violation] =
            check_self_map(fn, body, B.selfmap_samples, mix_seed(seed, kTagSelf, t), T.selfmap_tol);
        selfmap_all = selfmap_all && ok;
        violation_max = std::max(violation_max, violation);
    }
    cert.lipschitz_bound = lip_max;
    cert.self_map_worst_violation = violation_max;

    if (selfmap_all && lip_max <= 1.0 - T.strong_margin) {
        cert.classification = Classification::strong_a;
        return cert;
    }
    if (selfmap_all && lip_max <= 1.0 + T.lip_tol) {
        cert.classification = Classification::nonexpansive_a;
        return cert;
    }

    // Weak branch: per target, either no fixed points (grid-confirmed in
    // dimension <= 3) or quasi-nonexpansive.
    bool any_fixed_points = false;
    double min_grid_residual = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const TildeMap tilde(f, a, targets[t], aux, body);
        auto fn = [&tilde](const Vec& x) { return tilde(x); };

        fixedpoint::ProbeOptions probe;
        probe.n_starts = B.multistart;
        probe.fp_tol = T.fp_tol;
        probe.max_iter = B.solver_max_iter;
        fixedpoint::FixedPointSet fps =
            fixedpoint::probe_fixed_point_set(fn, body, mix_seed(seed, kTagProbe, t), probe);

        if (fps.points.empty()) {
            if (body.space().dim() > 3) {
                cert.classification = Classification::uncertified;
                cert.reason = "no grid oracle";
                return cert;
            }
            fixedpoint::GridScan grid = fixedpoint::grid_min_residual(fn, body, B.grid_step);
            if (grid.min_residual >= T.residual_floor) {
                min_grid_residual = std::min(min_grid_residual, grid.min_residual);
                continue;
            }
            // The grid found a near-fixed point the multistart missed; try it.
            fixedpoint::Options retry;
            retry.tol = T.fp_tol * 0.5;
            retry.max_iter = B.solver_max_iter;
            retry.body = body;
            fixedpoint::Result r = fixedpoint::solve(fn, body.space(), grid.argmin, retry);
            if (r.converged) {
                fps.points.push_back(r.point);
            } else {
                cert.classification = Classification::uncertified;
                std::ostringstream os;
                os << "grid residual " << grid.min_residual
                   << " below floor without a locatable fixed point";
                cert.reason = os.str();
                return cert;
            }
        }
        any_fixed_points = true;
        const auto [quasi_ok, ratio] = quasi_nonexpansive_check(
            tilde, body, fps.points, B.selfmap_samples, mix_seed(seed, kTagQuasi, t), T);
        if (!quasi_ok) {
            cert.classification = Classification::uncertified;
            std::ostringstream os;
            os << "fixed points exist but quasi-nonexpansiveness fails (worst ratio " << ratio
               << ")";
            cert.reason = os.str();
            return cert;
        }
    }

    if (any_fixed_points) {
        cert.classification = Classification::weak_a_quasi;
    } else {
        cert.classification = Classification::weak_a_no_fixed_point;
        cert.min_residual = min_grid_residual;
    }
    return cert;
}

// ---------------------------------------------------------------------------
// Scales

ScaleProfile certify_on_scales(const maps::Map& f, const Vec& a, const AuxProvider& aux_provider,
                               const std::vector<double>& r_ladder, std::uint64_t seed,
                               const ScalesOptions& options) {
    ScaleProfile profile;
    if (r_ladder.empty()) {
        profile.note = "empty ladder";
        return profile;
    }
    profile.r_max = *std::max_element(r_ladder.begin(), r_ladder.end());

    maps::LinearMap aux = maps::LinearMap(Mat::Identity(1, 1));
    try {
        aux = aux_provider(a);
    } catch (const Error& e) {
        profile.note = std::string("auxiliary construction failed: ") + e.what();
        return profile;
    }

    const int required = classification_rank(options.required);
    for (std::size_t ri = 0; ri < r_ladder.size(); ++ri) {
        const double r = r_ladder[ri];
        bool rung_ok = false;
        std::uint64_t combo = 0;
        for (const double rho_factor : {0.5, 0.25}) {
            const double rho = r * rho_factor;
            if (f.region()) {
                // keep the body inside the declared domain region
                if (!f.region()->contains(a) || f.region()->boundary_distance(a) < rho) continue;
            }
            const spaces::Body body = spaces::Body::ball(f.domain(), a, rho);
            for (const double s_factor : {0.5, 0.25}) {
                const double s = rho * s_factor;
                CertifyOptions co;
                co.budgets = options.budgets;
                co.tolerances = options.tolerances;
                Certificate c =
                    certify(f, a, aux, body, s, mix_seed(seed, kTagRung, ri * 16 + combo), co);
                ++combo;
                if (classification_rank(c.classification) >= required) {
                    profile.records.push_back({r, body, c, s});
                    rung_ok = true;
                    break;
                }
            }
            if (rung_ok) break;
        }
        if (!rung_ok) {
            std::ostringstream os;
            os << "no certified body at scale r=" << r;
            profile.note = os.str();
            profile.certified = false;
            return profile;
        }
    }

    profile.certified = true;
    double alpha = std::numeric_limits<double>::infinity();
    double beta = std::numeric_limits<double>::infinity();
    double eta = std::numeric_limits<double>::infinity();
    double gamma = 0.0;
    for (const ScaleRecord& rec : profile.records) {
        const double diam = rec.body.diameter();
        alpha = std::min(alpha, rec.s / diam);
        beta = std::min(beta, rec.body.boundary_distance(a) / diam);
        eta = std::min(eta, diam / rec.r);
        gamma = std::max(gamma, diam / rec.r);
    }
    profile.alpha = alpha;
    profile.beta = beta;
    profile.eta = eta;
    profile.gamma = gamma;
    return profile;
}

ScaleProfile pair_certificates(const ScaleProfile& p1, const ScaleProfile& p2,
                               const Vec& second_anchor) {
    ScaleProfile out;
    out.note =
        "product lipschitz bound = max(factor bounds); the min combination rule is unsound "
        "under the 2-combination product norm and is not used";
    if (!p1.certified || !p2.certified) {
        out.certified = false;
        out.note += "; an input profile is uncertified";
        return out;
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    out.certified = true;
    out.alpha = inv_sqrt2 * std::min(p1.alpha, 0.5);
    out.beta = inv_sqrt2 * std::min(p1.beta, 0.5);
    out.eta = inv_sqrt2 * std::min(p1.eta, 1.0);
    out.gamma = std::sqrt(2.0) * std::max(p1.gamma, 1.0);
    out.r_max = std::min(p1.r_max, p2.r_max);

    if (p2.records.empty()) return out;
    const spaces::Space& second_space = p2.records.front().body.space();
    for (std::size_t i = 0; i < p1.records.size(); ++i) {
        const ScaleRecord& rec = p1.records[i];
        const ScaleRecord& rec2 = p2.records[std::min(i, p2.records.size() - 1)];
        const double tau = rec.body.diameter() / 2.0;
        const spaces::Body second = spaces::Body::ball(second_space, second_anchor, tau);
        ScaleRecord prod;
        prod.r = rec.r;
        prod.body = spaces::Body::product(rec.body, second);
        prod.s = std::min(rec.s, rec.body.diameter() / 2.0);
        prod.certificate = rec.certificate;
        prod.certificate.lipschitz_bound =
            std::max(rec.certificate.lipschitz_bound, rec2.certificate.lipschitz_bound);
        prod.certificate.s_radius = prod.s;
        if (classification_rank(rec2.certificate.classification) <
            classification_rank(prod.certificate.classification)) {
            prod.certificate.classification = rec2.certificate.classification;
        }
        out.records.push_back(std::move(prod));
    }
    return out;
}

TildeMap pair_tilde(const TildeMap& t1, const TildeMap& t2) {
    const auto& A1 = t1.linear_aux();
    const auto& A2 = t2.linear_aux();
    maps::Map product_map = maps::pair(t1.base_map(), t2.base_map());
    Vec anchor(t1.anchor().size() + t2.anchor().size());
    anchor << t1.anchor(), t2.anchor();
    Vec target(t1.target().size() + t2.target().size());
    target << t1.target(), t2.target();
    const spaces::Body body = spaces::Body::product(t1.body(), t2.body());

    if (!A1 || !A2) throw Error("pair_tilde requires linear auxiliaries on both factors");
    const Eigen::Index r1 = t1.target().size();
    const Eigen::Index r2 = t2.target().size();
    const Eigen::Index d1 = t1.anchor().size();
    const Eigen::Index d2 = t2.anchor().size();
    // Block application: each factor auxiliary acts on its own slice, so the
    // product tilde evaluates bit-identically to the pair of factor tildes.
    const maps::LinearMap a1 = *A1;
    const maps::LinearMap a2 = *A2;
    auto block_aux = [a1, a2, r1, r2, d1, d2](const Vec& r) {
        Vec out(d1 + d2);
        out.head(d1) = a1(r.head(r1));
        out.tail(d2) = a2(r.tail(r2));
        return out;
    };
    return TildeMap(std::move(product_map), std::move(anchor), std::move(target),
                    std::move(block_aux), body);
}

}  // namespace localinv::cert
