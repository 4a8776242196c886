#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "localinv/maps.hpp"
#include "localinv/spaces.hpp"

namespace localinv::cert {

struct Tolerances {
    double strong_margin = 0.02;  // strong requires L <= 1 - strong_margin
    double lip_tol = 1e-3;        // nonexpansive tolerates L <= 1 + lip_tol
    double fp_tol = 1e-10;
    double residual_floor = 0.01;  // grid floor certifying fixed-point freeness
    double selfmap_tol = 1e-12;    // containment violation above this fails
    double sigma_rel_tol = 1e-8;   // injectivity margin for linear auxiliaries
};

struct Budgets {
    std::uint64_t lipschitz_pairs = 2048;
    std::uint64_t selfmap_samples = 1024;
    int n_targets = 16;          // sampled y per certification, half on the sphere
    int refine_steps = 128;      // per-chunk refinement of the scans
    int multistart = 12;         // fixed-point searches in the weak branch
    double grid_step = 1e-3;     // grid oracle step (dimension <= 3)
    int solver_max_iter = 2000;
};

/// Auxiliary-map composite x -> x - A(f(x) - y) on a convex body.
/// The auxiliary is linear in all built-in uses; a general injective
/// continuous auxiliary can be supplied as a callable.
class TildeMap {
public:
    TildeMap(maps::Map f, Vec anchor, Vec target, maps::LinearMap aux, spaces::Body body);
    TildeMap(maps::Map f, Vec anchor, Vec target, std::function<Vec(const Vec&)> aux,
             spaces::Body body);

    Vec operator()(const Vec& x) const;
    /// A(f(x) - y), recomputed for the reconstruction identity x - tilde(x).
    Vec aux_of_residual(const Vec& x) const;

    const maps::Map& base_map() const { return f_; }
    const Vec& anchor() const { return anchor_; }
    const Vec& target() const { return target_; }
    const spaces::Body& body() const { return body_; }
    const std::optional<maps::LinearMap>& linear_aux() const { return linear_aux_; }

    /// Same structure with a different target y.
    TildeMap with_target(Vec y) const;

private:
    maps::Map f_;
    Vec anchor_;
    Vec target_;
    std::function<Vec(const Vec&)> aux_;
    std::optional<maps::LinearMap> linear_aux_;
    spaces::Body body_;
};

TildeMap build_tilde(const maps::Map& f, const Vec& a, const Vec& y, const maps::LinearMap& aux,
                     const spaces::Body& body, double sigma_rel_tol = 1e-8);

enum class Classification {
    strong_a,
    nonexpansive_a,
    weak_a_quasi,
    weak_a_no_fixed_point,
    uncertified,
};

const char* to_string(Classification c);

struct Certificate {
    Classification classification = Classification::uncertified;
    double lipschitz_bound = 0.0;  // max over sampled targets
    double min_residual = 0.0;     // weak_a_no_fixed_point: min grid residual over targets
    std::string reason;            // uncertified only
    double s_radius = 0.0;
    int y_samples = 0;
    std::uint64_t pair_samples = 0;
    double self_map_worst_violation = 0.0;
    std::uint64_t seed = 0;
};

/// Lower bound on the Lipschitz constant of fn over the body,
/// nondecreasing in budget for a fixed seed.
double estimate_lipschitz(const std::function<Vec(const Vec&)>& fn, const spaces::Body& body,
                          std::uint64_t budget, std::uint64_t seed, int refine_steps = 128);

/// Samples the body (boundary-biased) and reports whether every image stays
/// inside, together with the worst overshoot found.
std::pair<bool, double> check_self_map(const std::function<Vec(const Vec&)>& fn,
                                       const spaces::Body& body, std::uint64_t budget,
                                       std::uint64_t seed, double selfmap_tol = 1e-12);

/// Checks norm(map(x) - p) <= norm(x - p) * (1 + lip_tol) for sampled x and
/// all given fixed points p. Returns (ok, worst ratio).
std::pair<bool, double> quasi_nonexpansive_check(const TildeMap& map, const spaces::Body& body,
                                                 const std::vector<Vec>& fixed_points,
                                                 std::uint64_t budget, std::uint64_t seed,
                                                 const Tolerances& tol = {});

struct CertifyOptions {
    Budgets budgets;
    Tolerances tolerances;
    /// Center of the target ball (defaults to f(a)). The jump example
    /// centers its target ball at the jump midpoint instead.
    std::optional<Vec> target_center;
    /// When set, certify exactly these targets instead of sampling.
    std::vector<Vec> explicit_targets;
};

/// Classify the auxiliary-map family over targets in the ball of radius s:
/// strong (contractive self-maps), nonexpansive (self-maps with L <= 1),
/// weak (per target: no fixed points, confirmed by the grid oracle in
/// dimension <= 3, or quasi-nonexpansive). Uncertified is a value, not an
/// error.
Certificate certify(const maps::Map& f, const Vec& a, const maps::LinearMap& aux,
                    const spaces::Body& body, double s, std::uint64_t seed,
                    const CertifyOptions& options = {});

struct ScaleRecord {
    double r = 0.0;
    spaces::Body body;
    Certificate certificate;
    double s = 0.0;
};

struct ScaleProfile {
    bool certified = false;
    double alpha = 0.0;  // min s / diam
    double beta = 0.0;   // min dist(a, boundary) / diam
    double eta = 0.0;    // min diam / r
    double gamma = 0.0;  // max diam / r
    double r_max = 0.0;
    std::vector<ScaleRecord> records;
    std::string note;
};

using AuxProvider = std::function<maps::LinearMap(const Vec&)>;

struct ScalesOptions {
    Budgets budgets;
    Tolerances tolerances;
    /// Weakest classification accepted for a rung.
    Classification required = Classification::strong_a;
};

/// For each ladder radius r, search bodies ball(a, rho), rho in {r/2, r/4},
/// and radii s in {rho/2, rho/4}; keep the first certified combination.
/// The profile fails (certified = false) if any rung has no certified body.
ScaleProfile certify_on_scales(const maps::Map& f, const Vec& a, const AuxProvider& aux_provider,
                               const std::vector<double>& r_ladder, std::uint64_t seed,
                               const ScalesOptions& options = {});

/// Product-profile constants for the 2-combination product norm:
///   beta  = min(beta1, 1/2) / sqrt(2),   alpha = min(alpha1, 1/2) / sqrt(2),
///   eta   = min(eta1, 1) / sqrt(2),      gamma = sqrt(2) * max(gamma1, 1).
/// The product Lipschitz bound combines factor bounds with max (the min
/// rule is unsound under this product norm); the note records that choice.
ScaleProfile pair_certificates(const ScaleProfile& p1, const ScaleProfile& p2,
                               const Vec& second_anchor);

/// Product tilde: evaluates factor tildes on the slices and concatenates,
/// which is exactly x - A(F(x) - y) for the pair map and block auxiliary.
TildeMap pair_tilde(const TildeMap& t1, const TildeMap& t2);

}  // namespace localinv::cert
