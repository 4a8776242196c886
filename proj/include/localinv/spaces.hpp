#pragma once

#include <cstdint>
#include <memory>
#include <utility>

#include "localinv/common.hpp"
#include "localinv/rng.hpp"

namespace localinv::spaces {

/// Finite-dimensional real normed space: either a p-norm space (p in
/// [1, inf], inf = max norm) or the product of two spaces under the
/// Euclidean 2-combination of the factor norms. Immutable and cheap to
/// copy; safe to share across threads.
class Space {
public:
    static Space pnorm(int dim, double p);
    static Space product(const Space& a, const Space& b);

    int dim() const;
    bool is_product() const;
    /// p-norm exponent; throws on product spaces.
    double pexp() const;
    const Space& factor1() const;
    const Space& factor2() const;

    double norm(const Vec& v) const;
    double distance(const Vec& a, const Vec& b) const { return norm(a - b); }

    /// p in (1, inf) or dim 1; products are strictly convex iff both factors are.
    bool strictly_convex() const;

    /// Finite-dimensional mode flags: bounded closed convex sets are weakly
    /// compact and nonexpansive self-maps of them have fixed points.
    bool locally_weakly_compact() const { return true; }
    bool fixed_point_property() const { return true; }

    /// Random vector with unit norm (cube sample, normalized).
    Vec random_unit(Rng& rng) const;

    bool same_as(const Space& other) const;

private:
    struct Node;
    explicit Space(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Closed bounded convex set: a norm ball or a product of two bodies
/// (living in the product of the owning spaces).
class Body {
public:
    static Body ball(const Space& space, Vec center, double radius);
    static Body product(const Body& a, const Body& b);

    const Space& space() const;
    bool is_product() const;
    const Body& factor1() const;
    const Body& factor2() const;

    const Vec& center() const;
    /// Ball radius; throws on products.
    double radius() const;
    double diameter() const;

    bool contains(const Vec& x) const;
    /// Balls: |norm(x - c) - r|. Products: min over factors.
    double boundary_distance(const Vec& x) const;
    std::pair<bool, double> query(const Vec& x) const {
        return {contains(x), boundary_distance(x)};
    }

    Vec sample_interior(Rng& rng) const;
    Vec sample_boundary(Rng& rng) const;
    /// Nearest-point style clamp into the body (radial for balls).
    Vec clamp(const Vec& x) const;

    /// Axis-aligned bounding half-widths (per coordinate), used by grid scans.
    Vec box_halfwidths() const;

private:
    struct Node;
    explicit Body(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    std::shared_ptr<const Node> node_;
};

/// Sampled upper bound on the modulus of convexity at eps, with the best
/// witness pair found.
struct ModulusEstimate {
    double epsilon = 0.0;
    double value = 1.0;  // upper bound on the infimum
    Vec witness_x;
    Vec witness_y;
    std::uint64_t budget = 0;
};

/// Upper bound on inf over unit x,y with ||x-y|| >= eps of 1 - ||x+y||/2.
/// Nonincreasing in budget for a fixed seed.
ModulusEstimate modulus_of_convexity(const Space& space, double eps, std::uint64_t budget,
                                     std::uint64_t seed);

/// Lower bound on the characteristic of convexity (sup of eps with zero
/// modulus), via bisection on the sampled modulus against tol_zero.
double characteristic_of_convexity(const Space& space, std::uint64_t budget, std::uint64_t seed,
                                   double tol_zero = 1e-9, double resolution = 1e-3);

}  // namespace localinv::spaces
