#include "localinv/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "localinv/kernels.hpp"

namespace localinv::spaces {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Space

struct Space::Node {
    int dim = 0;
    double p = 2.0;
    bool product = false;
    std::optional<Space> a;
    std::optional<Space> b;
};

Space Space::pnorm(int dim, double p) {
    if (dim < 1) throw Error("space dimension must be positive");
    if (!(p >= 1.0)) throw Error("p-norm exponent must be in [1, inf]");
    auto node = std::make_shared<Node>();
    node->dim = dim;
    node->p = p;
    return Space(std::move(node));
}

Space Space::product(const Space& a, const Space& b) {
    auto node = std::make_shared<Node>();
    node->dim = a.dim() + b.dim();
    node->product = true;
    node->a = a;
    node->b = b;
    return Space(std::move(node));
}

int Space::dim() const { return node_->dim; }
bool Space::is_product() const { return node_->product; }

double Space::pexp() const {
    if (node_->product) throw Error("product space has no p exponent");
    return node_->p;
}

const Space& Space::factor1() const {
    if (!node_->product) throw Error("not a product space");
    return *node_->a;
}

const Space& Space::factor2() const {
    if (!node_->product) throw Error("not a product space");
    return *node_->b;
}

double Space::norm(const Vec& v) const {
    require_dim(v, node_->dim, "norm");
    if (node_->product) {
        const int d1 = node_->a->dim();
        const double n1 = node_->a->norm(v.head(d1));
        const double n2 = node_->b->norm(v.tail(node_->b->dim()));
        return std::sqrt(n1 * n1 + n2 * n2);
    }
    const double p = node_->p;
    if (p == kInf) return v.lpNorm<Eigen::Infinity>();
    if (p == 1.0) return v.lpNorm<1>();
    if (p == 2.0) return v.norm();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) acc += std::pow(std::abs(v[i]), p);
    return std::pow(acc, 1.0 / p);
}

bool Space::strictly_convex() const {
    if (node_->product) return node_->a->strictly_convex() && node_->b->strictly_convex();
    if (node_->dim == 1) return true;
    return node_->p > 1.0 && node_->p < kInf;
}

Vec Space::random_unit(Rng& rng) const {
    for (int attempt = 0; attempt < 64; ++attempt) {
        Vec v = rng.cube(node_->dim);
        const double n = norm(v);
        if (n > 1e-6) return v / n;
    }
    Vec e = Vec::Zero(node_->dim);
    e[0] = 1.0;
    return e;
}

bool Space::same_as(const Space& other) const {
    if (node_ == other.node_) return true;
    if (node_->product != other.node_->product || node_->dim != other.node_->dim) return false;
    if (node_->product) {
        return node_->a->same_as(*other.node_->a) && node_->b->same_as(*other.node_->b);
    }
    return node_->p == other.node_->p;
}

// ---------------------------------------------------------------------------
// Body

struct Body::Node {
    Space space;
    bool product = false;
    Vec center;
    double radius = 0.0;
    std::optional<Body> a;
    std::optional<Body> b;

    explicit Node(Space s) : space(std::move(s)) {}
};

Body Body::ball(const Space& space, Vec center, double radius) {
    require_dim(center, space.dim(), "ball center");
    if (radius < 0.0) throw Error("ball radius must be nonnegative");
    auto node = std::make_shared<Node>(space);
    node->center = std::move(center);
    node->radius = radius;
    return Body(std::move(node));
}

Body Body::product(const Body& a, const Body& b) {
    auto node = std::make_shared<Node>(Space::product(a.space(), b.space()));
    node->product = true;
    node->center = Vec(a.space().dim() + b.space().dim());
    node->center << a.center(), b.center();
    node->a = a;
    node->b = b;
    return Body(std::move(node));
}

const Space& Body::space() const { return node_->space; }
bool Body::is_product() const { return node_->product; }

const Body& Body::factor1() const {
    if (!node_->product) throw Error("not a product body");
    return *node_->a;
}

const Body& Body::factor2() const {
    if (!node_->product) throw Error("not a product body");
    return *node_->b;
}

const Vec& Body::center() const { return node_->center; }

double Body::radius() const {
    if (node_->product) throw Error("product body has no single radius");
    return node_->radius;
}

double Body::diameter() const {
    if (!node_->product) return 2.0 * node_->radius;
    const double d1 = node_->a->diameter();
    const double d2 = node_->b->diameter();
    return std::sqrt(d1 * d1 + d2 * d2);
}

bool Body::contains(const Vec& x) const {
    require_dim(x, node_->space.dim(), "body query");
    if (node_->product) {
        const int d1 = node_->a->space().dim();
        return node_->a->contains(x.head(d1)) && node_->b->contains(x.tail(x.size() - d1));
    }
    return node_->space.norm(x - node_->center) <= node_->radius;
}

double Body::boundary_distance(const Vec& x) const {
    require_dim(x, node_->space.dim(), "body query");
    if (node_->product) {
        const int d1 = node_->a->space().dim();
        return std::min(node_->a->boundary_distance(x.head(d1)),
                        node_->b->boundary_distance(x.tail(x.size() - d1)));
    }
    return std::abs(node_->space.norm(x - node_->center) - node_->radius);
}

Vec Body::sample_interior(Rng& rng) const {
    if (node_->product) {
        Vec v(node_->space.dim());
        v << node_->a->sample_interior(rng), node_->b->sample_interior(rng);
        return v;
    }
    if (node_->radius == 0.0) return node_->center;
    for (int attempt = 0; attempt < 256; ++attempt) {
        Vec u = rng.cube(node_->space.dim());
        if (node_->space.norm(u) <= 1.0) return node_->center + node_->radius * u;
    }
    return node_->center;
}

Vec Body::sample_boundary(Rng& rng) const {
    if (node_->product) {
        // boundary of a product: boundary in one factor, anywhere in the other
        Vec v(node_->space.dim());
        if (rng.next() & 1u) {
            v << node_->a->sample_boundary(rng), node_->b->sample_interior(rng);
        } else {
            v << node_->a->sample_interior(rng), node_->b->sample_boundary(rng);
        }
        return v;
    }
    if (node_->radius == 0.0) return node_->center;
    return node_->center + node_->radius * node_->space.random_unit(rng);
}

Vec Body::clamp(const Vec& x) const {
    require_dim(x, node_->space.dim(), "body clamp");
    if (node_->product) {
        const int d1 = node_->a->space().dim();
        Vec v(x.size());
        v << node_->a->clamp(x.head(d1)), node_->b->clamp(x.tail(x.size() - d1));
        return v;
    }
    const double d = node_->space.norm(x - node_->center);
    if (d <= node_->radius || d == 0.0) return x;
    return node_->center + (node_->radius / d) * (x - node_->center);
}

Vec Body::box_halfwidths() const {
    if (node_->product) {
        Vec v(node_->space.dim());
        v << node_->a->box_halfwidths(), node_->b->box_halfwidths();
        return v;
    }
    // |x_i| <= ||x||_p for every p >= 1, so the box is +/- radius per axis.
    return Vec::Constant(node_->space.dim(), node_->radius);
}

// ---------------------------------------------------------------------------
// Convexity geometry

ModulusEstimate modulus_of_convexity(const Space& space, double eps, std::uint64_t budget,
                                     std::uint64_t seed) {
    if (eps < 0.0 || eps > 2.0) throw Error("modulus of convexity: eps must be in [0, 2]");
    kernels::ScanConfig cfg;
    cfg.samples = std::max<std::uint64_t>(budget, 1);
    cfg.seed = seed;
    const kernels::ScanWitness best = kernels::modulus_scan(space, eps, cfg);
    ModulusEstimate est;
    est.epsilon = eps;
    est.budget = cfg.samples;
    if (best.valid()) {
        est.value = best.value;
        est.witness_x = best.a;
        est.witness_y = best.b;
    } else {
        est.value = 1.0;  // no admissible pair found; 1 is always an upper bound
        est.witness_x = Vec::Zero(space.dim());
        est.witness_y = Vec::Zero(space.dim());
    }
    return est;
}

double characteristic_of_convexity(const Space& space, std::uint64_t budget, std::uint64_t seed,
                                   double tol_zero, double resolution) {
    auto vanishes = [&](double eps) {
        return modulus_of_convexity(space, eps, budget, seed).value <= tol_zero;
    };
    if (vanishes(2.0)) return 2.0;
    double lo = 0.0, hi = 2.0;
    while (hi - lo > resolution) {
        const double mid = 0.5 * (lo + hi);
        if (vanishes(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

}  // namespace localinv::spaces
