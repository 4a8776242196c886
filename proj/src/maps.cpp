#include "localinv/maps.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>

namespace localinv::maps {

const char* to_string(Smoothness s) {
    switch (s) {
        case Smoothness::c1: return "c1";
        case Smoothness::differentiable: return "differentiable";
        case Smoothness::discontinuous: return "discontinuous";
        default: return "unknown";
    }
}

// ---------------------------------------------------------------------------
// Map

Map::Map(spaces::Space domain, spaces::Space codomain, Evaluator eval, Smoothness tag)
    : domain_(std::move(domain)),
      codomain_(std::move(codomain)),
      eval_(std::move(eval)),
      tag_(tag) {
    if (!eval_) throw Error("map evaluator must be callable");
}

Map& Map::with_jacobian(JacobianFn jac) {
    jacobian_ = std::move(jac);
    return *this;
}

Map& Map::with_region(spaces::Body region) {
    if (region.space().dim() != domain_.dim()) {
        throw DimensionMismatch("domain region dimension does not match the map domain");
    }
    region_ = std::move(region);
    return *this;
}

bool Map::in_region(const Vec& x) const {
    if (!region_) return true;
    if (region_->contains(x)) return true;
    return region_->boundary_distance(x) <= 1e-9 * std::max(1.0, region_->diameter());
}

Vec Map::operator()(const Vec& x) const {
    require_dim(x, domain_.dim(), "map evaluation");
    if (!in_region(x)) throw OutsideDomain("map evaluated outside its domain region");
    Vec y = eval_(x);
    require_dim(y, codomain_.dim(), "map output");
    return y;
}

Mat Map::analytic_jacobian(const Vec& x) const {
    if (!jacobian_) throw Error("map has no analytic Jacobian");
    require_dim(x, domain_.dim(), "jacobian evaluation");
    Mat j = jacobian_(x);
    if (j.rows() != codomain_.dim() || j.cols() != domain_.dim()) {
        throw DimensionMismatch("analytic Jacobian has wrong shape");
    }
    return j;
}

// ---------------------------------------------------------------------------
// LinearMap

LinearMap::LinearMap(Mat matrix) : matrix_(std::move(matrix)) {
    Eigen::JacobiSVD<Mat> svd(matrix_);
    const auto& sv = svd.singularValues();
    operator_norm_ = sv.size() > 0 ? sv[0] : 0.0;
    smallest_sv_ = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
}

Vec LinearMap::operator()(const Vec& x) const {
    require_dim(x, matrix_.cols(), "linear map");
    return matrix_ * x;
}

// ---------------------------------------------------------------------------
// Jacobians

double default_fd_step(const spaces::Space& domain, const Vec& x) {
    constexpr double cbrt_eps = 6.055454452393343e-06;  // cbrt(2^-52)
    return cbrt_eps * std::max(1.0, domain.norm(x));
}

JacobianEstimate jacobian(const Map& f, const Vec& x, JacobianMethod method) {
    JacobianEstimate est;
    const bool want_analytic = method != JacobianMethod::central_difference;
    if (want_analytic && f.has_analytic_jacobian()) {
        est.matrix = f.analytic_jacobian(x);
        est.method = JacobianMethod::analytic;
    } else {
        if (method == JacobianMethod::analytic) {
            throw Error("analytic Jacobian requested but the map has none");
        }
        const double h = default_fd_step(f.domain(), x);
        est.step = h;
        est.matrix = Mat(f.codomain().dim(), f.domain().dim());
        for (int j = 0; j < f.domain().dim(); ++j) {
            Vec xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            est.matrix.col(j) = (f(xp) - f(xm)) / (2.0 * h);
        }
        est.method = JacobianMethod::central_difference;
    }
    Eigen::JacobiSVD<Mat> svd(est.matrix);
    const auto& sv = svd.singularValues();
    est.operator_norm = sv.size() > 0 ? sv[0] : 0.0;
    est.smallest_singular_value = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
    return est;
}

LinearMap inverse_jacobian_map(const Map& f, const Vec& a, double sigma_rel_tol) {
    if (f.domain().dim() != f.codomain().dim()) {
        throw DimensionMismatch("inverse Jacobian requires a square derivative");
    }
    const JacobianEstimate est = jacobian(f, a);
    if (!est.invertible(sigma_rel_tol)) {
        throw DegenerateDerivative("derivative is singular within the margin at the anchor");
    }
    const Mat& j = est.matrix;
    Mat inv = j.inverse();
    const Mat eye = Mat::Identity(j.rows(), j.cols());
    double residual = (inv * j - eye).norm();
    if (residual > 1e-10) {
        inv = inv * (2.0 * eye - j * inv);  // one Newton step on the inverse
        residual = (inv * j - eye).norm();
        if (residual > 1e-10) {
            throw DegenerateDerivative("inverse residual exceeds tolerance");
        }
    }
    return LinearMap(std::move(inv));
}

DirectionalDerivative directional_derivative(const Map& f, const Vec& x, const Vec& v, Side side,
                                             double h0) {
    require_dim(v, f.domain().dim(), "direction");
    const double sign = side == Side::plus ? 1.0 : -1.0;
    if (h0 <= 0.0) h0 = default_fd_step(f.domain(), x);
    const Vec w = sign * v;

    // f at offsets h0/2^k, never at x itself, so the estimate is the branch
    // slope on the chosen side even across a jump.
    Vec fh[4];
    double hs[4];
    for (int k = 0; k < 4; ++k) {
        hs[k] = h0 / static_cast<double>(1 << k);
        fh[k] = f(x + hs[k] * w);
    }
    auto richardson = [](const Vec s[3]) {
        const Vec r0 = 2.0 * s[1] - s[0];
        const Vec r1 = 2.0 * s[2] - s[1];
        Vec rr = (4.0 * r1 - r0) / 3.0;
        return std::make_pair(rr, (r1 - r0).eval());
    };

    Vec branch_q[3];
    for (int k = 0; k < 3; ++k) branch_q[k] = (fh[k] - fh[k + 1]) / (hs[k] - hs[k + 1]);
    auto [slope, branch_gap] = richardson(branch_q);

    const Vec fx = f(x);
    Vec anchored_q[3];
    for (int k = 0; k < 3; ++k) anchored_q[k] = (fh[k] - fx) / hs[k];
    auto [anchored, anchored_gap] = richardson(anchored_q);

    DirectionalDerivative dd;
    dd.slope = std::move(slope);
    dd.anchored_slope = std::move(anchored);
    const double scale = std::max(1.0, f.codomain().norm(dd.anchored_slope));
    dd.converged = f.codomain().norm(anchored_gap) <= 1e-3 * scale &&
                   f.codomain().norm(branch_gap) <= 1e-3 * scale;
    return dd;
}

// ---------------------------------------------------------------------------
// Pairing

namespace {
Smoothness combine_smoothness(Smoothness a, Smoothness b) {
    if (a == Smoothness::discontinuous || b == Smoothness::discontinuous) {
        return Smoothness::discontinuous;
    }
    if (a == Smoothness::unknown || b == Smoothness::unknown) return Smoothness::unknown;
    if (a == Smoothness::c1 && b == Smoothness::c1) return Smoothness::c1;
    return Smoothness::differentiable;
}
}  // namespace

Map pair(const Map& f1, const Map& f2) {
    const spaces::Space dom = spaces::Space::product(f1.domain(), f2.domain());
    const spaces::Space cod = spaces::Space::product(f1.codomain(), f2.codomain());
    const int d1 = f1.domain().dim();
    const int d2 = f2.domain().dim();
    const int c1 = f1.codomain().dim();
    const int c2 = f2.codomain().dim();

    Map product(dom, cod,
                [f1, f2, d1, d2, c1, c2](const Vec& x) {
                    Vec y(c1 + c2);
                    y.head(c1) = f1(x.head(d1));
                    y.tail(c2) = f2(x.tail(d2));
                    return y;
                },
                combine_smoothness(f1.smoothness(), f2.smoothness()));

    if (f1.has_analytic_jacobian() && f2.has_analytic_jacobian()) {
        product.with_jacobian([f1, f2, d1, d2, c1, c2](const Vec& x) {
            Mat j = Mat::Zero(c1 + c2, d1 + d2);
            j.topLeftCorner(c1, d1) = f1.analytic_jacobian(x.head(d1));
            j.bottomRightCorner(c2, d2) = f2.analytic_jacobian(x.tail(d2));
            return j;
        });
    }
    if (f1.region() && f2.region()) {
        product.with_region(spaces::Body::product(*f1.region(), *f2.region()));
    }
    return product;
}

}  // namespace localinv::maps
