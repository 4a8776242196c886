#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "localinv/common.hpp"
#include "localinv/spaces.hpp"

namespace localinv::maps {

enum class Smoothness { c1, differentiable, discontinuous, unknown };

const char* to_string(Smoothness s);

/// Evaluatable map between space models with optional analytic Jacobian and
/// optional domain region (partial maps). Evaluators must be pure; Map is
/// immutable and safe to share.
class Map {
public:
    using Evaluator = std::function<Vec(const Vec&)>;
    using JacobianFn = std::function<Mat(const Vec&)>;

    Map(spaces::Space domain, spaces::Space codomain, Evaluator eval,
        Smoothness tag = Smoothness::unknown);

    Map& with_jacobian(JacobianFn jac);
    Map& with_region(spaces::Body region);

    /// Evaluate; throws DimensionMismatch / OutsideDomain.
    Vec operator()(const Vec& x) const;

    const spaces::Space& domain() const { return domain_; }
    const spaces::Space& codomain() const { return codomain_; }
    const std::optional<spaces::Body>& region() const { return region_; }
    Smoothness smoothness() const { return tag_; }
    bool has_analytic_jacobian() const { return static_cast<bool>(jacobian_); }
    Mat analytic_jacobian(const Vec& x) const;

    bool in_region(const Vec& x) const;

private:
    spaces::Space domain_;
    spaces::Space codomain_;
    Evaluator eval_;
    JacobianFn jacobian_;
    std::optional<spaces::Body> region_;
    Smoothness tag_;
};

/// Linear map with cached singular-value data.
class LinearMap {
public:
    explicit LinearMap(Mat matrix);

    Vec operator()(const Vec& x) const;
    const Mat& matrix() const { return matrix_; }
    double operator_norm() const { return operator_norm_; }
    double smallest_singular_value() const { return smallest_sv_; }
    bool injective(double sigma_rel_tol = 1e-8) const {
        return smallest_sv_ > sigma_rel_tol * operator_norm_;
    }

private:
    Mat matrix_;
    double operator_norm_;
    double smallest_sv_;
};

enum class JacobianMethod { automatic, analytic, central_difference };

struct JacobianEstimate {
    Mat matrix;
    JacobianMethod method = JacobianMethod::automatic;
    double step = 0.0;  // central-difference step, 0 for analytic
    double operator_norm = 0.0;
    double smallest_singular_value = 0.0;

    bool invertible(double sigma_rel_tol = 1e-8) const {
        return matrix.rows() == matrix.cols() &&
               smallest_singular_value > sigma_rel_tol * operator_norm;
    }
};

/// Default central-difference step: cbrt(machine eps) * max(1, |x|).
double default_fd_step(const spaces::Space& domain, const Vec& x);

JacobianEstimate jacobian(const Map& f, const Vec& x,
                          JacobianMethod method = JacobianMethod::automatic);

/// Inverse of the derivative at a; throws DegenerateDerivative when the
/// smallest singular value is below the relative tolerance.
LinearMap inverse_jacobian_map(const Map& f, const Vec& a, double sigma_rel_tol = 1e-8);

enum class Side { plus, minus };

/// One-sided directional derivative estimate. `slope` extrapolates
/// difference quotients taken strictly on the chosen side (so it reports
/// the branch slope across a jump); `anchored_slope` extrapolates quotients
/// against f(x) itself and drives the convergence flag, which is how a
/// discontinuity at x shows up without an exception.
struct DirectionalDerivative {
    Vec slope;
    Vec anchored_slope;
    bool converged = true;
};

DirectionalDerivative directional_derivative(const Map& f, const Vec& x, const Vec& v, Side side,
                                             double h0 = 0.0);

/// Product map on the product spaces (componentwise evaluation; block
/// Jacobian when both factors provide one).
Map pair(const Map& f1, const Map& f2);

}  // namespace localinv::maps
