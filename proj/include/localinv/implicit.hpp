#pragma once

#include <cstdint>
#include <vector>

#include "localinv/inversion.hpp"
#include "localinv/maps.hpp"

namespace localinv::implicit {

/// Sign convention for the right-hand side built from g:
///   raw:        f =  (D_x g)^{-1} D_t g
///   chain_rule: f = -(D_x g)^{-1} D_t g  (the convention consistent with
///               differentiating t -> g(t, u(t)) by the chain rule)
enum class OdeSign { raw, chain_rule };

const char* to_string(OdeSign s);

/// Level-set problem g(t, x) = c around a base point (a, b) with invertible
/// D_x g there. g maps the product of t_space and x_space into x_space.
class ImplicitProblem {
public:
    ImplicitProblem(maps::Map g, spaces::Space t_space, spaces::Space x_space, Vec base_t,
                    Vec base_x, double fp_tol = 1e-10, double sigma_rel_tol = 1e-8);

    const maps::Map& g() const { return g_; }
    const spaces::Space& t_space() const { return t_space_; }
    const spaces::Space& x_space() const { return x_space_; }
    const spaces::Space& product_space() const { return product_space_; }
    const Vec& base_t() const { return base_t_; }
    const Vec& base_x() const { return base_x_; }
    const Vec& level() const { return level_; }
    int t_dim() const { return t_space_.dim(); }
    int x_dim() const { return x_space_.dim(); }

    Vec eval_g(const Vec& t, const Vec& x) const;
    /// Jacobian blocks of g at (t, x): D_t g (x_dim x t_dim), D_x g (x_dim x x_dim).
    std::pair<Mat, Mat> jacobian_blocks(const Vec& t, const Vec& x) const;

private:
    maps::Map g_;
    spaces::Space t_space_;
    spaces::Space x_space_;
    spaces::Space product_space_;
    Vec base_t_;
    Vec base_x_;
    Vec level_;
};

/// F(t, x) = (t, g(t, x)) on the product space, with block Jacobian
/// [[I, 0], [D_t g, D_x g]] when g carries an analytic Jacobian.
maps::Map build_F(const ImplicitProblem& problem);

struct ContinuationOptions {
    inversion::ChartOptions chart;
    int max_bisections = 8;      // step halvings before OutOfReach
    double step_fraction = 0.9;  // fraction of the chart radius s per step
    double inv_tol = 1e-11;      // level-residual tolerance at accepted points
};

ContinuationOptions default_continuation();

/// Tracks the level set by chart-based continuation; reusable across
/// queries (the chart is rebuilt only when the target leaves its reach).
class Continuation {
public:
    Continuation(const ImplicitProblem& problem, ContinuationOptions options);

    /// The graph value h(t); advances the anchor along the straight segment
    /// from the current anchor to t. Throws ChartFailure / OutOfReach.
    Vec advance_to(const Vec& t);

    const Vec& anchor_t() const { return anchor_t_; }
    const Vec& anchor_x() const { return anchor_x_; }
    int charts_built() const { return charts_built_; }
    void reset();

private:
    const ImplicitProblem& problem_;
    maps::Map F_;
    ContinuationOptions options_;
    Vec anchor_t_, anchor_x_;
    std::optional<inversion::Chart> chart_;
    Vec chart_anchor_t_;
    int charts_built_ = 0;

    bool ensure_chart_at(const Vec& t_anchor, const Vec& x_anchor);
    std::optional<Vec> try_invert(const Vec& t, const Vec& predictor);
};

/// h(t) with g(t, h(t)) = c, by chart inversion of F with continuation
/// re-anchoring along the segment from the base point to t_query.
Vec implicit_solve(const ImplicitProblem& problem, const Vec& t_query,
                   const ContinuationOptions& options = default_continuation());

/// Dh(t) = -(D_x g)^{-1} D_t g at (t, h_t).
Mat implicit_derivative(const ImplicitProblem& problem, const Vec& t, const Vec& h_t,
                        double sigma_rel_tol = 1e-8);

/// Right-hand side map f(t, x) = +/- (D_x g)^{-1} D_t g on the product
/// space (t one-dimensional).
maps::Map f_from_g(const ImplicitProblem& problem, OdeSign convention);

/// u'(t) = f(t, u), u(0) = b, solved through the level identity
/// g(t, u(t)) = g(0, b); t_grid must start at 0.
std::vector<Vec> ode_solve(const ImplicitProblem& problem, const std::vector<double>& t_grid,
                           const ContinuationOptions& options = default_continuation());

/// Max over interior nodes of |central difference of u - f(t_i, u_i)| under
/// the chosen sign convention.
double ode_residual_check(const ImplicitProblem& problem, const std::vector<Vec>& u_values,
                          const std::vector<double>& t_grid, OdeSign convention);

/// Max over nodes of |g(t_i, u_i) - c|: the level-conservation defect.
double level_residual(const ImplicitProblem& problem, const std::vector<Vec>& u_values,
                      const std::vector<double>& t_grid);

}  // namespace localinv::implicit
