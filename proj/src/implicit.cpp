#include "localinv/implicit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "localinv/rng.hpp"

namespace localinv::implicit {

const char* to_string(OdeSign s) { return s == OdeSign::raw ? "raw" : "chain_rule"; }

// ---------------------------------------------------------------------------
// ImplicitProblem

ImplicitProblem::ImplicitProblem(maps::Map g, spaces::Space t_space, spaces::Space x_space,
                                 Vec base_t, Vec base_x, double fp_tol, double sigma_rel_tol)
    : g_(std::move(g)),
      t_space_(std::move(t_space)),
      x_space_(std::move(x_space)),
      product_space_(spaces::Space::product(t_space_, x_space_)),
      base_t_(std::move(base_t)),
      base_x_(std::move(base_x)) {
    if (g_.domain().dim() != t_space_.dim() + x_space_.dim()) {
        throw DimensionMismatch("g domain must be the product of the t and x spaces");
    }
    if (g_.codomain().dim() != x_space_.dim()) {
        throw DimensionMismatch("g codomain must match the x space");
    }
    require_dim(base_t_, t_space_.dim(), "base t");
    require_dim(base_x_, x_space_.dim(), "base x");
    level_ = eval_g(base_t_, base_x_);
    const auto [dt, dx] = jacobian_blocks(base_t_, base_x_);
    (void)dt;
    Eigen::JacobiSVD<Mat> svd(dx);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv[0] : 0.0;
    const double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
    if (smin <= sigma_rel_tol * smax) {
        throw DegenerateDerivative("D_x g is singular at the base point");
    }
    // the base point sits on its own level set by construction
    if (x_space_.norm(eval_g(base_t_, base_x_) - level_) > fp_tol) {
        throw Error("level residual at the base point exceeds fp_tol");
    }
}

Vec ImplicitProblem::eval_g(const Vec& t, const Vec& x) const {
    Vec tx(t.size() + x.size());
    tx << t, x;
    return g_(tx);
}

std::pair<Mat, Mat> ImplicitProblem::jacobian_blocks(const Vec& t, const Vec& x) const {
    Vec tx(t.size() + x.size());
    tx << t, x;
    const Mat j = maps::jacobian(g_, tx).matrix;
    return {j.leftCols(t_space_.dim()), j.rightCols(x_space_.dim())};
}

// ---------------------------------------------------------------------------
// build_F

maps::Map build_F(const ImplicitProblem& problem) {
    const maps::Map g = problem.g();
    const int td = problem.t_dim();
    const int xd = problem.x_dim();
    const spaces::Space prod = problem.product_space();

    maps::Map F(prod, prod,
                [g, td, xd](const Vec& tx) {
                    Vec out(td + xd);
                    out.head(td) = tx.head(td);
                    out.tail(xd) = g(tx);
                    return out;
                },
                g.smoothness());
    if (g.has_analytic_jacobian()) {
        F.with_jacobian([g, td, xd](const Vec& tx) {
            Mat j = Mat::Zero(td + xd, td + xd);
            j.topLeftCorner(td, td) = Mat::Identity(td, td);
            j.bottomRows(xd) = g.analytic_jacobian(tx);
            return j;
        });
    }
    if (g.region()) F.with_region(*g.region());
    return F;
}

// ---------------------------------------------------------------------------
// Continuation

ContinuationOptions default_continuation() {
    ContinuationOptions o;
    o.chart.ladder = {0.4, 0.2, 0.1, 0.05, 0.025};
    o.chart.s_factors = {2.0, 1.0, 0.5, 0.25, 0.125, 0.0625};
    return o;
}

Continuation::Continuation(const ImplicitProblem& problem, ContinuationOptions options)
    : problem_(problem),
      F_(build_F(problem)),
      options_(std::move(options)),
      anchor_t_(problem.base_t()),
      anchor_x_(problem.base_x()) {}

void Continuation::reset() {
    anchor_t_ = problem_.base_t();
    anchor_x_ = problem_.base_x();
    chart_.reset();
}

bool Continuation::ensure_chart_at(const Vec& t_anchor, const Vec& x_anchor) {
    Vec anchor(t_anchor.size() + x_anchor.size());
    anchor << t_anchor, x_anchor;
    inversion::ChartOptions co = options_.chart;
    co.seed = mix_seed(options_.chart.seed, 0x434F4E54ULL, static_cast<std::uint64_t>(charts_built_));
    try {
        chart_ = inversion::build_chart(F_, anchor, co);
    } catch (const Error&) {
        chart_.reset();
        return false;
    }
    chart_anchor_t_ = t_anchor;
    ++charts_built_;
    return true;
}

std::optional<Vec> Continuation::try_invert(const Vec& t, const Vec& predictor) {
    if (!chart_) return std::nullopt;
    const int td = problem_.t_dim();
    const int xd = problem_.x_dim();
    Vec target(td + xd);
    target << t, problem_.level();
    Vec start(td + xd);
    start << t, predictor;
    try {
        const Vec p = inversion::invert(*chart_, target, start, options_.inv_tol);
        return p.tail(xd).eval();
    } catch (const Error&) {
        return std::nullopt;
    }
}

Vec Continuation::advance_to(const Vec& t) {
    require_dim(t, problem_.t_dim(), "continuation target");
    const spaces::Space& ts = problem_.t_space();

    for (int guard = 0; guard < 100000; ++guard) {
        const double remaining = ts.norm(t - anchor_t_);
        if (remaining == 0.0) return anchor_x_;

        // Inside the current chart the target (t, c) is within reach iff
        // |t - t_chart| < s, because F maps the chart anchor to (t_chart, c).
        if (chart_) {
            const double reach = options_.step_fraction * chart_->s;
            if (ts.norm(t - chart_anchor_t_) < reach) {
                if (auto x = try_invert(t, anchor_x_)) {
                    anchor_t_ = t;
                    anchor_x_ = *x;
                    return anchor_x_;
                }
                chart_.reset();
            }
        }

        // Rebuild when the reach left around the drifted anchor is too small.
        if (chart_) {
            const double drift = ts.norm(anchor_t_ - chart_anchor_t_);
            if (options_.step_fraction * chart_->s - drift < 0.05 * chart_->s) chart_.reset();
        }
        if (!chart_ && !ensure_chart_at(anchor_t_, anchor_x_)) {
            throw ChartFailure("chart construction failed along the path");
        }

        // Step toward t within the chart's remaining reach, bisecting on failure.
        const double avail =
            options_.step_fraction * chart_->s - ts.norm(anchor_t_ - chart_anchor_t_);
        double step = std::min(remaining, avail);
        bool advanced = false;
        for (int b = 0; b <= options_.max_bisections && step > 0.0; ++b) {
            const Vec t_next = anchor_t_ + (step / remaining) * (t - anchor_t_);
            if (auto x = try_invert(t_next, anchor_x_)) {
                anchor_t_ = t_next;
                anchor_x_ = *x;
                advanced = true;
                break;
            }
            step *= 0.5;
        }
        if (!advanced) {
            throw OutOfReach("continuation could not advance after bisecting the step");
        }
    }
    throw OutOfReach("continuation exceeded the iteration guard");
}

Vec implicit_solve(const ImplicitProblem& problem, const Vec& t_query,
                   const ContinuationOptions& options) {
    Continuation cont(problem, options);
    return cont.advance_to(t_query);
}

Mat implicit_derivative(const ImplicitProblem& problem, const Vec& t, const Vec& h_t,
                        double sigma_rel_tol) {
    const auto [dt, dx] = problem.jacobian_blocks(t, h_t);
    Eigen::JacobiSVD<Mat> svd(dx);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[sv.size() - 1] <= sigma_rel_tol * sv[0]) {
        throw DegenerateDerivative("D_x g is singular at the query point");
    }
    return -dx.partialPivLu().solve(dt);
}

maps::Map f_from_g(const ImplicitProblem& problem, OdeSign convention) {
    if (problem.t_dim() != 1) throw Error("f_from_g requires one-dimensional t");
    const double sign = convention == OdeSign::chain_rule ? -1.0 : 1.0;
    const int td = problem.t_dim();
    const int xd = problem.x_dim();
    // capture by value; the problem object may outlive scopes differently
    const maps::Map g = problem.g();
    const spaces::Space prod = problem.product_space();
    const spaces::Space xs = problem.x_space();
    return maps::Map(prod, xs, [g, td, xd, sign](const Vec& tx) {
        const Mat j = maps::jacobian(g, tx).matrix;
        const Mat dt = j.leftCols(td);
        const Mat dx = j.rightCols(xd);
        Eigen::JacobiSVD<Mat> svd(dx);
        const auto& sv = svd.singularValues();
        if (sv.size() == 0 || sv[sv.size() - 1] <= 1e-8 * sv[0]) {
            throw DegenerateDerivative("D_x g is singular");
        }
        return (sign * dx.partialPivLu().solve(dt.col(0))).eval();
    });
}

std::vector<Vec> ode_solve(const ImplicitProblem& problem, const std::vector<double>& t_grid,
                           const ContinuationOptions& options) {
    if (problem.t_dim() != 1) throw Error("ode_solve requires one-dimensional t");
    if (t_grid.empty()) throw Error("ode_solve needs a nonempty grid");
    if (std::abs(t_grid.front() - problem.base_t()[0]) > 1e-12) {
        throw Error("t grid must start at the base t");
    }
    Continuation cont(problem, options);
    std::vector<Vec> us;
    us.reserve(t_grid.size());
    Vec t(1);
    for (const double ti : t_grid) {
        t[0] = ti;
        us.push_back(cont.advance_to(t));
    }
    return us;
}

double ode_residual_check(const ImplicitProblem& problem, const std::vector<Vec>& u_values,
                          const std::vector<double>& t_grid, OdeSign convention) {
    if (u_values.size() != t_grid.size()) throw DimensionMismatch("grid / trajectory mismatch");
    if (t_grid.size() < 3) throw Error("residual check needs at least 3 grid nodes");
    const maps::Map f = f_from_g(problem, convention);
    const spaces::Space& xs = problem.x_space();
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < t_grid.size(); ++i) {
        const Vec du = (u_values[i + 1] - u_values[i - 1]) / (t_grid[i + 1] - t_grid[i - 1]);
        Vec tx(1 + u_values[i].size());
        tx << t_grid[i], u_values[i];
        worst = std::max(worst, xs.norm(du - f(tx)));
    }
    return worst;
}

double level_residual(const ImplicitProblem& problem, const std::vector<Vec>& u_values,
                      const std::vector<double>& t_grid) {
    if (problem.t_dim() != 1) throw Error("level_residual requires one-dimensional t");
    if (u_values.size() != t_grid.size()) throw DimensionMismatch("grid / trajectory mismatch");
    double worst = 0.0;
    Vec t(1);
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        t[0] = t_grid[i];
        worst = std::max(worst, problem.x_space().norm(problem.eval_g(t, u_values[i]) -
                                                        problem.level()));
    }
    return worst;
}

}  // namespace localinv::implicit
