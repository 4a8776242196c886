#include "localinv/suite.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "localinv/rng.hpp"

namespace localinv::suite {

namespace {

using spaces::Body;
using spaces::Space;

Vec vec1(double x) {
    Vec v(1);
    v[0] = x;
    return v;
}

Vec vec2(double x, double y) {
    Vec v(2);
    v << x, y;
    return v;
}

/// Oracle-side root finder: plain bisection on an increasing function.
double bisect_increasing(const std::function<double(double)>& fn, double target, double lo,
                         double hi) {
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (fn(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

void self_check(const Problem& p) {
    Rng rng(mix_seed(0x5EEDCAFEULL, std::hash<std::string>{}(p.name)));
    auto fail = [&](const std::string& what) {
        throw Error("oracle self-check failed for " + p.name + ": " + what);
    };

    if (p.map && p.inverse_oracle && p.probe_body) {
        for (int i = 0; i < 100; ++i) {
            const Vec x = p.probe_body->sample_interior(rng);
            Vec y;
            try {
                y = (*p.map)(x);
            } catch (const OutsideDomain&) {
                continue;
            }
            const Vec x2 = p.inverse_oracle(y);
            const double err = p.map->codomain().norm((*p.map)(x2) - y);
            if (err > 1e-12 * std::max(1.0, p.map->codomain().norm(y))) fail("inverse oracle");
        }
    }
    if (p.map && p.preimages_oracle && p.y_sampler) {
        for (int i = 0; i < 100; ++i) {
            const Vec y = (*p.y_sampler)(rng);
            for (const Vec& q : p.preimages_oracle(y)) {
                const double err = p.map->codomain().norm((*p.map)(q) - y);
                if (err > 1e-12 * std::max(1.0, p.map->codomain().norm(y))) {
                    fail("preimage oracle");
                }
            }
        }
    }
    if (p.implicit_problem && p.ode_solution_oracle) {
        const auto& prob = *p.implicit_problem;
        for (int i = 0; i < 100; ++i) {
            const double t = rng.uniform();
            const Vec u = p.ode_solution_oracle(t);
            const double err =
                prob.x_space().norm(prob.eval_g(vec1(t), u) - prob.level());
            if (err > 1e-12 * std::max(1.0, prob.x_space().norm(prob.level()))) {
                fail("ode solution oracle");
            }
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Families

Problem make_identity(int dim) {
    const Space s = Space::pnorm(dim, 2.0);
    Problem p;
    {
        std::ostringstream os;
        os << "identity_" << dim << "d";
        p.name = os.str();
    }
    p.tags = {"C1_invertible", "hadamard_levy_pass"};
    p.map = maps::Map(s, s, [](const Vec& x) { return x; }, maps::Smoothness::c1);
    p.map->with_jacobian([dim](const Vec&) { return Mat::Identity(dim, dim); });
    p.anchors = {Vec::Zero(dim)};
    for (int i = 0; i < dim; ++i) {
        Vec a = Vec::Zero(dim);
        a[i] = 0.5;
        p.scale_points.push_back(a);
    }
    p.scale_points.push_back(Vec::Zero(dim));
    p.cert_setup = CertSetup{Vec::Zero(dim), 1.0, 0.5, {}};
    p.probe_body = Body::ball(s, Vec::Zero(dim), 1.5);
    p.hl_region = Body::ball(s, Vec::Zero(dim), 3.0);
    p.inverse_oracle = [](const Vec& y) { return y; };
    p.y_sampler = [s](Rng& rng) {
        return Body::ball(s, Vec::Zero(s.dim()), 1.0).sample_interior(rng);
    };
    p.expected_sheets = 1;
    return p;
}

Problem make_linear(double condition) {
    const Space s = Space::pnorm(2, 2.0);
    Mat m = Mat::Identity(2, 2);
    m(0, 0) = condition;  // smallest singular value stays 1
    Problem p;
    {
        std::ostringstream os;
        os << "linear_cond" << static_cast<long long>(condition);
        p.name = os.str();
    }
    p.tags = {"C1_invertible"};
    p.map = maps::Map(s, s, [m](const Vec& x) { return (m * x).eval(); }, maps::Smoothness::c1);
    p.map->with_jacobian([m](const Vec&) { return m; });
    p.anchors = {Vec::Zero(2)};
    for (double x : {-1.0, 0.0, 1.0}) {
        for (double y : {-1.0, 0.0, 1.0}) {
            p.scale_points.push_back(vec2(x, y));
        }
    }
    p.cert_setup = CertSetup{Vec::Zero(2), 1.0, 0.5, {}};
    p.probe_body = Body::ball(s, Vec::Zero(2), 2.0);
    p.inverse_oracle = [m](const Vec& y) {
        Vec x(2);
        x[0] = y[0] / m(0, 0);
        x[1] = y[1] / m(1, 1);
        return x;
    };
    p.y_sampler = [s](Rng& rng) {
        return Body::ball(s, Vec::Zero(2), 1.0).sample_interior(rng);
    };
    p.expected_sheets = 1;
    return p;
}

Problem make_cubic() {
    const Space s = Space::pnorm(1, 2.0);
    Problem p;
    p.name = "cubic";
    p.tags = {"C1_invertible", "proper_covering", "hadamard_levy_pass"};
    p.map = maps::Map(s, s, [](const Vec& x) { return vec1(x[0] * x[0] * x[0] + x[0]); },
                      maps::Smoothness::c1);
    p.map->with_jacobian([](const Vec& x) {
        Mat j(1, 1);
        j(0, 0) = 3.0 * x[0] * x[0] + 1.0;
        return j;
    });
    p.anchors = {vec1(0.0), vec1(1.0)};
    for (int i = 0; i < 9; ++i) {
        p.scale_points.push_back(vec1(-1.0 + 0.25 * static_cast<double>(i)));
    }
    inversion::ChartOptions chart;
    chart.ladder = {1.0, 0.5, 0.25, 0.125, 0.0625};
    p.chart_options = chart;
    p.cert_setup = CertSetup{vec1(0.0), 0.2, 0.09, {}};
    p.probe_body = Body::ball(s, vec1(0.0), 2.0);
    p.hl_region = Body::ball(s, vec1(0.0), 2.0);
    p.inverse_oracle = [](const Vec& y) {
        const double t = y[0];
        const double reach = std::abs(t) + 2.0;
        return vec1(bisect_increasing([](double x) { return x * x * x + x; }, t, -reach, reach));
    };
    p.preimages_oracle = [p_inv = p.inverse_oracle](const Vec& y) {
        return std::vector<Vec>{p_inv(y)};
    };
    p.y_sampler = [](Rng& rng) { return vec1(rng.uniform(-1.0, 1.0)); };
    p.expected_sheets = 1;
    return p;
}

Problem make_cubic_flat() {
    const Space s = Space::pnorm(1, 2.0);
    Problem p;
    p.name = "cubic_flat";
    p.tags = {"degenerate_point"};
    p.map = maps::Map(s, s, [](const Vec& x) { return vec1(x[0] * x[0] * x[0]); },
                      maps::Smoothness::c1);
    p.map->with_jacobian([](const Vec& x) {
        Mat j(1, 1);
        j(0, 0) = 3.0 * x[0] * x[0];
        return j;
    });
    p.anchors = {vec1(1.0)};
    p.probe_body = Body::ball(s, vec1(0.0), 1.5);
    return p;
}

Problem make_parabolic_fold() {
    const Space s = Space::pnorm(2, 2.0);
    Problem p;
    p.name = "parabolic_fold";
    p.tags = {"degenerate_point"};
    p.map = maps::Map(s, s, [](const Vec& x) { return vec2(x[0] * x[0], x[1]); },
                      maps::Smoothness::c1);
    p.map->with_jacobian([](const Vec& x) {
        Mat j = Mat::Zero(2, 2);
        j(0, 0) = 2.0 * x[0];
        j(1, 1) = 1.0;
        return j;
    });
    p.anchors = {Vec::Zero(2)};
    p.scale_points = {Vec::Zero(2), vec2(0.5, 0.0)};
    p.probe_body = Body::ball(s, Vec::Zero(2), 1.5);
    return p;
}

Problem make_zsquare() {
    const Space s = Space::pnorm(2, 2.0);
    Problem p;
    p.name = "zsquare_annulus";
    p.tags = {"C1_invertible", "proper_covering"};
    p.map = maps::Map(
        s, s,
        [](const Vec& z) { return vec2(z[0] * z[0] - z[1] * z[1], 2.0 * z[0] * z[1]); },
        maps::Smoothness::c1);
    p.map->with_jacobian([](const Vec& z) {
        Mat j(2, 2);
        j << 2.0 * z[0], -2.0 * z[1], 2.0 * z[1], 2.0 * z[0];
        return j;
    });
    p.map->with_region(Body::ball(s, Vec::Zero(2), 2.0));
    p.anchors = {vec2(1.0, 0.3)};
    p.probe_body = Body::ball(s, Vec::Zero(2), 2.0);
    p.y_sampler = [s](Rng& rng) {
        // image norms in [1, 2]: both square roots stay inside the annulus
        const Vec dir = s.random_unit(rng);
        return (dir * (1.0 + rng.uniform())).eval();
    };
    p.preimages_oracle = [](const Vec& y) {
        const std::complex<double> w = std::sqrt(std::complex<double>(y[0], y[1]));
        return std::vector<Vec>{vec2(w.real(), w.imag()), vec2(-w.real(), -w.imag())};
    };
    p.expected_sheets = 2;
    return p;
}

Problem make_projection() {
    const Space line = Space::pnorm(1, 2.0);
    const Space plane = Space::product(line, line);
    Problem p;
    p.name = "projection_square";
    p.tags = {"degenerate_point"};
    p.map = maps::Map(plane, plane, [](const Vec& x) { return vec2(x[0], 0.0); },
                      maps::Smoothness::c1);
    p.map->with_jacobian([](const Vec&) {
        Mat j = Mat::Zero(2, 2);
        j(0, 0) = 1.0;
        return j;
    });
    const Body interval = Body::ball(line, vec1(0.0), 1.0);
    p.probe_body = Body::product(interval, interval);
    return p;
}

Problem make_ha(double a, double c) {
    if (!(c > 0.0)) throw Error("ha: c must be positive");
    const Space s = Space::pnorm(1, 2.0);
    Problem p;
    p.name = "ha_weakA";
    p.tags = {"nonsmooth_weakA"};
    p.map = maps::Map(s, s,
                      [a, c](const Vec& x) {
                          return vec1(x[0] <= a ? x[0] - a - 0.5 * c : x[0] - a + 0.5 * c);
                      },
                      maps::Smoothness::discontinuous);
    p.map->with_region(Body::ball(s, vec1(a), c));
    p.anchors = {vec1(a)};
    // target ball centered at the jump midpoint value (0), not at f(a)
    p.cert_setup = CertSetup{vec1(a), c, 0.49 * c, vec1(0.0), true};
    p.probe_body = Body::ball(s, vec1(a), c);
    return p;
}

Problem make_doubling() {
    const Space s = Space::pnorm(1, 2.0);
    Problem p;
    p.name = "doubling";
    p.tags = {"C1_invertible"};
    p.map = maps::Map(s, s, [](const Vec& x) { return vec1(2.0 * x[0]); }, maps::Smoothness::c1);
    p.map->with_jacobian([](const Vec&) {
        Mat j(1, 1);
        j(0, 0) = 2.0;
        return j;
    });
    p.anchors = {vec1(0.0)};
    // with the identity auxiliary the tilde is x -> y - x: weak-quasi territory
    p.cert_setup = CertSetup{vec1(0.0), 1.0, 0.2, {}, true};
    p.probe_body = Body::ball(s, vec1(0.0), 1.5);
    p.inverse_oracle = [](const Vec& y) { return vec1(0.5 * y[0]); };
    return p;
}

Problem make_atan() {
    const Space s = Space::pnorm(1, 2.0);
    Problem p;
    p.name = "atan";
    p.tags = {"C1_invertible", "hadamard_levy_fail"};
    p.map = maps::Map(s, s, [](const Vec& x) { return vec1(std::atan(x[0])); },
                      maps::Smoothness::c1);
    p.map->with_jacobian([](const Vec& x) {
        Mat j(1, 1);
        j(0, 0) = 1.0 / (1.0 + x[0] * x[0]);
        return j;
    });
    p.anchors = {vec1(0.0)};
    p.cert_setup = CertSetup{vec1(0.0), 0.5, 0.2, {}};
    p.hl_region = Body::ball(s, vec1(0.0), 50.0);
    p.probe_body = Body::ball(s, vec1(0.0), 2.0);
    p.inverse_oracle = [](const Vec& y) { return vec1(std::tan(y[0])); };
    return p;
}

Problem make_implicit_exp() {
    const Space line = Space::pnorm(1, 2.0);
    const Space prod = Space::product(line, line);
    maps::Map g(prod, line, [](const Vec& tx) { return vec1(tx[1] * std::exp(-tx[0])); },
                maps::Smoothness::c1);
    g.with_jacobian([](const Vec& tx) {
        Mat j(1, 2);
        j(0, 0) = -tx[1] * std::exp(-tx[0]);
        j(0, 1) = std::exp(-tx[0]);
        return j;
    });
    Problem p;
    p.name = "implicit_exp";
    p.tags = {"implicit", "ode"};
    p.implicit_problem = std::make_shared<implicit::ImplicitProblem>(
        std::move(g), line, line, vec1(0.0), vec1(1.0));
    p.ode_solution_oracle = [](double t) { return vec1(std::exp(t)); };
    return p;
}

Problem make_implicit_cubic() {
    const Space line = Space::pnorm(1, 2.0);
    const Space prod = Space::product(line, line);
    maps::Map g(prod, line,
                [](const Vec& tx) { return vec1(tx[1] * tx[1] * tx[1] + tx[1] - tx[0]); },
                maps::Smoothness::c1);
    g.with_jacobian([](const Vec& tx) {
        Mat j(1, 2);
        j(0, 0) = -1.0;
        j(0, 1) = 3.0 * tx[1] * tx[1] + 1.0;
        return j;
    });
    Problem p;
    p.name = "implicit_cubic";
    p.tags = {"implicit", "ode"};
    p.implicit_problem = std::make_shared<implicit::ImplicitProblem>(
        std::move(g), line, line, vec1(0.0), vec1(0.0));
    p.ode_solution_oracle = [](double t) {
        const double reach = std::abs(t) + 2.0;
        return vec1(bisect_increasing([](double x) { return x * x * x + x; }, t, -reach, reach));
    };
    return p;
}

// ---------------------------------------------------------------------------
// Registry

const std::vector<Problem>& builtin() {
    static const std::vector<Problem> problems = [] {
        std::vector<Problem> ps;
        ps.push_back(make_identity(1));
        ps.push_back(make_identity(2));
        ps.push_back(make_identity(3));
        ps.push_back(make_linear(1.0));
        ps.push_back(make_linear(10.0));
        ps.push_back(make_linear(1000.0));
        ps.push_back(make_cubic());
        ps.push_back(make_cubic_flat());
        ps.push_back(make_parabolic_fold());
        ps.push_back(make_zsquare());
        ps.push_back(make_projection());
        ps.push_back(make_ha(0.0, 1.0));
        ps.push_back(make_doubling());
        ps.push_back(make_atan());
        ps.push_back(make_implicit_exp());
        ps.push_back(make_implicit_cubic());
        for (const Problem& p : ps) self_check(p);
        return ps;
    }();
    return problems;
}

const Problem& lookup(const std::string& name) {
    for (const Problem& p : builtin()) {
        if (p.name == name) return p;
    }
    throw Error("unknown problem: " + name);
}

bool has_problem(const std::string& name) {
    for (const Problem& p : builtin()) {
        if (p.name == name) return true;
    }
    return false;
}

std::vector<std::string> problem_names() {
    std::vector<std::string> names;
    for (const Problem& p : builtin()) names.push_back(p.name);
    return names;
}

}  // namespace localinv::suite
