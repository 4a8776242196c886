#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "localinv/implicit.hpp"
#include "localinv/inversion.hpp"
#include "localinv/maps.hpp"

namespace localinv::suite {

/// Cert-task parameters attached to a problem (anchor, body, target ball).
struct CertSetup {
    Vec anchor;
    double body_radius = 0.0;
    double s = 0.0;
    std::optional<Vec> target_center;
    /// Use the identity auxiliary instead of the inverse Jacobian (the
    /// nonsmooth and quasi-nonexpansive examples are stated with A = I).
    bool identity_aux = false;
};

/// Named benchmark problem with analytic oracles. Oracles are independent
/// implementations (bisection, closed forms, complex arithmetic) and never
/// share code with the solvers they validate.
struct Problem {
    std::string name;
    std::vector<std::string> tags;

    std::optional<maps::Map> map;
    std::shared_ptr<implicit::ImplicitProblem> implicit_problem;

    /// Anchors for chart/scale/inversion tasks.
    std::vector<Vec> anchors;
    /// Dense-set sample for the locally-uniform-scale check.
    std::vector<Vec> scale_points;
    /// Chart options override (ladder start etc.); empty uses defaults.
    std::optional<inversion::ChartOptions> chart_options;
    std::optional<CertSetup> cert_setup;
    /// Domain body for sheet counting / discreteness probing.
    std::optional<spaces::Body> probe_body;
    /// Image-point sampler for the sheets task.
    std::optional<inversion::Sampler> y_sampler;
    /// Sample region for the derivative-bound criterion task.
    std::optional<spaces::Body> hl_region;

    // Oracles.
    std::function<Vec(const Vec&)> inverse_oracle;                // f^{-1}(y)
    std::function<std::vector<Vec>(const Vec&)> preimages_oracle; // all preimages
    std::function<Vec(double)> ode_solution_oracle;               // u(t)
    int expected_sheets = 0;
};

/// Built-in registry; every entry passes its oracle self-check at
/// construction (throws otherwise). Thread-safe after first call.
const std::vector<Problem>& builtin();

const Problem& lookup(const std::string& name);
bool has_problem(const std::string& name);
std::vector<std::string> problem_names();

/// Problem factories (ha takes its jump parameters).
Problem make_ha(double a, double c);
Problem make_cubic();
Problem make_cubic_flat();
Problem make_identity(int dim);
Problem make_linear(double condition);
Problem make_parabolic_fold();
Problem make_zsquare();
Problem make_projection();
Problem make_atan();
Problem make_doubling();
Problem make_implicit_exp();
Problem make_implicit_cubic();

}  // namespace localinv::suite
