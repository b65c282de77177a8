#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "odefit/ode.hpp"

namespace odefit {

// Benchmark vector fields. Each writes into `dxdt` and is total over finite
// inputs; the StateVector-returning overloads are conveniences.

/// Predator-prey: (p1 x1 - p2 x1 x2, -p3 x2 + p4 x1 x2).
void lotka_volterra_rhs(std::span<const double> x, std::span<const double> p,
                        std::span<double> dxdt);
StateVector lotka_volterra_rhs(std::span<const double> x,
                               std::span<const double> p);

/// First-order Van der Pol: (x2, mu (1 - x1^2) x2 - x1), mu = p1.
void van_der_pol_rhs(std::span<const double> x, std::span<const double> p,
                     std::span<double> dxdt);
StateVector van_der_pol_rhs(std::span<const double> x,
                            std::span<const double> p);

/// Rossler: (-x2 - x3, x1 + p1 x2, p2 + x3 (x1 - p3)).
void rossler_rhs(std::span<const double> x, std::span<const double> p,
                 std::span<double> dxdt);
StateVector rossler_rhs(std::span<const double> x, std::span<const double> p);

DynamicsModel lotka_volterra_model();
DynamicsModel van_der_pol_model();
DynamicsModel rossler_model();

/// A fully configured benchmark problem.
struct ProblemSpec {
    std::string name;
    DynamicsModel model;
    ParamVector true_params;
    StateVector x0;
    TimeGrid grid;
    std::vector<std::string> param_names;
};

/// The three registered problems, in the order lotka_volterra, van_der_pol,
/// rossler.
const std::vector<ProblemSpec>& builtin_problems();

std::vector<std::string> problem_names();

/// Looks up a problem by name; nullptr when unknown.
const ProblemSpec* find_problem(std::string_view name);

/// Like find_problem but throws std::invalid_argument listing the known names.
const ProblemSpec& get_problem(std::string_view name);

} // namespace odefit
