#include "odefit/models.hpp"

#include <stdexcept>

namespace odefit {

void lotka_volterra_rhs(std::span<const double> x, std::span<const double> p,
                        std::span<double> dxdt) {
    const double prey = x[0], predator = x[1];
    dxdt[0] = p[0] * prey - p[1] * prey * predator;
    dxdt[1] = -p[2] * predator + p[3] * prey * predator;
}

StateVector lotka_volterra_rhs(std::span<const double> x,
                               std::span<const double> p) {
    StateVector out(2);
    lotka_volterra_rhs(x, p, out);
    return out;
}

void van_der_pol_rhs(std::span<const double> x, std::span<const double> p,
                     std::span<double> dxdt) {
    const double mu = p[0];
    dxdt[0] = x[1];
    dxdt[1] = mu * (1.0 - x[0] * x[0]) * x[1] - x[0];
}

StateVector van_der_pol_rhs(std::span<const double> x,
                            std::span<const double> p) {
    StateVector out(2);
    van_der_pol_rhs(x, p, out);
    return out;
}

void rossler_rhs(std::span<const double> x, std::span<const double> p,
                 std::span<double> dxdt) {
    dxdt[0] = -x[1] - x[2];
    dxdt[1] = x[0] + p[0] * x[1];
    dxdt[2] = p[1] + x[2] * (x[0] - p[2]);
}

StateVector rossler_rhs(std::span<const double> x, std::span<const double> p) {
    StateVector out(3);
    rossler_rhs(x, p, out);
    return out;
}

namespace {

template <void (*Rhs)(std::span<const double>, std::span<const double>,
                      std::span<double>)>
VectorField autonomous() {
    return [](std::span<const double> x, double, std::span<const double> p,
              std::span<double> dxdt) { Rhs(x, p, dxdt); };
}

std::vector<ProblemSpec> make_problems() {
    std::vector<ProblemSpec> out;
    out.push_back({"lotka_volterra", lotka_volterra_model(),
                   {1.2, 0.3, 0.4, 0.9}, {2.0, 0.5},
                   TimeGrid::make(0.0, 20.0, 0.01),
                   {"p1", "p2", "p3", "p4"}});
    out.push_back({"van_der_pol", van_der_pol_model(), {1.5}, {2.0, 0.0},
                   TimeGrid::make(0.0, 20.0, 0.01), {"mu"}});
    out.push_back({"rossler", rossler_model(), {0.2, 0.2, 5.7},
                   {0.1, 0.1, 0.1}, TimeGrid::make(0.0, 120.0, 0.01),
                   {"p1", "p2", "p3"}});
    return out;
}

} // namespace

DynamicsModel lotka_volterra_model() {
    return {"lotka_volterra", 2, 4, autonomous<&lotka_volterra_rhs>()};
}

DynamicsModel van_der_pol_model() {
    return {"van_der_pol", 2, 1, autonomous<&van_der_pol_rhs>()};
}

DynamicsModel rossler_model() {
    return {"rossler", 3, 3, autonomous<&rossler_rhs>()};
}

const std::vector<ProblemSpec>& builtin_problems() {
    static const std::vector<ProblemSpec> problems = make_problems();
    return problems;
}

std::vector<std::string> problem_names() {
    std::vector<std::string> names;
    for (const auto& p : builtin_problems()) names.push_back(p.name);
    return names;
}

const ProblemSpec* find_problem(std::string_view name) {
    for (const auto& p : builtin_problems())
        if (p.name == name) return &p;
    return nullptr;
}

const ProblemSpec& get_problem(std::string_view name) {
    if (const auto* p = find_problem(name)) return *p;
    std::string known;
    for (const auto& n : problem_names()) known += (known.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown problem '" + std::string(name) +
                                "' (known: " + known + ")");
}

} // namespace odefit
