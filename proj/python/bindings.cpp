#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "odefit/estimation.hpp"
#include "odefit/experiments.hpp"
#include "odefit/io.hpp"
#include "odefit/models.hpp"
#include "odefit/optimizers.hpp"
#include "odefit/report.hpp"

namespace py = pybind11;
using namespace odefit;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
    return {a.data(), a.data() + a.size()};
}

// Both copy: without a base handle pybind11 allocates fresh storage.
Array to_matrix(const std::vector<double>& flat, std::size_t cols) {
    const auto rows = static_cast<py::ssize_t>(flat.size() / cols);
    return Array(std::vector<py::ssize_t>{rows, static_cast<py::ssize_t>(cols)}, flat.data());
}

Array to_array(const std::vector<double>& v) {
    return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())}, v.data());
}

py::dict result_dict(const OptimizerResult& r) {
    py::list trace;
    for (const auto& rec : r.trace)
        trace.append(py::make_tuple(rec.iteration, rec.cost, to_array(rec.params)));
    py::dict d;
    d["params"] = to_array(r.best_params);
    d["cost"] = r.best_cost;
    d["iterations"] = r.iterations;
    d["termination"] = std::string(to_string(r.termination));
    d["trace"] = trace;
    return d;
}

OptimizerKind require_optimizer(const std::string& name) {
    const auto kind = parse_optimizer(name);
    if (!kind) throw std::invalid_argument("unknown optimizer '" + name + "'");
    return *kind;
}

// Python callables may raise; the C++ optimizers only see doubles.
CostFunction wrap_cost(const std::function<double(Array)>& f) {
    return [f](std::span<const double> p) {
        return f(to_array(std::vector<double>(p.begin(), p.end())));
    };
}

ResidualFunction wrap_residuals(const std::function<std::optional<Array>(Array)>& f) {
    return [f](std::span<const double> p) -> std::optional<std::vector<double>> {
        auto r = f(to_array(std::vector<double>(p.begin(), p.end())));
        if (!r) return std::nullopt;
        return to_vector(*r);
    };
}

py::tuple simulate(const std::string& problem, std::optional<Array> params,
                   std::optional<Array> x0) {
    const auto& spec = get_problem(problem);
    const auto p = params ? to_vector(*params) : spec.true_params;
    const auto x = x0 ? to_vector(*x0) : spec.x0;
    const auto traj = integrate(spec.model, p, x, spec.grid);
    return py::make_tuple(to_array(traj.times()), to_matrix(traj.states(), traj.state_dim()));
}

py::tuple make_dataset(const std::string& problem, double noise_variance, std::uint64_t seed) {
    const auto& spec = get_problem(problem);
    const auto d = generate_dataset(spec, noise_variance, seed);
    return py::make_tuple(to_array(d.times), to_matrix(d.observations, d.state_dim));
}

Objective make_objective(const ProblemSpec& spec, const Array& times, const Array& obs) {
    if (obs.ndim() != 2) throw std::invalid_argument("observations must be a 2-D array");
    const auto cols = static_cast<std::size_t>(obs.shape(1));
    auto data = Dataset::with_unit_weights(to_vector(times), to_vector(obs), cols);
    return Objective(spec.model, std::move(data), spec.x0, spec.grid);
}

py::dict estimate(const std::string& problem, const Array& times, const Array& obs,
                  const std::string& optimizer, std::optional<Array> p0, std::uint64_t seed,
                  double initial_spread) {
    const auto& spec = get_problem(problem);
    const auto obj = make_objective(spec, times, obs);
    const auto start =
        p0 ? to_vector(*p0) : initial_guess(spec.true_params, initial_spread, seed);
    const auto reference = integrate(spec.model, spec.true_params, spec.x0, spec.grid);
    OptimizerOutcome o;
    {
        py::gil_scoped_release release;
        o = run_optimizer(require_optimizer(optimizer), obj, start, reference);
    }
    auto d = result_dict(o.result);
    d["params"] = to_array(o.params);
    d["rmse"] = o.rmse;
    d["p0"] = to_array(start);
    d["optimizer"] = std::string(to_string(o.kind));
    if (!o.note.empty()) d["note"] = o.note;
    return d;
}

std::string benchmark_json(const std::string& problem, double noise_variance, std::uint64_t seed,
                           std::optional<std::vector<std::string>> optimizers,
                           double initial_spread) {
    ExperimentConfig cfg;
    cfg.problem = problem;
    cfg.noise_variance = noise_variance;
    cfg.seed = seed;
    cfg.initial_guess_spread = initial_spread;
    if (optimizers) {
        cfg.optimizers.clear();
        for (const auto& name : *optimizers) cfg.optimizers.push_back(require_optimizer(name));
    }
    cfg.validate();
    py::gil_scoped_release release;
    return report_to_json(run_benchmark(cfg));
}

} // namespace

PYBIND11_MODULE(_odefit, m) {
    m.doc() = "Parameter estimation for nonlinear ODE systems";

    py::register_exception<IntegrationDiverged>(m, "IntegrationDiverged", PyExc_RuntimeError);
    py::register_exception<OptimizerError>(m, "OptimizerError", PyExc_RuntimeError);
    py::register_exception<CsvError>(m, "CsvError", PyExc_ValueError);

    m.def("problem_names", &problem_names);
    m.def(
        "problem_info",
        [](const std::string& name) {
            const auto& spec = get_problem(name);
            py::dict d;
            d["name"] = spec.name;
            d["state_dim"] = spec.model.state_dim();
            d["true_params"] = to_array(spec.true_params);
            d["param_names"] = spec.param_names;
            d["x0"] = to_array(spec.x0);
            d["t_start"] = spec.grid.t_start;
            d["t_end"] = spec.grid.t_end;
            d["dt"] = spec.grid.dt;
            return d;
        },
        py::arg("name"));

    m.def("simulate", &simulate, py::arg("problem"), py::arg("params") = py::none(),
          py::arg("x0") = py::none(),
          "Integrate a built-in problem on its grid; returns (times, states).");
    m.def("generate_dataset", &make_dataset, py::arg("problem"), py::arg("noise_variance"),
          py::arg("seed"), "Noisy observations of a built-in problem; returns (times, obs).");
    m.def(
        "cost",
        [](const std::string& problem, const Array& times, const Array& obs, const Array& p) {
            return make_objective(get_problem(problem), times, obs).cost(to_vector(p));
        },
        py::arg("problem"), py::arg("times"), py::arg("observations"), py::arg("params"));
    m.def("estimate", &estimate, py::arg("problem"), py::arg("times"), py::arg("observations"),
          py::arg("optimizer") = "nelder_mead", py::arg("p0") = py::none(), py::arg("seed") = 0,
          py::arg("initial_spread") = 0.3);
    m.def("benchmark_json", &benchmark_json, py::arg("problem"), py::arg("noise_variance") = 0.1,
          py::arg("seed") = 0, py::arg("optimizers") = py::none(),
          py::arg("initial_spread") = 0.3);
    m.def(
        "rmse",
        [](const Array& a, const Array& b) {
            if (a.ndim() != 2 || b.ndim() != 2) throw std::invalid_argument("expected 2-D arrays");
            const auto rows = static_cast<std::size_t>(a.shape(0));
            std::vector<double> t(rows);
            for (std::size_t k = 0; k < rows; ++k) t[k] = static_cast<double>(k);
            const auto cols = static_cast<std::size_t>(a.shape(1));
            if (b.shape(0) != a.shape(0) || b.shape(1) != a.shape(1))
                throw std::invalid_argument("rmse: trajectory shapes differ");
            return rmse(Trajectory(t, to_vector(a), cols), Trajectory(t, to_vector(b), cols));
        },
        py::arg("reference"), py::arg("estimate"));

    // Generic optimizers over Python callables.
    m.def(
        "fd_gradient",
        [](const std::function<double(Array)>& f, const Array& p, double rel_step) {
            return to_array(fd_gradient(wrap_cost(f), to_vector(p), rel_step));
        },
        py::arg("cost"), py::arg("p"), py::arg("rel_step") = kDefaultFdRelStep);
    m.def(
        "nelder_mead",
        [](const std::function<double(Array)>& f, const Array& p0) {
            return result_dict(nelder_mead(wrap_cost(f), to_vector(p0)));
        },
        py::arg("cost"), py::arg("p0"));
    m.def(
        "gradient_descent",
        [](const std::function<double(Array)>& f, const Array& p0, std::size_t max_iterations) {
            GradientDescentConfig cfg;
            cfg.max_iterations = max_iterations;
            return result_dict(gradient_descent(wrap_cost(f), to_vector(p0), cfg));
        },
        py::arg("cost"), py::arg("p0"), py::arg("max_iterations") = 5000);
    m.def(
        "levenberg_marquardt",
        [](const std::function<std::optional<Array>(Array)>& f, const Array& p0) {
            return result_dict(levenberg_marquardt(wrap_residuals(f), to_vector(p0)));
        },
        py::arg("residuals"), py::arg("p0"));
}
