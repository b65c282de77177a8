// odefit command-line tool: simulate, estimate, benchmark, noise-sweep,
// list-problems. Exit codes: 0 success, 2 usage or input error, 1 internal.

#include <cstdint>
#include <filesystem>
#include <future>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "odefit/experiments.hpp"
#include "odefit/io.hpp"
#include "odefit/models.hpp"
#include "odefit/report.hpp"

namespace fs = std::filesystem;
using namespace odefit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const ProblemSpec& require_problem(const std::string& name) {
    if (const auto* spec = find_problem(name)) return *spec;
    std::string known;
    for (const auto& n : problem_names()) known += " " + n;
    throw UsageError("unknown problem '" + name + "'; known problems:" + known);
}

OptimizerKind require_optimizer(const std::string& name) {
    if (auto kind = parse_optimizer(name)) return *kind;
    throw UsageError("unknown optimizer '" + name +
                     "' (expected gradient, lm, levenberg_marquardt or nelder_mead)");
}

void check_arity(const ProblemSpec& spec, const std::vector<double>& params) {
    if (params.size() != spec.model.param_count())
        throw UsageError("problem " + spec.name + " takes " +
                         std::to_string(spec.model.param_count()) + " parameters, got " +
                         std::to_string(params.size()));
}

void check_spread(double spread) {
    if (!(spread >= 0.0 && spread < 1.0))
        throw UsageError("--initial-spread must lie in [0, 1)");
}

void check_variance(double v, const char* flag) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw UsageError(std::string(flag) + " values must be finite and >= 0");
}

struct SimulateArgs {
    std::string problem;
    std::vector<double> params;
    double noise_variance = 0.0;
    std::uint64_t seed = 0;
    std::string out = ".";
};

int cmd_simulate(const SimulateArgs& args) {
    const ProblemSpec& spec = require_problem(args.problem);
    ParamVector params = spec.true_params;
    if (!args.params.empty()) {
        check_arity(spec, args.params);
        params = args.params;
    }
    check_variance(args.noise_variance, "--noise-variance");

    std::ostringstream os;
    if (args.noise_variance > 0.0) {
        ProblemSpec noisy = spec;
        noisy.true_params = params;
        write_dataset_csv(os, generate_dataset(noisy, args.noise_variance, args.seed));
    } else {
        write_trajectory_csv(os, integrate(spec.model, params, spec.x0, spec.grid));
    }
    const fs::path path = fs::path(args.out) / (spec.name + "_trajectory.csv");
    write_file_atomic(path, os.str());
    std::cout << path.string() << '\n';
    return kExitOk;
}

struct EstimateArgs {
    std::string problem;
    std::string data;
    std::string optimizer = "nelder_mead";
    std::uint64_t seed = 0;
    double initial_spread = 0.3;
    std::vector<double> params;
    std::string out = ".";
};

int cmd_estimate(const EstimateArgs& args) {
    const ProblemSpec& spec = require_problem(args.problem);
    const OptimizerKind kind = require_optimizer(args.optimizer);
    check_spread(args.initial_spread);

    ParamVector p0;
    if (!args.params.empty()) {
        check_arity(spec, args.params);
        p0 = args.params;
    } else {
        p0 = initial_guess(spec.true_params, args.initial_spread, args.seed);
    }

    Dataset data = load_dataset_csv(args.data, spec.model.state_dim());
    const Objective obj(spec.model, std::move(data), spec.x0, spec.grid);
    const Trajectory reference = integrate(spec.model, spec.true_params, spec.x0, spec.grid);
    const OptimizerOutcome outcome = run_optimizer(kind, obj, p0, reference);

    std::ostringstream trace;
    write_trace_csv(trace, outcome.result);
    const fs::path trace_path =
        fs::path(args.out) / (spec.name + "_" + std::string(to_string(kind)) + "_trace.csv");
    write_file_atomic(trace_path, trace.str());

    auto num = [](double v) {
        return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
    };
    nlohmann::ordered_json doc;
    doc["problem"] = spec.name;
    doc["optimizer"] = std::string(to_string(kind));
    doc["seed"] = args.seed;
    doc["p0"] = p0;
    doc["params"] = outcome.params;
    doc["param_names"] = spec.param_names;
    doc["cost"] = num(outcome.cost);
    doc["rmse"] = num(outcome.rmse);
    doc["iterations"] = outcome.iterations;
    doc["termination"] = std::string(to_string(outcome.termination));
    doc["trace"] = trace_path.string();
    if (!outcome.note.empty()) doc["note"] = outcome.note;
    std::cout << doc.dump(2) << '\n';
    return kExitOk;
}

struct BenchmarkArgs {
    std::string problem = "all";
    std::uint64_t seed = 0;
    double noise_variance = 0.1;
    double initial_spread = 0.3;
    std::string out = ".";
    std::size_t jobs = 1;
};

int cmd_benchmark(const BenchmarkArgs& args) {
    std::vector<std::string> problems;
    if (args.problem == "all") {
        problems = problem_names();
    } else {
        problems.push_back(require_problem(args.problem).name);
    }
    check_variance(args.noise_variance, "--noise-variance");
    check_spread(args.initial_spread);

    auto run_one = [&](const std::string& name) {
        ExperimentConfig cfg;
        cfg.problem = name;
        cfg.noise_variance = args.noise_variance;
        cfg.seed = args.seed;
        cfg.initial_guess_spread = args.initial_spread;
        return run_benchmark(cfg);
    };

    std::vector<BenchmarkReport> reports(problems.size());
    const std::size_t width = std::max<std::size_t>(args.jobs, 1);
    for (std::size_t base = 0; base < problems.size(); base += width) {
        const std::size_t end = std::min(problems.size(), base + width);
        std::vector<std::future<BenchmarkReport>> batch;
        for (std::size_t i = base; i < end; ++i)
            batch.push_back(std::async(width == 1 ? std::launch::deferred : std::launch::async,
                                       run_one, problems[i]));
        for (std::size_t i = base; i < end; ++i) reports[i] = batch[i - base].get();
    }

    for (const auto& report : reports) {
        const auto dir = fs::path(args.out) / report.problem;
        write_report_files(report, dir);
        std::cout << dir.string() << '\n';
    }
    return kExitOk;
}

struct SweepArgs {
    std::string problem = "rossler";
    std::vector<double> variances{std::begin(kDefaultSweepVariances),
                                  std::end(kDefaultSweepVariances)};
    std::vector<std::string> optimizers{"nelder_mead"};
    std::uint64_t seed = 0;
    double initial_spread = 0.3;
    std::string out = ".";
    std::size_t jobs = 1;
};

int cmd_noise_sweep(const SweepArgs& args) {
    const ProblemSpec& spec = require_problem(args.problem);
    if (args.variances.empty()) throw UsageError("--variances needs at least one value");
    for (double v : args.variances) check_variance(v, "--variances");
    check_spread(args.initial_spread);
    std::vector<OptimizerKind> kinds;
    for (const auto& name : args.optimizers) kinds.push_back(require_optimizer(name));

    const auto reports = noise_sweep(spec.name, args.variances, args.seed, kinds,
                                     args.initial_spread, args.jobs);

    nlohmann::ordered_json index = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const std::string level = "level_" + std::to_string(i) + "_var_" +
                                  format_double(reports[i].noise_variance);
        const auto dir = fs::path(args.out) / level;
        write_report_files(reports[i], dir);
        index.push_back({{"level", i},
                         {"noise_variance", reports[i].noise_variance},
                         {"seed", reports[i].seed},
                         {"dir", level}});
        std::cout << dir.string() << '\n';
    }
    write_file_atomic(fs::path(args.out) / "sweep.json", index.dump(2) + "\n");
    return kExitOk;
}

int cmd_list_problems() {
    for (const auto& spec : builtin_problems()) {
        std::cout << spec.name << "  state_dim=" << spec.model.state_dim() << "  params=";
        for (std::size_t k = 0; k < spec.true_params.size(); ++k)
            std::cout << (k ? "," : "") << spec.param_names[k] << '='
                      << format_double(spec.true_params[k]);
        std::cout << "  grid=[" << format_double(spec.grid.t_start) << ", "
                  << format_double(spec.grid.t_end) << "] dt=" << format_double(spec.grid.dt)
                  << '\n';
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parameter estimation for nonlinear ODE systems"};
    app.name("odefit");
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Write a trajectory CSV t,x1..xd");
    simulate->add_option("--problem", sim.problem, "Problem name")->required();
    simulate->add_option("--params", sim.params, "Parameter override, comma-separated")
        ->delimiter(',');
    simulate->add_option("--noise-variance", sim.noise_variance,
                         "Add Gaussian observation noise of this variance");
    simulate->add_option("--seed", sim.seed, "Noise seed");
    simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Fit one optimizer to a dataset CSV");
    estimate->add_option("--problem", est.problem, "Problem name")->required();
    estimate->add_option("--data", est.data, "Dataset CSV t,x1..xd")->required();
    estimate->add_option("--optimizer", est.optimizer,
                         "gradient | lm | levenberg_marquardt | nelder_mead")
        ->capture_default_str();
    estimate->add_option("--seed", est.seed, "Seed for the initial guess");
    estimate->add_option("--initial-spread", est.initial_spread,
                         "Relative spread of the initial guess around the true values")
        ->capture_default_str();
    estimate->add_option("--params", est.params, "Explicit initial guess, comma-separated")
        ->delimiter(',');
    estimate->add_option("--out", est.out, "Directory for the trace CSV")->capture_default_str();

    BenchmarkArgs bench;
    auto* benchmark = app.add_subcommand("benchmark", "Run all three optimizers on a problem");
    benchmark->add_option("--problem", bench.problem, "Problem name or 'all'")
        ->capture_default_str();
    benchmark->add_option("--seed", bench.seed, "Experiment seed")->capture_default_str();
    benchmark->add_option("--noise-variance", bench.noise_variance, "Observation noise variance")
        ->capture_default_str();
    benchmark->add_option("--initial-spread", bench.initial_spread,
                          "Relative spread of the initial guess")
        ->capture_default_str();
    benchmark->add_option("--out", bench.out, "Output directory")->capture_default_str();
    benchmark->add_option("--jobs", bench.jobs, "Problems run in parallel")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    SweepArgs sweep;
    auto* noise = app.add_subcommand("noise-sweep", "Repeat a benchmark over noise levels");
    noise->add_option("--problem", sweep.problem, "Problem name")->capture_default_str();
    noise->add_option("--variances", sweep.variances, "Noise variances, comma-separated")
        ->delimiter(',')
        ->capture_default_str();
    noise->add_option("--optimizer", sweep.optimizers, "Optimizers to run (repeatable)")
        ->capture_default_str();
    noise->add_option("--seed", sweep.seed, "Base seed; level i uses seed + i")
        ->capture_default_str();
    noise->add_option("--initial-spread", sweep.initial_spread,
                      "Relative spread of the initial guess")
        ->capture_default_str();
    noise->add_option("--out", sweep.out, "Output directory")->capture_default_str();
    noise->add_option("--jobs", sweep.jobs, "Levels run in parallel")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand("list-problems", "List the built-in problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*simulate) return cmd_simulate(sim);
        if (*estimate) return cmd_estimate(est);
        if (*benchmark) return cmd_benchmark(bench);
        if (*noise) return cmd_noise_sweep(sweep);
        if (*list) return cmd_list_problems();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const CsvError& e) {
        std::cerr << "error: " << est.data << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitUsage;
}
