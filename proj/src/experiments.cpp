#include "odefit/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>

namespace odefit {

double NoiseRng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NoiseRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double NoiseRng::gaussian(double mean, double stddev) {
    if (spare_) {
        const double z = *spare_;
        spare_.reset();
        return mean + stddev * z;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    return mean + stddev * u * factor;
}

std::string_view to_string(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::gradient: return "gradient";
    case OptimizerKind::lm: return "lm";
    case OptimizerKind::nelder_mead: return "nelder_mead";
    }
    return "unknown";
}

std::string_view display_name(OptimizerKind kind) {
    switch (kind) {
    case OptimizerKind::gradient: return "Gradient-based";
    case OptimizerKind::lm: return "Levenberg-Marquardt";
    case OptimizerKind::nelder_mead: return "Nelder-Mead";
    }
    return "unknown";
}

std::optional<OptimizerKind> parse_optimizer(std::string_view name) {
    if (name == "gradient") return OptimizerKind::gradient;
    if (name == "lm" || name == "levenberg_marquardt") return OptimizerKind::lm;
    if (name == "nelder_mead") return OptimizerKind::nelder_mead;
    return std::nullopt;
}

void ExperimentConfig::validate() const {
    const ProblemSpec& spec = get_problem(problem);
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
        throw std::invalid_argument("noise variance must be a finite value >= 0");
    if (optimizers.empty()) throw std::invalid_argument("no optimizers selected");
    if (!(initial_guess_spread >= 0.0 && initial_guess_spread < 1.0))
        throw std::invalid_argument("initial guess spread must lie in [0, 1)");
    if (p0 && p0->size() != spec.model.param_count())
        throw std::invalid_argument("p0 length does not match problem " + problem);
}

const OptimizerOutcome* BenchmarkReport::find(OptimizerKind kind) const {
    for (const auto& o : outcomes)
        if (o.kind == kind) return &o;
    return nullptr;
}

Dataset generate_dataset(const ProblemSpec& spec, double noise_variance, std::uint64_t seed) {
    if (!(noise_variance >= 0.0)) throw std::invalid_argument("noise variance must be >= 0");
    const Trajectory truth = integrate(spec.model, spec.true_params, spec.x0, spec.grid);
    std::vector<double> obs = truth.states();
    if (noise_variance > 0.0) {
        NoiseRng rng(seed);
        const double stddev = std::sqrt(noise_variance);
        for (double& v : obs) v += rng.gaussian(0.0, stddev);
    }
    return Dataset::with_unit_weights(truth.times(), std::move(obs), truth.state_dim());
}

ParamVector initial_guess(std::span<const double> true_p, double spread, std::uint64_t seed) {
    if (!(spread >= 0.0 && spread < 1.0))
        throw std::invalid_argument("spread must lie in [0, 1)");
    ParamVector out(true_p.begin(), true_p.end());
    if (spread == 0.0) return out;
    NoiseRng rng(seed);
    for (double& v : out) v *= 1.0 + rng.uniform(-spread, spread);
    return out;
}

OptimizerOutcome run_optimizer(OptimizerKind kind, const Objective& obj,
                               std::span<const double> p0, const Trajectory& reference,
                               const OptimizerSettings& settings) {
    OptimizerOutcome out;
    out.kind = kind;

    const auto start = std::chrono::steady_clock::now();
    try {
        switch (kind) {
        case OptimizerKind::gradient:
            out.result = gradient_descent(obj, p0, settings.gradient);
            break;
        case OptimizerKind::lm:
            out.result = levenberg_marquardt(obj, p0, settings.lm);
            break;
        case OptimizerKind::nelder_mead:
            out.result = nelder_mead(obj, p0, settings.nelder_mead);
            break;
        }
    } catch (const OptimizerError& e) {
        out.result.best_params.assign(p0.begin(), p0.end());
        out.result.best_cost = obj.cost(p0);
        out.result.termination = Termination::stalled;
        out.note = e.what();
    }
    out.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - start)
                      .count();

    out.params = out.result.best_params;
    out.cost = out.result.best_cost;
    out.iterations = out.result.iterations;
    out.termination = out.result.termination;

    TimeGrid grid = obj.grid();
    try {
        out.trajectory = integrate(obj.model(), out.params, obj.x0(), grid);
        out.rmse = rmse(reference, *out.trajectory);
    } catch (const IntegrationDiverged& e) {
        out.rmse = std::numeric_limits<double>::infinity();
        if (out.note.empty()) out.note = e.what();
    }
    return out;
}

BenchmarkReport run_benchmark(const ExperimentConfig& cfg) {
    cfg.validate();
    const ProblemSpec& spec = get_problem(cfg.problem);

    BenchmarkReport report;
    report.problem = spec.name;
    report.seed = cfg.seed;
    report.noise_variance = cfg.noise_variance;
    report.initial_guess_spread = cfg.initial_guess_spread;
    report.true_params = spec.true_params;
    report.param_names = spec.param_names;
    report.p0 = cfg.p0 ? *cfg.p0
                       : initial_guess(spec.true_params, cfg.initial_guess_spread, cfg.seed);
    report.reference = integrate(spec.model, spec.true_params, spec.x0, spec.grid);

    const Objective obj(spec.model, generate_dataset(spec, cfg.noise_variance, cfg.seed),
                        spec.x0, spec.grid);

    for (OptimizerKind kind : kAllOptimizers) {
        if (std::find(cfg.optimizers.begin(), cfg.optimizers.end(), kind) == cfg.optimizers.end())
            continue;
        report.outcomes.push_back(
            run_optimizer(kind, obj, report.p0, report.reference, cfg.settings));
    }
    return report;
}

std::vector<BenchmarkReport> noise_sweep(std::string_view problem,
                                         std::span<const double> variances, std::uint64_t seed,
                                         std::vector<OptimizerKind> optimizers,
                                         double initial_guess_spread, std::size_t jobs) {
    if (variances.empty()) throw std::invalid_argument("noise sweep needs at least one variance");
    for (double v : variances)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("noise variances must be finite values >= 0");

    std::vector<ExperimentConfig> configs;
    for (std::size_t i = 0; i < variances.size(); ++i) {
        ExperimentConfig cfg;
        cfg.problem = std::string(problem);
        cfg.noise_variance = variances[i];
        cfg.seed = seed + i;
        cfg.optimizers = optimizers;
        cfg.initial_guess_spread = initial_guess_spread;
        cfg.validate();
        configs.push_back(std::move(cfg));
    }

    std::vector<BenchmarkReport> reports(configs.size());
    const std::size_t width = std::max<std::size_t>(jobs, 1);
    for (std::size_t base = 0; base < configs.size(); base += width) {
        std::vector<std::future<BenchmarkReport>> batch;
        const std::size_t end = std::min(configs.size(), base + width);
        if (width == 1) {
            reports[base] = run_benchmark(configs[base]);
            continue;
        }
        for (std::size_t i = base; i < end; ++i)
            batch.push_back(std::async(std::launch::async,
                                       [&cfg = configs[i]] { return run_benchmark(cfg); }));
        for (std::size_t i = base; i < end; ++i) reports[i] = batch[i - base].get();
    }
    return reports;
}

} // namespace odefit
