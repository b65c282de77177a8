#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "odefit/estimation.hpp"
#include "odefit/models.hpp"
#include "odefit/optimizers.hpp"

namespace odefit {

/// Seeded source of uniform and Gaussian draws. Uniforms take the top 53
/// bits of std::mt19937_64; Gaussians use the Marsaglia polar method. Both
/// are fully specified, so streams match across standard libraries.
class NoiseRng {
public:
    static constexpr std::string_view kAlgorithm = "mt19937_64+marsaglia_polar";

    explicit NoiseRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform();
    /// Uniform on [lo, hi].
    double uniform(double lo, double hi);
    double gaussian(double mean, double stddev);

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

enum class OptimizerKind { gradient, lm, nelder_mead };

/// Canonical report order: gradient, lm, nelder_mead.
inline constexpr OptimizerKind kAllOptimizers[] = {
    OptimizerKind::gradient, OptimizerKind::lm, OptimizerKind::nelder_mead};

std::string_view to_string(OptimizerKind kind);
/// Display label used in tables.
std::string_view display_name(OptimizerKind kind);
/// Accepts gradient, lm, levenberg_marquardt, nelder_mead.
std::optional<OptimizerKind> parse_optimizer(std::string_view name);

struct OptimizerSettings {
    GradientDescentConfig gradient;
    LMConfig lm;
    NelderMeadConfig nelder_mead;
};

struct ExperimentConfig {
    std::string problem;
    double noise_variance = 0.1;
    std::uint64_t seed = 0;
    std::vector<OptimizerKind> optimizers{std::begin(kAllOptimizers),
                                          std::end(kAllOptimizers)};
    double initial_guess_spread = 0.3;
    /// Overrides the drawn initial guess when set.
    std::optional<ParamVector> p0;
    OptimizerSettings settings;

    void validate() const;
};

struct OptimizerOutcome {
    OptimizerKind kind = OptimizerKind::nelder_mead;
    ParamVector params;
    double cost = 0.0;
    /// Infinity when the estimate cannot be re-simulated.
    double rmse = 0.0;
    std::size_t iterations = 0;
    Termination termination = Termination::max_iterations;
    double wall_ms = 0.0;
    std::string note;
    OptimizerResult result;
    std::optional<Trajectory> trajectory;
};

struct BenchmarkReport {
    std::string problem;
    std::uint64_t seed = 0;
    double noise_variance = 0.0;
    double initial_guess_spread = 0.0;
    std::string rng = std::string(NoiseRng::kAlgorithm);
    ParamVector true_params;
    std::vector<std::string> param_names;
    ParamVector p0;
    /// Noiseless trajectory at the true parameters.
    Trajectory reference;
    std::vector<OptimizerOutcome> outcomes;

    const OptimizerOutcome* find(OptimizerKind kind) const;
};

/// Simulates the true system and adds i.i.d. N(0, noise_variance) noise to
/// every state component at every grid point. Weights are 1.
Dataset generate_dataset(const ProblemSpec& spec, double noise_variance, std::uint64_t seed);

/// true_p scaled element-wise by (1 + u_k), u_k ~ U[-spread, spread].
ParamVector initial_guess(std::span<const double> true_p, double spread, std::uint64_t seed);

/// Runs one optimizer on an objective and scores it against `reference`.
OptimizerOutcome run_optimizer(OptimizerKind kind, const Objective& obj,
                               std::span<const double> p0, const Trajectory& reference,
                               const OptimizerSettings& settings = {});

BenchmarkReport run_benchmark(const ExperimentConfig& cfg);

/// One benchmark per noise level; level i uses seed + i.
std::vector<BenchmarkReport> noise_sweep(
    std::string_view problem, std::span<const double> variances, std::uint64_t seed,
    std::vector<OptimizerKind> optimizers = {OptimizerKind::nelder_mead},
    double initial_guess_spread = 0.3, std::size_t jobs = 1);

/// The default Fig. 7 style levels.
inline constexpr double kDefaultSweepVariances[] = {0.01, 0.1, 1.0, 10.0};

} // namespace odefit
