#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "odefit/estimation.hpp"

namespace odefit {

enum class Termination { converged, max_iterations, stalled };

std::string_view to_string(Termination t);

struct TraceRecord {
    std::size_t iteration = 0;
    double cost = 0.0;
    ParamVector params;

    bool operator==(const TraceRecord&) const = default;
};

/// Outcome of one optimizer run. `trace` holds the starting point followed
/// by every accepted iterate.
struct OptimizerResult {
    ParamVector best_params;
    double best_cost = 0.0;
    std::size_t iterations = 0;
    Termination termination = Termination::max_iterations;
    std::vector<TraceRecord> trace;
};

/// Writes `iteration,cost,p1,...,pn` rows (with header).
void write_trace_csv(std::ostream& os, const OptimizerResult& result);

class OptimizerError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct LineSearchConfig {
    double mu_max = 1.0;
    double tolerance = 1e-6;
    std::size_t max_evals = 64;
};

struct GradientDescentConfig {
    double epsilon = 1e-6;          // stop when ||p_k - p_{k-1}|| <= epsilon
    std::size_t max_iterations = 5000;
    LineSearchConfig line_search;
    double fd_rel_step = kDefaultFdRelStep;

    void validate() const;
};

struct LMConfig {
    double lambda0 = 1e-3;
    double lambda_factor = 10.0;
    double epsilon = 1e-10;         // stop when ||dp|| <= epsilon
    std::size_t max_iterations = 200;
    double lambda_max = 1e16;
    double fd_rel_step = kDefaultFdRelStep;

    void validate() const;
};

struct NelderMeadConfig {
    double alpha = 1.0;   // reflection
    double beta = 2.0;    // expansion
    double gamma = 0.5;   // contraction
    double shrink = 0.5;
    double initial_scale = 0.05;
    double zero_offset = 0.00025;
    double cost_tolerance = 1e-14;
    double simplex_tolerance = 1e-10;
    /// 0 selects 2000 * n.
    std::size_t max_iterations = 0;
    /// Compare the reflected cost against the second-best vertex instead of
    /// the second-worst when choosing the contraction branch.
    bool compare_second_best = false;
    /// Contract from the centroid toward the best vertex rather than toward
    /// the worst. Off by default: with one parameter the centroid is the
    /// best vertex, so this contraction collapses the simplex.
    bool contract_toward_best = false;
    /// Vertices at or above this cost count as divergent.
    double divergence_cost = kDefaultDivergencePenalty;

    void validate() const;
};

/// Golden-section search for mu in [0, mu_max] minimizing
/// cost(p - mu * grad). The returned mu never does worse than mu = 0.
double line_search_mu(const CostFunction& cost, std::span<const double> p,
                      std::span<const double> grad, const LineSearchConfig& cfg = {});

/// Steepest descent with exact line search along central-difference gradients.
OptimizerResult gradient_descent(const CostFunction& cost, std::span<const double> p0,
                                 const GradientDescentConfig& cfg = {});
OptimizerResult gradient_descent(const Objective& obj, std::span<const double> p0,
                                 const GradientDescentConfig& cfg = {});

/// Damped Gauss-Newton with multiplicative damping updates. Throws
/// OptimizerError if the residuals at p0 are not finite.
OptimizerResult levenberg_marquardt(const ResidualFunction& residuals,
                                    std::span<const double> p0,
                                    const LMConfig& cfg = {});
OptimizerResult levenberg_marquardt(const Objective& obj, std::span<const double> p0,
                                    const LMConfig& cfg = {});

/// Downhill simplex search seeded from axis-perturbed copies of p0.
OptimizerResult nelder_mead(const CostFunction& cost, std::span<const double> p0,
                            const NelderMeadConfig& cfg = {});
OptimizerResult nelder_mead(const Objective& obj, std::span<const double> p0,
                            const NelderMeadConfig& cfg = {});

} // namespace odefit
