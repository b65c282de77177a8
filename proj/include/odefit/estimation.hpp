#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "odefit/ode.hpp"

namespace odefit {

/// Cost returned for parameters whose simulation diverges.
inline constexpr double kDefaultDivergencePenalty = 1e30;
inline constexpr double kDefaultFdRelStep = 1e-6;

/// Scalar objective oracle J(p).
using CostFunction = std::function<double(std::span<const double>)>;
/// Residual oracle e(p); nullopt means the simulation diverged.
using ResidualFunction =
    std::function<std::optional<std::vector<double>>(std::span<const double>)>;

/// Observations eta_ij with per-entry standard deviations sigma_ij, both
/// stored time-major (num_times x state_dim).
struct Dataset {
    std::vector<double> times;
    std::vector<double> observations;
    std::vector<double> weights;
    std::size_t state_dim = 0;

    std::size_t num_times() const noexcept { return times.size(); }
    double observation(std::size_t j, std::size_t i) const {
        return observations[j * state_dim + i];
    }
    double weight(std::size_t j, std::size_t i) const {
        return weights[j * state_dim + i];
    }

    /// Unit weights for the given observations.
    static Dataset with_unit_weights(std::vector<double> times,
                                     std::vector<double> observations,
                                     std::size_t state_dim);

    /// Throws std::invalid_argument on shape mismatch, non-increasing
    /// times, non-finite entries or non-positive weights.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

/// Weighted least-squares misfit between a dataset and single-shot
/// simulations of `model` from `x0` on `grid`. Observation is full-state.
class Objective {
public:
    Objective(DynamicsModel model, Dataset dataset, StateVector x0,
              TimeGrid grid, double divergence_penalty = kDefaultDivergencePenalty);

    const DynamicsModel& model() const noexcept { return model_; }
    const Dataset& dataset() const noexcept { return dataset_; }
    const StateVector& x0() const noexcept { return x0_; }
    const TimeGrid& grid() const noexcept { return grid_; }
    double divergence_penalty() const noexcept { return penalty_; }

    std::size_t param_count() const noexcept { return model_.param_count(); }
    std::size_t num_residuals() const noexcept {
        return dataset_.num_times() * dataset_.state_dim;
    }

    /// (eta_ij - x_i(t_j)) / sigma_ij, time-major. nullopt on divergence.
    std::optional<std::vector<double>> residuals(std::span<const double> p) const;

    /// Sum of squared weighted residuals, or the divergence penalty.
    double cost(std::span<const double> p) const;

    // Oracle adapters; they capture `this`, so the objective must outlive them.
    CostFunction cost_function() const;
    ResidualFunction residual_function() const;

private:
    void check_params(std::span<const double> p) const;

    DynamicsModel model_;
    Dataset dataset_;
    StateVector x0_;
    TimeGrid grid_;
    double penalty_;
    std::vector<std::size_t> grid_index_;
};

/// Central-difference gradient with h_k = rel_step * max(|p_k|, 1).
std::vector<double> fd_gradient(const CostFunction& cost, std::span<const double> p,
                                double rel_step = kDefaultFdRelStep);
std::vector<double> fd_gradient(const Objective& obj, std::span<const double> p,
                                double rel_step = kDefaultFdRelStep);

/// Central-difference Jacobian of the residual vector (rows = residuals).
/// nullopt if any perturbed evaluation diverged.
std::optional<Eigen::MatrixXd> fd_jacobian(const ResidualFunction& residuals,
                                           std::span<const double> p,
                                           double rel_step = kDefaultFdRelStep);
std::optional<Eigen::MatrixXd> fd_jacobian(const Objective& obj,
                                           std::span<const double> p,
                                           double rel_step = kDefaultFdRelStep);

/// Root-mean-square entrywise difference over all points and components.
/// Throws std::invalid_argument if the trajectories do not share a shape
/// and time axis.
double rmse(const Trajectory& reference, const Trajectory& estimate);

} // namespace odefit
