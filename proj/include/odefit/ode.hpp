#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace odefit {

using StateVector = std::vector<double>;
using ParamVector = std::vector<double>;

/// Any state component above this magnitude aborts integration.
inline constexpr double kDivergenceBound = 1e12;

/// Right-hand side F(x, t, p), written into `dxdt` (length state_dim).
using VectorField = std::function<void(std::span<const double> x, double t,
                                       std::span<const double> p,
                                       std::span<double> dxdt)>;

/// A parameterized autonomous or non-autonomous vector field with fixed
/// state and parameter dimensions. Evaluation must be pure.
class DynamicsModel {
public:
    DynamicsModel(std::string name, std::size_t state_dim,
                  std::size_t param_count, VectorField field);

    const std::string& name() const noexcept { return name_; }
    std::size_t state_dim() const noexcept { return state_dim_; }
    std::size_t param_count() const noexcept { return param_count_; }

    StateVector eval(std::span<const double> x, double t,
                     std::span<const double> p) const;

    // Unchecked hot path used by the integrator.
    void eval_into(std::span<const double> x, double t,
                   std::span<const double> p, std::span<double> dxdt) const {
        field_(x, t, p, dxdt);
    }

private:
    std::string name_;
    std::size_t state_dim_;
    std::size_t param_count_;
    VectorField field_;
};

/// Uniform grid t_start + k*dt, k = 0..steps().
struct TimeGrid {
    double t_start = 0.0;
    double t_end = 0.0;
    double dt = 0.0;

    /// Throws std::invalid_argument unless t_end > t_start and dt > 0.
    static TimeGrid make(double t_start, double t_end, double dt);

    void validate() const;
    std::size_t steps() const;
    std::size_t size() const { return steps() + 1; }
    double time(std::size_t k) const {
        return t_start + static_cast<double>(k) * dt;
    }
    /// Index of the grid point within `tol` of t, or npos.
    std::size_t index_of(double t, double tol = 1e-9) const;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Row-major (time-major) sequence of states on strictly increasing times.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<double> times, std::vector<double> states,
               std::size_t state_dim);

    std::size_t num_points() const noexcept { return times_.size(); }
    std::size_t state_dim() const noexcept { return state_dim_; }
    const std::vector<double>& times() const noexcept { return times_; }
    const std::vector<double>& states() const noexcept { return states_; }

    std::span<const double> row(std::size_t k) const {
        return {states_.data() + k * state_dim_, state_dim_};
    }
    double at(std::size_t k, std::size_t i) const {
        return states_[k * state_dim_ + i];
    }

    bool operator==(const Trajectory&) const = default;

private:
    std::vector<double> times_;
    std::vector<double> states_;
    std::size_t state_dim_ = 0;
};

class IntegrationDiverged : public std::runtime_error {
public:
    IntegrationDiverged(std::size_t step_index, StateVector state);

    std::size_t step_index() const noexcept { return step_index_; }
    const StateVector& state() const noexcept { return state_; }

private:
    std::size_t step_index_;
    StateVector state_;
};

/// Reusable RK4 stepper with its own scratch buffers. Not thread-safe;
/// use one per thread.
class Rk4Stepper {
public:
    explicit Rk4Stepper(const DynamicsModel& model);

    /// Writes x advanced by dt into `out` (may not alias x).
    void step(std::span<const double> x, double t, double dt, std::span<const double> p,
              std::span<double> out);

private:
    const DynamicsModel& model_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// Integrates on grid points 0..last_index without storing the trajectory,
/// calling visit(k, state) for every point including k = 0. Throws
/// IntegrationDiverged like integrate().
template <typename Visitor>
void integrate_visit(const DynamicsModel& model, std::span<const double> p,
                     std::span<const double> x0, const TimeGrid& grid, std::size_t last_index,
                     Visitor&& visit);

/// One classical fourth-order Runge-Kutta step. Throws IntegrationDiverged
/// (step index 0) if the result is non-finite or exceeds kDivergenceBound.
StateVector rk4_step(const DynamicsModel& model, std::span<const double> x,
                     double t, double dt, std::span<const double> p);

/// Fixed-step RK4 over the whole grid; row 0 is x0.
Trajectory integrate(const DynamicsModel& model, std::span<const double> p,
                     std::span<const double> x0, const TimeGrid& grid);

namespace detail {
bool within_divergence_bound(std::span<const double> v);
void check_integration_inputs(const DynamicsModel& model, std::span<const double> p,
                              std::span<const double> x0);
} // namespace detail

template <typename Visitor>
void integrate_visit(const DynamicsModel& model, std::span<const double> p,
                     std::span<const double> x0, const TimeGrid& grid, std::size_t last_index,
                     Visitor&& visit) {
    detail::check_integration_inputs(model, p, x0);
    if (last_index > grid.steps()) throw std::invalid_argument("last_index beyond grid");
    const std::size_t n = model.state_dim();
    std::vector<double> cur(x0.begin(), x0.end()), next(n);
    Rk4Stepper stepper(model);
    visit(std::size_t{0}, std::span<const double>(cur));
    for (std::size_t k = 0; k < last_index; ++k) {
        stepper.step(cur, grid.time(k), grid.dt, p, next);
        if (!detail::within_divergence_bound(next))
            throw IntegrationDiverged(k + 1, next);
        cur.swap(next);
        visit(k + 1, std::span<const double>(cur));
    }
}

} // namespace odefit
