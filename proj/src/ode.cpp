#include "odefit/ode.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace odefit {

namespace {

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

std::string describe_divergence(std::size_t step, const StateVector& state) {
    std::ostringstream os;
    os << "integration diverged at step " << step << ", state (";
    for (std::size_t i = 0; i < state.size(); ++i)
        os << (i ? ", " : "") << state[i];
    os << ')';
    return os.str();
}

void check_lengths(const DynamicsModel& model, std::span<const double> x,
                   std::span<const double> p) {
    if (x.size() != model.state_dim())
        throw std::invalid_argument("state length does not match model " +
                                    model.name());
    if (p.size() != model.param_count())
        throw std::invalid_argument("parameter length does not match model " +
                                    model.name());
}

} // namespace

namespace detail {

bool within_divergence_bound(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x) || std::abs(x) > kDivergenceBound) return false;
    return true;
}

void check_integration_inputs(const DynamicsModel& model, std::span<const double> p,
                              std::span<const double> x0) {
    check_lengths(model, x0, p);
    if (!all_finite(x0) || !all_finite(p))
        throw std::invalid_argument("initial state and parameters must be finite");
}

} // namespace detail

Rk4Stepper::Rk4Stepper(const DynamicsModel& model)
    : model_(model), k1_(model.state_dim()), k2_(model.state_dim()), k3_(model.state_dim()),
      k4_(model.state_dim()), tmp_(model.state_dim()) {}

void Rk4Stepper::step(std::span<const double> x, double t, double dt, std::span<const double> p,
                      std::span<double> out) {
    const std::size_t n = x.size();
    const double half = 0.5 * dt;

    model_.eval_into(x, t, p, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
    model_.eval_into(tmp_, t + half, p, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
    model_.eval_into(tmp_, t + half, p, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];
    model_.eval_into(tmp_, t + dt, p, k4_);

    const double sixth = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i)
        out[i] = x[i] + sixth * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
}

DynamicsModel::DynamicsModel(std::string name, std::size_t state_dim,
                             std::size_t param_count, VectorField field)
    : name_(std::move(name)), state_dim_(state_dim), param_count_(param_count),
      field_(std::move(field)) {
    if (state_dim_ == 0 || param_count_ == 0)
        throw std::invalid_argument("model dimensions must be positive");
    if (!field_) throw std::invalid_argument("model has no vector field");
}

StateVector DynamicsModel::eval(std::span<const double> x, double t,
                                std::span<const double> p) const {
    check_lengths(*this, x, p);
    StateVector out(state_dim_);
    field_(x, t, p, out);
    return out;
}

TimeGrid TimeGrid::make(double t_start, double t_end, double dt) {
    TimeGrid g{t_start, t_end, dt};
    g.validate();
    return g;
}

void TimeGrid::validate() const {
    if (!std::isfinite(t_start) || !std::isfinite(t_end) || !std::isfinite(dt))
        throw std::invalid_argument("time grid bounds must be finite");
    if (!(t_end > t_start)) throw std::invalid_argument("t_end must exceed t_start");
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
}

std::size_t TimeGrid::steps() const {
    return static_cast<std::size_t>(std::llround((t_end - t_start) / dt));
}

std::size_t TimeGrid::index_of(double t, double tol) const {
    const double k = std::round((t - t_start) / dt);
    if (k < 0.0 || k > static_cast<double>(steps())) return npos;
    const auto idx = static_cast<std::size_t>(k);
    return std::abs(time(idx) - t) <= tol ? idx : npos;
}

Trajectory::Trajectory(std::vector<double> times, std::vector<double> states,
                       std::size_t state_dim)
    : times_(std::move(times)), states_(std::move(states)),
      state_dim_(state_dim) {
    if (state_dim_ == 0) throw std::invalid_argument("state_dim must be positive");
    if (states_.size() != times_.size() * state_dim_)
        throw std::invalid_argument("state matrix does not match time count");
    for (std::size_t k = 1; k < times_.size(); ++k)
        if (!(times_[k] > times_[k - 1]))
            throw std::invalid_argument("trajectory times must be strictly increasing");
}

IntegrationDiverged::IntegrationDiverged(std::size_t step_index, StateVector state)
    : std::runtime_error(describe_divergence(step_index, state)),
      step_index_(step_index), state_(std::move(state)) {}

StateVector rk4_step(const DynamicsModel& model, std::span<const double> x,
                     double t, double dt, std::span<const double> p) {
    check_lengths(model, x, p);
    if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
    StateVector out(x.size());
    Rk4Stepper(model).step(x, t, dt, p, out);
    if (!all_finite(out)) throw IntegrationDiverged(0, out);
    return out;
}

Trajectory integrate(const DynamicsModel& model, std::span<const double> p,
                     std::span<const double> x0, const TimeGrid& grid) {
    grid.validate();
    const std::size_t n = model.state_dim();
    const std::size_t points = grid.size();
    std::vector<double> times(points);
    std::vector<double> states(points * n);
    for (std::size_t k = 0; k < points; ++k) times[k] = grid.time(k);

    integrate_visit(model, p, x0, grid, points - 1,
                    [&](std::size_t k, std::span<const double> x) {
                        std::copy(x.begin(), x.end(), states.begin() + k * n);
                    });
    return Trajectory(std::move(times), std::move(states), n);
}

} // namespace odefit
