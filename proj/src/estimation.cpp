#include "odefit/estimation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace odefit {

namespace {

double step_for(double pk, double rel_step) {
    return rel_step * std::max(std::abs(pk), 1.0);
}

} // namespace

Dataset Dataset::with_unit_weights(std::vector<double> times,
                                   std::vector<double> observations,
                                   std::size_t state_dim) {
    Dataset d;
    d.weights.assign(observations.size(), 1.0);
    d.times = std::move(times);
    d.observations = std::move(observations);
    d.state_dim = state_dim;
    return d;
}

void Dataset::validate() const {
    if (state_dim == 0) throw std::invalid_argument("dataset state_dim must be positive");
    if (times.empty()) throw std::invalid_argument("dataset has no observations");
    if (observations.size() != times.size() * state_dim)
        throw std::invalid_argument("observation matrix does not match time count");
    if (weights.size() != observations.size())
        throw std::invalid_argument("weights and observations differ in shape");
    for (std::size_t j = 0; j < times.size(); ++j) {
        if (!std::isfinite(times[j]))
            throw std::invalid_argument("non-finite observation time");
        if (j > 0 && !(times[j] > times[j - 1]))
            throw std::invalid_argument("observation times must be strictly increasing");
    }
    for (double v : observations)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite observation");
    for (double w : weights)
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("weights must be positive and finite");
}

Objective::Objective(DynamicsModel model, Dataset dataset, StateVector x0,
                     TimeGrid grid, double divergence_penalty)
    : model_(std::move(model)), dataset_(std::move(dataset)), x0_(std::move(x0)),
      grid_(grid), penalty_(divergence_penalty) {
    dataset_.validate();
    grid_.validate();
    if (dataset_.state_dim != model_.state_dim())
        throw std::invalid_argument("dataset state_dim does not match model");
    if (x0_.size() != model_.state_dim())
        throw std::invalid_argument("initial state length does not match model");
    if (!(penalty_ > 0.0)) throw std::invalid_argument("divergence penalty must be positive");

    grid_index_.reserve(dataset_.num_times());
    for (double t : dataset_.times) {
        const std::size_t k = grid_.index_of(t);
        if (k == TimeGrid::npos)
            throw std::invalid_argument("observation time " + std::to_string(t) +
                                        " is not a grid point");
        grid_index_.push_back(k);
    }
}

void Objective::check_params(std::span<const double> p) const {
    if (p.size() != model_.param_count())
        throw std::invalid_argument("parameter length does not match model " +
                                    model_.name());
}

std::optional<std::vector<double>> Objective::residuals(std::span<const double> p) const {
    check_params(p);
    for (double v : p)
        if (!std::isfinite(v)) return std::nullopt;

    const std::size_t n = dataset_.state_dim;
    std::vector<double> out(num_residuals());
    std::size_t j = 0;  // next observation; grid_index_ is strictly increasing
    try {
        integrate_visit(model_, p, x0_, grid_, grid_index_.back(),
                        [&](std::size_t k, std::span<const double> x) {
                            if (k != grid_index_[j]) return;
                            for (std::size_t i = 0; i < n; ++i)
                                out[j * n + i] =
                                    (dataset_.observation(j, i) - x[i]) / dataset_.weight(j, i);
                            ++j;
                        });
    } catch (const IntegrationDiverged&) {
        return std::nullopt;
    }
    return out;
}

double Objective::cost(std::span<const double> p) const {
    const auto e = residuals(p);
    if (!e) return penalty_;
    double sum = 0.0;
    for (double r : *e) sum += r * r;
    return std::isfinite(sum) ? sum : penalty_;
}

CostFunction Objective::cost_function() const {
    return [this](std::span<const double> p) { return cost(p); };
}

ResidualFunction Objective::residual_function() const {
    return [this](std::span<const double> p) { return residuals(p); };
}

std::vector<double> fd_gradient(const CostFunction& cost, std::span<const double> p,
                                double rel_step) {
    if (!(rel_step > 0.0)) throw std::invalid_argument("rel_step must be positive");
    std::vector<double> work(p.begin(), p.end());
    std::vector<double> grad(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double h = step_for(p[k], rel_step);
        work[k] = p[k] + h;
        const double up = cost(work);
        work[k] = p[k] - h;
        const double down = cost(work);
        work[k] = p[k];
        grad[k] = (up - down) / (2.0 * h);
    }
    return grad;
}

std::vector<double> fd_gradient(const Objective& obj, std::span<const double> p,
                                double rel_step) {
    return fd_gradient(obj.cost_function(), p, rel_step);
}

std::optional<Eigen::MatrixXd> fd_jacobian(const ResidualFunction& residuals,
                                           std::span<const double> p,
                                           double rel_step) {
    if (!(rel_step > 0.0)) throw std::invalid_argument("rel_step must be positive");
    std::vector<double> work(p.begin(), p.end());
    Eigen::MatrixXd jac;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double h = step_for(p[k], rel_step);
        work[k] = p[k] + h;
        const auto up = residuals(work);
        work[k] = p[k] - h;
        const auto down = residuals(work);
        work[k] = p[k];
        if (!up || !down || up->size() != down->size()) return std::nullopt;
        if (k == 0) jac.resize(static_cast<Eigen::Index>(up->size()),
                               static_cast<Eigen::Index>(p.size()));
        if (static_cast<Eigen::Index>(up->size()) != jac.rows()) return std::nullopt;
        for (std::size_t r = 0; r < up->size(); ++r)
            jac(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                ((*up)[r] - (*down)[r]) / (2.0 * h);
    }
    return jac;
}

std::optional<Eigen::MatrixXd> fd_jacobian(const Objective& obj,
                                           std::span<const double> p,
                                           double rel_step) {
    return fd_jacobian(obj.residual_function(), p, rel_step);
}

double rmse(const Trajectory& reference, const Trajectory& estimate) {
    if (reference.num_points() != estimate.num_points() ||
        reference.state_dim() != estimate.state_dim())
        throw std::invalid_argument("rmse: trajectory shapes differ");
    if (reference.num_points() == 0) throw std::invalid_argument("rmse: empty trajectory");
    for (std::size_t k = 0; k < reference.num_points(); ++k)
        if (std::abs(reference.times()[k] - estimate.times()[k]) > 1e-9)
            throw std::invalid_argument("rmse: trajectories use different time points");

    const auto& a = reference.states();
    const auto& b = estimate.states();
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum / static_cast<double>(a.size()));
}

} // namespace odefit
