#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "odefit/optimizers.hpp"

namespace odefit {

namespace {

double sum_of_squares(const std::vector<double>& e) {
    double s = 0.0;
    for (double r : e) s += r * r;
    return s;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
    return {v.data(), static_cast<Eigen::Index>(v.size())};
}

} // namespace

void LMConfig::validate() const {
    if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive");
    if (!(lambda_factor > 1.0)) throw std::invalid_argument("lambda_factor must exceed 1");
    if (!(epsilon > 0.0)) throw std::invalid_argument("LM epsilon must be positive");
    if (!(lambda_max > lambda0)) throw std::invalid_argument("lambda_max must exceed lambda0");
    if (!(fd_rel_step > 0.0)) throw std::invalid_argument("fd_rel_step must be positive");
}

OptimizerResult levenberg_marquardt(const ResidualFunction& residuals,
                                    std::span<const double> p0, const LMConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(p0.size());

    ParamVector p(p0.begin(), p0.end());
    auto e = residuals(p);
    if (!e) throw OptimizerError("residuals diverge at the initial parameters");
    double f = sum_of_squares(*e);
    if (!std::isfinite(f)) throw OptimizerError("residuals are not finite at the initial parameters");

    OptimizerResult result;
    result.trace.push_back({0, f, p});

    auto jac = fd_jacobian(residuals, p, cfg.fd_rel_step);
    double lambda = cfg.lambda0;
    ParamVector trial(p.size());

    if (!jac) {
        result.termination = Termination::stalled;
    } else {
        for (std::size_t it = 1; it <= cfg.max_iterations; ++it) {
            result.iterations = it;
            const Eigen::MatrixXd normal =
                jac->transpose() * *jac +
                lambda * Eigen::MatrixXd::Identity(n, n);
            const Eigen::VectorXd rhs = -(jac->transpose() * as_vector(*e));

            const Eigen::LLT<Eigen::MatrixXd> llt(normal);
            if (llt.info() != Eigen::Success) {
                lambda *= cfg.lambda_factor;
                if (lambda > cfg.lambda_max) {
                    result.termination = Termination::stalled;
                    break;
                }
                continue;
            }
            const Eigen::VectorXd dp = llt.solve(rhs);
            if (!dp.allFinite()) {
                lambda *= cfg.lambda_factor;
                if (lambda > cfg.lambda_max) {
                    result.termination = Termination::stalled;
                    break;
                }
                continue;
            }

            for (Eigen::Index i = 0; i < n; ++i) trial[i] = p[i] + dp[i];
            auto e_trial = residuals(trial);
            const double f_trial = e_trial ? sum_of_squares(*e_trial)
                                           : std::numeric_limits<double>::infinity();

            if (f_trial < f) {
                p = trial;
                e = std::move(e_trial);
                f = f_trial;
                lambda = std::max(lambda / cfg.lambda_factor,
                                  std::numeric_limits<double>::min());
                result.trace.push_back({it, f, p});
                jac = fd_jacobian(residuals, p, cfg.fd_rel_step);
                if (!jac) {
                    result.termination = Termination::stalled;
                    break;
                }
            } else {
                lambda *= cfg.lambda_factor;
            }

            if (dp.norm() <= cfg.epsilon) {
                result.termination = Termination::converged;
                break;
            }
            if (lambda > cfg.lambda_max) {
                result.termination = Termination::stalled;
                break;
            }
        }
    }

    result.best_params = p;
    result.best_cost = f;
    return result;
}

OptimizerResult levenberg_marquardt(const Objective& obj, std::span<const double> p0,
                                    const LMConfig& cfg) {
    if (p0.size() != obj.param_count())
        throw std::invalid_argument("p0 length does not match model");
    return levenberg_marquardt(obj.residual_function(), p0, cfg);
}

} // namespace odefit
