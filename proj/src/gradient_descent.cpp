#include <cmath>
#include <ostream>
#include <stdexcept>

#include "odefit/optimizers.hpp"

namespace odefit {

namespace {

struct LineMinimum {
    double mu = 0.0;
    double cost = 0.0;
};

LineMinimum golden_section(const CostFunction& cost, std::span<const double> p,
                           std::span<const double> grad, const LineSearchConfig& cfg) {
    std::vector<double> trial(p.size());
    auto phi = [&](double mu) {
        for (std::size_t i = 0; i < p.size(); ++i) trial[i] = p[i] - mu * grad[i];
        return cost(trial);
    };

    LineMinimum best{0.0, phi(0.0)};
    std::size_t evals = 1;

    bool nonzero = false;
    for (double g : grad) {
        if (!std::isfinite(g)) return best;
        nonzero = nonzero || g != 0.0;
    }
    if (!nonzero || cfg.max_evals < 3) return best;

    auto consider = [&](double mu, double f) {
        if (f < best.cost) best = {mu, f};
    };

    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = 0.0, b = cfg.mu_max;
    double fa = best.cost;
    double c = 0.0, d = 0.0, fc = 0.0, fd = 0.0;
    auto place_probes = [&] {
        c = b - inv_phi * (b - a);
        d = a + inv_phi * (b - a);
        fc = phi(c);
        fd = phi(d);
        evals += 2;
        consider(c, fc);
        consider(d, fd);
    };
    place_probes();

    // phi is not unimodal in general. A lower probe that is worse than the
    // left endpoint means a better point lies in [a, c], so collapse onto
    // it. Ties move toward mu = 0, which matters when both probes land in a
    // divergent (penalty) region. The search keeps shrinking past the
    // tolerance while no decrease has been found, up to the evaluation cap.
    while (evals < cfg.max_evals && (b - a > cfg.tolerance || best.mu == 0.0)) {
        if (fc > fa) {
            if (evals + 2 > cfg.max_evals) break;
            b = c;
            place_probes();
            continue;
        }
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = phi(c);
            consider(c, fc);
        } else {
            a = c;
            fa = fc;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = phi(d);
            consider(d, fd);
        }
        ++evals;
    }
    return best;
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

} // namespace

std::string_view to_string(Termination t) {
    switch (t) {
    case Termination::converged: return "converged";
    case Termination::max_iterations: return "max_iterations";
    case Termination::stalled: return "stalled";
    }
    return "unknown";
}

void write_trace_csv(std::ostream& os, const OptimizerResult& result) {
    const std::size_t n =
        result.trace.empty() ? result.best_params.size() : result.trace.front().params.size();
    os << "iteration,cost";
    for (std::size_t i = 0; i < n; ++i) os << ",p" << i + 1;
    os << '\n';
    const auto old_precision = os.precision(17);
    for (const auto& rec : result.trace) {
        os << rec.iteration << ',' << rec.cost;
        for (double v : rec.params) os << ',' << v;
        os << '\n';
    }
    os.precision(old_precision);
}

void GradientDescentConfig::validate() const {
    if (!(epsilon > 0.0)) throw std::invalid_argument("gradient epsilon must be positive");
    if (!(line_search.mu_max > 0.0)) throw std::invalid_argument("mu_max must be positive");
    if (!(line_search.tolerance > 0.0))
        throw std::invalid_argument("line search tolerance must be positive");
    if (!(fd_rel_step > 0.0)) throw std::invalid_argument("fd_rel_step must be positive");
}

double line_search_mu(const CostFunction& cost, std::span<const double> p,
                      std::span<const double> grad, const LineSearchConfig& cfg) {
    if (grad.size() != p.size())
        throw std::invalid_argument("gradient length does not match parameters");
    if (!(cfg.mu_max > 0.0)) throw std::invalid_argument("mu_max must be positive");
    return golden_section(cost, p, grad, cfg).mu;
}

OptimizerResult gradient_descent(const CostFunction& cost, std::span<const double> p0,
                                 const GradientDescentConfig& cfg) {
    cfg.validate();
    OptimizerResult result;
    ParamVector p(p0.begin(), p0.end());
    double f = cost(p);
    result.trace.push_back({0, f, p});

    ParamVector next(p.size());
    for (std::size_t k = 1; k <= cfg.max_iterations; ++k) {
        const auto grad = fd_gradient(cost, p, cfg.fd_rel_step);
        bool finite = true;
        for (double g : grad) finite = finite && std::isfinite(g);
        if (!finite) {
            result.termination = Termination::stalled;
            break;
        }

        const LineMinimum step = golden_section(cost, p, grad, cfg.line_search);
        for (std::size_t i = 0; i < p.size(); ++i) next[i] = p[i] - step.mu * grad[i];
        const double moved = distance(next, p);

        p = next;
        f = step.cost;
        result.iterations = k;
        result.trace.push_back({k, f, p});
        if (moved <= cfg.epsilon) {
            result.termination = Termination::converged;
            break;
        }
    }
    result.best_params = p;
    result.best_cost = f;
    return result;
}

OptimizerResult gradient_descent(const Objective& obj, std::span<const double> p0,
                                 const GradientDescentConfig& cfg) {
    if (p0.size() != obj.param_count())
        throw std::invalid_argument("p0 length does not match model");
    return gradient_descent(obj.cost_function(), p0, cfg);
}

} // namespace odefit
