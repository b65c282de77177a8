#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "odefit/optimizers.hpp"

namespace odefit {

namespace {

struct Vertex {
    ParamVector point;
    double cost;
};

class Simplex {
public:
    Simplex(const CostFunction& cost, std::span<const double> p0,
            const NelderMeadConfig& cfg)
        : cost_(cost) {
        const std::size_t n = p0.size();
        vertices_.reserve(n + 1);
        add(ParamVector(p0.begin(), p0.end()));
        for (std::size_t k = 0; k < n; ++k) {
            ParamVector v(p0.begin(), p0.end());
            if (v[k] != 0.0)
                v[k] *= 1.0 + cfg.initial_scale;
            else
                v[k] = cfg.zero_offset;
            add(std::move(v));
        }
        order();
    }

    std::size_t dim() const { return vertices_.size() - 1; }
    const Vertex& best() const { return vertices_.front(); }
    const Vertex& worst() const { return vertices_.back(); }
    const Vertex& operator[](std::size_t i) const { return vertices_[i]; }

    double spread() const { return worst().cost - best().cost; }

    double diameter() const {
        double d = 0.0;
        for (std::size_t i = 1; i < vertices_.size(); ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim(); ++k) {
                const double diff = vertices_[i].point[k] - best().point[k];
                s += diff * diff;
            }
            d = std::max(d, std::sqrt(s));
        }
        return d;
    }

    ParamVector centroid() const {
        ParamVector c(dim(), 0.0);
        for (std::size_t i = 0; i < dim(); ++i)
            for (std::size_t k = 0; k < dim(); ++k) c[k] += vertices_[i].point[k];
        for (double& v : c) v /= static_cast<double>(dim());
        return c;
    }

    Vertex evaluate(ParamVector p) const {
        const double f = cost_(p);
        return {std::move(p), std::isnan(f) ? std::numeric_limits<double>::infinity() : f};
    }

    void replace_worst(Vertex v) {
        vertices_.back() = std::move(v);
        order();
    }

    void shrink(double factor) {
        const ParamVector& b = best().point;
        for (std::size_t i = 1; i < vertices_.size(); ++i) {
            ParamVector p(dim());
            for (std::size_t k = 0; k < dim(); ++k)
                p[k] = b[k] + factor * (vertices_[i].point[k] - b[k]);
            vertices_[i] = evaluate(std::move(p));
        }
        order();
    }

private:
    void add(ParamVector p) { vertices_.push_back(evaluate(std::move(p))); }

    // Stable, so equal costs keep their existing order (best stays best).
    void order() {
        std::stable_sort(vertices_.begin(), vertices_.end(),
                         [](const Vertex& a, const Vertex& b) { return a.cost < b.cost; });
    }

    const CostFunction& cost_;
    std::vector<Vertex> vertices_;
};

// c + coeff * (toward - c)
ParamVector affine(const ParamVector& c, const ParamVector& toward, double coeff) {
    ParamVector out(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) out[k] = c[k] + coeff * (toward[k] - c[k]);
    return out;
}

} // namespace

void NelderMeadConfig::validate() const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(beta > 1.0)) throw std::invalid_argument("beta must exceed 1");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in (0, 1)");
    if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("shrink must lie in (0, 1)");
    if (!(initial_scale > 0.0)) throw std::invalid_argument("initial_scale must be positive");
    if (!(zero_offset > 0.0)) throw std::invalid_argument("zero_offset must be positive");
    if (cost_tolerance < 0.0 || simplex_tolerance < 0.0)
        throw std::invalid_argument("tolerances must be non-negative");
}

OptimizerResult nelder_mead(const CostFunction& cost, std::span<const double> p0,
                            const NelderMeadConfig& cfg) {
    cfg.validate();
    if (p0.empty()) throw std::invalid_argument("nelder_mead needs at least one parameter");

    const std::size_t n = p0.size();
    const std::size_t max_iterations = cfg.max_iterations ? cfg.max_iterations : 2000 * n;
    const std::size_t branch_index = cfg.compare_second_best ? 1 : n - 1;

    Simplex simplex(cost, p0, cfg);
    OptimizerResult result;
    result.trace.push_back({0, simplex.best().cost, simplex.best().point});
    result.termination = Termination::max_iterations;

    for (std::size_t it = 1;; ++it) {
        if (simplex.best().cost >= cfg.divergence_cost) {
            result.termination = Termination::stalled;
            break;
        }
        if (simplex.spread() <= cfg.cost_tolerance ||
            simplex.diameter() <= cfg.simplex_tolerance) {
            result.termination = Termination::converged;
            break;
        }
        if (it > max_iterations) break;

        const ParamVector c = simplex.centroid();
        Vertex reflected = simplex.evaluate(affine(c, simplex.worst().point, -cfg.alpha));

        if (reflected.cost < simplex.best().cost) {
            Vertex expanded = simplex.evaluate(affine(c, reflected.point, cfg.beta));
            simplex.replace_worst(expanded.cost < reflected.cost ? std::move(expanded)
                                                                 : std::move(reflected));
        } else if (reflected.cost >= simplex[branch_index].cost) {
            const ParamVector& target =
                cfg.contract_toward_best ? simplex.best().point : simplex.worst().point;
            Vertex contracted = simplex.evaluate(affine(c, target, cfg.gamma));
            if (contracted.cost < simplex.worst().cost)
                simplex.replace_worst(std::move(contracted));
            else
                simplex.shrink(cfg.shrink);
        } else {
            simplex.replace_worst(std::move(reflected));
        }

        result.iterations = it;
        result.trace.push_back({it, simplex.best().cost, simplex.best().point});
    }

    result.best_params = simplex.best().point;
    result.best_cost = simplex.best().cost;
    return result;
}

OptimizerResult nelder_mead(const Objective& obj, std::span<const double> p0,
                            const NelderMeadConfig& cfg) {
    if (p0.size() != obj.param_count())
        throw std::invalid_argument("p0 length does not match model");
    NelderMeadConfig local = cfg;
    local.divergence_cost = std::min(cfg.divergence_cost, obj.divergence_penalty());
    return nelder_mead(obj.cost_function(), p0, local);
}

} // namespace odefit
