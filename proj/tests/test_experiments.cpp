#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <vector>

#include "odefit/experiments.hpp"
#include "odefit/report.hpp"

using namespace odefit;

namespace {

struct NoiseStats {
    double mean = 0.0;
    double variance = 0.0;  // about the known zero mean
    std::size_t count = 0;
};

NoiseStats noise_stats(const ProblemSpec& spec, const Dataset& data) {
    const auto traj = integrate(spec.model, spec.true_params, spec.x0, spec.grid);
    NoiseStats s;
    s.count = data.observations.size();
    double sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < s.count; ++i) {
        const double e = data.observations[i] - traj.states()[i];
        sum += e;
        sq += e * e;
    }
    s.mean = sum / static_cast<double>(s.count);
    s.variance = sq / static_cast<double>(s.count);
    return s;
}

// 99.9% two-sided interval for the mean of N squared N(0, v) draws.
std::pair<double, double> chi_square_interval(double v, std::size_t n) {
    const boost::math::chi_squared dist(static_cast<double>(n));
    const double lo = boost::math::quantile(dist, 0.0005);
    const double hi = boost::math::quantile(dist, 0.9995);
    return {v * lo / static_cast<double>(n), v * hi / static_cast<double>(n)};
}

double max_rel_error(std::span<const double> est, std::span<const double> truth) {
    double worst = 0.0;
    for (std::size_t k = 0; k < truth.size(); ++k)
        worst = std::max(worst, std::abs(est[k] - truth[k]) / std::abs(truth[k]));
    return worst;
}

} // namespace

TEST_CASE("NoiseRng is reproducible and well formed") {
    NoiseRng a(7), b(7), c(8);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const double x = a.gaussian(0.0, 1.0);
        CHECK(x == b.gaussian(0.0, 1.0));
        differs |= x != c.gaussian(0.0, 1.0);
    }
    CHECK(differs);

    NoiseRng u(1);
    for (int i = 0; i < 10000; ++i) {
        const double x = u.uniform();
        CHECK_UNARY(x >= 0.0 && x < 1.0);
    }
    CHECK(NoiseRng::kAlgorithm == "mt19937_64+marsaglia_polar");
}

TEST_CASE("generate_dataset") {
    const auto& lv = get_problem("lotka_volterra");
    SUBCASE("zero variance reproduces the noiseless trajectory") {
        const auto d = generate_dataset(lv, 0.0, 3);
        const auto traj = integrate(lv.model, lv.true_params, lv.x0, lv.grid);
        CHECK(d.observations == traj.states());
        CHECK(d.times == traj.times());
    }
    SUBCASE("fixed seed is bitwise reproducible") {
        CHECK(generate_dataset(lv, 0.1, 9) == generate_dataset(lv, 0.1, 9));
        CHECK_FALSE(generate_dataset(lv, 0.1, 9) == generate_dataset(lv, 0.1, 10));
    }
    SUBCASE("every grid point is observed with unit weight") {
        const auto d = generate_dataset(lv, 0.1, 1);
        CHECK(d.num_times() == 2001);
        CHECK(d.observations.size() == 4002);
        CHECK(d.weights == std::vector<double>(4002, 1.0));
    }
    CHECK_THROWS_AS(generate_dataset(lv, -1.0, 1), std::invalid_argument);
}

TEST_CASE("injected noise matches the configured variance") {
    for (const auto& spec : builtin_problems()) {
        CAPTURE(spec.name);
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto s = noise_stats(spec, generate_dataset(spec, 0.1, seed));
            const auto [lo, hi] = chi_square_interval(0.1, s.count);
            CHECK(s.variance >= lo);
            CHECK(s.variance <= hi);
            CHECK(std::abs(s.mean) <= 4.0 * std::sqrt(0.1 / static_cast<double>(s.count)));
        }
    }
    // 4002 draws at variance 0.1 land in roughly [0.0905, 0.1098].
    const auto [lo, hi] = chi_square_interval(0.1, 4002);
    CHECK(lo > 0.085);
    CHECK(hi < 0.115);
}

TEST_CASE("initial_guess") {
    const std::vector p{1.2, -0.3, 0.4, 0.9};
    CHECK(initial_guess(p, 0.0, 5) == p);
    CHECK(initial_guess(p, 0.3, 5) == initial_guess(p, 0.3, 5));
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto g = initial_guess(p, 0.3, seed);
        for (std::size_t k = 0; k < p.size(); ++k) {
            CHECK(std::abs(g[k]) >= 0.7 * std::abs(p[k]) - 1e-15);
            CHECK(std::abs(g[k]) <= 1.3 * std::abs(p[k]) + 1e-15);
            CHECK(std::signbit(g[k]) == std::signbit(p[k]));
        }
    }
    CHECK_THROWS_AS(initial_guess(p, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(initial_guess(p, -0.1, 1), std::invalid_argument);
}

TEST_CASE("optimizer names") {
    CHECK(parse_optimizer("lm") == OptimizerKind::lm);
    CHECK(parse_optimizer("levenberg_marquardt") == OptimizerKind::lm);
    CHECK(parse_optimizer("nelder_mead") == OptimizerKind::nelder_mead);
    CHECK(parse_optimizer("gradient") == OptimizerKind::gradient);
    CHECK_FALSE(parse_optimizer("bfgs").has_value());
    CHECK(display_name(OptimizerKind::nelder_mead) == "Nelder-Mead");
}

TEST_CASE("experiment config validation") {
    ExperimentConfig cfg;
    cfg.problem = "van_der_pol";
    CHECK_NOTHROW(cfg.validate());
    cfg.optimizers.clear();
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.problem = "nope";
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.problem = "van_der_pol";
    cfg.noise_variance = -0.5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("Van der Pol benchmark without noise recovers mu") {
    ExperimentConfig cfg;
    cfg.problem = "van_der_pol";
    cfg.noise_variance = 0.0;
    cfg.seed = 4;
    const auto report = run_benchmark(cfg);
    REQUIRE(report.outcomes.size() == 3);
    for (const auto& o : report.outcomes) {
        CAPTURE(to_string(o.kind));
        CHECK(o.params.size() == 1);
        CHECK(o.rmse < 1e-3);
        CHECK(std::abs(o.params[0] - 1.5) < 1e-2);
    }
    CHECK(report.outcomes[0].kind == OptimizerKind::gradient);
    CHECK(report.outcomes[1].kind == OptimizerKind::lm);
    CHECK(report.outcomes[2].kind == OptimizerKind::nelder_mead);
}

TEST_CASE("benchmarks are deterministic apart from wall time") {
    ExperimentConfig cfg;
    cfg.problem = "van_der_pol";
    cfg.seed = 42;
    const auto a = run_benchmark(cfg);
    const auto b = run_benchmark(cfg);
    CHECK(report_to_json(a, false) == report_to_json(b, false));
    CHECK(a.p0 == b.p0);
}

TEST_CASE("Van der Pol: zero noise is never harder than variance 0.1") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        CAPTURE(seed);
        ExperimentConfig cfg;
        cfg.problem = "van_der_pol";
        cfg.seed = seed;
        cfg.optimizers = {OptimizerKind::nelder_mead};
        cfg.noise_variance = 0.0;
        const double clean = std::abs(run_benchmark(cfg).outcomes[0].params[0] - 1.5);
        cfg.noise_variance = 0.1;
        const double noisy = std::abs(run_benchmark(cfg).outcomes[0].params[0] - 1.5);
        CHECK(clean <= noisy);
    }
}

TEST_CASE("explicit p0 overrides the drawn guess") {
    ExperimentConfig cfg;
    cfg.problem = "van_der_pol";
    cfg.optimizers = {OptimizerKind::lm};
    cfg.p0 = std::vector{1.4};
    const auto r = run_benchmark(cfg);
    CHECK(r.p0 == std::vector{1.4});
    REQUIRE(r.outcomes[0].result.trace.size() > 0);
    CHECK(r.outcomes[0].result.trace.front().params == std::vector{1.4});
}

TEST_CASE("report JSON and table") {
    ExperimentConfig cfg;
    cfg.problem = "van_der_pol";
    cfg.seed = 2;
    const auto r = run_benchmark(cfg);
    const auto json = report_to_json(r);
    for (const char* key : {"\"problem\"", "\"seed\"", "\"noise_variance\"", "\"p0\"",
                            "\"params\"", "\"rmse\"", "\"iterations\"", "\"termination\"",
                            "\"wall_ms\"", "\"rng\""})
        CHECK(json.find(key) != std::string::npos);
    CHECK(report_to_json(r, false).find("wall_ms") == std::string::npos);

    const auto table = format_table(r);
    const auto g = table.find("Gradient-based");
    const auto l = table.find("Levenberg-Marquardt");
    const auto n = table.find("Nelder-Mead");
    CHECK(g < l);
    CHECK(l < n);
    CHECK(n != std::string::npos);
    CHECK(table.find("RMSE") != std::string::npos);
}

TEST_CASE("noise sweep on a fast problem") {
    const std::vector<double> levels{0.01, 0.1, 1.0, 10.0};
    const auto reports = noise_sweep("van_der_pol", levels, 100);
    REQUIRE(reports.size() == 4);
    for (std::size_t i = 0; i < reports.size(); ++i) {
        CHECK(reports[i].seed == 100 + i);
        CHECK(reports[i].noise_variance == levels[i]);
        REQUIRE(reports[i].outcomes.size() == 1);
        CHECK(reports[i].outcomes[0].kind == OptimizerKind::nelder_mead);
        CHECK(reports[i].outcomes[0].params.size() == 1);
        CHECK(reports[i].outcomes[0].trajectory.has_value());
    }
    const auto parallel = noise_sweep("van_der_pol", levels, 100, {OptimizerKind::nelder_mead},
                                      0.3, 2);
    for (std::size_t i = 0; i < reports.size(); ++i)
        CHECK(report_to_json(parallel[i], false) == report_to_json(reports[i], false));

    CHECK_THROWS_AS(noise_sweep("van_der_pol", std::vector<double>{}, 1), std::invalid_argument);
    CHECK_THROWS_AS(noise_sweep("van_der_pol", std::vector{-1.0}, 1), std::invalid_argument);
}

// Single-shot fitting of the chaotic Rossler system over 120 time units has
// a basin of attraction far narrower than the initial-guess spread, so this
// recovery is not expected to hold with the default protocol.
TEST_CASE("Rossler zero-noise sweep recovers the parameters") {
    const std::vector<double> levels{0.0};
    const auto reports = noise_sweep("rossler", levels, 1);
    REQUIRE(reports.size() == 1);
    const auto& est = reports[0].outcomes[0].params;
    CHECK(max_rel_error(est, get_problem("rossler").true_params) <= 1e-2);
}
