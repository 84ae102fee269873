#include "mtlf/errors.hpp"
#include "mtlf/ets.hpp"
#include "synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace mtlf;
using namespace mtlf::ets;

namespace {

constexpr EtsSpec ANN{ErrorKind::additive, TrendKind::none};
constexpr EtsSpec AAN{ErrorKind::additive, TrendKind::additive};
constexpr EtsSpec AAdN{ErrorKind::additive, TrendKind::damped};

std::vector<double> simulate_ann(double alpha, double level, double sigma, std::size_t n, Rng& rng) {
    std::vector<double> y;
    for (std::size_t t = 0; t < n; ++t) {
        const double e = sigma * rng.normal();
        y.push_back(level + e);
        level += alpha * e;
    }
    return y;
}

void check_fit_invariants(const EtsFit& f) {
    CHECK(f.aic == doctest::Approx(-2.0 * f.log_likelihood + 2.0 * f.n_params).epsilon(1e-14));
    CHECK(f.params.alpha >= 0.0);
    CHECK(f.params.alpha <= 1.0);
    CHECK(f.params.beta >= 0.0);
    CHECK(f.params.beta <= f.params.alpha + 1e-15);
    if (f.spec.trend == TrendKind::damped) {
        CHECK(f.params.phi >= kPhiMin);
        CHECK(f.params.phi <= kPhiMax);
    }
}

} // namespace

TEST_SUITE("ets") {

TEST_CASE("six specs in a fixed order") {
    const auto& specs = all_specs();
    std::vector<std::string> names;
    for (const auto& s : specs) names.push_back(s.name());
    CHECK(names == std::vector<std::string>{"ANN", "AAN", "AAdN", "MNN", "MAN", "MAdN"});
    CHECK(parameter_count(ANN) == 3);
    CHECK(parameter_count(AAN) == 5);
    CHECK(parameter_count(AAdN) == 6);
}

TEST_CASE("constant series fits exactly") {
    const std::vector<double> y(5, 5.0);
    const auto f = fit(y, ANN);
    CHECK(f.final_level == doctest::Approx(5.0));
    CHECK(forecast_one(f) == doctest::Approx(5.0));
    check_fit_invariants(f);
}

TEST_CASE("exact line is continued by the additive trend model") {
    std::vector<double> y;
    for (int t = 1; t <= 10; ++t) y.push_back(2.0 + 3.0 * t);
    const auto f = fit(y, AAN);
    CHECK(std::abs(forecast_one(f) - (2.0 + 3.0 * 11)) < 1e-6);
    check_fit_invariants(f);
}

TEST_CASE("alpha is recovered from simulated data") {
    Rng rng(2024);
    const auto y = simulate_ann(0.3, 100.0, 1.0, 200, rng);
    const auto f = fit(y, ANN);
    CHECK(std::abs(f.params.alpha - 0.3) <= 0.15);
    CHECK(f.sigma2 == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("forecast from terminal states") {
    EtsFit f;
    f.spec = ANN;
    f.final_level = 5.0;
    CHECK(forecast_one(f) == 5.0);
    f.spec = AAN;
    f.final_level = 10.0;
    f.final_trend = 2.0;
    CHECK(forecast_one(f) == 12.0);
    f.spec = AAdN;
    f.params.phi = 0.9;
    CHECK(forecast_one(f) == doctest::Approx(11.8).epsilon(1e-15));
}

TEST_CASE("alpha zero freezes the level") {
    const std::vector<double> y{3.0, 9.0, 1.0, 7.0, 4.0, 12.0};
    EtsParams p;
    p.alpha = 0.0;
    p.initial_level = 5.0;
    const auto f = evaluate(y, ANN, p);
    CHECK(f.final_level == 5.0);
    CHECK(forecast_one(f) == 5.0);
}

TEST_CASE("evaluate satisfies the AIC identity") {
    const std::vector<double> y{10.0, 11.0, 13.0, 12.0, 15.0, 16.0};
    for (const auto& spec : all_specs()) {
        EtsParams p;
        p.alpha = 0.4;
        p.beta = 0.1;
        p.phi = 0.9;
        p.initial_level = 10.0;
        p.initial_trend = 1.0;
        const auto f = evaluate(y, spec, p);
        CHECK(f.n_innovations == y.size() - 1);
        CHECK(f.aic == doctest::Approx(-2.0 * f.log_likelihood + 2.0 * parameter_count(spec)));
    }
}

TEST_CASE("constant series selects a no-trend spec") {
    const std::vector<double> y(8, 42.0);
    const auto sel = select_all(y);
    CHECK(sel.best.spec.trend == TrendKind::none);
    CHECK(sel.candidates.size() == 6);
}

TEST_CASE("trending series selects a trend spec") {
    Rng rng(3);
    std::vector<double> y;
    for (int t = 0; t < 15; ++t) y.push_back(100.0 + 8.0 * t + 0.5 * rng.normal());
    const auto best = select_by_aic(y);
    CHECK(best.spec.trend != TrendKind::none);
}

TEST_CASE("selected AIC is the enumerated minimum and trend never lowers likelihood") {
    Rng rng(4);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<double> y;
        const std::size_t n = 4 + rng.below(12);
        double level = rng.uniform(50.0, 5000.0);
        const double slope = rng.uniform(-0.03, 0.06) * level;
        for (std::size_t t = 0; t < n; ++t) y.push_back(level + slope * t + 0.02 * level * rng.normal());
        const auto sel = select_all(y);
        REQUIRE(!sel.candidates.empty());
        for (const auto& c : sel.candidates) {
            check_fit_invariants(c);
            // Ties within 1e-12 relative go to the simpler model.
            CHECK(sel.best.aic <= c.aic + 1e-12 * std::abs(c.aic));
        }
        for (std::size_t e = 0; e < 2; ++e) {
            const auto& none = sel.candidates[3 * e];
            CHECK(sel.candidates[3 * e + 1].log_likelihood >= none.log_likelihood - 1e-9 * std::abs(none.log_likelihood));
            CHECK(sel.candidates[3 * e + 2].log_likelihood >= none.log_likelihood - 1e-9 * std::abs(none.log_likelihood));
        }
    }
}

TEST_CASE("selection is deterministic") {
    const std::vector<double> y{120.0, 131.0, 128.0, 140.0, 151.0, 149.0, 160.0};
    const auto a = select_by_aic(y), b = select_by_aic(y);
    CHECK(a.spec == b.spec);
    CHECK(a.aic == b.aic);
    CHECK(forecast_one(a) == forecast_one(b));
}

TEST_CASE("bad input") {
    CHECK_THROWS_AS(fit(std::vector<double>{1.0, 2.0, 3.0}, ANN), DataError);
    CHECK_THROWS_AS(fit(std::vector<double>{1.0, 2.0, std::nan(""), 4.0}, ANN), DataError);
    CHECK_THROWS_AS(fit(std::vector<double>{1.0, -2.0, 3.0, 4.0}, EtsSpec{ErrorKind::multiplicative, TrendKind::none}),
                    DataError);
    const auto sel = select_all(std::vector<double>{1.0, -2.0, 3.0, 4.0, 5.0});
    CHECK(sel.failures.size() == 3);
    CHECK(sel.best.spec.error == ErrorKind::additive);
    CHECK_THROWS_AS(select_by_aic(std::vector<double>{1.0, 2.0}), DataError);
}

}
