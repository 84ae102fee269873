#include "mtlf/seasonal.hpp"

#include "mtlf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtlf::seasonal {

namespace {

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

SeasonalState::SeasonalState() : SeasonalState(std::string{}) {}

SeasonalState::SeasonalState(std::string id)
    : series_id(std::move(id)), initial_components("season." + series_id + ".init", kMonths),
      beta_raw("season." + series_id + ".beta_raw", 1) {
    std::fill(initial_components.value.begin(), initial_components.value.end(), 1.0);
    set_beta(kInitialBeta);
}

double SeasonalState::beta() const { return sigmoid(beta_raw.value[0]); }

void SeasonalState::set_beta(double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError(fmt::format("beta {} outside [0, 1]", beta));
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (beta == 0.0) beta_raw.value[0] = -inf;
    else if (beta == 1.0) beta_raw.value[0] = inf;
    else beta_raw.value[0] = std::log(beta / (1.0 - beta));
}

void SeasonalState::project() {
    for (double& v : initial_components.value) v = std::max(v, kComponentFloor);
}

SeasonalState init_state(const NormalizedSeries& series) {
    SeasonalState state(series.series_id);
    const std::size_t years = std::min<std::size_t>(3, series.values.size() / kMonths);
    if (years == 0) throw DataError(fmt::format("series '{}': no complete year to seed seasonality", series.series_id));
    for (std::size_t j = 0; j < kMonths; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < years; ++i) acc += series.values[i * kMonths + j];
        state.initial_components.value[j] = std::max(acc / static_cast<double>(years), kComponentFloor);
    }
    return state;
}

SeasonalTrace unroll_seasonal(const SeasonalState& state, std::span<const double> y) {
    if (y.size() < kMonths)
        throw DataError(fmt::format("series '{}': seasonal recursion needs at least 12 values", state.series_id));
    SeasonalTrace trace;
    auto& s = trace.components;
    s.reserve(y.size() + kMonths);
    s.assign(state.initial_components.value.begin(), state.initial_components.value.end());
    const double beta = state.beta();
    const double keep = 1.0 - beta;
    for (std::size_t t = 0; t < y.size(); ++t) s.push_back(beta * y[t] + keep * s[t]);
    for (std::size_t t = 0; t < s.size(); ++t)
        if (!(s[t] > 0.0))
            throw DomainError(fmt::format("series '{}': seasonal component s[{}] = {} is not positive",
                                          state.series_id, t, s[t]));
    return trace;
}

ad::Var unroll_on_tape(ad::Tape& tape, ad::Var initial_components, ad::Var beta_raw, std::span<const double> y) {
    if (tape.size(initial_components) != kMonths) throw UsageError("unroll_on_tape: expected 12 initial components");
    if (y.size() < kMonths) throw DataError("seasonal recursion needs at least 12 values");
    const ad::Var beta = tape.sigmoid(beta_raw);
    const ad::Var keep = tape.affine(beta, -1.0, 1.0);
    std::vector<ad::Var> s;
    s.reserve(y.size() + kMonths);
    for (std::size_t j = 0; j < kMonths; ++j) s.push_back(tape.slice(initial_components, j, 1));
    for (std::size_t t = 0; t < y.size(); ++t) {
        // beta * y_t is an affine map of beta with slope y_t.
        const ad::Var from_obs = tape.affine(beta, y[t], 0.0);
        const ad::Var from_state = tape.mul(keep, s[t]);
        s.push_back(tape.add(from_obs, from_state));
    }
    return tape.concat(s);
}

std::vector<double> deseasonalize(std::span<const double> y, std::span<const double> s) {
    if (y.size() != s.size())
        throw UsageError(fmt::format("deseasonalize: {} values vs {} components", y.size(), s.size()));
    std::vector<double> x(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (!(y[t] > 0.0) || !(s[t] > 0.0))
            throw DomainError(fmt::format("deseasonalize: non-positive input at {} (y = {}, s = {})", t, y[t], s[t]));
        x[t] = std::log(y[t] / s[t]);
    }
    return x;
}

std::vector<double> reseasonalize(std::span<const double> x_hat, std::span<const double> s) {
    if (x_hat.size() != s.size())
        throw UsageError(fmt::format("reseasonalize: {} values vs {} components", x_hat.size(), s.size()));
    std::vector<double> y(x_hat.size());
    for (std::size_t t = 0; t < y.size(); ++t) y[t] = s[t] * std::exp(x_hat[t]);
    return y;
}

ad::Var deseasonalize_on_tape(ad::Tape& tape, std::span<const double> y, ad::Var s) {
    if (tape.size(s) != y.size()) throw UsageError("deseasonalize_on_tape: size mismatch");
    std::vector<double> log_y(y.size());
    for (std::size_t t = 0; t < y.size(); ++t) {
        if (!(y[t] > 0.0)) throw DomainError(fmt::format("deseasonalize: non-positive y at {} ({})", t, y[t]));
        log_y[t] = std::log(y[t]);
    }
    return tape.sub(tape.constant(log_y), tape.log(s));
}

} // namespace mtlf::seasonal
