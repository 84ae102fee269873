#include "mtlf/ets.hpp"

#include "mtlf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mtlf::ets {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Variance floors keep the likelihood finite on perfectly fitted series.
// The additive floor is scaled by the data level so that both error kinds
// hit equivalent floors.
constexpr double kRelativeFloor = 1e-8;

bool has_trend(EtsSpec s) { return s.trend != TrendKind::none; }

double mean_abs(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s / static_cast<double>(v.size());
}

double mean_first_difference(std::span<const double> v) {
    return (v.back() - v.front()) / static_cast<double>(v.size() - 1);
}

void check_input(std::span<const double> series, EtsSpec spec) {
    if (series.size() < 4)
        throw DataError(fmt::format("ETS {}: series too short ({} < 4)", spec.name(), series.size()));
    for (double v : series)
        if (!std::isfinite(v)) throw DataError(fmt::format("ETS {}: non-finite value in series", spec.name()));
    if (spec.error == ErrorKind::multiplicative)
        for (double v : series)
            if (!(v > 0.0))
                throw DataError(fmt::format("ETS {}: multiplicative error needs positive data", spec.name()));
}

// Coordinates optimized for a spec, in sweep order.
enum Coord { kAlpha, kBeta, kPhi };

std::vector<Coord> coords_for(EtsSpec spec) {
    switch (spec.trend) {
    case TrendKind::none: return {kAlpha};
    case TrendKind::additive: return {kAlpha, kBeta};
    case TrendKind::damped: return {kAlpha, kBeta, kPhi};
    }
    return {kAlpha};
}

double& coord_ref(EtsParams& p, Coord c) {
    switch (c) {
    case kAlpha: return p.alpha;
    case kBeta: return p.beta;
    case kPhi: return p.phi;
    }
    return p.alpha;
}

std::pair<double, double> coord_bounds(const EtsParams& p, Coord c) {
    switch (c) {
    case kAlpha: return {p.beta, 1.0};
    case kBeta: return {0.0, p.alpha};
    case kPhi: return {kPhiMin, kPhiMax};
    }
    return {0.0, 1.0};
}

struct Candidate {
    EtsParams params;
    double nll;
};

double negative_loglik(std::span<const double> series, EtsSpec spec, const EtsParams& p) {
    double ll = evaluate(series, spec, p).log_likelihood;
    return std::isfinite(ll) ? -ll : kInf;
}

// Golden-section search along one coordinate; only accepts improvements.
void refine_coordinate(std::span<const double> series, EtsSpec spec, Candidate& cand, Coord c) {
    auto [lo, hi] = coord_bounds(cand.params, c);
    if (!(hi > lo)) return;
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    EtsParams trial = cand.params;
    auto f = [&](double x) {
        coord_ref(trial, c) = x;
        return negative_loglik(series, spec, trial);
    };
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 40 && (b - a) > 1e-7; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    // Endpoints matter: alpha = 0 or 1 and beta = 0 are common optima.
    for (double x : {f1 <= f2 ? x1 : x2, lo, hi}) {
        double v = f(x);
        if (v < cand.nll) {
            cand.nll = v;
            coord_ref(cand.params, c) = x;
        }
    }
}

void refine(std::span<const double> series, EtsSpec spec, Candidate& cand) {
    const auto coords = coords_for(spec);
    for (int sweep = 0; sweep < 8; ++sweep) {
        const double before = cand.nll;
        for (Coord c : coords) refine_coordinate(series, spec, cand, c);
        if (!(before - cand.nll > 1e-10 * (1.0 + std::abs(before)))) break;
    }
}

Candidate best_of(std::vector<Candidate>& starts, std::span<const double> series, EtsSpec spec) {
    std::stable_sort(starts.begin(), starts.end(),
                     [](const Candidate& a, const Candidate& b) { return a.nll < b.nll; });
    Candidate best = starts.front();
    const std::size_t n_refine = std::min<std::size_t>(3, starts.size());
    for (std::size_t i = 0; i < n_refine; ++i) {
        Candidate c = starts[i];
        if (!std::isfinite(c.nll)) continue;
        refine(series, spec, c);
        if (c.nll < best.nll) best = c;
    }
    return best;
}

Candidate fit_level_only(std::span<const double> series, EtsSpec level_spec) {
    std::vector<Candidate> starts;
    for (double a : {0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
        EtsParams p;
        p.alpha = a;
        p.initial_level = series.front();
        starts.push_back({p, negative_loglik(series, level_spec, p)});
    }
    return best_of(starts, series, level_spec);
}

} // namespace

std::string EtsSpec::name() const {
    std::string s = error == ErrorKind::additive ? "A" : "M";
    switch (trend) {
    case TrendKind::none: s += "N"; break;
    case TrendKind::additive: s += "A"; break;
    case TrendKind::damped: s += "Ad"; break;
    }
    return s + "N";
}

const std::array<EtsSpec, 6>& all_specs() {
    static const std::array<EtsSpec, 6> specs{{
        {ErrorKind::additive, TrendKind::none},
        {ErrorKind::additive, TrendKind::additive},
        {ErrorKind::additive, TrendKind::damped},
        {ErrorKind::multiplicative, TrendKind::none},
        {ErrorKind::multiplicative, TrendKind::additive},
        {ErrorKind::multiplicative, TrendKind::damped},
    }};
    return specs;
}

int parameter_count(EtsSpec spec) {
    // alpha, l0, sigma^2 (+ beta, b0) (+ phi)
    int p = 3;
    if (has_trend(spec)) p += 2;
    if (spec.trend == TrendKind::damped) p += 1;
    return p;
}

EtsFit evaluate(std::span<const double> series, EtsSpec spec, const EtsParams& params) {
    EtsFit fit;
    fit.spec = spec;
    fit.params = params;
    fit.n_params = parameter_count(spec);
    if (!has_trend(spec)) {
        fit.params.beta = 0.0;
        fit.params.initial_trend = 0.0;
    }
    const double phi = spec.trend == TrendKind::damped ? params.phi : 1.0;
    if (spec.trend != TrendKind::damped) fit.params.phi = 1.0;
    const bool additive = spec.error == ErrorKind::additive;

    double level = fit.params.initial_level;
    double trend = fit.params.initial_trend;
    double sse = 0.0;
    double log_jacobian = 0.0;
    bool valid = true;
    for (std::size_t t = 1; t < series.size(); ++t) {
        const double y_hat = level + phi * trend;
        if (additive) {
            const double e = series[t] - y_hat;
            sse += e * e;
            level = y_hat + params.alpha * e;
            trend = phi * trend + fit.params.beta * e;
        } else {
            if (!(y_hat > 0.0)) {
                valid = false;
                break;
            }
            const double eps = (series[t] - y_hat) / y_hat;
            sse += eps * eps;
            log_jacobian += std::log(y_hat);
            level = y_hat * (1.0 + params.alpha * eps);
            trend = phi * trend + fit.params.beta * y_hat * eps;
        }
    }
    const auto n = static_cast<double>(series.size() - 1);
    fit.n_innovations = series.size() - 1;
    fit.final_level = level;
    fit.final_trend = trend;
    if (!valid || !std::isfinite(sse)) {
        fit.log_likelihood = -kInf;
        fit.sigma2 = kInf;
        fit.aic = kInf;
        return fit;
    }
    const double scale = additive ? kRelativeFloor * mean_abs(series) : kRelativeFloor;
    const double floor = std::max(scale * scale, std::numeric_limits<double>::min());
    fit.sigma2 = std::max(sse / n, floor);
    fit.log_likelihood =
        -0.5 * n * std::log(2.0 * std::numbers::pi * fit.sigma2) - 0.5 * sse / fit.sigma2 - log_jacobian;
    fit.aic = -2.0 * fit.log_likelihood + 2.0 * fit.n_params;
    return fit;
}

EtsFit fit(std::span<const double> series, EtsSpec spec) {
    check_input(series, spec);

    const EtsSpec level_spec{spec.error, TrendKind::none};
    Candidate level_only = fit_level_only(series, level_spec);
    if (!has_trend(spec)) {
        if (!std::isfinite(level_only.nll))
            throw NumericError(fmt::format("ETS {}: no finite likelihood found", spec.name()));
        return evaluate(series, spec, level_only.params);
    }

    std::vector<Candidate> starts;
    // The no-trend optimum embedded in the trend model (beta = 0, b0 = 0);
    // trend fits can therefore never score below their nested model.
    {
        EtsParams p = level_only.params;
        p.beta = 0.0;
        p.initial_trend = 0.0;
        p.phi = spec.trend == TrendKind::damped ? kPhiMax : 1.0;
        starts.push_back({p, negative_loglik(series, spec, p)});
    }
    const std::vector<double> phis =
        spec.trend == TrendKind::damped ? std::vector<double>{0.8, 0.9, 0.98} : std::vector<double>{1.0};
    for (double b0 : {mean_first_difference(series), 0.0}) {
        for (double a : {0.1, 0.3, 0.5, 0.7, 0.9, 1.0}) {
            for (double bf : {0.0, 0.1, 0.5}) {
                for (double phi : phis) {
                    EtsParams p;
                    p.alpha = a;
                    p.beta = bf * a;
                    p.phi = phi;
                    p.initial_level = series.front();
                    p.initial_trend = b0;
                    starts.push_back({p, negative_loglik(series, spec, p)});
                }
            }
        }
    }
    Candidate best = best_of(starts, series, spec);
    if (!std::isfinite(best.nll))
        throw NumericError(fmt::format("ETS {}: no finite likelihood found", spec.name()));
    return evaluate(series, spec, best.params);
}

Selection select_all(std::span<const double> series) {
    Selection sel;
    bool have_best = false;
    bool all_data_errors = true;
    for (const EtsSpec& spec : all_specs()) {
        try {
            EtsFit f = fit(series, spec);
            sel.candidates.push_back(f);
            if (!have_best) {
                sel.best = f;
                have_best = true;
                continue;
            }
            const double tol = 1e-12 * std::max(1.0, std::abs(sel.best.aic));
            const bool better = f.aic < sel.best.aic - tol;
            const bool tie_fewer = std::abs(f.aic - sel.best.aic) <= tol && f.n_params < sel.best.n_params;
            if (better || tie_fewer) sel.best = f;
        } catch (const Error& e) {
            if (!dynamic_cast<const DataError*>(&e)) all_data_errors = false;
            sel.failures.push_back(fmt::format("{}: {}", spec.name(), e.what()));
        }
    }
    if (!have_best) {
        std::string msg = "ETS selection failed for every spec:";
        for (const auto& f : sel.failures) msg += "\n  " + f;
        if (all_data_errors) throw DataError(msg);
        throw NumericError(msg);
    }
    return sel;
}

EtsFit select_by_aic(std::span<const double> series) { return select_all(series).best; }

double forecast_one(const EtsFit& fit) {
    switch (fit.spec.trend) {
    case TrendKind::none: return fit.final_level;
    case TrendKind::additive: return fit.final_level + fit.final_trend;
    case TrendKind::damped: return fit.final_level + fit.params.phi * fit.final_trend;
    }
    return fit.final_level;
}

} // namespace mtlf::ets
