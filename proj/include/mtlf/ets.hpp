#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace mtlf::ets {

enum class ErrorKind { additive, multiplicative };
enum class TrendKind { none, additive, damped };

struct EtsSpec {
    ErrorKind error = ErrorKind::additive;
    TrendKind trend = TrendKind::none;

    // Short ETS code: ANN, AAN, AAdN, MNN, MAN, MAdN.
    std::string name() const;
    bool operator==(const EtsSpec&) const = default;
};

// The six non-seasonal specs in enumeration (tie-break) order.
const std::array<EtsSpec, 6>& all_specs();

inline constexpr double kPhiMin = 0.8;
inline constexpr double kPhiMax = 0.98;

struct EtsParams {
    double alpha = 0.5;
    double beta = 0.0;        // trend smoothing, in [0, alpha]
    double phi = 1.0;         // damping, only used by damped specs
    double initial_level = 0; // state after the first observation
    double initial_trend = 0;
};

struct EtsFit {
    EtsSpec spec;
    EtsParams params;
    double final_level = 0.0;
    double final_trend = 0.0;
    double sigma2 = 0.0;        // innovation variance (relative for multiplicative error)
    double log_likelihood = 0.0;
    double aic = 0.0;
    int n_params = 0;
    std::size_t n_innovations = 0;
};

// Number of estimated quantities: smoothing weights, damping, the two
// initial states and the innovation variance.
int parameter_count(EtsSpec spec);

// Runs the state-space recursion with fixed parameters and scores it.
// The state is initialised at the first observation, so the likelihood
// covers observations 2..n. Returns a fit with log_likelihood = -inf when
// a multiplicative model produces a non-positive one-step forecast.
EtsFit evaluate(std::span<const double> series, EtsSpec spec, const EtsParams& params);

// Maximum-likelihood fit: multi-start grid over (alpha, beta, phi) and both
// a data-driven and a zero initial trend, then coordinate-wise golden
// section refinement. Deterministic.
// Throws DataError for short (< 4) or non-finite input and for
// multiplicative specs on non-positive data.
EtsFit fit(std::span<const double> series, EtsSpec spec);

struct Selection {
    EtsFit best;
    std::vector<EtsFit> candidates;    // every admissible fit, in spec order
    std::vector<std::string> failures; // one line per spec that could not be fitted
};

// Fits every admissible spec and keeps the minimum AIC. Ties (relative
// 1e-12) go to fewer parameters, then to enumeration order.
Selection select_all(std::span<const double> series);
EtsFit select_by_aic(std::span<const double> series);

// One-step-ahead point forecast from the terminal state.
double forecast_one(const EtsFit& fit);

} // namespace mtlf::ets
