#pragma once

#include "mtlf/autodiff.hpp"
#include "mtlf/dataset.hpp"
#include "mtlf/preprocess.hpp"

#include <span>
#include <string>
#include <vector>

namespace mtlf::seasonal {

inline constexpr double kComponentFloor = 0.05;
inline constexpr double kInitialBeta = 0.3;

// Learnable deseasonalization parameters of one series: 12 initial
// seasonal components and the smoothing weight beta = sigmoid(beta_raw).
struct SeasonalState {
    std::string series_id;
    ad::Param initial_components;
    ad::Param beta_raw;

    SeasonalState();
    explicit SeasonalState(std::string id);

    double beta() const;
    void set_beta(double beta); // beta in [0, 1]
    // Clamp components at kComponentFloor after an optimizer step.
    void project();
};

// Warm start: per-month average of y over the first min(3, years) years,
// floored at kComponentFloor; beta = 0.3.
SeasonalState init_state(const NormalizedSeries& series);

// s_t for t = 0 .. N+11: the 12 initial components followed by
// s_{t+12} = beta * y_t + (1 - beta) * s_t. The last 12 entries are the
// components of the year after the history.
struct SeasonalTrace {
    std::vector<double> components;
};

// Throws DataError when y is shorter than 12 and DomainError when a
// component is not strictly positive.
SeasonalTrace unroll_seasonal(const SeasonalState& state, std::span<const double> y);

// Same recursion recorded on a tape. Returns a vector node of length N+12.
ad::Var unroll_on_tape(ad::Tape& tape, ad::Var initial_components, ad::Var beta_raw, std::span<const double> y);

// x_t = log(y_t / s_t). Throws DomainError on non-positive input.
std::vector<double> deseasonalize(std::span<const double> y, std::span<const double> s);
// y_t = s_t * exp(x_t).
std::vector<double> reseasonalize(std::span<const double> x_hat, std::span<const double> s);

// Tape version of deseasonalize; y is a constant, s a node of the same length.
ad::Var deseasonalize_on_tape(ad::Tape& tape, std::span<const double> y, ad::Var s);

} // namespace mtlf::seasonal
