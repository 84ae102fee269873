#pragma once

#include "mtlf/dataset.hpp"
#include "mtlf/ensemble.hpp"
#include "mtlf/ets.hpp"
#include "mtlf/metrics.hpp"
#include "mtlf/preprocess.hpp"
#include "mtlf/training.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mtlf::pipeline {

struct PipelineConfig {
    training::TrainConfig train{};
    ensemble::EnsembleConfig ensemble{};
    // Years withheld from the end of every series. With h > 0 the model is
    // trained on all but the last h years and scored on the first withheld
    // year (h = 2 therefore validates on year T-1).
    int holdout_years = 1;

    void validate() const;
};

struct StatsForecast {
    double mean = 0.0;
    double dispersion = 0.0;
    bool dispersion_clamped = false;
    std::string mean_model;       // ETS spec name, or "naive" for short histories
    std::string dispersion_model;
};

// Next-year mean and dispersion, each from its own AIC-selected ETS model.
// Histories shorter than 4 years fall back to the last observed value.
// The dispersion forecast is clamped at 1e-9 * mean (recorded in the result).
StatsForecast forecast_yearly_stats(const YearlyStats& stats);

// Drops the last `years` whole years. Throws DataError if nothing remains.
MonthlyDemandSeries drop_last_years(const MonthlyDemandSeries& series, std::size_t years);

// Last observed year repeated.
std::array<double, kMonths> seasonal_naive_baseline(const MonthlyDemandSeries& series);

struct SeriesResult {
    std::string series_id;
    int forecast_year = 0;
    std::array<double, kMonths> forecast{};   // demand units
    std::array<double, kMonths> normalized{}; // ensemble average before denormalization
    StatsForecast stats;
    std::optional<std::array<double, kMonths>> actual; // withheld year, when holdout > 0
    bool positive = true;
};

struct PipelineResult {
    std::vector<SeriesResult> series;
    std::optional<metrics::EvalReport> report;
    ensemble::EnsembleForecast ensemble;
    std::vector<std::string> warnings;
};

// Normalization, ETS forecasts of yearly mean and dispersion, the RD-LSTM
// ensemble on the normalized series, then denormalization. Errors are
// rethrown with the failing stage and series in the message.
PipelineResult run_pipeline(const Corpus& corpus, const PipelineConfig& config);

} // namespace mtlf::pipeline
