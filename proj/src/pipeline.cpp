#include "mtlf/pipeline.hpp"

#include "mtlf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace mtlf::pipeline {

namespace {

constexpr double kDispersionFloor = 1e-9;

template <typename F>
auto in_stage(std::string_view stage, std::string_view series_id, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const DegenerateDispersionError& e) {
        throw DegenerateDispersionError(fmt::format("stage '{}', series '{}': {}", stage, series_id, e.what()));
    } catch (const DataError& e) {
        throw DataError(fmt::format("stage '{}', series '{}': {}", stage, series_id, e.what()));
    } catch (const ConfigError& e) {
        throw ConfigError(fmt::format("stage '{}', series '{}': {}", stage, series_id, e.what()));
    } catch (const Error& e) {
        throw NumericError(fmt::format("stage '{}', series '{}': {}", stage, series_id, e.what()));
    }
}

std::pair<double, std::string> forecast_level(const std::vector<double>& history) {
    if (history.size() < 4) return {history.back(), "naive"};
    const auto fit = ets::select_by_aic(history);
    return {ets::forecast_one(fit), fit.spec.name()};
}

} // namespace

void PipelineConfig::validate() const {
    train.validate();
    ensemble.validate();
    if (holdout_years < 0) throw ConfigError(fmt::format("holdout years must be >= 0 (got {})", holdout_years));
}

StatsForecast forecast_yearly_stats(const YearlyStats& stats) {
    if (stats.years() == 0) throw DataError("no yearly statistics to forecast");
    StatsForecast out;
    std::tie(out.mean, out.mean_model) = forecast_level(stats.means);
    std::tie(out.dispersion, out.dispersion_model) = forecast_level(stats.dispersions);
    const double floor = kDispersionFloor * std::abs(out.mean);
    if (!(out.dispersion >= floor)) {
        out.dispersion = floor;
        out.dispersion_clamped = true;
    }
    return out;
}

MonthlyDemandSeries drop_last_years(const MonthlyDemandSeries& series, std::size_t years) {
    if (years >= series.years())
        throw DataError(fmt::format("series '{}': cannot withhold {} of {} years", series.series_id, years,
                                    series.years()));
    MonthlyDemandSeries out = series;
    out.values.resize(series.values.size() - years * kMonths);
    return out;
}

std::array<double, kMonths> seasonal_naive_baseline(const MonthlyDemandSeries& series) {
    if (series.years() < 1) throw DataError(fmt::format("series '{}': no full year of history", series.series_id));
    std::array<double, kMonths> out{};
    std::copy(series.values.end() - kMonths, series.values.end(), out.begin());
    return out;
}

PipelineResult run_pipeline(const Corpus& corpus, const PipelineConfig& config) {
    config.validate();
    if (corpus.empty()) throw DataError("corpus is empty");
    const auto holdout = static_cast<std::size_t>(config.holdout_years);

    PipelineResult result;
    std::vector<MonthlyDemandSeries> histories;
    std::vector<NormalizedSeries> normalized;
    for (const auto& s : corpus) {
        if (s.years() < holdout + training::kMinTrainingYears)
            throw DataError(fmt::format("stage 'validate', series '{}': {} years leave fewer than {} training years "
                                        "after a {}-year holdout",
                                        s.series_id, s.years(), training::kMinTrainingYears, holdout));
        histories.push_back(drop_last_years(s, holdout));
        normalized.push_back(in_stage("normalize", s.series_id, [&] { return normalize_series(histories.back()); }));
    }

    for (std::size_t i = 0; i < histories.size(); ++i) {
        const auto& h = histories[i];
        SeriesResult r;
        r.series_id = h.series_id;
        r.forecast_year = h.end_year() + 1;
        const auto stats = in_stage("yearly-stats", h.series_id, [&] { return build_yearly_stats(h); });
        r.stats = in_stage("ets", h.series_id, [&] { return forecast_yearly_stats(stats); });
        if (r.stats.dispersion_clamped)
            result.warnings.push_back(
                fmt::format("series '{}': dispersion forecast clamped to {}", h.series_id, r.stats.dispersion));
        if (holdout > 0) {
            const auto& full = corpus[i];
            std::array<double, kMonths> actual{};
            std::copy_n(full.values.begin() + static_cast<std::ptrdiff_t>(h.values.size()), kMonths, actual.begin());
            r.actual = actual;
        }
        result.series.push_back(std::move(r));
    }

    result.ensemble = in_stage("ensemble", "*", [&] {
        return ensemble::run_ensemble(normalized, config.train, config.ensemble);
    });

    std::vector<metrics::EvalRow> rows;
    for (std::size_t i = 0; i < result.series.size(); ++i) {
        auto& r = result.series[i];
        r.normalized = result.ensemble.series[i].aggregate;
        r.forecast = denormalize(r.normalized, r.stats.mean, r.stats.dispersion);
        r.positive = std::all_of(r.forecast.begin(), r.forecast.end(), [](double v) { return v > 0.0; });
        if (!r.positive)
            result.warnings.push_back(fmt::format("series '{}': non-positive demand forecast", r.series_id));
        for (double v : r.forecast)
            if (!std::isfinite(v))
                throw NumericError(fmt::format("stage 'denormalize', series '{}': non-finite forecast", r.series_id));
        if (r.actual)
            rows.push_back(in_stage("evaluate", r.series_id,
                                    [&] { return metrics::compute_metrics(*r.actual, r.forecast, r.series_id); }));
    }
    if (!rows.empty()) result.report = metrics::make_report(std::move(rows));
    return result;
}

} // namespace mtlf::pipeline
