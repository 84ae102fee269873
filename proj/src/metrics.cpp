#include "mtlf/metrics.hpp"

#include "mtlf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace mtlf::metrics {

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw DataError("quantile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

EvalRow compute_metrics(std::span<const double> actual, std::span<const double> forecast, std::string series_id) {
    if (actual.size() != forecast.size())
        throw DataError(fmt::format("metrics: {} actuals vs {} forecasts", actual.size(), forecast.size()));
    if (actual.empty()) throw DataError("metrics: empty input");
    const auto n = static_cast<double>(actual.size());
    std::vector<double> ape(actual.size());
    double sum_ape = 0.0, sum_pe = 0.0, sum_sq = 0.0;
    for (std::size_t t = 0; t < actual.size(); ++t) {
        if (actual[t] == 0.0)
            throw DataError(fmt::format("metrics: actual value at {} is zero, percentage errors undefined", t));
        const double err = actual[t] - forecast[t];
        const double pe = 100.0 * err / actual[t];
        ape[t] = std::abs(pe);
        sum_ape += ape[t];
        sum_pe += pe;
        sum_sq += err * err;
    }
    EvalRow row;
    row.series_id = std::move(series_id);
    row.mape = sum_ape / n;
    row.mpe = sum_pe / n;
    row.rmse = std::sqrt(sum_sq / n);
    row.median_ape = quantile(ape, 0.5);
    row.ape_iqr = quantile(ape, 0.75) - quantile(ape, 0.25);
    return row;
}

EvalRow pool(std::span<const EvalRow> rows) {
    if (rows.empty()) throw DataError("cannot pool an empty report");
    EvalRow out;
    out.series_id = "ALL";
    for (const auto& r : rows) {
        out.median_ape += r.median_ape;
        out.mape += r.mape;
        out.ape_iqr += r.ape_iqr;
        out.rmse += r.rmse;
        out.mpe += r.mpe;
    }
    const auto n = static_cast<double>(rows.size());
    out.median_ape /= n;
    out.mape /= n;
    out.ape_iqr /= n;
    out.rmse /= n;
    out.mpe /= n;
    return out;
}

EvalReport make_report(std::vector<EvalRow> rows) {
    EvalReport report;
    report.pooled = pool(rows);
    report.rows = std::move(rows);
    return report;
}

void write_report_csv(std::ostream& out, const EvalReport& report) {
    out << "series_id,median_ape,mape,ape_iqr,rmse,mpe\n";
    auto line = [&](const EvalRow& r) {
        out << fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.series_id, r.median_ape, r.mape, r.ape_iqr,
                           r.rmse, r.mpe);
    };
    for (const auto& r : report.rows) line(r);
    line(report.pooled);
}

void write_report_table(std::ostream& out, const EvalReport& report) {
    std::size_t width = 6;
    for (const auto& r : report.rows) width = std::max(width, r.series_id.size());
    out << fmt::format("{:<{}}  {:>10}  {:>10}  {:>10}  {:>12}  {:>10}\n", "series", width, "MedianAPE", "MAPE", "IQR",
                       "RMSE", "MPE");
    auto line = [&](const EvalRow& r) {
        out << fmt::format("{:<{}}  {:>10.2f}  {:>10.2f}  {:>10.2f}  {:>12.2f}  {:>10.2f}\n", r.series_id, width,
                           r.median_ape, r.mape, r.ape_iqr, r.rmse, r.mpe);
    };
    for (const auto& r : report.rows) line(r);
    out << std::string(width + 64, '-') << '\n';
    line(report.pooled);
}

} // namespace mtlf::metrics
