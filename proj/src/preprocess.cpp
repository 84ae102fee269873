#include "mtlf/preprocess.hpp"

#include "mtlf/errors.hpp"

#include <fmt/format.h>

#include <cmath>

namespace mtlf {

namespace {

NormalizedYear normalize_or_throw(std::span<const double, kMonths> z, const std::string& where) {
    NormalizedYear out;
    double sum = 0.0;
    for (double v : z) sum += v;
    out.mean = sum / static_cast<double>(kMonths);
    double ss = 0.0;
    for (double v : z) ss += (v - out.mean) * (v - out.mean);
    out.dispersion = std::sqrt(ss);
    if (!(out.dispersion > 0.0))
        throw DegenerateDispersionError(fmt::format("{}zero dispersion (constant year)", where));
    for (std::size_t j = 0; j < kMonths; ++j) out.y[j] = (z[j] - out.mean) / out.dispersion + 1.0;
    return out;
}

} // namespace

NormalizedYear normalize(std::span<const double, kMonths> z) { return normalize_or_throw(z, ""); }

std::array<double, kMonths> denormalize(std::span<const double, kMonths> y_hat, double mean_hat,
                                        double dispersion_hat) {
    std::array<double, kMonths> z{};
    for (std::size_t j = 0; j < kMonths; ++j) z[j] = (y_hat[j] - 1.0) * dispersion_hat + mean_hat;
    return z;
}

YearlyStats build_yearly_stats(const MonthlyDemandSeries& series) {
    YearlyStats stats;
    stats.means.reserve(series.years());
    stats.dispersions.reserve(series.years());
    for (const auto& year : split_yearly(series)) {
        auto n = normalize_or_throw(
            year.values, fmt::format("series '{}' year {} ({}): ", series.series_id, year.year_index,
                                     series.start_year + static_cast<int>(year.year_index) - 1));
        stats.means.push_back(n.mean);
        stats.dispersions.push_back(n.dispersion);
    }
    return stats;
}

NormalizedSeries normalize_series(const MonthlyDemandSeries& series) {
    NormalizedSeries out{series.series_id, {}};
    out.values.reserve(series.values.size());
    for (const auto& year : split_yearly(series)) {
        auto n = normalize_or_throw(
            year.values, fmt::format("series '{}' year {} ({}): ", series.series_id, year.year_index,
                                     series.start_year + static_cast<int>(year.year_index) - 1));
        out.values.insert(out.values.end(), n.y.begin(), n.y.end());
    }
    return out;
}

} // namespace mtlf
