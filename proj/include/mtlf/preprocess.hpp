#pragma once

#include "mtlf/dataset.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace mtlf {

// Per-year mean and dispersion of one series. Dispersion is the root sum of
// squared deviations over the 12 months (no division by 12), so a
// normalized year has unit Euclidean length around 1.
struct YearlyStats {
    std::vector<double> means;
    std::vector<double> dispersions;

    std::size_t years() const noexcept { return means.size(); }
};

struct NormalizedYear {
    std::array<double, kMonths> y{};
    double mean = 0.0;
    double dispersion = 0.0;
};

struct NormalizedSeries {
    std::string series_id;
    std::vector<double> values;
};

// y = (z - mean) / dispersion + 1. Throws DegenerateDispersionError on a
// constant year.
NormalizedYear normalize(std::span<const double, kMonths> z);

// z = (y - 1) * dispersion + mean.
std::array<double, kMonths> denormalize(std::span<const double, kMonths> y_hat, double mean_hat,
                                        double dispersion_hat);

YearlyStats build_yearly_stats(const MonthlyDemandSeries& series);

NormalizedSeries normalize_series(const MonthlyDemandSeries& series);

} // namespace mtlf
