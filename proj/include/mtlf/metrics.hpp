#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mtlf::metrics {

// Percent metrics use APE_t = 100 |a_t - f_t| / |a_t| and
// PE_t = 100 (a_t - f_t) / a_t, so over-forecasting gives a negative MPE.
struct EvalRow {
    std::string series_id;
    double median_ape = 0.0;
    double mape = 0.0;
    double ape_iqr = 0.0;
    double rmse = 0.0; // demand units
    double mpe = 0.0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
    EvalRow pooled; // equal-weight mean of the per-series rows, id "ALL"
};

// Linear-interpolation quantile on the sorted sample, positions p * (n - 1)
// (the "inclusive" / type 7 definition).
double quantile(std::vector<double> values, double p);

// Throws DataError on length mismatch, empty input or a zero actual.
EvalRow compute_metrics(std::span<const double> actual, std::span<const double> forecast,
                        std::string series_id = {});

EvalRow pool(std::span<const EvalRow> rows);
EvalReport make_report(std::vector<EvalRow> rows);

// Header `series_id,median_ape,mape,ape_iqr,rmse,mpe`, one row per series,
// then the pooled row.
void write_report_csv(std::ostream& out, const EvalReport& report);
// Aligned plain-text table of the same content.
void write_report_table(std::ostream& out, const EvalReport& report);

} // namespace mtlf::metrics
