#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mtlf {

inline constexpr std::size_t kMonths = 12;

// One series of monthly demand, January of start_year through December of
// the last year. Length is a positive multiple of 12 and every value is > 0.
struct MonthlyDemandSeries {
    std::string series_id;
    int start_year = 0;
    std::vector<double> values;

    std::size_t years() const noexcept { return values.size() / kMonths; }
    int end_year() const noexcept { return start_year + static_cast<int>(years()) - 1; }
};

struct YearlyVector {
    std::size_t year_index = 0; // 1-based position within the series
    std::array<double, kMonths> values{};
};

// Throws DataError when the series breaks its invariants.
void validate_series(const MonthlyDemandSeries& series);

// Immutable collection of validated series with unique ids.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<MonthlyDemandSeries> series);

    std::size_t size() const noexcept { return series_.size(); }
    bool empty() const noexcept { return series_.empty(); }
    const std::vector<MonthlyDemandSeries>& series() const noexcept { return series_; }
    const MonthlyDemandSeries& operator[](std::size_t i) const { return series_.at(i); }

    // nullptr when absent.
    const MonthlyDemandSeries* find(std::string_view id) const noexcept;

    auto begin() const noexcept { return series_.begin(); }
    auto end() const noexcept { return series_.end(); }

private:
    std::vector<MonthlyDemandSeries> series_;
};

struct LoadResult {
    Corpus corpus;
    std::vector<std::string> warnings; // e.g. truncation to whole years
    std::vector<std::string> rejected; // one diagnostic per dropped series
};

// Reads the long CSV format `series_id,year,month,value`.
//
// Duplicate (series_id, year, month) rows and malformed lines throw. A
// series with a missing month, a non-positive value or no complete
// January-December year is dropped and reported in `rejected`; when every
// series is dropped the call throws with all diagnostics. Partial leading
// and trailing years are cut off with a warning.
LoadResult load_corpus(const std::filesystem::path& path);
LoadResult parse_corpus(std::istream& in, std::string_view source_name = "<stream>");

std::vector<YearlyVector> split_yearly(const MonthlyDemandSeries& series);
std::vector<double> concat_yearly(std::span<const YearlyVector> years);

// Writes `series_id,year,month,value` rows; the inverse of load_corpus.
void write_corpus_csv(const Corpus& corpus, std::ostream& out);

} // namespace mtlf
