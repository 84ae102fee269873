#include "mtlf/dataset.hpp"

#include "mtlf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

namespace mtlf {

namespace {

struct Row {
    int year;
    int month;
    double value;
    std::size_t line;
};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

int parse_int(std::string_view s, std::string_view what, std::string_view src, std::size_t line) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw DataError(fmt::format("{}:{}: invalid {} '{}'", src, line, what, s));
    return v;
}

double parse_double(std::string_view s, std::string_view src, std::size_t line) {
    // from_chars for double is available in libstdc++ 11.
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw DataError(fmt::format("{}:{}: invalid value '{}'", src, line, s));
    return v;
}

int month_ordinal(int year, int month) { return year * 12 + (month - 1); }

} // namespace

void validate_series(const MonthlyDemandSeries& s) {
    if (s.series_id.empty()) throw DataError("series with empty id");
    if (s.values.empty() || s.values.size() % kMonths != 0)
        throw DataError(fmt::format("series '{}': length {} is not a positive multiple of 12",
                                    s.series_id, s.values.size()));
    for (std::size_t t = 0; t < s.values.size(); ++t) {
        const double v = s.values[t];
        if (!(v > 0.0) || !std::isfinite(v))
            throw DataError(fmt::format("series '{}': non-positive or non-finite value {} at {}-{:02d}",
                                        s.series_id, v, s.start_year + static_cast<int>(t / 12),
                                        static_cast<int>(t % 12) + 1));
    }
}

Corpus::Corpus(std::vector<MonthlyDemandSeries> series) : series_(std::move(series)) {
    if (series_.empty()) throw DataError("corpus is empty");
    std::set<std::string_view> ids;
    for (const auto& s : series_) {
        validate_series(s);
        if (!ids.insert(s.series_id).second)
            throw DataError(fmt::format("duplicate series id '{}'", s.series_id));
    }
}

const MonthlyDemandSeries* Corpus::find(std::string_view id) const noexcept {
    auto it = std::find_if(series_.begin(), series_.end(),
                           [&](const MonthlyDemandSeries& s) { return s.series_id == id; });
    return it == series_.end() ? nullptr : &*it;
}

LoadResult parse_corpus(std::istream& in, std::string_view src) {
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<Row>> rows;

    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view view = trim(line);
        if (view.empty()) continue;
        auto fields = split_fields(view);
        if (!header_seen) {
            if (fields.size() != 4 || fields[0] != "series_id" || fields[1] != "year" ||
                fields[2] != "month" || fields[3] != "value")
                throw DataError(fmt::format("{}:{}: expected header 'series_id,year,month,value'", src, lineno));
            header_seen = true;
            continue;
        }
        if (fields.size() != 4)
            throw DataError(fmt::format("{}:{}: expected 4 fields, got {}", src, lineno, fields.size()));
        if (fields[0].empty()) throw DataError(fmt::format("{}:{}: empty series_id", src, lineno));
        Row r{parse_int(fields[1], "year", src, lineno), parse_int(fields[2], "month", src, lineno),
              parse_double(fields[3], src, lineno), lineno};
        if (r.month < 1 || r.month > 12)
            throw DataError(fmt::format("{}:{}: month {} outside 1..12", src, lineno, r.month));
        std::string id(fields[0]);
        auto [it, inserted] = rows.try_emplace(id);
        if (inserted) order.push_back(id);
        it->second.push_back(r);
    }
    if (!header_seen) throw DataError(fmt::format("{}: empty file", src));

    LoadResult result;
    std::vector<MonthlyDemandSeries> accepted;
    for (const auto& id : order) {
        auto& rs = rows[id];
        std::sort(rs.begin(), rs.end(), [](const Row& a, const Row& b) {
            return month_ordinal(a.year, a.month) < month_ordinal(b.year, b.month);
        });
        for (std::size_t i = 1; i < rs.size(); ++i) {
            if (month_ordinal(rs[i].year, rs[i].month) == month_ordinal(rs[i - 1].year, rs[i - 1].month))
                throw DataError(fmt::format("{}:{}: duplicate row for series '{}' {}-{:02d} (first at line {})",
                                            src, rs[i].line, id, rs[i].year, rs[i].month,
                                            std::min(rs[i].line, rs[i - 1].line)));
        }

        std::string problem;
        for (std::size_t i = 1; i < rs.size() && problem.empty(); ++i) {
            int prev = month_ordinal(rs[i - 1].year, rs[i - 1].month);
            int cur = month_ordinal(rs[i].year, rs[i].month);
            if (cur != prev + 1) {
                int missing = prev + 1;
                problem = fmt::format("series '{}': missing month {}-{:02d}", id, missing / 12, missing % 12 + 1);
            }
        }
        for (std::size_t i = 0; i < rs.size() && problem.empty(); ++i) {
            if (!(rs[i].value > 0.0))
                problem = fmt::format("series '{}': non-positive value {} at {}-{:02d} (line {})", id,
                                      rs[i].value, rs[i].year, rs[i].month, rs[i].line);
        }
        if (problem.empty()) {
            // Cut to the largest January..December window.
            std::size_t first = 0;
            while (first < rs.size() && rs[first].month != 1) ++first;
            std::size_t last = rs.size();
            while (last > first && rs[last - 1].month != 12) --last;
            if (last <= first || last - first < kMonths) {
                problem = fmt::format("series '{}': no complete January-December year", id);
            } else {
                if (first != 0 || last != rs.size())
                    result.warnings.push_back(fmt::format(
                        "series '{}': truncated to whole years {}..{} (dropped {} months)", id,
                        rs[first].year, rs[last - 1].year, rs.size() - (last - first)));
                MonthlyDemandSeries s;
                s.series_id = id;
                s.start_year = rs[first].year;
                s.values.reserve(last - first);
                for (std::size_t i = first; i < last; ++i) s.values.push_back(rs[i].value);
                accepted.push_back(std::move(s));
            }
        }
        if (!problem.empty()) result.rejected.push_back(std::move(problem));
    }

    if (accepted.empty()) {
        std::string msg = fmt::format("{}: no usable series", src);
        for (const auto& r : result.rejected) msg += "\n  " + r;
        throw DataError(msg);
    }
    result.corpus = Corpus(std::move(accepted));
    return result;
}

LoadResult load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(fmt::format("cannot open data file '{}'", path.string()));
    return parse_corpus(in, path.string());
}

std::vector<YearlyVector> split_yearly(const MonthlyDemandSeries& series) {
    std::vector<YearlyVector> out(series.years());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].year_index = i + 1;
        std::copy_n(series.values.begin() + static_cast<std::ptrdiff_t>(i * kMonths), kMonths,
                    out[i].values.begin());
    }
    return out;
}

std::vector<double> concat_yearly(std::span<const YearlyVector> years) {
    std::vector<double> out;
    out.reserve(years.size() * kMonths);
    for (const auto& y : years) out.insert(out.end(), y.values.begin(), y.values.end());
    return out;
}

void write_corpus_csv(const Corpus& corpus, std::ostream& out) {
    out << "series_id,year,month,value\n";
    for (const auto& s : corpus) {
        for (std::size_t t = 0; t < s.values.size(); ++t)
            out << fmt::format("{},{},{},{:.17g}\n", s.series_id, s.start_year + static_cast<int>(t / 12),
                               t % 12 + 1, s.values[t]);
    }
}

} // namespace mtlf
