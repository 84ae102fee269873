#include "mtlf/dataset.hpp"
#include "mtlf/errors.hpp"
#include "synthetic.hpp"

#include <doctest.h>

#include <sstream>
#include <string>

using namespace mtlf;

namespace {

std::string csv_for(std::string_view id, int first_year, int first_month, std::size_t months, double start = 100.0) {
    std::string s = "series_id,year,month,value\n";
    int y = first_year, m = first_month;
    for (std::size_t i = 0; i < months; ++i) {
        s += std::string(id) + "," + std::to_string(y) + "," + std::to_string(m) + "," +
             std::to_string(start + static_cast<double>(i)) + "\n";
        if (++m > 12) m = 1, ++y;
    }
    return s;
}

LoadResult parse(const std::string& text) {
    std::istringstream in(text);
    return parse_corpus(in, "test.csv");
}

} // namespace

TEST_SUITE("dataset") {

TEST_CASE("two whole years load as one series of length 24") {
    auto r = parse(csv_for("PL", 2012, 1, 24));
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.corpus[0].series_id == "PL");
    CHECK(r.corpus[0].start_year == 2012);
    CHECK(r.corpus[0].values.size() == 24);
    CHECK(r.corpus[0].values[23] == doctest::Approx(123.0));
    CHECK(r.warnings.empty());
    CHECK(r.rejected.empty());
}

TEST_CASE("rows are sorted regardless of file order") {
    std::string text = "series_id,year,month,value\n";
    for (int m = 12; m >= 1; --m) text += "A,2015," + std::to_string(m) + "," + std::to_string(m * 10) + "\n";
    auto r = parse(text);
    REQUIRE(r.corpus.size() == 1);
    for (std::size_t j = 0; j < kMonths; ++j) CHECK(r.corpus[0].values[j] == doctest::Approx(10.0 * (j + 1)));
}

TEST_CASE("a missing month rejects the series and names the gap") {
    std::string text = csv_for("DE", 2012, 1, 24);
    const std::string row = "DE,2012,6,105.000000\n";
    auto pos = text.find(row);
    REQUIRE(pos != std::string::npos);
    text.erase(pos, row.size());
    text += csv_for("FR", 2012, 1, 12).substr(std::string("series_id,year,month,value\n").size());
    auto r = parse(text);
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.corpus[0].series_id == "FR");
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].find("DE") != std::string::npos);
    CHECK(r.rejected[0].find("2012-06") != std::string::npos);
}

TEST_CASE("a gap in the only series is an error naming series and month") {
    std::string text = csv_for("DE", 2012, 1, 24);
    const std::string row = "DE,2012,6,105.000000\n";
    text.erase(text.find(row), row.size());
    try {
        parse(text);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string what = e.what();
        CHECK(what.find("DE") != std::string::npos);
        CHECK(what.find("2012-06") != std::string::npos);
    }
}

TEST_CASE("a non-positive value rejects the series") {
    std::string text = csv_for("A", 2012, 1, 12) + "B,2012,1,-5\n";
    for (int m = 2; m <= 12; ++m) text += "B,2012," + std::to_string(m) + ",10\n";
    auto r = parse(text);
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.corpus[0].series_id == "A");
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].find("B") != std::string::npos);
    CHECK_THROWS_AS(parse("series_id,year,month,value\nB,2012,1,-5\n"), DataError);
}

TEST_CASE("duplicate rows are an error") {
    std::string text = csv_for("A", 2012, 1, 12) + "A,2012,3,99\n";
    CHECK_THROWS_AS(parse(text), DataError);
}

TEST_CASE("malformed input is an error") {
    CHECK_THROWS_AS(parse("id,year,month,value\nA,2012,1,5\n"), DataError);
    CHECK_THROWS_AS(parse("series_id,year,month,value\nA,2012,13,5\n"), DataError);
    CHECK_THROWS_AS(parse("series_id,year,month,value\nA,2012,1,abc\n"), DataError);
    CHECK_THROWS_AS(parse("series_id,year,month,value\nA,2012,1\n"), DataError);
    CHECK_THROWS_AS(parse(""), DataError);
}

TEST_CASE("partial years are cut to whole January-December years with a warning") {
    auto r = parse(csv_for("A", 2011, 7, 36));
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.corpus[0].start_year == 2012);
    CHECK(r.corpus[0].values.size() == 24);
    CHECK(r.corpus[0].values[0] == doctest::Approx(106.0));
    CHECK(r.warnings.size() == 1);
}

TEST_CASE("a series without a whole year is rejected") {
    auto r = parse(csv_for("A", 2012, 1, 12) + csv_for("B", 2012, 3, 12).substr(27));
    REQUIRE(r.corpus.size() == 1);
    CHECK(r.rejected.size() == 1);
}

TEST_CASE("loading is deterministic") {
    const auto text = csv_for("A", 2012, 1, 36) + csv_for("B", 2010, 1, 24).substr(27);
    auto a = parse(text), b = parse(text);
    REQUIRE(a.corpus.size() == b.corpus.size());
    for (std::size_t i = 0; i < a.corpus.size(); ++i) {
        CHECK(a.corpus[i].series_id == b.corpus[i].series_id);
        CHECK(a.corpus[i].values == b.corpus[i].values);
    }
}

TEST_CASE("write_corpus_csv and parse_corpus round trip") {
    const auto corpus = testing::synthetic_corpus(3, 4, 11);
    std::ostringstream out;
    write_corpus_csv(corpus, out);
    auto back = parse(out.str());
    REQUIRE(back.corpus.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back.corpus[i].series_id == corpus[i].series_id);
        CHECK(back.corpus[i].start_year == corpus[i].start_year);
        CHECK(back.corpus[i].values == corpus[i].values);
    }
}

TEST_CASE("corpus rejects duplicate ids and invalid series") {
    MonthlyDemandSeries a{"A", 2000, std::vector<double>(12, 1.0)};
    CHECK_THROWS_AS(Corpus({a, a}), DataError);
    MonthlyDemandSeries bad{"B", 2000, std::vector<double>(13, 1.0)};
    CHECK_THROWS_AS(Corpus({bad}), DataError);
    bad.values.assign(12, 1.0);
    bad.values[4] = 0.0;
    CHECK_THROWS_AS(validate_series(bad), DataError);
    Corpus ok({a});
    CHECK(ok.find("A") != nullptr);
    CHECK(ok.find("Z") == nullptr);
}

TEST_CASE("split_yearly") {
    MonthlyDemandSeries one{"A", 2000, {}};
    for (int i = 1; i <= 12; ++i) one.values.push_back(i);
    auto years = split_yearly(one);
    REQUIRE(years.size() == 1);
    CHECK(years[0].year_index == 1);
    for (std::size_t j = 0; j < kMonths; ++j) CHECK(years[0].values[j] == static_cast<double>(j + 1));

    MonthlyDemandSeries two{"B", 2000, std::vector<double>(24, 3.0)};
    CHECK(split_yearly(two).size() == 2);
}

TEST_CASE("concat of split_yearly reproduces the series exactly") {
    Rng rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        MonthlyDemandSeries s{"R", 1990, {}};
        const auto years = 1 + rng.below(15);
        for (std::size_t i = 0; i < years * kMonths; ++i) s.values.push_back(rng.uniform(0.1, 1e6));
        const auto parts = split_yearly(s);
        CHECK(concat_yearly(parts) == s.values);
    }
}

}
