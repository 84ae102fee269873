#include "mtlf/errors.hpp"
#include "mtlf/metrics.hpp"
#include "synthetic.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace mtlf;
using namespace mtlf::metrics;

TEST_SUITE("metrics") {

TEST_CASE("hand computed values") {
    const std::vector<double> a{100.0, 100.0}, f{90.0, 110.0};
    const auto r = compute_metrics(a, f, "X");
    CHECK(r.series_id == "X");
    CHECK(r.mape == doctest::Approx(10.0));
    CHECK(r.mpe == doctest::Approx(0.0));
    CHECK(r.rmse == doctest::Approx(10.0));
    CHECK(r.median_ape == doctest::Approx(10.0));
    CHECK(r.ape_iqr == doctest::Approx(0.0));
}

TEST_CASE("over-forecasting gives a negative MPE") {
    const auto r = compute_metrics(std::vector<double>{200.0, 100.0}, std::vector<double>{220.0, 105.0});
    CHECK(r.mpe == doctest::Approx(-7.5));
    CHECK(r.mape == doctest::Approx(7.5));
}

TEST_CASE("exact forecasts score zero") {
    const std::vector<double> a{3.0, 5.0, 7.0};
    const auto r = compute_metrics(a, a);
    CHECK(r.mape == 0.0);
    CHECK(r.mpe == 0.0);
    CHECK(r.rmse == 0.0);
    CHECK(r.median_ape == 0.0);
    CHECK(r.ape_iqr == 0.0);
}

TEST_CASE("type 7 quantiles") {
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.25) == doctest::Approx(1.75));
    CHECK(quantile({1.0, 2.0, 3.0, 4.0}, 0.75) == doctest::Approx(3.25));
    CHECK(quantile({4.0, 1.0, 3.0, 2.0}, 0.5) == doctest::Approx(2.5));
    CHECK(quantile({7.0}, 0.9) == 7.0);
    CHECK(quantile({1.0, 5.0}, 0.0) == 1.0);
    CHECK(quantile({1.0, 5.0}, 1.0) == 5.0);
}

TEST_CASE("IQR of a twelve month year") {
    std::vector<double> a(12, 100.0), f;
    for (int i = 1; i <= 12; ++i) f.push_back(100.0 + i); // APE 1..12
    const auto r = compute_metrics(a, f);
    CHECK(r.median_ape == doctest::Approx(6.5));
    CHECK(r.ape_iqr == doctest::Approx(9.25 - 3.75));
    CHECK(r.mape == doctest::Approx(6.5));
}

TEST_CASE("metric properties on random vectors") {
    Rng rng(1);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> a(12), f(12);
        for (std::size_t j = 0; j < 12; ++j) {
            a[j] = rng.uniform(10.0, 1000.0);
            f[j] = a[j] * rng.uniform(0.7, 1.3);
        }
        const auto r = compute_metrics(a, f);
        CHECK(r.mape >= std::abs(r.mpe) - 1e-12);
        CHECK(r.mape >= 0.0);
        CHECK(r.rmse >= 0.0);
        CHECK(r.ape_iqr >= 0.0);
        const double k = rng.uniform(0.1, 10.0);
        std::vector<double> ak(a), fk(f);
        for (auto& v : ak) v *= k;
        for (auto& v : fk) v *= k;
        const auto rk = compute_metrics(ak, fk);
        CHECK(rk.mape == doctest::Approx(r.mape).epsilon(1e-12));
        CHECK(rk.mpe == doctest::Approx(r.mpe).epsilon(1e-9));
        CHECK(rk.median_ape == doctest::Approx(r.median_ape).epsilon(1e-12));
        CHECK(rk.ape_iqr == doctest::Approx(r.ape_iqr).epsilon(1e-9));
        CHECK(rk.rmse == doctest::Approx(k * r.rmse).epsilon(1e-12));
    }
}

TEST_CASE("invalid input") {
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{0.0, 1.0}, std::vector<double>{1.0, 1.0}), DataError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{1.0}, std::vector<double>{1.0, 1.0}), DataError);
    CHECK_THROWS_AS(compute_metrics(std::vector<double>{}, std::vector<double>{}), DataError);
}

TEST_CASE("pooled row is the equal-weight mean") {
    std::vector<EvalRow> rows{{"A", 1.0, 2.0, 3.0, 4.0, 5.0}, {"B", 3.0, 6.0, 1.0, 8.0, -1.0}};
    const auto report = make_report(rows);
    CHECK(report.pooled.series_id == "ALL");
    CHECK(report.pooled.median_ape == 2.0);
    CHECK(report.pooled.mape == 4.0);
    CHECK(report.pooled.ape_iqr == 2.0);
    CHECK(report.pooled.rmse == 6.0);
    CHECK(report.pooled.mpe == 2.0);
}

TEST_CASE("report CSV and table") {
    const auto report = make_report({compute_metrics(std::vector<double>{100.0, 100.0}, std::vector<double>{90.0, 110.0}, "A")});
    std::ostringstream csv;
    write_report_csv(csv, report);
    const auto text = csv.str();
    CHECK(text.rfind("series_id,median_ape,mape,ape_iqr,rmse,mpe\n", 0) == 0);
    CHECK(text.find("A,10.000000,10.000000,0.000000,10.000000,0.000000\n") != std::string::npos);
    CHECK(text.find("\nALL,") != std::string::npos);
    std::ostringstream table;
    write_report_table(table, report);
    CHECK(table.str().find("MAPE") != std::string::npos);
    CHECK(table.str().find("ALL") != std::string::npos);
}

}
