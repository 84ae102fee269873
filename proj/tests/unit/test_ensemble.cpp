#include "mtlf/ensemble.hpp"
#include "mtlf/errors.hpp"
#include "synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

using namespace mtlf;
using namespace mtlf::ensemble;

namespace {

std::vector<NormalizedSeries> normalized_corpus(std::size_t count, std::size_t years, std::uint64_t seed) {
    std::vector<NormalizedSeries> out;
    for (const auto& s : testing::synthetic_corpus(count, years, seed)) out.push_back(normalize_series(s));
    return out;
}

training::TrainConfig tiny_train() {
    training::TrainConfig c;
    c.epochs = 2;
    c.snapshots = 2;
    c.state_size = 4;
    return c;
}

std::vector<std::size_t> membership_counts(const std::vector<std::vector<std::size_t>>& subsets, std::size_t m) {
    std::vector<std::size_t> counts(m, 0);
    for (const auto& s : subsets)
        for (auto i : s) ++counts.at(i);
    return counts;
}

} // namespace

TEST_SUITE("ensemble") {

TEST_CASE("defaults") {
    EnsembleConfig c;
    CHECK(c.subsets == 4);
    CHECK(c.runs == 3);
    CHECK(c.coverage == 2);
    CHECK_NOTHROW(c.validate());
    c.coverage = 5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.coverage = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("full coverage and a single subset") {
    for (const auto& s : make_subsets(7, 4, 4, 1)) CHECK(s == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6});
    const auto one = make_subsets(5, 1, 1, 2);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("twenty series, four subsets, coverage two") {
    const auto subsets = make_subsets(20, 4, 2, 99);
    REQUIRE(subsets.size() == 4);
    for (const auto& s : subsets) {
        CHECK(s.size() == 10);
        CHECK(std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end());
    }
    for (auto c : membership_counts(subsets, 20)) CHECK(c == 2);
}

TEST_CASE("coverage and balance for random shapes") {
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t m = 1 + rng.below(40);
        const int k = 1 + static_cast<int>(rng.below(8));
        const int c = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        const auto subsets = make_subsets(m, k, c, rng.next());
        REQUIRE(subsets.size() == static_cast<std::size_t>(k));
        for (auto n : membership_counts(subsets, m)) CHECK(n == static_cast<std::size_t>(c));
        std::size_t lo = m, hi = 0;
        for (const auto& s : subsets) lo = std::min(lo, s.size()), hi = std::max(hi, s.size());
        CHECK(hi - lo <= 1);
    }
}

TEST_CASE("subsets depend on the seed and are redrawn per run") {
    CHECK(make_subsets(20, 4, 2, 5) == make_subsets(20, 4, 2, 5));
    CHECK(make_subsets(20, 4, 2, run_seed(7, 0)) != make_subsets(20, 4, 2, run_seed(7, 1)));
    CHECK_THROWS_AS(make_subsets(0, 4, 2, 1), DataError);
    CHECK_THROWS_AS(make_subsets(3, 0, 1, 1), ConfigError);
}

TEST_CASE("seed derivation is hierarchical") {
    CHECK(run_seed(1, 0) == derive_seed(1, 0));
    CHECK(replica_seed(run_seed(1, 2), 3) == derive_seed(derive_seed(1, 2), 3));
    CHECK(run_seed(1, 0) != run_seed(1, 1));
    CHECK(run_seed(1, 0) != run_seed(2, 0));
}

TEST_CASE("aggregate is the arithmetic mean") {
    std::vector<std::array<double, kMonths>> m(3);
    for (std::size_t i = 0; i < 3; ++i) m[i].fill(static_cast<double>(i + 1));
    for (double v : aggregate(m)) CHECK(v == 2.0);
}

TEST_CASE("aggregate does not depend on member order") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::array<double, kMonths>> m(2 + rng.below(10));
        for (auto& f : m)
            for (auto& v : f) v = rng.uniform(0.5, 1.5) * std::pow(10.0, rng.uniform(-3.0, 3.0));
        const auto a = aggregate(m);
        rng.shuffle(m);
        const auto b = aggregate(m);
        CHECK(std::memcmp(a.data(), b.data(), sizeof a) == 0);
    }
    CHECK_THROWS(aggregate({}));
}

TEST_CASE("members per series and serial versus parallel") {
    const auto series = normalized_corpus(6, 4, 5);
    EnsembleConfig cfg;
    cfg.subsets = 3;
    cfg.runs = 3;
    cfg.coverage = 2;
    cfg.master_seed = 11;
    cfg.threads = 1;
    const auto serial = run_ensemble(series, tiny_train(), cfg);
    cfg.threads = 4;
    const auto parallel = run_ensemble(series, tiny_train(), cfg);
    REQUIRE(serial.series.size() == series.size());
    CHECK(serial.replicas.size() == 9);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& se = serial.series[i];
        CHECK(se.series_id == series[i].series_id);
        CHECK(se.members.size() == 6);
        for (int r = 0; r < 3; ++r)
            CHECK(std::count_if(se.members.begin(), se.members.end(), [&](const Member& m) { return m.run == r; }) == 2);
        std::vector<std::array<double, kMonths>> f;
        for (const auto& m : se.members) f.push_back(m.forecast);
        std::array<double, kMonths> mean{};
        for (std::size_t j = 0; j < kMonths; ++j) {
            for (const auto& x : f) mean[j] += x[j];
            mean[j] /= static_cast<double>(f.size());
            CHECK(se.aggregate[j] == doctest::Approx(mean[j]).epsilon(1e-14));
        }
        const auto& pe = parallel.series[i];
        CHECK(std::memcmp(se.aggregate.data(), pe.aggregate.data(), sizeof se.aggregate) == 0);
        REQUIRE(pe.members.size() == se.members.size());
        for (std::size_t k = 0; k < se.members.size(); ++k)
            CHECK(std::memcmp(se.members[k].forecast.data(), pe.members[k].forecast.data(), sizeof(double) * 12) == 0);
    }
}

TEST_CASE("averaging does not increase spread across seeds") {
    const auto series = normalized_corpus(4, 4, 6);
    EnsembleConfig cfg;
    cfg.subsets = 2;
    cfg.runs = 2;
    cfg.coverage = 1;
    cfg.threads = 1;
    const std::size_t seeds = 20;
    // [seed][series] -> aggregate and member 0..3 forecasts
    std::vector<std::vector<std::array<double, kMonths>>> agg(seeds);
    std::vector<std::vector<std::vector<std::array<double, kMonths>>>> members(seeds);
    for (std::size_t s = 0; s < seeds; ++s) {
        cfg.master_seed = 1000 + s;
        const auto e = run_ensemble(series, tiny_train(), cfg);
        for (const auto& se : e.series) {
            agg[s].push_back(se.aggregate);
            std::vector<std::array<double, kMonths>> f;
            for (const auto& m : se.members) f.push_back(m.forecast);
            members[s].push_back(f);
        }
    }
    auto sd = [](const std::vector<double>& v) {
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::sqrt(ss / (v.size() - 1));
    };
    for (std::size_t i = 0; i < series.size(); ++i)
        for (std::size_t j = 0; j < kMonths; ++j) {
            std::vector<double> a;
            for (std::size_t s = 0; s < seeds; ++s) a.push_back(agg[s][i][j]);
            double member_sd = 0.0;
            const std::size_t n_members = members[0][i].size();
            for (std::size_t k = 0; k < n_members; ++k) {
                std::vector<double> v;
                for (std::size_t s = 0; s < seeds; ++s) v.push_back(members[s][i][k][j]);
                member_sd += sd(v);
            }
            member_sd /= static_cast<double>(n_members);
            CHECK(sd(a) <= member_sd);
        }
}

TEST_CASE("replica failures name run and subset") {
    auto series = normalized_corpus(3, 4, 7);
    series[1].values.resize(24);
    EnsembleConfig cfg;
    cfg.subsets = 1;
    cfg.runs = 1;
    cfg.coverage = 1;
    cfg.threads = 1;
    try {
        run_ensemble(series, tiny_train(), cfg);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("run 0, subset 0") != std::string::npos);
    }
}

}
