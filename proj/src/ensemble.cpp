#include "mtlf/ensemble.hpp"

#include "mtlf/errors.hpp"
#include "mtlf/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <numeric>
#include <thread>

namespace mtlf::ensemble {

void EnsembleConfig::validate() const {
    if (subsets < 1) throw ConfigError(fmt::format("subset count K must be >= 1 (got {})", subsets));
    if (runs < 1) throw ConfigError(fmt::format("run count R must be >= 1 (got {})", runs));
    if (coverage < 1 || coverage > subsets)
        throw ConfigError(fmt::format("coverage c must be in [1, K={}] (got {})", subsets, coverage));
}

std::uint64_t run_seed(std::uint64_t master_seed, int run) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(run));
}

std::uint64_t replica_seed(std::uint64_t run_seed_value, int subset) {
    return derive_seed(run_seed_value, static_cast<std::uint64_t>(subset));
}

std::vector<std::vector<std::size_t>> make_subsets(std::size_t series_count, int subsets, int coverage,
                                                   std::uint64_t seed) {
    if (series_count == 0) throw DataError("cannot build training subsets of an empty corpus");
    EnsembleConfig{subsets, 1, coverage}.validate();
    const auto k = static_cast<std::size_t>(subsets);
    const auto c = static_cast<std::size_t>(coverage);
    Rng rng(seed);
    std::vector<std::size_t> order(series_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    const std::size_t offset = rng.below(k);

    std::vector<std::vector<std::size_t>> out(k);
    std::size_t slot = offset;
    for (std::size_t idx : order) {
        // c consecutive slots are c distinct subsets because c <= K.
        for (std::size_t j = 0; j < c; ++j) out[(slot + j) % k].push_back(idx);
        slot += c;
    }
    for (auto& s : out) std::sort(s.begin(), s.end());
    return out;
}

std::array<double, kMonths> aggregate(std::span<const std::array<double, kMonths>> members) {
    if (members.empty()) throw UsageError("cannot aggregate zero members");
    std::array<double, kMonths> out{};
    std::vector<double> column(members.size());
    for (std::size_t j = 0; j < kMonths; ++j) {
        for (std::size_t i = 0; i < members.size(); ++i) column[i] = members[i][j];
        std::sort(column.begin(), column.end());
        // Neumaier-compensated sum of the canonical (sorted) order.
        double sum = 0.0, comp = 0.0;
        for (double v : column) {
            const double t = sum + v;
            comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
            sum = t;
        }
        out[j] = (sum + comp) / static_cast<double>(members.size());
    }
    return out;
}

namespace {

struct Job {
    int run;
    int subset;
    std::uint64_t seed;
    std::vector<std::size_t> members; // indices into the series span
};

struct JobResult {
    ReplicaInfo info;
    std::vector<std::array<double, kMonths>> forecasts; // aligned with Job::members
    std::exception_ptr error;
};

JobResult run_job(const Job& job, std::span<const NormalizedSeries> series, const training::TrainConfig& train,
                  bool keep_checkpoints) {
    JobResult result;
    result.info.run = job.run;
    result.info.subset = job.subset;
    result.info.seed = job.seed;
    std::vector<NormalizedSeries> subset;
    subset.reserve(job.members.size());
    for (std::size_t idx : job.members) subset.push_back(series[idx]);
    auto replica = training::train_replica(subset, train, job.seed, fmt::format("r{}k{}", job.run, job.subset));
    for (const auto& s : subset) result.forecasts.push_back(training::forecast_replica(replica, s));
    result.info.series_ids = std::move(replica.series_ids);
    result.info.log = std::move(replica.log);
    if (keep_checkpoints) {
        for (auto& snap : replica.snapshots) {
            Checkpoint ckpt{std::move(snap.network), std::move(snap.seasons), {}};
            ckpt.hyperparameters = {
                {"epoch", std::to_string(snap.epoch)},     {"run", std::to_string(job.run)},
                {"subset", std::to_string(job.subset)},    {"replica_seed", std::to_string(job.seed)},
                {"epochs", std::to_string(train.epochs)},  {"learning_rate", fmt::format("{}", train.learning_rate)},
                {"tau", fmt::format("{}", train.tau)},     {"snapshots", std::to_string(train.snapshots)},
            };
            result.info.checkpoints.push_back(std::move(ckpt));
        }
    }
    return result;
}

} // namespace

EnsembleForecast run_ensemble(std::span<const NormalizedSeries> series, const training::TrainConfig& train,
                              const EnsembleConfig& config) {
    config.validate();
    train.validate();
    if (series.empty()) throw DataError("ensemble needs at least one series");

    std::vector<Job> jobs;
    for (int r = 0; r < config.runs; ++r) {
        const std::uint64_t rs = run_seed(config.master_seed, r);
        auto subsets = make_subsets(series.size(), config.subsets, config.coverage, rs);
        for (int k = 0; k < config.subsets; ++k) {
            if (subsets[static_cast<std::size_t>(k)].empty()) continue; // more subsets than series
            jobs.push_back({r, k, replica_seed(rs, k), std::move(subsets[static_cast<std::size_t>(k)])});
        }
    }

    std::vector<JobResult> results(jobs.size());
    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                results[j] = run_job(jobs[j], series, train, config.keep_checkpoints);
            } catch (...) {
                results[j].error = std::current_exception();
            }
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (!results[j].error) continue;
        try {
            std::rethrow_exception(results[j].error);
        } catch (const Error& e) {
            const auto msg = fmt::format("replica (run {}, subset {}) failed: {}", jobs[j].run, jobs[j].subset, e.what());
            if (dynamic_cast<const DataError*>(&e)) throw DataError(msg);
            if (dynamic_cast<const ConfigError*>(&e)) throw ConfigError(msg);
            throw NumericError(msg);
        }
    }

    EnsembleForecast out;
    out.series.resize(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) out.series[i].series_id = series[i].series_id;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        for (std::size_t m = 0; m < jobs[j].members.size(); ++m)
            out.series[jobs[j].members[m]].members.push_back({jobs[j].run, jobs[j].subset, results[j].forecasts[m]});
        out.replicas.push_back(std::move(results[j].info));
    }
    for (auto& s : out.series) {
        std::vector<std::array<double, kMonths>> f;
        for (const auto& m : s.members) f.push_back(m.forecast);
        s.aggregate = aggregate(f);
    }
    return out;
}

} // namespace mtlf::ensemble
