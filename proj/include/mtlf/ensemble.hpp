#pragma once

#include "mtlf/checkpoint.hpp"
#include "mtlf/preprocess.hpp"
#include "mtlf/training.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mtlf::ensemble {

// K subset models per run, R runs, each series in `coverage` of the K
// subsets. The snapshot count L lives in TrainConfig.
struct EnsembleConfig {
    int subsets = 4;  // K
    int runs = 3;     // R
    int coverage = 2; // c, 1 <= c <= K
    std::uint64_t master_seed = 0;
    unsigned threads = 0; // 0 = hardware concurrency
    bool keep_checkpoints = false;

    void validate() const;
};

// Seed derivation: run_seed = derive_seed(master_seed, r),
// replica_seed = derive_seed(run_seed, k). Subsets of run r are drawn from
// Rng(run_seed).
std::uint64_t run_seed(std::uint64_t master_seed, int run);
std::uint64_t replica_seed(std::uint64_t run_seed, int subset);

// Assigns each of `series_count` series to exactly `coverage` of the K
// subsets: a seeded shuffle, then round-robin over subsets starting at a
// seeded offset, so sizes differ by at most one. Each returned set is sorted.
// Throws DataError when series_count is 0, ConfigError on bad K or c.
std::vector<std::vector<std::size_t>> make_subsets(std::size_t series_count, int subsets, int coverage,
                                                   std::uint64_t run_seed);

struct Member {
    int run = 0;
    int subset = 0;
    std::array<double, kMonths> forecast{}; // already averaged over L snapshots
};

struct SeriesEnsemble {
    std::string series_id;
    std::vector<Member> members; // ordered by (run, subset)
    std::array<double, kMonths> aggregate{};
};

struct ReplicaInfo {
    int run = 0;
    int subset = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> series_ids;
    std::vector<training::EpochRecord> log;
    std::vector<Checkpoint> checkpoints; // one per snapshot when keep_checkpoints is set
};

struct EnsembleForecast {
    std::vector<SeriesEnsemble> series; // aligned with the input series
    std::vector<ReplicaInfo> replicas;  // ordered by (run, subset)
};

// Elementwise arithmetic mean. Each month's values are summed in ascending
// order, so the result does not depend on member order.
std::array<double, kMonths> aggregate(std::span<const std::array<double, kMonths>> members);

// Trains R x K replicas (in parallel up to `threads`) and averages, per
// series, the forecasts of every replica whose subset contains it. Parallel
// and serial execution give identical results. A failing replica aborts
// the whole ensemble with its (run, subset) in the message.
EnsembleForecast run_ensemble(std::span<const NormalizedSeries> series, const training::TrainConfig& train,
                              const EnsembleConfig& config);

} // namespace mtlf::ensemble
