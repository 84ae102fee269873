#pragma once

#include "mtlf/autodiff.hpp"
#include "mtlf/preprocess.hpp"
#include "mtlf/rdlstm.hpp"
#include "mtlf/seasonal.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mtlf::training {

struct TrainConfig {
    int epochs = 10;
    double learning_rate = 1e-3;
    double tau = 0.4;
    std::size_t state_size = 40;
    int snapshots = 5; // L: most recent epochs kept for averaging
    std::uint64_t seed = 0;
    double clip_norm = 5.0;
    // Steps that only warm the recurrent state; the dilation-12 layer has
    // no real lagged state before step 12.
    std::size_t warmup_steps = 12;
    rdlstm::NetworkLayout layout{};

    // Throws ConfigError.
    void validate() const;
};

// (x - x_hat) * tau if x >= x_hat, else (x_hat - x) * (1 - tau).
// Throws ConfigError unless 0 < tau < 1.
double pinball_loss(double x, double x_hat, double tau);

inline constexpr std::size_t kMinTrainingYears = 3;

struct WindowPair {
    std::size_t t = 0;
    std::array<double, kMonths> x_in{};
    std::array<double, kMonths> x_out{};
};

// Input/output windows of the deseasonalized series under `state`:
// x_in = x[t .. t+11], x_out = x[t+12 .. t+23], t = 0 .. N-24.
std::vector<WindowPair> build_windows(const seasonal::SeasonalState& state, std::span<const double> y);

struct SeriesLoss {
    ad::Var loss;             // mean pinball loss over the scored windows
    std::size_t windows = 0;  // number of scored windows
};

// Records one series pass on the tape: seasonal recursion, deseasonalization,
// the network over every window in time order, and the mean pinball loss of
// windows t >= warmup. Throws DataError when no window is scored.
SeriesLoss series_loss_on_tape(ad::Tape& tape, const rdlstm::BoundNetwork& net, ad::Var initial_components,
                               ad::Var beta_raw, std::span<const double> y, double tau, std::size_t warmup);

struct Snapshot {
    int epoch = 0;
    rdlstm::RdLstmNetwork network;
    std::vector<seasonal::SeasonalState> seasons;

    const seasonal::SeasonalState* find(std::string_view series_id) const noexcept;
};

struct EpochRecord {
    int epoch = 0;
    double mean_loss = 0.0;
    std::vector<double> series_loss; // aligned with TrainedReplica::series_ids
};

struct TrainedReplica {
    std::string subset_id;
    std::vector<std::string> series_ids;
    std::vector<Snapshot> snapshots; // the last L epochs, oldest first
    std::vector<EpochRecord> log;
};

// Joint SGD over the shared network and every series' seasonal state. One
// update per series per epoch, series order reshuffled each epoch, global
// gradient-norm clipping. Pure function of (subset, config, seed).
// Throws DataError for series shorter than 3 years and NumericError, naming
// epoch, series and parameter, when anything becomes non-finite.
TrainedReplica train_replica(std::span<const NormalizedSeries> subset, const TrainConfig& config,
                             std::uint64_t seed, std::string subset_id = {});
TrainedReplica train_replica(std::span<const NormalizedSeries> subset, const TrainConfig& config);

// Next-year forecast on the normalized scale from one snapshot.
std::array<double, kMonths> forecast_snapshot(const Snapshot& snapshot, const NormalizedSeries& series);

// Mean of forecast_snapshot over all snapshots. Throws UsageError when the
// series was not part of the replica's training subset.
std::array<double, kMonths> forecast_replica(const TrainedReplica& replica, const NormalizedSeries& series);

} // namespace mtlf::training
