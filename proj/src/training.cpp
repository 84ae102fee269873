#include "mtlf/training.hpp"

#include "mtlf/errors.hpp"
#include "mtlf/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mtlf::training {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError(fmt::format("epochs must be >= 1 (got {})", epochs));
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
        throw ConfigError(fmt::format("learning rate must be positive (got {})", learning_rate));
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError(fmt::format("tau must lie in (0, 1) (got {})", tau));
    if (state_size < 1) throw ConfigError("state size must be >= 1");
    if (snapshots < 1 || snapshots > epochs)
        throw ConfigError(fmt::format("snapshot count L must be in [1, epochs] (got {} with {} epochs)", snapshots,
                                      epochs));
    if (!(clip_norm > 0.0)) throw ConfigError("gradient clip norm must be positive");
}

double pinball_loss(double x, double x_hat, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError(fmt::format("pinball: tau {} outside (0, 1)", tau));
    return x >= x_hat ? (x - x_hat) * tau : (x_hat - x) * (1.0 - tau);
}

std::vector<WindowPair> build_windows(const seasonal::SeasonalState& state, std::span<const double> y) {
    const auto trace = seasonal::unroll_seasonal(state, y);
    const auto x = seasonal::deseasonalize(y, std::span(trace.components).first(y.size()));
    std::vector<WindowPair> out;
    for (std::size_t t = 0; t + 2 * kMonths <= x.size(); ++t) {
        WindowPair w;
        w.t = t;
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(t), kMonths, w.x_in.begin());
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(t + kMonths), kMonths, w.x_out.begin());
        out.push_back(w);
    }
    return out;
}

SeriesLoss series_loss_on_tape(ad::Tape& tape, const rdlstm::BoundNetwork& net, ad::Var initial_components,
                               ad::Var beta_raw, std::span<const double> y, double tau, std::size_t warmup) {
    if (y.size() < 2 * kMonths + warmup)
        throw DataError(fmt::format("series of {} months leaves no scored window after {} warm-up steps", y.size(),
                                    warmup));
    const ad::Var trace = seasonal::unroll_on_tape(tape, initial_components, beta_raw, y);
    const ad::Var x = seasonal::deseasonalize_on_tape(tape, y, tape.slice(trace, 0, y.size()));
    auto state = rdlstm::RecurrentState::zero(tape, net);
    std::vector<ad::Var> losses;
    for (std::size_t t = 0; t + 2 * kMonths <= y.size(); ++t) {
        const ad::Var x_hat = rdlstm::network_step(tape, net, tape.slice(x, t, kMonths), state);
        if (t < warmup) continue;
        losses.push_back(tape.pinball(tape.slice(x, t + kMonths, kMonths), x_hat, tau));
    }
    return {tape.mean(tape.concat(losses)), losses.size()};
}

const seasonal::SeasonalState* Snapshot::find(std::string_view series_id) const noexcept {
    auto it = std::find_if(seasons.begin(), seasons.end(),
                           [&](const seasonal::SeasonalState& s) { return s.series_id == series_id; });
    return it == seasons.end() ? nullptr : &*it;
}

namespace {

struct GradCheck {
    double norm_sq = 0.0;
    const ad::Param* non_finite = nullptr;
};

void accumulate(GradCheck& check, const ad::Param& p) {
    for (double g : p.grad) {
        if (!std::isfinite(g) && !check.non_finite) check.non_finite = &p;
        check.norm_sq += g * g;
    }
}

void sgd_step(ad::Param& p, double step) {
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] -= step * p.grad[i];
    p.zero_grad();
}

} // namespace

TrainedReplica train_replica(std::span<const NormalizedSeries> subset, const TrainConfig& config, std::uint64_t seed,
                             std::string subset_id) {
    config.validate();
    if (subset.empty()) throw DataError("training subset is empty");
    for (const auto& s : subset) {
        if (s.values.size() % kMonths != 0 || s.values.size() < kMinTrainingYears * kMonths)
            throw DataError(fmt::format("series '{}': {} months; training needs at least {} whole years", s.series_id,
                                        s.values.size(), kMinTrainingYears));
        if (s.values.size() < 2 * kMonths + config.warmup_steps)
            throw DataError(fmt::format("series '{}' too short for {} warm-up steps", s.series_id,
                                        config.warmup_steps));
    }

    TrainedReplica replica;
    replica.subset_id = std::move(subset_id);
    rdlstm::RdLstmNetwork net = rdlstm::init_network(config.state_size, derive_seed(seed, 1), config.layout);
    std::vector<seasonal::SeasonalState> seasons;
    for (const auto& s : subset) {
        replica.series_ids.push_back(s.series_id);
        seasons.push_back(seasonal::init_state(s));
    }
    Rng order_rng(derive_seed(seed, 2));
    std::vector<std::size_t> order(subset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    auto net_params = net.params();
    ad::Tape tape;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        order_rng.shuffle(order);
        EpochRecord record;
        record.epoch = epoch;
        record.series_loss.assign(subset.size(), 0.0);
        for (std::size_t idx : order) {
            const auto& series = subset[idx];
            auto& season = seasons[idx];
            tape.clear();
            const auto bound = rdlstm::bind(tape, net);
            const ad::Var init = tape.param(season.initial_components);
            const ad::Var beta_raw = tape.param(season.beta_raw);
            SeriesLoss pass;
            try {
                pass = series_loss_on_tape(tape, bound, init, beta_raw, series.values, config.tau, config.warmup_steps);
            } catch (const NumericError& e) {
                throw NumericError(fmt::format("epoch {}, series '{}': {}", epoch, series.series_id, e.what()));
            }
            const double loss = tape.scalar_value(pass.loss);
            if (!std::isfinite(loss))
                throw NumericError(fmt::format("non-finite loss at epoch {}, series '{}'", epoch, series.series_id));
            tape.backward(pass.loss);

            GradCheck check;
            for (const auto* p : net_params) accumulate(check, *p);
            accumulate(check, season.initial_components);
            accumulate(check, season.beta_raw);
            if (check.non_finite)
                throw NumericError(fmt::format("non-finite gradient at epoch {}, series '{}', parameter '{}'", epoch,
                                               series.series_id, check.non_finite->tag));
            const double norm = std::sqrt(check.norm_sq);
            const double scale = norm > config.clip_norm ? config.clip_norm / norm : 1.0;
            const double step = config.learning_rate * scale;
            for (auto* p : net_params) sgd_step(*p, step);
            sgd_step(season.initial_components, step);
            sgd_step(season.beta_raw, step);
            season.project();
            record.series_loss[idx] = loss;
        }
        record.mean_loss = std::accumulate(record.series_loss.begin(), record.series_loss.end(), 0.0) /
                           static_cast<double>(subset.size());
        replica.log.push_back(std::move(record));
        if (epoch > config.epochs - config.snapshots) replica.snapshots.push_back(Snapshot{epoch, net, seasons});
    }
    return replica;
}

TrainedReplica train_replica(std::span<const NormalizedSeries> subset, const TrainConfig& config) {
    return train_replica(subset, config, config.seed);
}

std::array<double, kMonths> forecast_snapshot(const Snapshot& snapshot, const NormalizedSeries& series) {
    const auto* state = snapshot.find(series.series_id);
    if (!state) throw UsageError(fmt::format("series '{}' is unknown to this model", series.series_id));
    const auto& y = series.values;
    const std::size_t n = y.size();
    const auto trace = seasonal::unroll_seasonal(*state, y);
    const auto x = seasonal::deseasonalize(y, std::span(trace.components).first(n));
    std::vector<std::array<double, kMonths>> inputs;
    inputs.reserve(n - kMonths + 1);
    for (std::size_t t = 0; t + kMonths <= n; ++t) {
        std::array<double, kMonths> w{};
        std::copy_n(x.begin() + static_cast<std::ptrdiff_t>(t), kMonths, w.begin());
        inputs.push_back(w);
    }
    const auto outputs = rdlstm::run_sequence(snapshot.network, inputs);
    const auto& x_hat = outputs.back();
    std::array<double, kMonths> y_hat{};
    for (std::size_t j = 0; j < kMonths; ++j) y_hat[j] = trace.components[n + j] * std::exp(x_hat[j]);
    return y_hat;
}

std::array<double, kMonths> forecast_replica(const TrainedReplica& replica, const NormalizedSeries& series) {
    if (replica.snapshots.empty()) throw UsageError("replica has no snapshots");
    std::array<double, kMonths> acc{};
    for (const auto& snap : replica.snapshots) {
        const auto f = forecast_snapshot(snap, series);
        for (std::size_t j = 0; j < kMonths; ++j) acc[j] += f[j];
    }
    for (double& v : acc) v /= static_cast<double>(replica.snapshots.size());
    return acc;
}

} // namespace mtlf::training
