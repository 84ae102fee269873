#pragma once

#include "mtlf/autodiff.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mtlf::rdlstm {

inline constexpr std::size_t kLayers = 4;
inline constexpr std::size_t kWindow = 12;

enum Gate : std::size_t { kForget = 0, kInput = 1, kCandidate = 2, kOutput = 3 };

// Dilation and residual flag per layer. The default is the residual
// dilated stack: a plain LSTM layer then dilations 3, 6, 12 with shortcuts.
struct NetworkLayout {
    std::array<std::size_t, kLayers> dilations{1, 3, 6, 12};
    std::array<bool, kLayers> residual{false, true, true, true};

    static NetworkLayout residual_dilated() { return {}; }
    // Dilation 1 everywhere, no shortcuts: an ordinary stacked LSTM.
    static NetworkLayout plain_stack() { return {{1, 1, 1, 1}, {false, false, false, false}}; }
};

struct LstmLayerParams {
    std::array<ad::Param, 4> W; // m x input_dim, indexed by Gate
    std::array<ad::Param, 4> V; // m x m
    std::array<ad::Param, 4> b; // m
    std::size_t dilation = 1;
    bool residual = false;

    std::size_t state_size() const noexcept { return b[0].rows; }
    std::size_t input_dim() const noexcept { return W[0].cols; }
};

struct RdLstmNetwork {
    std::size_t state_size = 0;
    std::uint64_t seed = 0;
    std::vector<LstmLayerParams> layers;
    ad::Param lu_weights; // 12 x m
    ad::Param lu_bias;    // 12

    NetworkLayout layout() const;
    // Every learnable tensor, layers first, in a fixed order.
    std::vector<ad::Param*> params();
    std::vector<const ad::Param*> params() const;
};

// Weights uniform in [-1/sqrt(m), 1/sqrt(m)], forget-gate biases 1, other
// biases 0. Deterministic in `seed`. Throws ConfigError when m < 1.
RdLstmNetwork init_network(std::size_t state_size, std::uint64_t seed,
                           const NetworkLayout& layout = NetworkLayout::residual_dilated());

// Throws ConfigError when shapes or per-layer flags are inconsistent.
void validate(const RdLstmNetwork& net);

// Network parameters recorded as leaves on one tape.
struct BoundLayer {
    std::array<ad::Var, 4> W, V, b;
    std::size_t dilation = 1;
    bool residual = false;
    std::size_t state_size = 0;
    std::size_t input_dim = 0;
};

struct BoundNetwork {
    std::vector<BoundLayer> layers;
    ad::Var lu_weights, lu_bias;
};

BoundNetwork bind(ad::Tape& tape, RdLstmNetwork& net);
// Parameters as constants: for inference, no gradients flow back.
BoundNetwork bind_frozen(ad::Tape& tape, const RdLstmNetwork& net);

// Ring buffer of the last `dilation` (h, c) pairs of one layer; `next`
// points at the entry from step t - dilation.
struct LayerState {
    std::vector<ad::Var> h, c;
    std::size_t next = 0;
};

struct RecurrentState {
    std::vector<LayerState> layers;

    // Zero state for every layer (start of a series).
    static RecurrentState zero(ad::Tape& tape, const BoundNetwork& net);
};

struct StepOutput {
    ad::Var h, c;
};

// One LSTM block step. For residual layers the input is the hidden state of
// the layer below and is added to tanh(c) before the output gate.
// Pushes (h, c) into the ring buffer. Throws UsageError on dimension mismatch.
StepOutput lstm_step(ad::Tape& tape, const BoundLayer& layer, ad::Var input, LayerState& state);

// One step through all layers plus the linear output unit.
ad::Var network_step(ad::Tape& tape, const BoundNetwork& net, ad::Var x_in, RecurrentState& state);

// Runs the network over consecutive input windows from a zero state and
// returns the output of every step (values only).
std::vector<std::array<double, kWindow>> run_sequence(const RdLstmNetwork& net,
                                                      std::span<const std::array<double, kWindow>> inputs);

} // namespace mtlf::rdlstm
