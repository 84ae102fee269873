#include "mtlf/rdlstm.hpp"

#include "mtlf/errors.hpp"
#include "mtlf/rng.hpp"

#include <fmt/format.h>

#include <cmath>

namespace mtlf::rdlstm {

namespace {

constexpr const char* kGateNames[4] = {"f", "i", "g", "o"};

} // namespace

NetworkLayout RdLstmNetwork::layout() const {
    NetworkLayout l;
    for (std::size_t i = 0; i < layers.size() && i < kLayers; ++i) {
        l.dilations[i] = layers[i].dilation;
        l.residual[i] = layers[i].residual;
    }
    return l;
}

std::vector<ad::Param*> RdLstmNetwork::params() {
    std::vector<ad::Param*> out;
    for (auto& layer : layers) {
        for (auto& p : layer.W) out.push_back(&p);
        for (auto& p : layer.V) out.push_back(&p);
        for (auto& p : layer.b) out.push_back(&p);
    }
    out.push_back(&lu_weights);
    out.push_back(&lu_bias);
    return out;
}

std::vector<const ad::Param*> RdLstmNetwork::params() const {
    std::vector<const ad::Param*> out;
    for (const auto& layer : layers) {
        for (const auto& p : layer.W) out.push_back(&p);
        for (const auto& p : layer.V) out.push_back(&p);
        for (const auto& p : layer.b) out.push_back(&p);
    }
    out.push_back(&lu_weights);
    out.push_back(&lu_bias);
    return out;
}

RdLstmNetwork init_network(std::size_t m, std::uint64_t seed, const NetworkLayout& layout) {
    if (m < 1) throw ConfigError("state size m must be >= 1");
    RdLstmNetwork net;
    net.state_size = m;
    net.seed = seed;
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(m));
    auto fill = [&](ad::Param& p) {
        for (double& v : p.value) v = rng.uniform(-bound, bound);
    };
    for (std::size_t l = 0; l < kLayers; ++l) {
        LstmLayerParams layer;
        layer.dilation = layout.dilations[l];
        layer.residual = layout.residual[l];
        const std::size_t in = l == 0 ? kWindow : m;
        for (std::size_t g = 0; g < 4; ++g) {
            layer.W[g] = ad::Param(fmt::format("l{}.W_{}", l + 1, kGateNames[g]), m, in);
            layer.V[g] = ad::Param(fmt::format("l{}.V_{}", l + 1, kGateNames[g]), m, m);
            layer.b[g] = ad::Param(fmt::format("l{}.b_{}", l + 1, kGateNames[g]), m);
        }
        for (auto& p : layer.W) fill(p);
        for (auto& p : layer.V) fill(p);
        std::fill(layer.b[kForget].value.begin(), layer.b[kForget].value.end(), 1.0);
        net.layers.push_back(std::move(layer));
    }
    net.lu_weights = ad::Param("lu.W_x", kWindow, m);
    net.lu_bias = ad::Param("lu.b_x", kWindow);
    fill(net.lu_weights);
    validate(net);
    return net;
}

void validate(const RdLstmNetwork& net) {
    const std::size_t m = net.state_size;
    if (m < 1) throw ConfigError("state size m must be >= 1");
    if (net.layers.size() != kLayers)
        throw ConfigError(fmt::format("network must have {} layers, has {}", kLayers, net.layers.size()));
    for (std::size_t l = 0; l < kLayers; ++l) {
        const auto& layer = net.layers[l];
        const std::size_t in = l == 0 ? kWindow : m;
        if (layer.dilation < 1) throw ConfigError(fmt::format("layer {}: dilation must be >= 1", l + 1));
        if (l == 0 && layer.residual) throw ConfigError("layer 1 cannot have a residual shortcut");
        for (std::size_t g = 0; g < 4; ++g) {
            if (layer.W[g].rows != m || layer.W[g].cols != in || layer.W[g].value.size() != m * in)
                throw ConfigError(fmt::format("layer {}: W_{} must be {}x{}", l + 1, kGateNames[g], m, in));
            if (layer.V[g].rows != m || layer.V[g].cols != m || layer.V[g].value.size() != m * m)
                throw ConfigError(fmt::format("layer {}: V_{} must be {}x{}", l + 1, kGateNames[g], m, m));
            if (layer.b[g].rows != m || layer.b[g].cols != 1 || layer.b[g].value.size() != m)
                throw ConfigError(fmt::format("layer {}: b_{} must have {} entries", l + 1, kGateNames[g], m));
        }
    }
    if (net.lu_weights.rows != kWindow || net.lu_weights.cols != m || net.lu_weights.value.size() != kWindow * m)
        throw ConfigError(fmt::format("linear unit weights must be 12x{}", m));
    if (net.lu_bias.value.size() != kWindow) throw ConfigError("linear unit bias must have 12 entries");
}

namespace {

template <typename Net, typename Leaf>
BoundNetwork bind_with(Net& net, Leaf leaf) {
    BoundNetwork bound;
    for (auto& layer : net.layers) {
        BoundLayer bl;
        for (std::size_t g = 0; g < 4; ++g) {
            bl.W[g] = leaf(layer.W[g]);
            bl.V[g] = leaf(layer.V[g]);
            bl.b[g] = leaf(layer.b[g]);
        }
        bl.dilation = layer.dilation;
        bl.residual = layer.residual;
        bl.state_size = layer.state_size();
        bl.input_dim = layer.input_dim();
        bound.layers.push_back(bl);
    }
    bound.lu_weights = leaf(net.lu_weights);
    bound.lu_bias = leaf(net.lu_bias);
    return bound;
}

} // namespace

BoundNetwork bind(ad::Tape& tape, RdLstmNetwork& net) {
    return bind_with(net, [&](ad::Param& p) { return tape.param(p); });
}

BoundNetwork bind_frozen(ad::Tape& tape, const RdLstmNetwork& net) {
    return bind_with(net, [&](const ad::Param& p) { return tape.frozen(p); });
}

RecurrentState RecurrentState::zero(ad::Tape& tape, const BoundNetwork& net) {
    RecurrentState state;
    for (const auto& layer : net.layers) {
        const ad::Var z = tape.zeros(layer.state_size);
        LayerState ls;
        ls.h.assign(layer.dilation, z);
        ls.c.assign(layer.dilation, z);
        state.layers.push_back(std::move(ls));
    }
    return state;
}

StepOutput lstm_step(ad::Tape& tape, const BoundLayer& layer, ad::Var input, LayerState& state) {
    if (tape.size(input) != layer.input_dim)
        throw UsageError(fmt::format("lstm_step: input of size {} for layer expecting {}", tape.size(input),
                                     layer.input_dim));
    if (state.h.size() != layer.dilation || state.c.size() != layer.dilation)
        throw UsageError("lstm_step: recurrent state does not match layer dilation");
    if (layer.residual && layer.input_dim != layer.state_size)
        throw UsageError("lstm_step: residual shortcut needs input size equal to state size");

    const ad::Var h_lag = state.h[state.next];
    const ad::Var c_lag = state.c[state.next];
    std::array<ad::Var, 4> pre;
    for (std::size_t g = 0; g < 4; ++g)
        pre[g] = tape.add(tape.add(tape.matvec(layer.W[g], input), tape.matvec(layer.V[g], h_lag)), layer.b[g]);
    const ad::Var f = tape.sigmoid(pre[kForget]);
    const ad::Var i = tape.sigmoid(pre[kInput]);
    const ad::Var g = tape.tanh(pre[kCandidate]);
    const ad::Var o = tape.sigmoid(pre[kOutput]);
    const ad::Var c = tape.add(tape.mul(f, c_lag), tape.mul(i, g));
    ad::Var squashed = tape.tanh(c);
    if (layer.residual) squashed = tape.add(squashed, input);
    const ad::Var h = tape.mul(o, squashed);

    state.h[state.next] = h;
    state.c[state.next] = c;
    state.next = (state.next + 1) % layer.dilation;
    return {h, c};
}

ad::Var network_step(ad::Tape& tape, const BoundNetwork& net, ad::Var x_in, RecurrentState& state) {
    if (state.layers.size() != net.layers.size()) throw UsageError("network_step: state/network layer mismatch");
    if (tape.size(x_in) != kWindow)
        throw UsageError(fmt::format("network_step: input window of size {} (expected 12)", tape.size(x_in)));
    ad::Var h = x_in;
    for (std::size_t l = 0; l < net.layers.size(); ++l) h = lstm_step(tape, net.layers[l], h, state.layers[l]).h;
    return tape.add(tape.matvec(net.lu_weights, h), net.lu_bias);
}

std::vector<std::array<double, kWindow>> run_sequence(const RdLstmNetwork& net,
                                                      std::span<const std::array<double, kWindow>> inputs) {
    ad::Tape tape;
    const BoundNetwork bound = bind_frozen(tape, net);
    RecurrentState state = RecurrentState::zero(tape, bound);
    std::vector<std::array<double, kWindow>> out;
    out.reserve(inputs.size());
    for (const auto& x : inputs) {
        const ad::Var y = network_step(tape, bound, tape.constant(x), state);
        std::array<double, kWindow> v{};
        auto vals = tape.value(y);
        std::copy(vals.begin(), vals.end(), v.begin());
        out.push_back(v);
    }
    return out;
}

} // namespace mtlf::rdlstm
