#pragma once

#include "mtlf/rdlstm.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace mtlf::testing {

// Straightforward LSTM stack on plain vectors, written without the tape.
// Layer l at step t reads (h, c) from step t - d of the same layer (zero
// before the sequence start) and, when residual, adds the hidden state of
// the layer below to tanh(c).
class ReferenceStack {
public:
    explicit ReferenceStack(const rdlstm::RdLstmNetwork& net) : net_(net) {}

    std::vector<std::array<double, 12>> run(const std::vector<std::array<double, 12>>& inputs) const {
        const std::size_t m = net_.state_size;
        const std::size_t L = net_.layers.size();
        std::vector<std::vector<std::vector<double>>> h(L), c(L); // [layer][step]
        std::vector<std::array<double, 12>> out;
        for (std::size_t t = 0; t < inputs.size(); ++t) {
            std::vector<double> below(inputs[t].begin(), inputs[t].end());
            for (std::size_t l = 0; l < L; ++l) {
                const auto& p = net_.layers[l];
                const std::size_t d = p.dilation;
                const std::vector<double> zero(m, 0.0);
                const auto& h_lag = t >= d ? h[l][t - d] : zero;
                const auto& c_lag = t >= d ? c[l][t - d] : zero;
                std::array<std::vector<double>, 4> gate;
                for (std::size_t g = 0; g < 4; ++g) {
                    gate[g].assign(m, 0.0);
                    const std::size_t n_in = below.size();
                    for (std::size_t r = 0; r < m; ++r) {
                        double acc = p.b[g].value[r];
                        for (std::size_t k = 0; k < n_in; ++k) acc += p.W[g].value[r * n_in + k] * below[k];
                        for (std::size_t k = 0; k < m; ++k) acc += p.V[g].value[r * m + k] * h_lag[k];
                        gate[g][r] = g == rdlstm::kCandidate ? std::tanh(acc) : 1.0 / (1.0 + std::exp(-acc));
                    }
                }
                std::vector<double> cn(m), hn(m);
                for (std::size_t r = 0; r < m; ++r) {
                    cn[r] = gate[rdlstm::kForget][r] * c_lag[r] + gate[rdlstm::kInput][r] * gate[rdlstm::kCandidate][r];
                    const double shortcut = p.residual ? below[r] : 0.0;
                    hn[r] = gate[rdlstm::kOutput][r] * (std::tanh(cn[r]) + shortcut);
                }
                h[l].push_back(hn);
                c[l].push_back(cn);
                below = hn;
            }
            std::array<double, 12> y{};
            for (std::size_t j = 0; j < 12; ++j) {
                double acc = net_.lu_bias.value[j];
                for (std::size_t k = 0; k < m; ++k) acc += net_.lu_weights.value[j * m + k] * below[k];
                y[j] = acc;
            }
            out.push_back(y);
        }
        return out;
    }

private:
    const rdlstm::RdLstmNetwork& net_;
};

// Overwrites every parameter with uniform draws in [-scale, scale].
template <typename Rng>
void randomize(rdlstm::RdLstmNetwork& net, Rng& rng, double scale) {
    for (auto* p : net.params())
        for (auto& v : p->value) v = rng.uniform(-scale, scale);
}

inline void zero_all(rdlstm::RdLstmNetwork& net) {
    for (auto* p : net.params()) std::fill(p->value.begin(), p->value.end(), 0.0);
}

} // namespace mtlf::testing
