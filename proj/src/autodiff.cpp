#include "mtlf/autodiff.hpp"

#include "mtlf/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace mtlf::ad {

const char* op_name(Op op) noexcept {
    switch (op) {
    case Op::leaf: return "leaf";
    case Op::constant: return "constant";
    case Op::add: return "add";
    case Op::sub: return "sub";
    case Op::mul: return "mul";
    case Op::affine: return "affine";
    case Op::matvec: return "matvec";
    case Op::sigmoid: return "sigmoid";
    case Op::tanh: return "tanh";
    case Op::log: return "log";
    case Op::exp: return "exp";
    case Op::concat: return "concat";
    case Op::slice: return "slice";
    case Op::sum: return "sum";
    case Op::mean: return "mean";
    case Op::pinball: return "pinball";
    }
    return "?";
}

void Tape::clear() {
    nodes_.clear();
    values_.clear();
    grads_.clear();
    concat_inputs_.clear();
}

Var Tape::push(Node n) {
    n.offset = values_.size();
    values_.resize(values_.size() + n.size, 0.0);
    nodes_.push_back(n);
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(Var v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size())
        throw UsageError(fmt::format("invalid tape variable {}", v.id));
    return nodes_[static_cast<std::size_t>(v.id)];
}

void Tape::require_same_size(Var a, Var b, const char* what) const {
    if (node(a).size != node(b).size)
        throw UsageError(fmt::format("{}: size mismatch {} vs {}", what, node(a).size, node(b).size));
}

Var Tape::param(Param& p) {
    if (p.value.size() != p.rows * p.cols || p.grad.size() != p.value.size())
        throw UsageError(fmt::format("param '{}' has inconsistent shape", p.tag));
    Node n{Op::leaf};
    n.size = p.value.size();
    n.rows = p.rows;
    n.cols = p.cols;
    n.param = &p;
    Var v = push(n);
    std::copy(p.value.begin(), p.value.end(), val(static_cast<std::size_t>(v.id)));
    return v;
}

Var Tape::frozen(const Param& p) {
    if (p.value.size() != p.rows * p.cols)
        throw UsageError(fmt::format("param '{}' has inconsistent shape", p.tag));
    Node n{Op::constant};
    n.size = p.value.size();
    n.rows = p.rows;
    n.cols = p.cols;
    Var v = push(n);
    std::copy(p.value.begin(), p.value.end(), val(static_cast<std::size_t>(v.id)));
    return v;
}

Var Tape::constant(std::span<const double> values) {
    Node n{Op::constant};
    n.size = values.size();
    n.rows = values.size();
    Var v = push(n);
    std::copy(values.begin(), values.end(), val(static_cast<std::size_t>(v.id)));
    return v;
}

Var Tape::scalar(double x) { return constant(std::span<const double>(&x, 1)); }

Var Tape::zeros(std::size_t count) {
    Node n{Op::constant};
    n.size = count;
    n.rows = count;
    return push(n);
}

namespace {

template <typename F>
void map_unary(const double* in, double* out, std::size_t n, F f) {
    for (std::size_t i = 0; i < n; ++i) out[i] = f(in[i]);
}

double sigmoid_value(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

Var Tape::add(Var a, Var b) {
    require_same_size(a, b, "add");
    Node n{Op::add, a.id, b.id};
    n.size = n.rows = node(a).size;
    Var v = push(n);
    const double* x = val(a.id);
    const double* y = val(b.id);
    double* o = val(v.id);
    for (std::size_t i = 0; i < n.size; ++i) o[i] = x[i] + y[i];
    return v;
}

Var Tape::sub(Var a, Var b) {
    require_same_size(a, b, "sub");
    Node n{Op::sub, a.id, b.id};
    n.size = n.rows = node(a).size;
    Var v = push(n);
    const double* x = val(a.id);
    const double* y = val(b.id);
    double* o = val(v.id);
    for (std::size_t i = 0; i < n.size; ++i) o[i] = x[i] - y[i];
    return v;
}

Var Tape::mul(Var a, Var b) {
    require_same_size(a, b, "mul");
    Node n{Op::mul, a.id, b.id};
    n.size = n.rows = node(a).size;
    Var v = push(n);
    const double* x = val(a.id);
    const double* y = val(b.id);
    double* o = val(v.id);
    for (std::size_t i = 0; i < n.size; ++i) o[i] = x[i] * y[i];
    return v;
}

Var Tape::affine(Var a, double scale, double shift) {
    Node n{Op::affine, a.id};
    n.size = n.rows = node(a).size;
    n.k0 = scale;
    n.k1 = shift;
    Var v = push(n);
    map_unary(val(a.id), val(v.id), n.size, [&](double x) { return scale * x + shift; });
    return v;
}

Var Tape::matvec(Var matrix, Var x) {
    const Node& m = node(matrix);
    if (m.op != Op::leaf && m.op != Op::constant) throw UsageError("matvec: matrix operand must be a leaf");
    const std::size_t rows = m.rows, cols = m.cols;
    if (node(x).size != cols)
        throw UsageError(fmt::format("matvec: {}x{} matrix times vector of size {}", rows, cols, node(x).size));
    Node n{Op::matvec, matrix.id, x.id};
    n.size = n.rows = rows;
    Var v = push(n);
    const double* w = val(matrix.id);
    const double* xv = val(x.id);
    double* o = val(v.id);
    for (std::size_t i = 0; i < rows; ++i) {
        double acc = 0.0;
        const double* row = w + i * cols;
        for (std::size_t j = 0; j < cols; ++j) acc += row[j] * xv[j];
        o[i] = acc;
    }
    return v;
}

Var Tape::sigmoid(Var a) {
    Node n{Op::sigmoid, a.id};
    n.size = n.rows = node(a).size;
    Var v = push(n);
    map_unary(val(a.id), val(v.id), n.size, sigmoid_value);
    return v;
}

Var Tape::tanh(Var a) {
    Node n{Op::tanh, a.id};
    n.size = n.rows = node(a).size;
    Var v = push(n);
    map_unary(val(a.id), val(v.id), n.size, [](double x) { return std::tanh(x); });
    return v;
}

Var Tape::log(Var a) {
    const std::size_t size = node(a).size;
    const double* x = val(a.id);
    for (std::size_t i = 0; i < size; ++i)
        if (!(x[i] > 0.0))
            throw DomainError(fmt::format("log of non-positive value {} (node {} '{}', element {})", x[i], a.id,
                                          op_name(node(a).op), i));
    Node n{Op::log, a.id};
    n.size = n.rows = size;
    Var v = push(n);
    map_unary(val(a.id), val(v.id), size, [](double y) { return std::log(y); });
    return v;
}

Var Tape::exp(Var a) {
    Node n{Op::exp, a.id};
    n.size = n.rows = node(a).size;
    Var v = push(n);
    map_unary(val(a.id), val(v.id), n.size, [](double x) { return std::exp(x); });
    return v;
}

Var Tape::concat(std::span<const Var> parts) {
    Node n{Op::concat};
    n.aux = concat_inputs_.size();
    n.aux_len = parts.size();
    for (Var p : parts) {
        n.size += node(p).size;
        concat_inputs_.push_back(p.id);
    }
    n.rows = n.size;
    Var v = push(n);
    double* o = val(v.id);
    for (Var p : parts) {
        const std::size_t len = nodes_[p.id].size;
        std::copy_n(val(p.id), len, o);
        o += len;
    }
    return v;
}

Var Tape::slice(Var a, std::size_t offset, std::size_t length) {
    if (offset + length > node(a).size)
        throw UsageError(fmt::format("slice [{}, {}) out of range {}", offset, offset + length, node(a).size));
    Node n{Op::slice, a.id};
    n.size = n.rows = length;
    n.aux = offset;
    Var v = push(n);
    std::copy_n(val(a.id) + offset, length, val(v.id));
    return v;
}

Var Tape::sum(Var a) {
    Node n{Op::sum, a.id};
    n.size = n.rows = 1;
    Var v = push(n);
    const double* x = val(a.id);
    double acc = 0.0;
    for (std::size_t i = 0; i < node(a).size; ++i) acc += x[i];
    *val(v.id) = acc;
    return v;
}

Var Tape::mean(Var a) {
    if (node(a).size == 0) throw UsageError("mean of empty vector");
    Node n{Op::mean, a.id};
    n.size = n.rows = 1;
    Var v = push(n);
    const double* x = val(a.id);
    double acc = 0.0;
    const std::size_t len = node(a).size;
    for (std::size_t i = 0; i < len; ++i) acc += x[i];
    *val(v.id) = acc / static_cast<double>(len);
    return v;
}

Var Tape::pinball(Var target, Var prediction, double tau) {
    require_same_size(target, prediction, "pinball");
    if (!(tau > 0.0 && tau < 1.0)) throw ConfigError(fmt::format("pinball: tau {} outside (0, 1)", tau));
    const std::size_t len = node(target).size;
    if (len == 0) throw UsageError("pinball of empty vectors");
    Node n{Op::pinball, target.id, prediction.id};
    n.size = n.rows = 1;
    n.k0 = tau;
    Var v = push(n);
    const double* x = val(target.id);
    const double* xh = val(prediction.id);
    double acc = 0.0;
    for (std::size_t i = 0; i < len; ++i)
        acc += x[i] >= xh[i] ? (x[i] - xh[i]) * tau : (xh[i] - x[i]) * (1.0 - tau);
    *val(v.id) = acc / static_cast<double>(len);
    return v;
}

std::span<const double> Tape::value(Var v) const {
    const Node& n = node(v);
    return {values_.data() + n.offset, n.size};
}

double Tape::scalar_value(Var v) const {
    if (node(v).size != 1) throw UsageError("scalar_value on a non-scalar node");
    return values_[node(v).offset];
}

std::size_t Tape::size(Var v) const { return node(v).size; }

std::span<const double> Tape::grad(Var v) const {
    const Node& n = node(v);
    if (grads_.size() < values_.size()) return {};
    return {grads_.data() + n.offset, n.size};
}

void Tape::backward(Var loss) {
    if (nodes_.empty()) throw UsageError("backward called on an empty tape (no forward pass recorded)");
    const Node& root = node(loss);
    if (root.size != 1) throw UsageError("backward requires a scalar loss node");

    grads_.assign(values_.size(), 0.0);
    grads_[root.offset] = 1.0;

    for (std::int32_t id = loss.id; id >= 0; --id) {
        const Node& n = nodes_[static_cast<std::size_t>(id)];
        const double* g = grads_.data() + n.offset;
        const double* out = values_.data() + n.offset;
        auto ga = [&]() { return grads_.data() + nodes_[n.a].offset; };
        auto gb = [&]() { return grads_.data() + nodes_[n.b].offset; };
        auto va = [&]() { return values_.data() + nodes_[n.a].offset; };
        auto vb = [&]() { return values_.data() + nodes_[n.b].offset; };

        switch (n.op) {
        case Op::leaf:
            if (n.param) {
                double* pg = n.param->grad.data();
                for (std::size_t i = 0; i < n.size; ++i) pg[i] += g[i];
            }
            break;
        case Op::constant: break;
        case Op::add: {
            double* a = ga();
            double* b = gb();
            for (std::size_t i = 0; i < n.size; ++i) {
                a[i] += g[i];
                b[i] += g[i];
            }
            break;
        }
        case Op::sub: {
            double* a = ga();
            double* b = gb();
            for (std::size_t i = 0; i < n.size; ++i) {
                a[i] += g[i];
                b[i] -= g[i];
            }
            break;
        }
        case Op::mul: {
            double* a = ga();
            double* b = gb();
            const double* x = va();
            const double* y = vb();
            for (std::size_t i = 0; i < n.size; ++i) {
                a[i] += g[i] * y[i];
                b[i] += g[i] * x[i];
            }
            break;
        }
        case Op::affine: {
            double* a = ga();
            for (std::size_t i = 0; i < n.size; ++i) a[i] += n.k0 * g[i];
            break;
        }
        case Op::matvec: {
            const Node& m = nodes_[n.a];
            const std::size_t cols = m.cols;
            double* gw = ga();
            double* gx = gb();
            const double* w = va();
            const double* x = vb();
            for (std::size_t i = 0; i < n.size; ++i) {
                const double gi = g[i];
                if (gi == 0.0) continue;
                double* gw_row = gw + i * cols;
                const double* w_row = w + i * cols;
                for (std::size_t j = 0; j < cols; ++j) {
                    gw_row[j] += gi * x[j];
                    gx[j] += gi * w_row[j];
                }
            }
            break;
        }
        case Op::sigmoid: {
            double* a = ga();
            for (std::size_t i = 0; i < n.size; ++i) a[i] += g[i] * out[i] * (1.0 - out[i]);
            break;
        }
        case Op::tanh: {
            double* a = ga();
            for (std::size_t i = 0; i < n.size; ++i) a[i] += g[i] * (1.0 - out[i] * out[i]);
            break;
        }
        case Op::log: {
            double* a = ga();
            const double* x = va();
            for (std::size_t i = 0; i < n.size; ++i) a[i] += g[i] / x[i];
            break;
        }
        case Op::exp: {
            double* a = ga();
            for (std::size_t i = 0; i < n.size; ++i) a[i] += g[i] * out[i];
            break;
        }
        case Op::concat: {
            const double* src = g;
            for (std::size_t k = 0; k < n.aux_len; ++k) {
                const Node& part = nodes_[concat_inputs_[n.aux + k]];
                double* dst = grads_.data() + part.offset;
                for (std::size_t i = 0; i < part.size; ++i) dst[i] += src[i];
                src += part.size;
            }
            break;
        }
        case Op::slice: {
            double* a = ga() + n.aux;
            for (std::size_t i = 0; i < n.size; ++i) a[i] += g[i];
            break;
        }
        case Op::sum: {
            double* a = ga();
            for (std::size_t i = 0; i < nodes_[n.a].size; ++i) a[i] += g[0];
            break;
        }
        case Op::mean: {
            const std::size_t len = nodes_[n.a].size;
            double* a = ga();
            const double s = g[0] / static_cast<double>(len);
            for (std::size_t i = 0; i < len; ++i) a[i] += s;
            break;
        }
        case Op::pinball: {
            const std::size_t len = nodes_[n.a].size;
            double* gt = ga();
            double* gp = gb();
            const double* x = va();
            const double* xh = vb();
            const double s = g[0] / static_cast<double>(len);
            const double tau = n.k0;
            for (std::size_t i = 0; i < len; ++i) {
                // d/dx_hat: -tau above the target, (1 - tau) below it, 0 on the kink.
                double d = 0.0;
                if (x[i] > xh[i]) d = -tau;
                else if (xh[i] > x[i]) d = 1.0 - tau;
                gp[i] += s * d;
                gt[i] -= s * d;
            }
            break;
        }
        }
    }
}

} // namespace mtlf::ad
