#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mtlf::ad {

// A learnable tensor (vector or row-major matrix) with its gradient buffer.
struct Param {
    std::string tag;
    std::size_t rows = 0;
    std::size_t cols = 1;
    std::vector<double> value;
    std::vector<double> grad;

    Param() = default;
    Param(std::string tag_, std::size_t rows_, std::size_t cols_ = 1)
        : tag(std::move(tag_)), rows(rows_), cols(cols_), value(rows_ * cols_, 0.0), grad(rows_ * cols_, 0.0) {}

    std::size_t size() const noexcept { return value.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// Handle to a node on a Tape.
struct Var {
    std::int32_t id = -1;
    bool valid() const noexcept { return id >= 0; }
};

enum class Op : std::uint8_t {
    leaf,
    constant,
    add,
    sub,
    mul,    // elementwise
    affine, // k0 * a + k1
    matvec, // a is a matrix leaf, b a vector
    sigmoid,
    tanh,
    log,
    exp,
    concat,
    slice,
    sum,
    mean,
    pinball, // mean pinball loss of prediction b against target a
};

const char* op_name(Op op) noexcept;

// Append-only record of a computation. Nodes are created in evaluation
// order, so the node list is already topologically sorted and backward is a
// single reverse sweep. One tape per training replica; not thread-safe.
class Tape {
public:
    Tape() = default;

    void clear();
    std::size_t node_count() const noexcept { return nodes_.size(); }

    // Leaf bound to a Param. Backward accumulates into param.grad; the Param
    // must outlive the backward call.
    Var param(Param& p);
    // Constant copy of a Param's current value (shape kept, no gradient).
    Var frozen(const Param& p);
    Var constant(std::span<const double> values);
    Var scalar(double v);
    Var zeros(std::size_t n);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var affine(Var a, double scale, double shift);
    Var matvec(Var matrix, Var x);
    Var sigmoid(Var a);
    Var tanh(Var a);
    Var log(Var a); // throws DomainError on a non-positive element
    Var exp(Var a);
    Var concat(std::span<const Var> parts);
    Var slice(Var a, std::size_t offset, std::size_t length);
    Var sum(Var a);
    Var mean(Var a);
    // mean_j pinball(target_j, prediction_j, tau); the subgradient at
    // target == prediction is 0.
    Var pinball(Var target, Var prediction, double tau);

    std::span<const double> value(Var v) const;
    double scalar_value(Var v) const;
    std::size_t size(Var v) const;

    // Reverse sweep from a scalar node. Throws UsageError when `loss` is not
    // a scalar node of this tape.
    void backward(Var loss);
    // Node gradients from the last backward; empty before the first one.
    std::span<const double> grad(Var v) const;

private:
    struct Node {
        Op op;
        std::int32_t a = -1;
        std::int32_t b = -1;
        std::size_t offset = 0; // into values_
        std::size_t size = 0;
        std::size_t rows = 0, cols = 1;
        double k0 = 0.0, k1 = 0.0;
        std::size_t aux = 0;     // slice offset, or first index into concat_inputs_
        std::size_t aux_len = 0; // number of concat inputs
        Param* param = nullptr;
    };

    Var push(Node node);
    const Node& node(Var v) const;
    double* val(std::size_t node_id) { return values_.data() + nodes_[node_id].offset; }
    const double* val(std::size_t node_id) const { return values_.data() + nodes_[node_id].offset; }
    void require_same_size(Var a, Var b, const char* what) const;

    std::vector<Node> nodes_;
    std::vector<double> values_;
    std::vector<double> grads_;
    std::vector<std::int32_t> concat_inputs_;
};

} // namespace mtlf::ad
