#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "isaclab/tensor.hpp"

namespace isac::ad {

// A trainable tensor. `grad` accumulates across backward passes until an optimizer
// step (or zero_grad) clears it.
struct Parameter {
    Parameter() = default;
    Parameter(std::string name, Tensor value);

    std::string name;
    Tensor value;
    Tensor grad;

    void zero_grad() { grad.fill(0.0); }
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; only valid while the tape lives.
class Var {
public:
    Var() = default;

    Tape* tape() const { return tape_; }
    std::size_t index() const { return index_; }
    bool valid() const { return tape_ != nullptr; }
    const Tensor& value() const;
    const Shape& shape() const { return value().shape(); }
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    std::size_t size() const { return value().size(); }

private:
    friend class Tape;
    Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

    Tape* tape_ = nullptr;
    std::size_t index_ = 0;
};

// Records primitive operations in creation order. Creation order is a topological
// order of the computation graph, so backward() walks it in reverse.
//
// A tape built with record=false keeps values only (inference mode).
class Tape {
public:
    using BackwardFn = std::function<void(Tape&, std::size_t self)>;

    explicit Tape(bool record = true) : record_(record) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return record_; }
    std::size_t size() const { return nodes_.size(); }

    Var constant(Tensor value);
    Var parameter(Parameter& p);

    // Appends the result of a primitive. `fn` is dropped when no input needs a gradient.
    Var push(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn);

    const Tensor& value(std::size_t i) const { return nodes_[i].value; }
    bool needs_grad(std::size_t i) const { return nodes_[i].needs_grad; }
    // Gradient slot for node i, zero-initialised on first access.
    Tensor& grad(std::size_t i);

    // Seeds d(out)/d(out) = 1 and propagates to every reachable Parameter, adding
    // into Parameter::grad scaled by `weight`. The tape is consumed afterwards.
    void backward(const Var& out, double weight = 1.0);

    // Same propagation but returns per-parameter gradients instead of touching
    // Parameter::grad. Order matches parameters().
    std::vector<Tensor> gradients(const Var& out);
    std::vector<Parameter*> parameters() const;

    void reset();

private:
    struct Node {
        Tensor value;
        std::optional<Tensor> grad;
        std::vector<std::size_t> inputs;
        BackwardFn backward;
        Parameter* param = nullptr;
        bool needs_grad = false;
    };

    void propagate(const Var& out);

    std::vector<Node> nodes_;
    bool record_;
    bool consumed_ = false;
};

// ---- primitives ----------------------------------------------------------

Var matmul(const Var& a, const Var& b);

// Elementwise binary ops. The second operand may also be a scalar or a 1xC row
// broadcast over an RxC first operand (and vice versa).
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var max_pair(const Var& a, const Var& b);  // ties route the gradient to `a`

Var neg(const Var& a);
Var scale(const Var& a, double s);
Var add_scalar(const Var& a, double s);
Var relu(const Var& a);  // relu'(0) = 0
Var exp(const Var& a);
Var log1p(const Var& a);  // throws DomainError for x <= -1
Var reciprocal(const Var& a);
Var sqrt(const Var& a);
Var cos(const Var& a);
Var sin(const Var& a);

Var sum(const Var& a);
// 1xC mean of an RxC matrix. Each column is summed in sorted order so the
// result is bitwise invariant under row permutations.
Var mean_rows(const Var& a);
// Elementwise maximum over a nonempty set of equal-shape tensors; backward routes
// to the first argmax in set order.
Var max_over_set(std::span<const Var> items);

Var transpose(const Var& a);
Var reshape(const Var& a, Shape shape);
Var slice_rows(const Var& a, std::size_t begin, std::size_t count);
Var slice_cols(const Var& a, std::size_t begin, std::size_t count);
Var select_cols(const Var& a, std::span<const std::size_t> cols);
Var concat_rows(std::span<const Var> items);
Var concat_cols(std::span<const Var> items);
Var element(const Var& a, std::size_t i);
Var detach(const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(const Var& a, const Var& b) { return mul(a, b); }
inline Var operator/(const Var& a, const Var& b) { return div(a, b); }
inline Var operator-(const Var& a) { return neg(a); }

}  // namespace isac::ad
