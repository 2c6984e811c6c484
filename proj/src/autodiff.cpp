#include "isaclab/autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "isaclab/errors.hpp"

namespace isac::ad {

Parameter::Parameter(std::string name_, Tensor value_)
    : name(std::move(name_)), value(std::move(value_)), grad(value.shape(), 0.0) {}

const Tensor& Var::value() const {
    if (!tape_) throw PreconditionError("access to an unbound Var");
    return tape_->value(index_);
}

Var Tape::constant(Tensor value) {
    nodes_.push_back(Node{std::move(value), std::nullopt, {}, nullptr, nullptr, false});
    return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(Parameter& p) {
    nodes_.push_back(Node{p.value, std::nullopt, {}, nullptr, &p, record_});
    return Var(this, nodes_.size() - 1);
}

Var Tape::push(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn) {
    bool needs = false;
    if (record_) {
        for (auto i : inputs) needs = needs || nodes_[i].needs_grad;
    }
    if (!needs) {
        inputs.clear();
        fn = nullptr;
    }
    nodes_.push_back(Node{std::move(value), std::nullopt, std::move(inputs), std::move(fn), nullptr, needs});
    return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad(std::size_t i) {
    auto& n = nodes_[i];
    if (!n.grad) n.grad.emplace(n.value.shape(), 0.0);
    return *n.grad;
}

void Tape::propagate(const Var& out) {
    if (out.tape() != this) throw PreconditionError("backward() called with a Var from another tape");
    if (consumed_) throw PreconditionError("tape already consumed by a previous backward()");
    if (!value(out.index()).is_scalar()) {
        throw PreconditionError("backward() needs a scalar output, got shape " +
                                shape_string(value(out.index()).shape()));
    }
    consumed_ = true;
    if (!nodes_[out.index()].needs_grad) return;
    grad(out.index())[0] = 1.0;
    for (std::size_t k = out.index() + 1; k-- > 0;) {
        auto& n = nodes_[k];
        if (n.backward && n.grad) n.backward(*this, k);
    }
}

void Tape::backward(const Var& out, double weight) {
    propagate(out);
    for (auto& n : nodes_) {
        if (!n.param || !n.grad) continue;
        if (n.param->grad.shape() != n.param->value.shape()) n.param->grad = Tensor(n.param->value.shape());
        auto g = n.grad->data();
        auto pg = n.param->grad.data();
        for (std::size_t i = 0; i < g.size(); ++i) pg[i] += weight * g[i];
    }
    for (auto& n : nodes_) n.grad.reset();
}

std::vector<Parameter*> Tape::parameters() const {
    std::vector<Parameter*> out;
    for (const auto& n : nodes_) {
        if (n.param && std::find(out.begin(), out.end(), n.param) == out.end()) out.push_back(n.param);
    }
    return out;
}

std::vector<Tensor> Tape::gradients(const Var& out) {
    auto params = parameters();
    std::vector<Tensor> grads;
    grads.reserve(params.size());
    for (auto* p : params) grads.emplace_back(p->value.shape(), 0.0);
    propagate(out);
    for (auto& n : nodes_) {
        if (!n.param || !n.grad) continue;
        auto it = std::find(params.begin(), params.end(), n.param);
        grads[static_cast<std::size_t>(it - params.begin())] += *n.grad;
    }
    for (auto& n : nodes_) n.grad.reset();
    return grads;
}

void Tape::reset() {
    nodes_.clear();
    consumed_ = false;
}

namespace {

Tape& tape_of(const Var& a) {
    if (!a.valid()) throw PreconditionError("operation on an unbound Var");
    return *a.tape();
}

Tape& common_tape(const Var& a, const Var& b) {
    if (a.tape() != b.tape()) throw PreconditionError("operands live on different tapes");
    return tape_of(a);
}

enum class Bcast { Same, Scalar, Row };

Bcast classify(const Tensor& operand, const Tensor& out, const char* op) {
    if (operand.shape() == out.shape()) return Bcast::Same;
    if (operand.size() == 1) return Bcast::Scalar;
    if (operand.rank() == 2 && out.rank() == 2 && operand.rows() == 1 && operand.cols() == out.cols())
        return Bcast::Row;
    throw DimensionError(std::string(op) + ": cannot broadcast " + shape_string(operand.shape()) + " to " +
                         shape_string(out.shape()));
}

inline std::size_t bidx(Bcast k, std::size_t i, std::size_t cols) {
    switch (k) {
        case Bcast::Same: return i;
        case Bcast::Scalar: return 0;
        case Bcast::Row: return i % cols;
    }
    return i;
}

// f(x, y) -> value; dx(x, y, out) and dy(x, y, out) are the local partials.
template <class F, class DX, class DY>
Var binary(const Var& a, const Var& b, const char* name, F f, DX dx, DY dy) {
    Tape& t = common_tape(a, b);
    const Tensor& av = a.value();
    const Tensor& bv = b.value();
    const Shape out_shape = av.size() >= bv.size() ? av.shape() : bv.shape();
    Tensor out(out_shape);
    const Bcast ka = classify(av, out, name);
    const Bcast kb = classify(bv, out, name);
    const std::size_t cols = out.cols();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(av[bidx(ka, i, cols)], bv[bidx(kb, i, cols)]);
    const std::size_t ia = a.index(), ib = b.index();
    return t.push(std::move(out), {ia, ib}, [=](Tape& tp, std::size_t self) {
        const Tensor& x = tp.value(ia);
        const Tensor& y = tp.value(ib);
        const Tensor& o = tp.value(self);
        const Tensor& g = tp.grad(self);
        if (tp.needs_grad(ia)) {
            Tensor& ga = tp.grad(ia);
            for (std::size_t i = 0; i < o.size(); ++i) {
                const std::size_t xi = bidx(ka, i, cols), yi = bidx(kb, i, cols);
                ga[xi] += g[i] * dx(x[xi], y[yi], o[i]);
            }
        }
        if (tp.needs_grad(ib)) {
            Tensor& gb = tp.grad(ib);
            for (std::size_t i = 0; i < o.size(); ++i) {
                const std::size_t xi = bidx(ka, i, cols), yi = bidx(kb, i, cols);
                gb[yi] += g[i] * dy(x[xi], y[yi], o[i]);
            }
        }
    });
}

template <class F, class D>
Var unary(const Var& a, F f, D d) {
    Tape& t = tape_of(a);
    const Tensor& av = a.value();
    Tensor out(av.shape());
    for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
    const std::size_t ia = a.index();
    return t.push(std::move(out), {ia}, [=](Tape& tp, std::size_t self) {
        const Tensor& x = tp.value(ia);
        const Tensor& o = tp.value(self);
        const Tensor& g = tp.grad(self);
        Tensor& ga = tp.grad(ia);
        for (std::size_t i = 0; i < x.size(); ++i) ga[i] += g[i] * d(x[i], o[i]);
    });
}

void require_matrix(const Var& a, const char* op) {
    if (a.value().rank() > 2) {
        throw DimensionError(std::string(op) + " expects a matrix, got " + shape_string(a.shape()));
    }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
    Tape& t = common_tape(a, b);
    require_matrix(a, "matmul");
    require_matrix(b, "matmul");
    if (a.value().cols() != b.value().rows()) {
        throw DimensionError("matmul shape mismatch: " + shape_string(a.shape()) + " x " + shape_string(b.shape()));
    }
    Tensor out = matmul_values(a.value(), b.value());
    const std::size_t ia = a.index(), ib = b.index();
    return t.push(std::move(out), {ia, ib}, [ia, ib](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        if (tp.needs_grad(ia)) gemm_nt(g, tp.value(ib), tp.grad(ia), true);
        if (tp.needs_grad(ib)) gemm_tn(tp.value(ia), g, tp.grad(ib), true);
    });
}

Var add(const Var& a, const Var& b) {
    return binary(
        a, b, "add", [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
        [](double, double, double) { return 1.0; });
}

Var sub(const Var& a, const Var& b) {
    return binary(
        a, b, "sub", [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
        [](double, double, double) { return -1.0; });
}

Var mul(const Var& a, const Var& b) {
    return binary(
        a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
        [](double x, double, double) { return x; });
}

Var div(const Var& a, const Var& b) {
    return binary(
        a, b, "div", [](double x, double y) { return x / y; }, [](double, double y, double) { return 1.0 / y; },
        [](double, double y, double o) { return -o / y; });
}

Var max_pair(const Var& a, const Var& b) {
    return binary(
        a, b, "max_pair", [](double x, double y) { return x >= y ? x : y; },
        [](double x, double y, double) { return x >= y ? 1.0 : 0.0; },
        [](double x, double y, double) { return x >= y ? 0.0 : 1.0; });
}

Var neg(const Var& a) {
    return unary(a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var scale(const Var& a, double s) {
    return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(const Var& a, double s) {
    return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var relu(const Var& a) {
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(const Var& a) {
    return unary(a, [](double x) { return std::exp(x); }, [](double, double o) { return o; });
}

Var log1p(const Var& a) {
    for (double x : a.value().data()) {
        if (!(x > -1.0)) throw DomainError("log1p argument must exceed -1, got " + std::to_string(x));
    }
    return unary(a, [](double x) { return std::log1p(x); }, [](double x, double) { return 1.0 / (1.0 + x); });
}

Var reciprocal(const Var& a) {
    return unary(a, [](double x) { return 1.0 / x; }, [](double, double o) { return -o * o; });
}

Var sqrt(const Var& a) {
    for (double x : a.value().data()) {
        if (x < 0.0) throw DomainError("sqrt of negative value " + std::to_string(x));
    }
    return unary(a, [](double x) { return std::sqrt(x); }, [](double, double o) { return 0.5 / o; });
}

Var cos(const Var& a) {
    return unary(a, [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); });
}

Var sin(const Var& a) {
    return unary(a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}

Var sum(const Var& a) {
    Tape& t = tape_of(a);
    // Sorted accumulation makes the result independent of element order.
    std::vector<double> v(a.value().data().begin(), a.value().data().end());
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    const std::size_t ia = a.index();
    return t.push(Tensor::scalar(s), {ia}, [ia](Tape& tp, std::size_t self) {
        const double g = tp.grad(self)[0];
        for (double& v : tp.grad(ia).data()) v += g;
    });
}

Var mean_rows(const Var& a) {
    Tape& t = tape_of(a);
    require_matrix(a, "mean_rows");
    const Tensor& av = a.value();
    const std::size_t r = av.rows(), c = av.cols();
    Tensor out({1, c});
    std::vector<double> column(r);
    for (std::size_t j = 0; j < c; ++j) {
        for (std::size_t i = 0; i < r; ++i) column[i] = av.at(i, j);
        std::sort(column.begin(), column.end());
        double s = 0.0;
        for (double v : column) s += v;
        out[j] = s / static_cast<double>(r);
    }
    const std::size_t ia = a.index();
    return t.push(std::move(out), {ia}, [ia, r, c](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& ga = tp.grad(ia);
        const double w = 1.0 / static_cast<double>(r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += w * g[j];
    });
}

Var max_over_set(std::span<const Var> items) {
    if (items.empty()) throw PreconditionError("max_over_set needs a nonempty set");
    Tape& t = tape_of(items[0]);
    const Shape& shape = items[0].shape();
    std::vector<std::size_t> inputs;
    for (const auto& v : items) {
        if (v.tape() != &t) throw PreconditionError("max_over_set operands live on different tapes");
        if (v.shape() != shape) {
            throw DimensionError("max_over_set shape mismatch: " + shape_string(shape) + " vs " +
                                 shape_string(v.shape()));
        }
        inputs.push_back(v.index());
    }
    Tensor out = items[0].value();
    std::vector<std::size_t> arg(out.size(), 0);
    for (std::size_t s = 1; s < items.size(); ++s) {
        const Tensor& v = items[s].value();
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (v[i] > out[i]) {
                out[i] = v[i];
                arg[i] = s;
            }
        }
    }
    auto ins = inputs;
    return t.push(std::move(out), std::move(inputs), [ins, arg](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const std::size_t src = ins[arg[i]];
            if (tp.needs_grad(src)) tp.grad(src)[i] += g[i];
        }
    });
}

Var transpose(const Var& a) {
    Tape& t = tape_of(a);
    require_matrix(a, "transpose");
    const std::size_t ia = a.index();
    return t.push(a.value().transposed(), {ia}, [ia](Tape& tp, std::size_t self) {
        Tensor& ga = tp.grad(ia);
        ga += tp.grad(self).transposed().reshaped(ga.shape());
    });
}

Var reshape(const Var& a, Shape shape) {
    Tape& t = tape_of(a);
    const std::size_t ia = a.index();
    return t.push(a.value().reshaped(std::move(shape)), {ia}, [ia](Tape& tp, std::size_t self) {
        Tensor& ga = tp.grad(ia);
        const Tensor& g = tp.grad(self);
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
}

Var slice_rows(const Var& a, std::size_t begin, std::size_t count) {
    Tape& t = tape_of(a);
    require_matrix(a, "slice_rows");
    const Tensor& av = a.value();
    const std::size_t c = av.cols();
    if (count == 0 || begin + count > av.rows()) {
        throw DimensionError("slice_rows [" + std::to_string(begin) + ", +" + std::to_string(count) +
                             ") out of range for " + shape_string(av.shape()));
    }
    Tensor out({count, c});
    std::copy_n(av.data().begin() + static_cast<std::ptrdiff_t>(begin * c), count * c, out.data().begin());
    const std::size_t ia = a.index();
    return t.push(std::move(out), {ia}, [ia, begin, c](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& ga = tp.grad(ia);
        for (std::size_t i = 0; i < g.size(); ++i) ga[begin * c + i] += g[i];
    });
}

Var slice_cols(const Var& a, std::size_t begin, std::size_t count) {
    std::vector<std::size_t> idx(count);
    for (std::size_t i = 0; i < count; ++i) idx[i] = begin + i;
    return select_cols(a, idx);
}

Var select_cols(const Var& a, std::span<const std::size_t> cols) {
    Tape& t = tape_of(a);
    require_matrix(a, "select_cols");
    const Tensor& av = a.value();
    const std::size_t r = av.rows(), c = av.cols(), n = cols.size();
    if (n == 0) throw DimensionError("select_cols needs at least one column");
    for (auto j : cols) {
        if (j >= c) {
            throw DimensionError("select_cols index " + std::to_string(j) + " out of range for " +
                                 shape_string(av.shape()));
        }
    }
    Tensor out({r, n});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < n; ++k) out[i * n + k] = av[i * c + cols[k]];
    std::vector<std::size_t> idx(cols.begin(), cols.end());
    const std::size_t ia = a.index();
    return t.push(std::move(out), {ia}, [ia, idx, r, c, n](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        Tensor& ga = tp.grad(ia);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t k = 0; k < n; ++k) ga[i * c + idx[k]] += g[i * n + k];
    });
}

Var concat_rows(std::span<const Var> items) {
    if (items.empty()) throw PreconditionError("concat_rows needs at least one operand");
    Tape& t = tape_of(items[0]);
    const std::size_t c = items[0].value().cols();
    std::size_t r = 0;
    std::vector<std::size_t> inputs, offsets;
    for (const auto& v : items) {
        if (v.tape() != &t) throw PreconditionError("concat_rows operands live on different tapes");
        if (v.value().cols() != c) {
            throw DimensionError("concat_rows column mismatch: " + shape_string(items[0].shape()) + " vs " +
                                 shape_string(v.shape()));
        }
        inputs.push_back(v.index());
        offsets.push_back(r);
        r += v.value().rows();
    }
    Tensor out({r, c});
    for (std::size_t k = 0; k < items.size(); ++k) {
        const auto src = items[k].value().data();
        std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(offsets[k] * c));
    }
    auto ins = inputs;
    return t.push(std::move(out), std::move(inputs), [ins, offsets, c](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        for (std::size_t k = 0; k < ins.size(); ++k) {
            if (!tp.needs_grad(ins[k])) continue;
            Tensor& gk = tp.grad(ins[k]);
            for (std::size_t i = 0; i < gk.size(); ++i) gk[i] += g[offsets[k] * c + i];
        }
    });
}

Var concat_cols(std::span<const Var> items) {
    if (items.empty()) throw PreconditionError("concat_cols needs at least one operand");
    Tape& t = tape_of(items[0]);
    const std::size_t r = items[0].value().rows();
    std::size_t c = 0;
    std::vector<std::size_t> inputs, offsets, widths;
    for (const auto& v : items) {
        if (v.tape() != &t) throw PreconditionError("concat_cols operands live on different tapes");
        if (v.value().rows() != r) {
            throw DimensionError("concat_cols row mismatch: " + shape_string(items[0].shape()) + " vs " +
                                 shape_string(v.shape()));
        }
        inputs.push_back(v.index());
        offsets.push_back(c);
        widths.push_back(v.value().cols());
        c += v.value().cols();
    }
    Tensor out({r, c});
    for (std::size_t k = 0; k < items.size(); ++k) {
        const Tensor& src = items[k].value();
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < widths[k]; ++j) out[i * c + offsets[k] + j] = src[i * widths[k] + j];
    }
    auto ins = inputs;
    return t.push(std::move(out), std::move(inputs), [ins, offsets, widths, r, c](Tape& tp, std::size_t self) {
        const Tensor& g = tp.grad(self);
        for (std::size_t k = 0; k < ins.size(); ++k) {
            if (!tp.needs_grad(ins[k])) continue;
            Tensor& gk = tp.grad(ins[k]);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < widths[k]; ++j) gk[i * widths[k] + j] += g[i * c + offsets[k] + j];
        }
    });
}

Var element(const Var& a, std::size_t i) {
    Tape& t = tape_of(a);
    if (i >= a.size()) throw DimensionError("element index " + std::to_string(i) + " out of range");
    const std::size_t ia = a.index();
    return t.push(Tensor::scalar(a.value()[i]), {ia}, [ia, i](Tape& tp, std::size_t self) {
        tp.grad(ia)[i] += tp.grad(self)[0];
    });
}

Var detach(const Var& a) { return tape_of(a).constant(a.value()); }

}  // namespace isac::ad
