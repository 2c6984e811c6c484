#include "isaclab/tensor.hpp"

#include <cmath>
#include <sstream>

#include "isaclab/errors.hpp"

namespace isac::ad {

std::string shape_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

std::size_t shape_size(const Shape& shape) {
    std::size_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

namespace {
void check_shape(const Shape& shape) {
    if (shape.empty()) throw DimensionError("tensor shape must have at least one dimension");
    for (auto d : shape) {
        if (d == 0) throw DimensionError("tensor dimension must be >= 1, got " + shape_string(shape));
    }
}
}  // namespace

Tensor::Tensor() : shape_{1}, data_(1, 0.0) {}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
    check_shape(shape_);
    data_.assign(shape_size(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
    check_shape(shape_);
    if (shape_size(shape_) != data_.size()) {
        throw DimensionError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                             shape_string(shape_));
    }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, std::vector<double>{v}); }

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
    return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::row(std::span<const double> values) {
    return Tensor({1, values.size()}, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

std::size_t Tensor::rows() const { return rank() == 1 ? 1 : shape_[0]; }

std::size_t Tensor::cols() const {
    if (rank() == 1) return shape_[0];
    return data_.size() / shape_[0];
}

double Tensor::item() const {
    if (data_.size() != 1) throw PreconditionError("item() on non-scalar tensor " + shape_string(shape_));
    return data_[0];
}

bool Tensor::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_size(shape) != data_.size()) {
        throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
    }
    return Tensor(std::move(shape), data_);
}

Tensor Tensor::transposed() const {
    const std::size_t r = rows(), c = cols();
    Tensor out({c, r});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) out.data_[j * r + i] = data_[i * c + j];
    return out;
}

Tensor& Tensor::operator+=(const Tensor& other) {
    if (other.data_.size() != data_.size()) {
        throw DimensionError("cannot accumulate " + shape_string(other.shape_) + " into " + shape_string(shape_));
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

void gemm(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
    const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
    if (b.rows() != k) {
        throw DimensionError("matmul inner dimensions differ: " + shape_string(a.shape()) + " x " +
                             shape_string(b.shape()));
    }
    if (out.rows() != r || out.cols() != c) out = Tensor({r, c});
    else if (!accumulate) out.fill(0.0);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < r; ++i) {
        double* orow = po + i * c;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = pa[i * k + kk];
            const double* brow = pb + kk * c;
            for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
        }
    }
}

void gemm_tn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
    const std::size_t r = a.rows(), k = a.cols(), c = b.cols();
    if (b.rows() != r) {
        throw DimensionError("matmul (transposed lhs) dimensions differ: " + shape_string(a.shape()) + " x " +
                             shape_string(b.shape()));
    }
    if (out.rows() != k || out.cols() != c) out = Tensor({k, c});
    else if (!accumulate) out.fill(0.0);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < r; ++i) {
        const double* brow = pb + i * c;
        for (std::size_t kk = 0; kk < k; ++kk) {
            const double av = pa[i * k + kk];
            double* orow = po + kk * c;
            for (std::size_t j = 0; j < c; ++j) orow[j] += av * brow[j];
        }
    }
}

void gemm_nt(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate) {
    const std::size_t r = a.rows(), k = a.cols(), c = b.rows();
    if (b.cols() != k) {
        throw DimensionError("matmul (transposed rhs) dimensions differ: " + shape_string(a.shape()) + " x " +
                             shape_string(b.shape()));
    }
    if (out.rows() != r || out.cols() != c) out = Tensor({r, c});
    else if (!accumulate) out.fill(0.0);
    const double* pa = a.data().data();
    const double* pb = b.data().data();
    double* po = out.data().data();
    for (std::size_t i = 0; i < r; ++i) {
        const double* arow = pa + i * k;
        for (std::size_t j = 0; j < c; ++j) {
            const double* brow = pb + j * k;
            double s[4] = {0.0, 0.0, 0.0, 0.0};
            std::size_t kk = 0;
            for (; kk + 4 <= k; kk += 4) {
                s[0] += arow[kk] * brow[kk];
                s[1] += arow[kk + 1] * brow[kk + 1];
                s[2] += arow[kk + 2] * brow[kk + 2];
                s[3] += arow[kk + 3] * brow[kk + 3];
            }
            for (; kk < k; ++kk) s[0] += arow[kk] * brow[kk];
            po[i * c + j] += (s[0] + s[1]) + (s[2] + s[3]);
        }
    }
}

Tensor matmul_values(const Tensor& a, const Tensor& b) {
    Tensor out({a.rows(), b.cols()});
    gemm(a, b, out);
    return out;
}

}  // namespace isac::ad
