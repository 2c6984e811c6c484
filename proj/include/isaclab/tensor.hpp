#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace isac::ad {

using Shape = std::vector<std::size_t>;

std::string shape_string(const Shape& shape);
std::size_t shape_size(const Shape& shape);

// Dense row-major array of doubles. Every dimension is at least 1.
class Tensor {
public:
    Tensor();  // scalar zero
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    static Tensor scalar(double v);
    static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);
    static Tensor row(std::span<const double> values);
    static Tensor identity(std::size_t n);

    const Shape& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    bool is_scalar() const { return data_.size() == 1; }

    // Matrix view helpers; rank-1 tensors behave as a single row.
    std::size_t rows() const;
    std::size_t cols() const;

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }
    const std::vector<double>& values() const { return data_; }

    double item() const;
    bool all_finite() const;
    void fill(double v);

    Tensor reshaped(Shape shape) const;
    Tensor transposed() const;

    Tensor& operator+=(const Tensor& other);
    bool operator==(const Tensor& other) const = default;

private:
    Shape shape_;
    std::vector<double> data_;
};

// out = a * b for row-major matrices; each output element accumulates over k in order,
// so the result for a given row never depends on the row's position in `a`.
void gemm(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate = false);
// out (+)= a^T * b
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate = false);
// out (+)= a * b^T
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& out, bool accumulate = false);

Tensor matmul_values(const Tensor& a, const Tensor& b);

}  // namespace isac::ad
