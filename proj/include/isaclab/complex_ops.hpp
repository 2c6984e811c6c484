#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "isaclab/autodiff.hpp"

namespace isac {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

namespace ad {

// Complex matrix stored as a pair of equal-shape real tensors.
struct ComplexTensor {
    ComplexTensor() = default;
    ComplexTensor(Tensor re_, Tensor im_);

    Tensor re;
    Tensor im;

    const Shape& shape() const { return re.shape(); }
};

ComplexTensor to_complex_tensor(const CMatrix& m);
CMatrix to_cmatrix(const ComplexTensor& t);

// Complex value on a tape.
struct CVar {
    Var re;
    Var im;

    std::size_t rows() const { return re.rows(); }
    std::size_t cols() const { return re.cols(); }
    CMatrix value() const;
};

CVar constant(Tape& tape, const CMatrix& m);
CVar constant(Tape& tape, const ComplexTensor& t);

CVar complex_matmul(const CVar& a, const CVar& b);
CVar cadd(const CVar& a, const CVar& b);
CVar csub(const CVar& a, const CVar& b);
CVar conj(const CVar& a);
CVar adjoint(const CVar& a);           // conjugate transpose
CVar cscale(const CVar& a, const Var& s);  // real scalar (1x1) times complex matrix
CVar phase_to_unit(const Var& theta);  // e^{j theta} elementwise
CVar cselect_cols(const CVar& a, std::span<const std::size_t> cols);
CVar cslice_rows(const CVar& a, std::size_t begin, std::size_t count);
CVar cconcat_cols(std::span<const CVar> items);
CVar creshape(const CVar& a, Shape shape);

// |x|^2 elementwise.
Var abs2(const CVar& x);

// Re(h^H R^{-1} h) for an n x 1 vector h and an n x n matrix R. The imaginary
// residue must stay below 1e-10 relative to the real part (R Hermitian).
// Throws NumericError when R is singular.
Var quad_form_inv(const CVar& h, const CVar& r);

}  // namespace ad
}  // namespace isac
