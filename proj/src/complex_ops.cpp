#include "isaclab/complex_ops.hpp"

#include <cmath>

#include "isaclab/errors.hpp"

namespace isac::ad {

ComplexTensor::ComplexTensor(Tensor re_, Tensor im_) : re(std::move(re_)), im(std::move(im_)) {
    if (re.shape() != im.shape()) {
        throw DimensionError("complex tensor parts differ in shape: " + shape_string(re.shape()) + " vs " +
                             shape_string(im.shape()));
    }
}

ComplexTensor to_complex_tensor(const CMatrix& m) {
    const auto r = static_cast<std::size_t>(m.rows()), c = static_cast<std::size_t>(m.cols());
    Tensor re({r, c}), im({r, c});
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) {
            const cd v = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            re.at(i, j) = v.real();
            im.at(i, j) = v.imag();
        }
    return {std::move(re), std::move(im)};
}

CMatrix to_cmatrix(const ComplexTensor& t) {
    const std::size_t r = t.re.rows(), c = t.re.cols();
    CMatrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cd(t.re.at(i, j), t.im.at(i, j));
    return m;
}

CMatrix CVar::value() const { return to_cmatrix(ComplexTensor(re.value(), im.value())); }

CVar constant(Tape& tape, const CMatrix& m) { return constant(tape, to_complex_tensor(m)); }

CVar constant(Tape& tape, const ComplexTensor& t) { return {tape.constant(t.re), tape.constant(t.im)}; }

CVar complex_matmul(const CVar& a, const CVar& b) {
    return {matmul(a.re, b.re) - matmul(a.im, b.im), matmul(a.re, b.im) + matmul(a.im, b.re)};
}

CVar cadd(const CVar& a, const CVar& b) { return {a.re + b.re, a.im + b.im}; }

CVar csub(const CVar& a, const CVar& b) { return {a.re - b.re, a.im - b.im}; }

CVar conj(const CVar& a) { return {a.re, neg(a.im)}; }

CVar adjoint(const CVar& a) { return {transpose(a.re), neg(transpose(a.im))}; }

CVar cscale(const CVar& a, const Var& s) { return {mul(a.re, s), mul(a.im, s)}; }

CVar phase_to_unit(const Var& theta) { return {cos(theta), sin(theta)}; }

CVar cselect_cols(const CVar& a, std::span<const std::size_t> cols) {
    return {select_cols(a.re, cols), select_cols(a.im, cols)};
}

CVar cslice_rows(const CVar& a, std::size_t begin, std::size_t count) {
    return {slice_rows(a.re, begin, count), slice_rows(a.im, begin, count)};
}

CVar cconcat_cols(std::span<const CVar> items) {
    std::vector<Var> re, im;
    for (const auto& c : items) {
        re.push_back(c.re);
        im.push_back(c.im);
    }
    return {concat_cols(re), concat_cols(im)};
}

CVar creshape(const CVar& a, Shape shape) { return {reshape(a.re, shape), reshape(a.im, shape)}; }

Var abs2(const CVar& x) { return x.re * x.re + x.im * x.im; }

Var quad_form_inv(const CVar& h, const CVar& r) {
    const std::size_t n = h.rows();
    if (h.cols() != 1 || r.rows() != n || r.cols() != n) {
        throw DimensionError("quad_form_inv expects h n x 1 and R n x n, got " + shape_string(h.re.shape()) +
                             " and " + shape_string(r.re.shape()));
    }
    Tape& t = *h.re.tape();
    const CMatrix hm = h.value();
    const CMatrix rm = r.value();
    Eigen::PartialPivLU<CMatrix> lu(rm);
    const double det_abs = std::abs(lu.determinant());
    if (!(det_abs > 0.0) || !std::isfinite(det_abs)) throw NumericError("quad_form_inv: singular covariance");
    const CVector x = lu.solve(hm.col(0));
    const cd q = hm.col(0).adjoint() * x;
    if (std::abs(q.imag()) > 1e-10 * std::max(1.0, std::abs(q.real()))) {
        throw NumericError("quad_form_inv: imaginary residue " + std::to_string(q.imag()) + " exceeds tolerance");
    }
    const CVector y = rm.adjoint().partialPivLu().solve(hm.col(0));

    const std::size_t hre = h.re.index(), him = h.im.index(), rre = r.re.index(), rim = r.im.index();
    return t.push(Tensor::scalar(q.real()), {hre, him, rre, rim},
                  [x, y, n, hre, him, rre, rim](Tape& tp, std::size_t self) {
                      const double g = tp.grad(self)[0];
                      const auto ni = static_cast<Eigen::Index>(n);
                      if (tp.needs_grad(hre) || tp.needs_grad(him)) {
                          for (Eigen::Index a = 0; a < ni; ++a) {
                              const cd s = x(a) + y(a);
                              if (tp.needs_grad(hre)) tp.grad(hre)[static_cast<std::size_t>(a)] += g * s.real();
                              if (tp.needs_grad(him)) tp.grad(him)[static_cast<std::size_t>(a)] += g * s.imag();
                          }
                      }
                      if (tp.needs_grad(rre) || tp.needs_grad(rim)) {
                          for (Eigen::Index a = 0; a < ni; ++a)
                              for (Eigen::Index b = 0; b < ni; ++b) {
                                  const cd c = std::conj(y(a)) * x(b);
                                  const auto k = static_cast<std::size_t>(a * ni + b);
                                  if (tp.needs_grad(rre)) tp.grad(rre)[k] -= g * c.real();
                                  if (tp.needs_grad(rim)) tp.grad(rim)[k] += g * c.imag();
                              }
                      }
                  });
}

}  // namespace isac::ad
