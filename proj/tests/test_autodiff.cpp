#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "isaclab/autodiff.hpp"
#include "isaclab/complex_ops.hpp"
#include "isaclab/errors.hpp"
#include "isaclab/optim.hpp"
#include "isaclab/rng.hpp"
#include "support.hpp"

using namespace isac;
using namespace isac::ad;

namespace {

Tensor random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    RngStream r(seed, {1});
    Tensor t(std::move(s));
    for (double& v : t.data()) v = r.uniform(lo, hi);
    return t;
}

// Compares tape gradients of a scalar function of the given parameters with
// central differences on every entry.
void check_gradients(std::vector<Parameter*> params, const std::function<Var(Tape&)>& f, double tol = 1e-6,
                     double h = 1e-6) {
    Tape tape;
    const Var out = f(tape);
    for (auto* p : params) p->grad = Tensor(p->value.shape());
    tape.backward(out);
    const auto value = [&] {
        Tape t(false);
        return f(t).value().item();
    };
    for (auto* p : params) {
        for (std::size_t k = 0; k < p->value.size(); ++k) {
            const double fd = testing::central_diff(value, p->value[k], h);
            const double g = p->grad[k];
            INFO(p->name << "[" << k << "] analytic " << g << " fd " << fd);
            CHECK(std::abs(g - fd) <= tol * std::max(1.0, std::abs(fd)));
        }
    }
}

}  // namespace

TEST_SUITE("tensor-autodiff") {

TEST_CASE("gemm matches a naive triple loop") {
    const Tensor a = random_tensor({5, 7}, 1), b = random_tensor({7, 3}, 2);
    const Tensor c = matmul_values(a, b);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < 7; ++k) s += a.at(i, k) * b.at(k, j);
            CHECK(c.at(i, j) == doctest::Approx(s).epsilon(1e-14));
        }
    Tensor tn({7, 3}), nt({5, 7});
    gemm_tn(a.transposed(), b, tn);  // (a^T)^T b = a b
    for (std::size_t k = 0; k < c.size(); ++k) CHECK(tn[k] == doctest::Approx(c[k]).epsilon(1e-14));
    gemm_nt(c, b, nt);  // c b^T
    const Tensor ref = matmul_values(c, b.transposed());
    for (std::size_t k = 0; k < nt.size(); ++k) CHECK(nt[k] == doctest::Approx(ref[k]).epsilon(1e-13));
}

TEST_CASE("matmul row results do not depend on row position") {
    const Tensor a = random_tensor({4, 9}, 3), b = random_tensor({9, 5}, 4);
    Tensor swapped = a;
    for (std::size_t k = 0; k < 9; ++k) std::swap(swapped.at(0, k), swapped.at(3, k));
    const Tensor c1 = matmul_values(a, b), c2 = matmul_values(swapped, b);
    for (std::size_t j = 0; j < 5; ++j) {
        CHECK(c1.at(0, j) == c2.at(3, j));
        CHECK(c1.at(3, j) == c2.at(0, j));
    }
}

TEST_CASE("shape errors are reported") {
    Tape t;
    const Var a = t.constant(Tensor({2, 3})), b = t.constant(Tensor({2, 3}));
    CHECK_THROWS_AS(matmul(a, b), DimensionError);
    CHECK_THROWS_AS(add(a, t.constant(Tensor({3, 2}))), DimensionError);
}

TEST_CASE("elementwise primitives match finite differences") {
    Parameter x("x", random_tensor({3, 4}, 5, 0.2, 1.5));
    Parameter y("y", random_tensor({3, 4}, 6, 0.2, 1.5));
    Parameter r("r", random_tensor({1, 4}, 7, 0.2, 1.5));
    check_gradients({&x, &y, &r}, [&](Tape& t) {
        const Var a = t.parameter(x), b = t.parameter(y), row = t.parameter(r);
        Var z = add(mul(a, b), div(a, row));
        z = sub(z, mul(exp(scale(b, 0.3)), sqrt(a)));
        z = add(z, log1p(mul(a, a)));
        z = add(z, mul(cos(a), sin(b)));
        z = add(z, reciprocal(add_scalar(b, 1.0)));
        z = add(z, max_pair(a, b));
        z = add(z, relu(sub(a, b)));
        return sum(mul(z, z));
    });
}

TEST_CASE("structural primitives match finite differences") {
    Parameter x("x", random_tensor({4, 3}, 8));
    Parameter w("w", random_tensor({3, 5}, 9));
    check_gradients({&x, &w}, [&](Tape& t) {
        const Var a = t.parameter(x), b = t.parameter(w);
        const Var h = matmul(a, b);  // 4 x 5
        const Var top = slice_rows(h, 0, 2), bottom = slice_rows(h, 2, 2);
        const std::vector<Var> parts{top, bottom};
        const Var mx = max_over_set(parts);
        const Var rows = concat_rows(std::vector<Var>{mx, mean_rows(h)});
        const std::size_t sel[] = {4, 1};
        const Var cols = concat_cols(std::vector<Var>{select_cols(rows, sel), slice_cols(rows, 2, 2)});
        const Var tr = reshape(transpose(cols), {1, 12});
        return add(sum(mul(tr, tr)), element(tr, 3));
    });
}

TEST_CASE("sum is bitwise independent of element order") {
    RngStream r(11);
    std::vector<double> v(200);
    for (double& x : v) x = r.normal() * std::pow(10.0, r.uniform(-8, 8));
    std::vector<double> p = v;
    std::reverse(p.begin(), p.end());
    std::rotate(p.begin(), p.begin() + 37, p.end());
    Tape t(false);
    const double s1 = sum(t.constant(Tensor({1, v.size()}, v))).value().item();
    const double s2 = sum(t.constant(Tensor({1, p.size()}, p))).value().item();
    CHECK(s1 == s2);
}

TEST_CASE("mean_rows is bitwise invariant under row permutation") {
    const Tensor a = random_tensor({6, 5}, 12, -1e3, 1e3);
    Tensor b = a;
    for (std::size_t c = 0; c < 5; ++c) {
        std::swap(b.at(0, c), b.at(5, c));
        std::swap(b.at(1, c), b.at(3, c));
    }
    Tape t(false);
    const Tensor ma = mean_rows(t.constant(a)).value();
    const Tensor mb = mean_rows(t.constant(b)).value();
    CHECK(ma == mb);
}

TEST_CASE("max_over_set and relu tie conventions") {
    Parameter a("a", Tensor({1, 2}, {1.0, 0.0}));
    Parameter b("b", Tensor({1, 2}, {1.0, 0.0}));
    Tape t;
    a.grad = Tensor({1, 2});
    b.grad = Tensor({1, 2});
    const std::vector<Var> set{t.parameter(a), t.parameter(b)};
    t.backward(sum(add(max_over_set(set), relu(t.parameter(b)))));
    CHECK(a.grad[0] == 1.0);  // first argmax takes the gradient
    CHECK(b.grad[0] == 1.0);  // only through relu (b = 1 > 0)
    CHECK(b.grad[1] == 0.0);  // relu'(0) = 0
}

TEST_CASE("log1p rejects its singular domain") {
    Tape t;
    CHECK_THROWS_AS(log1p(t.constant(Tensor::scalar(-1.0))), DomainError);
}

TEST_CASE("complex matmul and quad_form_inv") {
    RngStream r(13);
    CMatrix a(3, 4), b(4, 2), h(3, 1), l(3, 3);
    for (auto* m : {&a, &b, &h, &l})
        for (Eigen::Index k = 0; k < m->size(); ++k) m->data()[k] = r.complex_normal();
    const CMatrix rr = l * l.adjoint() + CMatrix::Identity(3, 3);
    Tape t(false);
    const CMatrix prod = complex_matmul(constant(t, a), constant(t, b)).value();
    CHECK((prod - a * b).norm() < 1e-12);
    const double q = quad_form_inv(constant(t, h), constant(t, rr)).value().item();
    const double ref = (h.adjoint() * rr.inverse() * h)(0, 0).real();
    CHECK(testing::rel_err(q, ref) < 1e-12);
    CHECK_THROWS_AS(quad_form_inv(constant(t, h), constant(t, CMatrix(CMatrix::Zero(3, 3)))), NumericError);
}

TEST_CASE("quad_form_inv gradient matches finite differences") {
    RngStream r(14);
    Parameter hr("hr", Tensor({3, 1})), hi("hi", Tensor({3, 1})), gr("gr", Tensor({3, 2})), gi("gi", Tensor({3, 2}));
    for (auto* p : {&hr, &hi, &gr, &gi})
        for (double& v : p->value.data()) v = r.normal();
    check_gradients({&hr, &hi, &gr, &gi}, [&](Tape& t) {
        const CVar h{t.parameter(hr), t.parameter(hi)};
        const CVar g{t.parameter(gr), t.parameter(gi)};
        CVar rr = complex_matmul(g, adjoint(g));
        rr = cadd(rr, constant(t, CMatrix(CMatrix::Identity(3, 3) * 0.5)));
        return quad_form_inv(h, rr);
    });
}

TEST_CASE("phase_to_unit yields unit modulus and correct gradient") {
    Parameter th("theta", random_tensor({2, 3}, 15, -3, 3));
    Tape t(false);
    const CMatrix u = phase_to_unit(t.constant(th.value)).value();
    for (Eigen::Index k = 0; k < u.size(); ++k) CHECK(std::abs(std::abs(u.data()[k]) - 1.0) < 1e-15);
    Parameter w("w", random_tensor({2, 3}, 16));
    check_gradients({&th}, [&](Tape& tp) {
        const CVar z = phase_to_unit(tp.parameter(th));
        return sum(add(mul(z.re, tp.constant(w.value)), mul(z.im, z.im)));
    });
}

TEST_CASE("abs2, conj and cscale gradients") {
    Parameter re("re", random_tensor({2, 2}, 17)), im("im", random_tensor({2, 2}, 18)), s("s", Tensor::scalar(0.7));
    check_gradients({&re, &im, &s}, [&](Tape& t) {
        const CVar z{t.parameter(re), t.parameter(im)};
        const CVar y = cscale(complex_matmul(z, conj(z)), t.parameter(s));
        return sum(abs2(csub(y, z)));
    });
}

TEST_CASE("inference tape records no gradients") {
    Parameter p("p", Tensor::scalar(2.0));
    Tape t(false);
    const Var v = mul(t.parameter(p), t.parameter(p));
    CHECK(v.value().item() == 4.0);
    CHECK_FALSE(t.recording());
}

TEST_CASE("SGD step is p - lr g") {
    Parameter p("p", Tensor({1, 3}, {1.0, -2.0, 0.5}));
    p.grad = Tensor({1, 3}, {0.5, 1.0, -4.0});
    Optimizer opt(OptimizerKind::Sgd, 0.1);
    std::vector<Parameter*> ps{&p};
    opt.step(ps);
    CHECK(p.value[0] == doctest::Approx(0.95));
    CHECK(p.value[1] == doctest::Approx(-2.1));
    CHECK(p.value[2] == doctest::Approx(0.9));
    CHECK(p.grad[0] == 0.0);
}

TEST_CASE("Adam first step moves each entry by about lr against its gradient sign") {
    Parameter p("p", Tensor({1, 2}, {1.0, 1.0}));
    p.grad = Tensor({1, 2}, {3.0, -0.01});
    Optimizer opt(OptimizerKind::Adam, 1e-3);
    std::vector<Parameter*> ps{&p};
    opt.step(ps);
    // m_hat / sqrt(v_hat) = g / |g| on step one.
    CHECK(p.value[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-8));
    CHECK(p.value[1] == doctest::Approx(1.0 + 1e-3 * 0.01 / (0.01 + 1e-8)).epsilon(1e-8));
}

TEST_CASE("a non-finite gradient aborts the step without touching parameters") {
    Parameter a("a", Tensor::scalar(1.0)), b("b", Tensor::scalar(2.0));
    a.grad = Tensor::scalar(1.0);
    b.grad = Tensor::scalar(NAN);
    Optimizer opt(OptimizerKind::Adam, 0.1);
    std::vector<Parameter*> ps{&a, &b};
    CHECK_THROWS_AS(opt.step(ps), TrainingError);
    CHECK(a.value.item() == 1.0);
    CHECK(b.value.item() == 2.0);
    CHECK_THROWS_AS(opt.set_learning_rate(-1.0), ConfigError);
}

}  // TEST_SUITE
