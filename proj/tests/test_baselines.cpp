#include <doctest.h>

#include <cmath>

#include "isaclab/baselines.hpp"
#include "isaclab/errors.hpp"
#include "support.hpp"

using namespace isac;
using namespace isac::baselines;

namespace {

// Dominant eigenvector of G = H^H H by power iteration, first entry rotated real.
CVector power_iteration(const CMatrix& h, int iters = 2000) {
    const CMatrix g = h.adjoint() * h;
    CVector v = CVector::Ones(h.cols());
    for (int k = 0; k < iters; ++k) {
        v = g * v;
        v /= v.norm();
    }
    return v * (std::conj(v(0)) / std::abs(v(0)));
}

double top_singular(const CMatrix& h) {
    const CVector v = power_iteration(h);
    return (h * v).norm();
}

CMatrix random_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    RngStream rng(seed);
    CMatrix a(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) a(i, j) = rng.complex_normal();
    return a;
}

double stream_power(const CMatrix& f, const CMatrix& w, Eigen::Index k) { return (f * w.col(k)).squaredNorm(); }

}  // namespace

TEST_SUITE("classical-baselines") {

TEST_CASE("analog stage takes the phases of each stream's dominant right singular vector") {
    const SystemDims d;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const ChannelSet ch = testing::random_channels(d, 100 + s);
        for (std::size_t m = 0; m < ch.n_bs(); ++m) {
            const CMatrix f = baseline_analog(ch, m, d.n_rf);
            REQUIRE(f.rows() == d.n_tx);
            REQUIRE(f.cols() == d.n_rf);
            for (Eigen::Index k = 0; k < f.size(); ++k) CHECK(std::abs(std::abs(f.data()[k]) - 1.0) < 1e-14);
            for (std::size_t k = 0; k < 4; ++k) {
                const CMatrix& h = k < 2 ? ch.com[m][k] : ch.sen[m][k - 2];
                const CVector v = power_iteration(h);
                for (Eigen::Index t = 0; t < v.size(); ++t) {
                    const cd want = std::polar(1.0, std::arg(v(t)));
                    CHECK(std::abs(f(t, static_cast<Eigen::Index>(k)) - want) < 1e-8);
                }
            }
            // N > I+J: the spare chains share one filler column
            CHECK((f.col(4) - f.col(5)).norm() == 0.0);
        }
    }
    CHECK_THROWS_AS(baseline_analog(testing::random_channels(d, 1), 0, 3), PreconditionError);
}

TEST_CASE("effective channel keeps the dominant gain of H F") {
    const CMatrix f = random_matrix(8, 6, 3);
    const CMatrix h = random_matrix(4, 8, 4);
    const EffectiveChannel e = effective_channel(h, f);
    CHECK_FALSE(e.zero);
    CHECK(testing::rel_err(e.row.norm(), top_singular(h * f)) < 1e-9);
    const CMatrix single = random_matrix(1, 8, 5);
    CHECK((effective_channel(single, f).row - (single * f).row(0).transpose()).norm() == 0.0);
    const EffectiveChannel z = effective_channel(CMatrix::Zero(2, 8), f);
    CHECK(z.zero);
    CHECK(z.row.norm() == 0.0);
    CHECK_THROWS_AS(effective_channel(random_matrix(2, 7, 6), f), DimensionError);
}

TEST_CASE("zero forcing nulls inter-stream leakage") {
    const CMatrix a = random_matrix(4, 6, 7);
    const CMatrix f = random_matrix(8, 6, 8);
    const DigitalResult r = baseline_digital(BaselineKind::Zf, a, f, 1e-9, 2.0);
    CHECK_FALSE(r.pinv_fallback);
    const CMatrix aw = a * r.w;
    double diag = 0;
    for (Eigen::Index k = 0; k < 4; ++k) diag = std::max(diag, std::abs(aw(k, k)));
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j)
            if (i != j) CHECK(std::abs(aw(i, j)) < 1e-10 * diag);
    for (Eigen::Index k = 0; k < 4; ++k) CHECK(testing::rel_err(stream_power(f, r.w, k), 0.5) < 1e-12);
}

TEST_CASE("MMSE approaches ZF at vanishing noise and MRT direction otherwise") {
    const CMatrix a = random_matrix(3, 6, 9);
    const CMatrix f = random_matrix(8, 6, 10);
    const CMatrix zf = baseline_digital(BaselineKind::Zf, a, f, 1.0, 1.0).w;
    const CMatrix mm = baseline_digital(BaselineKind::Mmse, a, f, 1e-12, 1.0).w;
    CHECK((mm - zf).norm() < 1e-8 * zf.norm());
    // large noise: the regulariser dominates and MMSE turns into scaled MRT
    const CMatrix mrt = baseline_digital(BaselineKind::Mrt, a, f, 1.0, 1.0).w;
    const CMatrix loud = baseline_digital(BaselineKind::Mmse, a, f, 1e12, 1.0).w;
    CHECK((loud - mrt).norm() < 1e-6 * mrt.norm());
    for (Eigen::Index k = 0; k < 3; ++k) {
        const CVector dir = a.row(k).adjoint();
        const cd c = dir.dot(mrt.col(k)) / dir.squaredNorm();
        CHECK((mrt.col(k) - c * dir).norm() < 1e-12 * mrt.col(k).norm());
    }
}

TEST_CASE("pseudo-inverse of a rank-deficient matrix and ZF fallback") {
    CMatrix a = random_matrix(3, 5, 11);
    a.row(2) = a.row(0) * cd(0.5, -2.0);
    bool truncated = false;
    const CMatrix p = right_pseudo_inverse(a, 1e-10, &truncated);
    CHECK(truncated);
    CHECK((a * p * a - a).norm() < 1e-10 * a.norm());
    CHECK((p * a * p - p).norm() < 1e-10 * p.norm());
    const CMatrix ap = a * p;
    CHECK((ap - ap.adjoint()).norm() < 1e-10);
    truncated = true;
    const CMatrix full = random_matrix(3, 5, 12);
    CHECK((full * right_pseudo_inverse(full, 1e-10, &truncated) - CMatrix::Identity(3, 3)).norm() < 1e-10);
    CHECK_FALSE(truncated);
    const DigitalResult r = baseline_digital(BaselineKind::Zf, a, random_matrix(8, 5, 13), 1e-9, 1.0);
    CHECK(r.pinv_fallback);
    CHECK(r.w.allFinite());
}

TEST_CASE("zero streams are skipped in the power split") {
    CMatrix a = random_matrix(3, 4, 14);
    a.row(1).setZero();
    const CMatrix f = random_matrix(6, 4, 15);
    const DigitalResult r = baseline_digital(BaselineKind::Mrt, a, f, 1e-9, 1.0);
    CHECK(r.w.col(1).norm() == 0.0);
    CHECK(testing::rel_err(stream_power(f, r.w, 0), 0.5) < 1e-12);
    CHECK(testing::rel_err(stream_power(f, r.w, 2), 0.5) < 1e-12);
}

TEST_CASE("run_baseline meets the per-BS constraints") {
    const SystemDims d;
    const ChannelSet ch = testing::random_channels(d, 16);
    ObjectiveSetup setup;
    setup.noise.power = 10.0;
    for (BaselineKind kind : {BaselineKind::Mrt, BaselineKind::Zf, BaselineKind::Mmse}) {
        for (bool centralized : {false, true}) {
            const BaselineResult r = run_baseline(kind, ch, setup, d.n_rf, BaselineOptions{centralized});
            REQUIRE(r.beams.n_bs() == 2);
            CHECK(max_modulus_error(r.beams) < 1e-14);
            for (std::size_t m = 0; m < 2; ++m) {
                CHECK(r.beams.digital[m].cols() == 4);
                CHECK(testing::rel_err(bs_power(r.beams.analog[m], r.beams.digital[m]), 10.0) < 1e-9);
            }
            const SinrReport ref = wscsc(ch, r.beams, setup.weights, setup.noise);
            CHECK(r.report.wscsc == ref.wscsc);
            CHECK(std::isfinite(r.report.wscsc));
        }
    }
}

TEST_CASE("per-BS ZF leaves no intra-BS leakage on the effective channels") {
    const SystemDims d;
    const ChannelSet ch = testing::random_channels(d, 17);
    const BaselineResult r = run_baseline(BaselineKind::Zf, ch, ObjectiveSetup{}, d.n_rf);
    for (std::size_t m = 0; m < 2; ++m) {
        CMatrix a(4, d.n_rf);
        for (std::size_t k = 0; k < 4; ++k)
            a.row(static_cast<Eigen::Index>(k)) =
                effective_channel(k < 2 ? ch.com[m][k] : ch.sen[m][k - 2], r.beams.analog[m]).row.transpose();
        const CMatrix aw = a * r.beams.digital[m];
        const double scale = aw.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < 4; ++i)
            for (Eigen::Index j = 0; j < 4; ++j)
                if (i != j) CHECK(std::abs(aw(i, j)) < 1e-9 * scale);
    }
}

TEST_CASE("baseline names") {
    CHECK(parse_baseline("zf") == BaselineKind::Zf);
    CHECK(parse_baseline("mmse") == BaselineKind::Mmse);
    CHECK(to_string(BaselineKind::Mrt) == "mrt");
    CHECK_THROWS_AS(parse_baseline("wmmse"), ConfigError);
}

}  // TEST_SUITE
