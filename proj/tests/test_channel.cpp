#include <doctest.h>

#include <cmath>
#include <numbers>

#include "isaclab/channel.hpp"
#include "isaclab/errors.hpp"
#include "support.hpp"

using namespace isac;

TEST_SUITE("channel-model") {

TEST_CASE("steering vector entries") {
    const double d = 0.5, theta = 0.4;
    const CVector a = steering_vector(8, d, theta);
    REQUIRE(a.size() == 8);
    for (int k = 0; k < 8; ++k) {
        const cd ref = std::exp(cd(0, 2 * std::numbers::pi * d * k * std::sin(theta))) / 8.0;
        CHECK(std::abs(a(k) - ref) < 1e-15);
    }
    // broadside: all entries equal
    const CVector b = steering_vector(4, d, 0.0);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(b(k) - cd(0.25, 0)) < 1e-16);
    CHECK_THROWS_AS(steering_vector(0, d, 0.0), PreconditionError);
}

TEST_CASE("path loss in dB decades") {
    CHECK(pathloss_linear(1.0) == doctest::Approx(1e-3));
    CHECK(pathloss_linear(10.0) == doctest::Approx(std::pow(10.0, -5.5)));
    CHECK(pathloss_linear(100.0) == doctest::Approx(1e-8));
    CHECK_THROWS_AS(pathloss_linear(0.0), DomainError);
    CHECK_THROWS_AS(pathloss_linear(-2.0), DomainError);
}

TEST_CASE("Rician core has unit mean power and the LoS mean") {
    RngStream rng(3);
    const double kappa = 0.3;
    const CMatrix h = rician_core(200, 200, kappa, rng);
    const double power = h.squaredNorm() / static_cast<double>(h.size());
    CHECK(power == doctest::Approx(1.0).epsilon(0.02));
    const cd mean = h.mean();
    CHECK(mean.real() == doctest::Approx(std::sqrt(kappa / (1 + kappa))).epsilon(0.02));
    CHECK(std::abs(mean.imag()) < 0.01);
    RngStream r2(4);
    const CMatrix los = rician_core(3, 3, INFINITY, r2);
    CHECK((los - CMatrix::Ones(3, 3)).norm() == 0.0);
    CHECK_THROWS_AS(rician_core(2, 2, -1.0, r2), DomainError);
}

TEST_CASE("assembled channel equals the explicit product") {
    ScenarioConfig cfg;
    RngStream rng(5);
    const Topology topo = sample_topology(cfg, rng);
    RngStream cr(6);
    const CMatrix core_c = rician_core(cfg.dims.n_user_ant, cfg.dims.n_tx, 0.3, cr);
    const CMatrix core_s = rician_core(cfg.dims.n_radar_ant, cfg.dims.n_tx, 0.3, cr);
    const CMatrix hc = assemble_channel_from_core(LinkKind::Com, topo, 1, 0, core_c);
    const CMatrix hs = assemble_channel_from_core(LinkKind::Sen, topo, 0, 1, core_s);
    const double gc = pathloss_linear(topo.dist_user[1][0]);
    const double gs = pathloss_linear(topo.dist_target[0][1]) * pathloss_linear(topo.dist_target_rx[1]);
    const auto sv = [](int n, double d, double th, int k) {
        return std::exp(cd(0, 2 * std::numbers::pi * d * k * std::sin(th))) / static_cast<double>(n);
    };
    for (int r = 0; r < hc.rows(); ++r)
        for (int c = 0; c < hc.cols(); ++c) {
            const double th = topo.angle_user[1][0];
            const cd ref = std::sqrt(gc) * sv(cfg.dims.n_user_ant, 0.5, th, r) * core_c(r, c) * sv(cfg.dims.n_tx, 0.5, th, c);
            CHECK(std::abs(hc(r, c) - ref) <= 1e-14 * std::abs(ref) + 1e-30);
        }
    for (int r = 0; r < hs.rows(); ++r)
        for (int c = 0; c < hs.cols(); ++c) {
            const cd ref = std::sqrt(gs) * sv(cfg.dims.n_radar_ant, 0.5, topo.angle_target_rx[1], r) * core_s(r, c) *
                           sv(cfg.dims.n_tx, 0.5, topo.angle_target[0][1], c);
            CHECK(std::abs(hs(r, c) - ref) <= 1e-14 * std::abs(ref) + 1e-30);
        }
    CHECK_THROWS_AS(assemble_channel_from_core(LinkKind::Com, topo, 2, 0, core_c), PreconditionError);
    CHECK_THROWS_AS(assemble_channel_from_core(LinkKind::Com, topo, 0, 0, core_s), DimensionError);
}

TEST_CASE("topology respects ranges and scenario generation is seeded") {
    ScenarioConfig cfg;
    RngStream a(9), b(9), c(10);
    const Scenario s1 = generate_scenario(cfg, a), s2 = generate_scenario(cfg, b), s3 = generate_scenario(cfg, c);
    CHECK(s1.channels == s2.channels);
    CHECK_FALSE(s1.channels == s3.channels);
    for (const auto& row : s1.topology.dist_user)
        for (double d : row) CHECK((d >= 20.0 && d <= 30.0));
    for (const auto& row : s1.topology.angle_target)
        for (double t : row) CHECK((t > -std::numbers::pi / 2 && t < std::numbers::pi / 2));
    CHECK(s1.channels.n_bs() == 2);
    CHECK(s1.channels.com[0][0].rows() == 2);
    CHECK(s1.channels.com[0][0].cols() == 8);
    CHECK(s1.channels.sen[1][1].rows() == 4);
    CHECK(s1.channels.all_finite());
}

TEST_CASE("dimension constraints name the violated inequality") {
    SystemDims d;
    d.n_users = 4;
    d.n_targets = 3;
    try {
        d.validate();
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("I + J <= N") != std::string::npos);
    }
    d = SystemDims{};
    d.n_rf = 9;
    CHECK_THROWS_WITH_AS(d.validate(), doctest::Contains("N <= N_t"), ConfigError);
    d = SystemDims{};
    d.n_users = 0;
    CHECK_NOTHROW(d.validate());  // sensing-only network
    d.n_targets = 0;
    CHECK_THROWS_AS(d.validate(), ConfigError);
}

TEST_CASE("CSI error: estimate plus error reproduces the truth") {
    const ChannelSet h = testing::random_channels(SystemDims{}, 11);
    CsiErrorSpec spec;
    spec.model = CsiErrorModel::Gaussian;
    spec.sigma2_com = spec.sigma2_sen = 0.01;
    spec.relative = true;
    RngStream rng(12);
    const CsiRealization r = apply_csi_error(h, spec, rng);
    for (std::size_t m = 0; m < h.n_bs(); ++m)
        for (std::size_t i = 0; i < h.n_users(); ++i) {
            const CMatrix diff = r.true_channel.com[m][i] - h.com[m][i];
            CHECK(diff.norm() <= 1e-15 * h.com[m][i].norm());
        }
    CHECK(r.estimated + r.error == r.true_channel);
}

TEST_CASE("gaussian CSI error variance, absolute and relative") {
    SystemDims d;
    d.n_tx = 64;
    d.n_rf = 4;
    const ChannelSet h = testing::random_channels(d, 13);
    CsiErrorSpec spec;
    spec.model = CsiErrorModel::Gaussian;
    spec.sigma2_com = spec.sigma2_sen = 0.25;
    RngStream rng(14);
    double acc = 0;
    std::size_t n = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const CsiRealization r = sample_error_around(h, spec, rng);
        for (const auto& row : r.error.com)
            for (const auto& e : row) {
                acc += e.squaredNorm();
                n += static_cast<std::size_t>(e.size());
            }
    }
    CHECK(acc / static_cast<double>(n) == doctest::Approx(0.25).epsilon(0.05));

    spec.relative = true;
    spec.sigma2_com = 0.01;
    RngStream r2(15);
    double ratio = 0;
    const int reps = 40;
    for (int rep = 0; rep < reps; ++rep) {
        const CsiRealization r = sample_error_around(h, spec, r2);
        ratio += r.error.com[0][0].squaredNorm() / h.com[0][0].squaredNorm();
    }
    CHECK(ratio / reps == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("bounded CSI error stays inside its disk") {
    const ChannelSet h = testing::random_channels(SystemDims{}, 16);
    CsiErrorSpec spec;
    spec.model = CsiErrorModel::Bounded;
    spec.eps_com = 0.3;
    spec.eps_sen = 0.1;
    RngStream rng(17);
    const CsiRealization r = sample_error_around(h, spec, rng);
    for (const auto& row : r.error.com)
        for (const auto& e : row)
            for (Eigen::Index k = 0; k < e.size(); ++k) CHECK(std::abs(e.data()[k]) <= 0.3);
    for (const auto& row : r.error.sen)
        for (const auto& e : row)
            for (Eigen::Index k = 0; k < e.size(); ++k) CHECK(std::abs(e.data()[k]) <= 0.1);
    spec.eps_com = -1;
    CHECK_THROWS_AS(sample_error_around(h, spec, rng), ConfigError);
}

TEST_CASE("no-error model leaves the estimate equal to the truth") {
    const ChannelSet h = testing::random_channels(SystemDims{}, 18);
    RngStream rng(19);
    const CsiRealization r = apply_csi_error(h, CsiErrorSpec{}, rng);
    CHECK(r.estimated == h);
    CHECK(r.true_channel == h);
    CHECK(parse_csi_model("gaussian") == CsiErrorModel::Gaussian);
    CHECK(to_string(CsiErrorModel::Bounded) == "bounded");
    CHECK_THROWS_AS(parse_csi_model("laplace"), ConfigError);
}

TEST_CASE("forked streams are independent and reproducible") {
    const RngStream root(21, {1, 2});
    RngStream a = root.fork(3), b = root.fork(3), c = root.fork(4);
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
}

}  // TEST_SUITE
