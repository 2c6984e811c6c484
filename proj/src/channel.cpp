#include "isaclab/channel.hpp"

#include <cmath>
#include <numbers>

#include "isaclab/errors.hpp"

namespace isac {

void SystemDims::validate() const {
    auto fail = [](const std::string& what) { throw ConfigError("invalid topology: " + what); };
    if (n_bs < 1) fail("M >= 1 required");
    if (n_users < 0 || n_targets < 0) fail("I >= 0 and J >= 0 required");
    if (n_users + n_targets < 1) fail("I + J >= 1 required");
    if (n_tx < 1 || n_rf < 1 || n_user_ant < 1 || n_radar_ant < 1) fail("antenna and RF-chain counts must be >= 1");
    if (n_users + n_targets > n_rf) {
        fail("I + J <= N violated (I + J = " + std::to_string(n_users + n_targets) +
             ", N = " + std::to_string(n_rf) + ")");
    }
    if (n_rf > n_tx) {
        fail("N <= N_t violated (N = " + std::to_string(n_rf) + ", N_t = " + std::to_string(n_tx) + ")");
    }
}

void Topology::validate() const {
    dims.validate();
    if (!(spacing_bs > 0.0) || !(spacing_user > 0.0) || !(spacing_radar > 0.0))
        throw ConfigError("invalid topology: antenna spacings must be > 0");
    const auto m = static_cast<std::size_t>(dims.n_bs);
    const auto i = static_cast<std::size_t>(dims.n_users);
    const auto j = static_cast<std::size_t>(dims.n_targets);
    auto check2 = [&](const std::vector<std::vector<double>>& v, std::size_t inner, const char* name) {
        if (v.size() != m) throw ConfigError(std::string("invalid topology: ") + name + " has wrong BS count");
        for (const auto& row : v)
            if (row.size() != inner) throw ConfigError(std::string("invalid topology: ") + name + " has wrong length");
    };
    check2(angle_user, i, "angle_user");
    check2(angle_target, j, "angle_target");
    check2(dist_user, i, "dist_user");
    check2(dist_target, j, "dist_target");
    if (angle_target_rx.size() != j || dist_target_rx.size() != j)
        throw ConfigError("invalid topology: receiver-leg geometry has wrong length");
}

bool ChannelSet::all_finite() const {
    for (const auto* group : {&com, &sen})
        for (const auto& bs : *group)
            for (const auto& h : bs)
                if (!h.allFinite()) return false;
    return true;
}

namespace {
template <class Op>
ChannelSet combine(const ChannelSet& a, const ChannelSet& b, Op op) {
    if (a.com.size() != b.com.size() || a.sen.size() != b.sen.size())
        throw DimensionError("channel sets differ in BS count");
    ChannelSet out = a;
    for (std::size_t m = 0; m < a.com.size(); ++m) {
        if (a.com[m].size() != b.com[m].size() || a.sen[m].size() != b.sen[m].size())
            throw DimensionError("channel sets differ in user/target count");
        for (std::size_t i = 0; i < a.com[m].size(); ++i) out.com[m][i] = op(a.com[m][i], b.com[m][i]);
        for (std::size_t j = 0; j < a.sen[m].size(); ++j) out.sen[m][j] = op(a.sen[m][j], b.sen[m][j]);
    }
    return out;
}
}  // namespace

ChannelSet operator+(const ChannelSet& a, const ChannelSet& b) {
    return combine(a, b, [](const CMatrix& x, const CMatrix& y) -> CMatrix { return x + y; });
}

ChannelSet operator-(const ChannelSet& a, const ChannelSet& b) {
    return combine(a, b, [](const CMatrix& x, const CMatrix& y) -> CMatrix { return x - y; });
}

bool operator==(const ChannelSet& a, const ChannelSet& b) {
    if (a.com.size() != b.com.size() || a.sen.size() != b.sen.size()) return false;
    for (std::size_t m = 0; m < a.com.size(); ++m) {
        if (a.com[m].size() != b.com[m].size() || a.sen[m].size() != b.sen[m].size()) return false;
        for (std::size_t i = 0; i < a.com[m].size(); ++i)
            if (a.com[m][i].rows() != b.com[m][i].rows() || a.com[m][i] != b.com[m][i]) return false;
        for (std::size_t j = 0; j < a.sen[m].size(); ++j)
            if (a.sen[m][j].rows() != b.sen[m][j].rows() || a.sen[m][j] != b.sen[m][j]) return false;
    }
    return true;
}

CsiErrorModel parse_csi_model(const std::string& name) {
    if (name == "none") return CsiErrorModel::None;
    if (name == "bounded") return CsiErrorModel::Bounded;
    if (name == "gaussian") return CsiErrorModel::Gaussian;
    throw ConfigError("unknown CSI error model '" + name + "' (expected none, bounded or gaussian)");
}

std::string to_string(CsiErrorModel model) {
    switch (model) {
        case CsiErrorModel::None: return "none";
        case CsiErrorModel::Bounded: return "bounded";
        case CsiErrorModel::Gaussian: return "gaussian";
    }
    return "none";
}

void CsiErrorSpec::validate() const {
    if (eps_com < 0.0 || eps_sen < 0.0) throw ConfigError("CSI error bounds must be >= 0");
    if (sigma2_com < 0.0 || sigma2_sen < 0.0) throw ConfigError("CSI error variances must be >= 0");
}

CVector steering_vector(int n, double spacing, double theta) {
    if (n < 1) throw PreconditionError("steering vector needs n >= 1");
    CVector a(n);
    const double phase = 2.0 * std::numbers::pi * spacing * std::sin(theta);
    const double amp = 1.0 / static_cast<double>(n);
    for (int k = 0; k < n; ++k) a(k) = std::polar(amp, phase * k);
    return a;
}

double pathloss_linear(double distance, const PathLossModel& model) {
    if (!(distance > 0.0)) throw DomainError("path loss distance must be > 0, got " + std::to_string(distance));
    const double db = model.ref_db - model.slope_db * std::log10(distance / model.ref_distance);
    return std::pow(10.0, db / 10.0);
}

CMatrix rician_core(int rows, int cols, double kappa, RngStream& rng) {
    if (kappa < 0.0) throw DomainError("Rician factor must be >= 0");
    const double los = std::isinf(kappa) ? 1.0 : std::sqrt(kappa / (1.0 + kappa));
    const double nlos = std::isinf(kappa) ? 0.0 : std::sqrt(1.0 / (1.0 + kappa));
    CMatrix h(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) h(r, c) = los + nlos * rng.complex_normal(1.0);
    return h;
}

namespace {
void check_link(LinkKind kind, const Topology& topo, int m, int idx) {
    const int count = kind == LinkKind::Com ? topo.dims.n_users : topo.dims.n_targets;
    if (m < 0 || m >= topo.dims.n_bs || idx < 0 || idx >= count) {
        throw PreconditionError(std::string(kind == LinkKind::Com ? "user" : "target") + " link (" +
                                std::to_string(m) + ", " + std::to_string(idx) + ") out of range");
    }
}
}  // namespace

CMatrix assemble_channel_from_core(LinkKind kind, const Topology& topo, int m, int idx, const CMatrix& core,
                                   const PathLossModel& pl) {
    check_link(kind, topo, m, idx);
    const auto sm = static_cast<std::size_t>(m), si = static_cast<std::size_t>(idx);
    CVector rx, tx;
    double gain = 0.0;
    if (kind == LinkKind::Com) {
        const double theta = topo.angle_user[sm][si];
        rx = steering_vector(topo.dims.n_user_ant, topo.spacing_user, theta);
        tx = steering_vector(topo.dims.n_tx, topo.spacing_bs, theta);
        gain = pathloss_linear(topo.dist_user[sm][si], pl);
    } else {
        rx = steering_vector(topo.dims.n_radar_ant, topo.spacing_radar, topo.angle_target_rx[si]);
        tx = steering_vector(topo.dims.n_tx, topo.spacing_bs, topo.angle_target[sm][si]);
        gain = pathloss_linear(topo.dist_target[sm][si], pl) * pathloss_linear(topo.dist_target_rx[si], pl);
    }
    if (core.rows() != rx.size() || core.cols() != tx.size())
        throw DimensionError("channel core has the wrong shape for this link");
    return std::sqrt(gain) * (rx.asDiagonal() * core * tx.asDiagonal());
}

CMatrix assemble_channel(LinkKind kind, const Topology& topo, int m, int idx, double kappa, RngStream& rng,
                         const PathLossModel& pl) {
    check_link(kind, topo, m, idx);
    const int rows = kind == LinkKind::Com ? topo.dims.n_user_ant : topo.dims.n_radar_ant;
    const CMatrix core = rician_core(rows, topo.dims.n_tx, kappa, rng);
    return assemble_channel_from_core(kind, topo, m, idx, core, pl);
}

ChannelSet assemble_channels(const Topology& topo, double kappa_com, double kappa_sen, RngStream& rng,
                             const PathLossModel& pl) {
    topo.validate();
    ChannelSet cs;
    cs.kappa_com = kappa_com;
    cs.kappa_sen = kappa_sen;
    const auto M = static_cast<std::size_t>(topo.dims.n_bs);
    cs.com.resize(M);
    cs.sen.resize(M);
    cs.pathloss_com.resize(M);
    cs.pathloss_sen.resize(M);
    for (int m = 0; m < topo.dims.n_bs; ++m) {
        const auto sm = static_cast<std::size_t>(m);
        for (int i = 0; i < topo.dims.n_users; ++i) {
            cs.com[sm].push_back(assemble_channel(LinkKind::Com, topo, m, i, kappa_com, rng, pl));
            cs.pathloss_com[sm].push_back(pathloss_linear(topo.dist_user[sm][static_cast<std::size_t>(i)], pl));
        }
        for (int j = 0; j < topo.dims.n_targets; ++j) {
            const auto sj = static_cast<std::size_t>(j);
            cs.sen[sm].push_back(assemble_channel(LinkKind::Sen, topo, m, j, kappa_sen, rng, pl));
            cs.pathloss_sen[sm].push_back(pathloss_linear(topo.dist_target[sm][sj], pl) *
                                          pathloss_linear(topo.dist_target_rx[sj], pl));
        }
    }
    return cs;
}

namespace {

cd disk_sample(double radius, RngStream& rng) {
    if (radius == 0.0) return {0.0, 0.0};
    for (;;) {
        const double r = radius * std::sqrt(rng.uniform(0.0, 1.0));
        const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const cd z = std::polar(r, phi);
        if (std::abs(z) <= radius) return z;
    }
}

CMatrix draw_error(const CMatrix& reference, double eps, double sigma2, CsiErrorModel model, bool relative,
                   RngStream& rng) {
    CMatrix e = CMatrix::Zero(reference.rows(), reference.cols());
    if (model == CsiErrorModel::None) return e;
    const double power = relative ? reference.squaredNorm() / static_cast<double>(reference.size()) : 1.0;
    for (Eigen::Index c = 0; c < e.cols(); ++c)
        for (Eigen::Index r = 0; r < e.rows(); ++r) {
            if (model == CsiErrorModel::Gaussian) e(r, c) = rng.complex_normal(sigma2 * power);
            else e(r, c) = disk_sample(eps * std::sqrt(power), rng);
        }
    return e;
}

ChannelSet draw_errors(const ChannelSet& reference, const CsiErrorSpec& spec, RngStream& rng) {
    ChannelSet err = reference;
    for (std::size_t m = 0; m < reference.com.size(); ++m) {
        for (std::size_t i = 0; i < reference.com[m].size(); ++i)
            err.com[m][i] = draw_error(reference.com[m][i], spec.eps_com, spec.sigma2_com, spec.model, spec.relative, rng);
        for (std::size_t j = 0; j < reference.sen[m].size(); ++j)
            err.sen[m][j] = draw_error(reference.sen[m][j], spec.eps_sen, spec.sigma2_sen, spec.model, spec.relative, rng);
    }
    return err;
}

}  // namespace

CsiRealization apply_csi_error(const ChannelSet& true_channel, const CsiErrorSpec& spec, RngStream& rng) {
    spec.validate();
    CsiRealization out;
    out.error = draw_errors(true_channel, spec, rng);
    out.estimated = true_channel - out.error;
    out.true_channel = out.estimated + out.error;
    return out;
}

CsiRealization sample_error_around(const ChannelSet& estimated, const CsiErrorSpec& spec, RngStream& rng) {
    spec.validate();
    CsiRealization out;
    out.estimated = estimated;
    out.error = draw_errors(estimated, spec, rng);
    out.true_channel = out.estimated + out.error;
    return out;
}

Topology sample_topology(const ScenarioConfig& cfg, RngStream& rng) {
    cfg.dims.validate();
    if (!(cfg.dist_min > 0.0) || cfg.dist_max < cfg.dist_min)
        throw ConfigError("invalid topology: distance range must satisfy 0 < min <= max");
    Topology t;
    t.dims = cfg.dims;
    t.spacing_bs = cfg.spacing_bs;
    t.spacing_user = cfg.spacing_user;
    t.spacing_radar = cfg.spacing_radar;
    const auto M = static_cast<std::size_t>(cfg.dims.n_bs);
    const auto I = static_cast<std::size_t>(cfg.dims.n_users);
    const auto J = static_cast<std::size_t>(cfg.dims.n_targets);
    const double half_pi = std::numbers::pi / 2.0;
    auto angle = [&] {
        // open interval (-pi/2, pi/2)
        double a;
        do {
            a = rng.uniform(-half_pi, half_pi);
        } while (a == -half_pi);
        return a;
    };
    auto dist = [&] { return cfg.dist_min == cfg.dist_max ? cfg.dist_min : rng.uniform(cfg.dist_min, cfg.dist_max); };
    t.angle_user.assign(M, std::vector<double>(I));
    t.angle_target.assign(M, std::vector<double>(J));
    t.dist_user.assign(M, std::vector<double>(I));
    t.dist_target.assign(M, std::vector<double>(J));
    t.angle_target_rx.resize(J);
    t.dist_target_rx.resize(J);
    for (std::size_t m = 0; m < M; ++m) {
        for (std::size_t i = 0; i < I; ++i) {
            t.angle_user[m][i] = angle();
            t.dist_user[m][i] = dist();
        }
        for (std::size_t j = 0; j < J; ++j) {
            t.angle_target[m][j] = angle();
            t.dist_target[m][j] = dist();
        }
    }
    for (std::size_t j = 0; j < J; ++j) {
        t.angle_target_rx[j] = angle();
        t.dist_target_rx[j] = dist();
    }
    t.validate();
    return t;
}

Scenario generate_scenario(const ScenarioConfig& cfg, RngStream& rng) {
    cfg.csi.validate();
    Scenario s;
    s.topology = sample_topology(cfg, rng);
    s.channels = assemble_channels(s.topology, cfg.kappa_com, cfg.kappa_sen, rng, cfg.pathloss);
    s.csi = apply_csi_error(s.channels, cfg.csi, rng);
    return s;
}

}  // namespace isac
