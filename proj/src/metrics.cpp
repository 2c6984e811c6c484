#include "isaclab/metrics.hpp"

#include <cmath>

#include "isaclab/errors.hpp"

namespace isac {

using ad::CVar;
using ad::Tape;
using ad::Var;

ReceiveMode parse_receive_mode(const std::string& name) {
    if (name == "mvdr") return ReceiveMode::Mvdr;
    if (name == "matched") return ReceiveMode::Matched;
    throw ConfigError("unknown receive beamformer mode '" + name + "' (expected mvdr or matched)");
}

std::string to_string(ReceiveMode mode) { return mode == ReceiveMode::Mvdr ? "mvdr" : "matched"; }

void ObjectiveWeights::validate() const {
    if (alpha_com < 0.0 || alpha_sen < 0.0) throw ConfigError("weights: alpha_com and alpha_sen must be >= 0");
    if (!(alpha_com + alpha_sen > 0.0)) throw ConfigError("weights: alpha_com + alpha_sen must be > 0");
    if (!(eta > 0.0)) throw ConfigError("weights: eta must be > 0");
}

void NoiseAndPower::validate() const {
    if (!(noise_user > 0.0) || !(noise_radar > 0.0)) throw ConfigError("noise variances must be > 0");
    if (!(power > 0.0)) throw ConfigError("power budget must be > 0");
}

double bs_power(const CMatrix& analog, const CMatrix& digital) { return (analog * digital).squaredNorm(); }

double max_modulus_error(const BeamformerSet& bf) {
    double worst = 0.0;
    for (const auto& f : bf.analog)
        for (Eigen::Index k = 0; k < f.size(); ++k) worst = std::max(worst, std::abs(std::abs(f(k)) - 1.0));
    return worst;
}

BeamformerVars constant(Tape& tape, const BeamformerSet& bf) {
    BeamformerVars v;
    for (const auto& f : bf.analog) v.analog.push_back(ad::constant(tape, f));
    for (const auto& w : bf.digital) v.digital.push_back(ad::constant(tape, w));
    return v;
}

BeamformerSet values(const BeamformerVars& vars) {
    BeamformerSet bf;
    for (const auto& f : vars.analog) bf.analog.push_back(f.value());
    for (const auto& w : vars.digital) bf.digital.push_back(w.value());
    return bf;
}

Var bs_power(const CVar& analog, const CVar& digital) { return ad::sum(ad::abs2(ad::complex_matmul(analog, digital))); }

namespace {

std::vector<std::size_t> all_but(std::size_t n, std::size_t skip) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < n; ++k)
        if (k != skip) out.push_back(k);
    return out;
}

void check_shapes(const ChannelSet& ch, const BeamformerSet& bf) {
    const std::size_t M = ch.n_bs(), K = ch.n_users() + ch.n_targets();
    if (bf.analog.size() != M || bf.digital.size() != M)
        throw DimensionError("beamformer BS count does not match the channel set");
    for (std::size_t m = 0; m < M; ++m) {
        if (static_cast<std::size_t>(bf.digital[m].cols()) != K || bf.analog[m].cols() != bf.digital[m].rows())
            throw DimensionError("beamformer shapes inconsistent at BS " + std::to_string(m));
    }
}

// Per-receiver stream signatures: column k is the contribution of stream k summed over BSs.
struct Signatures {
    std::vector<CVar> user;    // [i] N_u x K
    std::vector<CVar> target;  // [j] N_r x K
};

Signatures signatures(Tape& tape, const ChannelSet& ch, const BeamformerVars& bf) {
    const std::size_t M = ch.n_bs();
    if (bf.analog.size() != M || bf.digital.size() != M)
        throw DimensionError("beamformer BS count does not match the channel set");
    std::vector<CVar> x;
    for (std::size_t m = 0; m < M; ++m) x.push_back(ad::complex_matmul(bf.analog[m], bf.digital[m]));
    Signatures s;
    for (std::size_t i = 0; i < ch.n_users(); ++i) {
        CVar acc = ad::complex_matmul(ad::constant(tape, ch.com[0][i]), x[0]);
        for (std::size_t m = 1; m < M; ++m) acc = ad::cadd(acc, ad::complex_matmul(ad::constant(tape, ch.com[m][i]), x[m]));
        s.user.push_back(acc);
    }
    for (std::size_t j = 0; j < ch.n_targets(); ++j) {
        CVar acc = ad::complex_matmul(ad::constant(tape, ch.sen[0][j]), x[0]);
        for (std::size_t m = 1; m < M; ++m) acc = ad::cadd(acc, ad::complex_matmul(ad::constant(tape, ch.sen[m][j]), x[m]));
        s.target.push_back(acc);
    }
    return s;
}

Var user_gamma(Tape& tape, const CVar& g, const CVar* g_err, std::size_t i, double noise) {
    const std::size_t n = g.rows(), K = g.cols();
    const std::size_t col[1] = {i};
    CVar desired = ad::cselect_cols(g, col);
    CVar r = ad::constant(tape, CMatrix(noise * CMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))));
    const auto others = all_but(K, i);
    if (!others.empty()) {
        CVar go = ad::cselect_cols(g, others);
        r = ad::cadd(r, ad::complex_matmul(go, ad::adjoint(go)));
    }
    if (g_err) r = ad::cadd(r, ad::complex_matmul(*g_err, ad::adjoint(*g_err)));
    return ad::quad_form_inv(desired, r);
}

Var radar_gamma(Tape& tape, const CVar& s, const CVar* s_err, const CVector& u, std::size_t self, double noise) {
    const CVar urow = ad::constant(tape, CMatrix(u.transpose()));
    const Var p = ad::abs2(ad::complex_matmul(urow, s));
    Var den = tape.constant(ad::Tensor::scalar(noise * u.squaredNorm()));
    const auto others = all_but(s.cols(), self);
    if (!others.empty()) den = den + ad::sum(ad::select_cols(p, others));
    if (s_err) den = den + ad::sum(ad::abs2(ad::complex_matmul(urow, *s_err)));
    return ad::element(p, self) / den;
}

CVector receive_from_signature(const CMatrix& s, std::size_t self, double noise, ReceiveMode mode) {
    const CVector h = s.col(static_cast<Eigen::Index>(self));
    const double hn = h.norm();
    if (!(hn > 0.0)) throw DegenerateTargetError("target " + std::to_string(self) + " has a zero desired signature");
    if (mode == ReceiveMode::Matched) return h.conjugate() / hn;
    const auto n = s.rows();
    CMatrix r = noise * CMatrix::Identity(n, n);
    for (Eigen::Index k = 0; k < s.cols(); ++k) {
        if (static_cast<std::size_t>(k) == self) continue;
        r += s.col(k) * s.col(k).adjoint();
    }
    const CVector x = r.ldlt().solve(h);
    // u = h^H R^{-1} as a row; stored entries are conj(R^{-1} h).
    CVector u = x.conjugate();
    const double un = u.norm();
    if (!(un > 0.0) || !std::isfinite(un)) throw NumericError("MVDR receive vector is degenerate");
    return u / un;
}

CVector receive_or_default(const CMatrix& s, std::size_t self, double noise, ReceiveMode mode) {
    if (s.col(static_cast<Eigen::Index>(self)).norm() == 0.0) {
        CVector e = CVector::Zero(s.rows());
        e(0) = 1.0;
        return e;
    }
    return receive_from_signature(s, self, noise, mode);
}

ObjectiveTerms assemble(Tape& tape, std::vector<Var> gu, std::vector<Var> gt, const ObjectiveWeights& w,
                        bool eta_in_sensing) {
    w.validate();
    ObjectiveTerms t;
    t.gamma_user = std::move(gu);
    t.gamma_target = std::move(gt);
    Var scc = tape.constant(ad::Tensor::scalar(0.0));
    for (const auto& g : t.gamma_user) scc = scc + ad::log1p(g);
    Var ssc = tape.constant(ad::Tensor::scalar(0.0));
    const double eta = eta_in_sensing ? w.eta : 1.0;
    for (const auto& g : t.gamma_target) ssc = ssc + ad::log1p(ad::scale(g, eta));
    t.scc = scc;
    t.ssc = ssc;
    t.wscsc = ad::scale(scc, w.alpha_com) + ad::scale(ssc, w.alpha_sen);
    return t;
}

}  // namespace

SinrReport ObjectiveTerms::report() const {
    SinrReport r;
    for (const auto& g : gamma_user) r.gamma_user.push_back(g.value().item());
    for (const auto& g : gamma_target) r.gamma_target.push_back(g.value().item());
    r.scc = scc.value().item();
    r.ssc = ssc.value().item();
    r.wscsc = wscsc.value().item();
    return r;
}

ObjectiveTerms wscsc_terms(Tape& tape, const ChannelSet& ch, const BeamformerVars& bf, const ObjectiveWeights& w,
                           const NoiseAndPower& np, ReceiveMode mode) {
    const Signatures s = signatures(tape, ch, bf);
    const std::size_t I = ch.n_users();
    std::vector<Var> gu, gt;
    for (std::size_t i = 0; i < I; ++i) gu.push_back(user_gamma(tape, s.user[i], nullptr, i, np.noise_user));
    for (std::size_t j = 0; j < ch.n_targets(); ++j) {
        const CVector u = receive_or_default(s.target[j].value(), I + j, np.noise_radar, mode);
        gt.push_back(radar_gamma(tape, s.target[j], nullptr, u, I + j, np.noise_radar));
    }
    return assemble(tape, std::move(gu), std::move(gt), w, true);
}

ObjectiveTerms wscsc_terms_imperfect(Tape& tape, const CsiRealization& csi, const BeamformerVars& bf,
                                     const ObjectiveWeights& w, const NoiseAndPower& np, ReceiveMode mode,
                                     bool eta_in_sensing) {
    const Signatures est = signatures(tape, csi.estimated, bf);
    const Signatures err = signatures(tape, csi.error, bf);
    const std::size_t I = csi.estimated.n_users();
    std::vector<Var> gu, gt;
    for (std::size_t i = 0; i < I; ++i) gu.push_back(user_gamma(tape, est.user[i], &err.user[i], i, np.noise_user));
    for (std::size_t j = 0; j < csi.estimated.n_targets(); ++j) {
        const CVector u = receive_or_default(est.target[j].value(), I + j, np.noise_radar, mode);
        gt.push_back(radar_gamma(tape, est.target[j], &err.target[j], u, I + j, np.noise_radar));
    }
    return assemble(tape, std::move(gu), std::move(gt), w, eta_in_sensing);
}

double user_sinr(const ChannelSet& ch, const BeamformerSet& bf, double noise, std::size_t i) {
    check_shapes(ch, bf);
    if (i >= ch.n_users()) throw PreconditionError("user index out of range");
    Tape tape(false);
    const Signatures s = signatures(tape, ch, constant(tape, bf));
    return user_gamma(tape, s.user[i], nullptr, i, noise).value().item();
}

double radar_sinr(const ChannelSet& ch, const BeamformerSet& bf, const CVector& u, double noise, std::size_t j) {
    check_shapes(ch, bf);
    if (j >= ch.n_targets()) throw PreconditionError("target index out of range");
    Tape tape(false);
    const Signatures s = signatures(tape, ch, constant(tape, bf));
    return radar_gamma(tape, s.target[j], nullptr, u, ch.n_users() + j, noise).value().item();
}

CVector receive_beamformer(const ChannelSet& ch, const BeamformerSet& bf, double noise, std::size_t j,
                           ReceiveMode mode) {
    check_shapes(ch, bf);
    if (j >= ch.n_targets()) throw PreconditionError("target index out of range");
    Tape tape(false);
    const Signatures s = signatures(tape, ch, constant(tape, bf));
    return receive_from_signature(s.target[j].value(), ch.n_users() + j, noise, mode);
}

ReceiveBeamformers receive_beamformers(const ChannelSet& ch, const BeamformerSet& bf, double noise, ReceiveMode mode) {
    check_shapes(ch, bf);
    Tape tape(false);
    const Signatures s = signatures(tape, ch, constant(tape, bf));
    ReceiveBeamformers out;
    out.mode = mode;
    for (std::size_t j = 0; j < ch.n_targets(); ++j)
        out.u.push_back(receive_or_default(s.target[j].value(), ch.n_users() + j, noise, mode));
    return out;
}

double user_sinr_imperfect(const CsiRealization& csi, const BeamformerSet& bf, double noise, std::size_t i) {
    check_shapes(csi.estimated, bf);
    if (i >= csi.estimated.n_users()) throw PreconditionError("user index out of range");
    Tape tape(false);
    const auto bv = constant(tape, bf);
    const Signatures est = signatures(tape, csi.estimated, bv);
    const Signatures err = signatures(tape, csi.error, bv);
    return user_gamma(tape, est.user[i], &err.user[i], i, noise).value().item();
}

double radar_sinr_imperfect(const CsiRealization& csi, const BeamformerSet& bf, const CVector& u, double noise,
                            std::size_t j) {
    check_shapes(csi.estimated, bf);
    if (j >= csi.estimated.n_targets()) throw PreconditionError("target index out of range");
    Tape tape(false);
    const auto bv = constant(tape, bf);
    const Signatures est = signatures(tape, csi.estimated, bv);
    const Signatures err = signatures(tape, csi.error, bv);
    return radar_gamma(tape, est.target[j], &err.target[j], u, csi.estimated.n_users() + j, noise).value().item();
}

SinrReport wscsc(const ChannelSet& ch, const BeamformerSet& bf, const ObjectiveWeights& w, const NoiseAndPower& np,
                 ReceiveMode mode) {
    check_shapes(ch, bf);
    Tape tape(false);
    return wscsc_terms(tape, ch, constant(tape, bf), w, np, mode).report();
}

SinrReport wscsc_imperfect(const CsiRealization& csi, const BeamformerSet& bf, const ObjectiveWeights& w,
                           const NoiseAndPower& np, ReceiveMode mode, bool eta_in_sensing) {
    check_shapes(csi.estimated, bf);
    Tape tape(false);
    return wscsc_terms_imperfect(tape, csi, constant(tape, bf), w, np, mode, eta_in_sensing).report();
}

ExpectedObjective wscsc_expected(const std::function<CsiRealization(std::size_t)>& sampler, const BeamformerSet& bf,
                                 const ObjectiveWeights& w, const NoiseAndPower& np, std::size_t n_draws,
                                 ReceiveMode mode, bool eta_in_sensing) {
    if (n_draws < 1) throw PreconditionError("wscsc_expected needs n_draws >= 1");
    std::vector<double> v;
    ExpectedObjective out;
    for (std::size_t k = 0; k < n_draws; ++k) {
        const SinrReport r = wscsc_imperfect(sampler(k), bf, w, np, mode, eta_in_sensing);
        v.push_back(r.wscsc);
        out.mean_scc += r.scc;
        out.mean_ssc += r.ssc;
    }
    const double n = static_cast<double>(n_draws);
    for (double x : v) out.mean += x;
    out.mean /= n;
    out.mean_scc /= n;
    out.mean_ssc /= n;
    if (n_draws > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - out.mean) * (x - out.mean);
        out.stddev = std::sqrt(ss / (n - 1.0));
    }
    return out;
}

}  // namespace isac
