#include "isaclab/baselines.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "isaclab/errors.hpp"

namespace isac::baselines {

BaselineKind parse_baseline(const std::string& name) {
    if (name == "mrt") return BaselineKind::Mrt;
    if (name == "zf") return BaselineKind::Zf;
    if (name == "mmse") return BaselineKind::Mmse;
    throw ConfigError("unknown baseline '" + name + "' (expected mrt, zf or mmse)");
}

std::string to_string(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::Mrt: return "mrt";
        case BaselineKind::Zf: return "zf";
        case BaselineKind::Mmse: return "mmse";
    }
    return "?";
}

namespace {

// Rotates v so its first entry of non-negligible magnitude is real and positive.
CVector fix_phase(CVector v) {
    for (Eigen::Index k = 0; k < v.size(); ++k) {
        const double mag = std::abs(v(k));
        if (mag > 1e-300) {
            v *= std::conj(v(k)) / mag;
            v(k) = mag;
            break;
        }
    }
    return v;
}

CVector dominant_right(const CMatrix& h) {
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinV);
    return fix_phase(svd.matrixV().col(0));
}

CVector dominant_left(const CMatrix& h) {
    Eigen::JacobiSVD<CMatrix> svd(h, Eigen::ComputeThinU);
    return fix_phase(svd.matrixU().col(0));
}

CVector unit_phases(const CVector& v) {
    CVector out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) out(k) = std::polar(1.0, std::arg(v(k)));
    return out;
}

void scale_streams(CMatrix& w, const std::vector<CMatrix>& analog_blocks, double power) {
    // analog_blocks[b] multiplies row block b of w (one block per BS in the
    // centralized case, a single block otherwise).
    const Eigen::Index k = w.cols();
    std::vector<double> col_power(static_cast<std::size_t>(k), 0.0);
    Eigen::Index row = 0;
    for (const auto& f : analog_blocks) {
        const Eigen::Index n = f.cols();
        for (Eigen::Index c = 0; c < k; ++c) col_power[static_cast<std::size_t>(c)] += (f * w.block(row, c, n, 1)).squaredNorm();
        row += n;
    }
    std::size_t nonzero = 0;
    for (double p : col_power)
        if (p > 0.0) ++nonzero;
    if (nonzero == 0) return;
    for (Eigen::Index c = 0; c < k; ++c) {
        const double p = col_power[static_cast<std::size_t>(c)];
        if (p > 0.0) w.col(c) *= std::sqrt(power / (static_cast<double>(nonzero) * p));
    }
}

}  // namespace

CMatrix baseline_analog(const ChannelSet& ch, std::size_t m, int n_rf) {
    if (m >= ch.n_bs()) throw PreconditionError("BS index out of range");
    std::vector<const CMatrix*> streams;
    for (const auto& h : ch.com[m]) streams.push_back(&h);
    for (const auto& h : ch.sen[m]) streams.push_back(&h);
    if (streams.empty()) throw PreconditionError("baseline_analog needs at least one user or target");
    if (static_cast<int>(streams.size()) > n_rf) throw PreconditionError("I + J exceeds the RF chain count N");
    const Eigen::Index nt = streams[0]->cols();
    CMatrix f(nt, n_rf);
    for (std::size_t k = 0; k < streams.size(); ++k) f.col(static_cast<Eigen::Index>(k)) = unit_phases(dominant_right(*streams[k]));
    if (static_cast<int>(streams.size()) < n_rf) {
        Eigen::Index rows = 0;
        for (const auto* h : streams) rows += h->rows();
        CMatrix stacked(rows, nt);
        Eigen::Index r = 0;
        for (const auto* h : streams) {
            const double nrm = h->norm();
            stacked.middleRows(r, h->rows()) = nrm > 0.0 ? CMatrix(*h / nrm) : *h;
            r += h->rows();
        }
        const CVector filler = unit_phases(dominant_right(stacked));
        for (int c = static_cast<int>(streams.size()); c < n_rf; ++c) f.col(c) = filler;
    }
    return f;
}

EffectiveChannel effective_channel(const CMatrix& h, const CMatrix& analog) {
    if (h.cols() != analog.rows()) throw DimensionError("effective_channel: H columns != F rows");
    const CMatrix hf = h * analog;
    EffectiveChannel e;
    if (hf.norm() == 0.0) {
        e.row = CVector::Zero(analog.cols());
        e.zero = true;
        return e;
    }
    if (hf.rows() == 1) {
        e.row = hf.row(0).transpose();
        return e;
    }
    const CVector v = dominant_left(hf);
    e.row = (v.adjoint() * hf).transpose();
    return e;
}

CMatrix right_pseudo_inverse(const CMatrix& a, double tol, bool* truncated) {
    const CMatrix gram = a * a.adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram);
    const Eigen::VectorXd ev = eig.eigenvalues();
    const double top = ev.size() > 0 ? ev.maxCoeff() : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
    bool cut = false;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) > tol * top && ev(k) > 0.0) inv(k) = 1.0 / ev(k);
        else cut = true;
    }
    if (truncated) *truncated = cut;
    const CMatrix& q = eig.eigenvectors();
    return a.adjoint() * q * inv.asDiagonal() * q.adjoint();
}

DigitalResult baseline_digital(BaselineKind kind, const CMatrix& a, const CMatrix& analog, double noise, double power) {
    if (a.cols() != analog.cols()) throw DimensionError("baseline_digital: A columns != N");
    const Eigen::Index k = a.rows();
    DigitalResult r;
    switch (kind) {
        case BaselineKind::Mrt:
            r.w = a.adjoint();
            break;
        case BaselineKind::Zf: {
            const CMatrix gram = a * a.adjoint();
            Eigen::FullPivLU<CMatrix> lu(gram);
            Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
            const double top = eig.eigenvalues().maxCoeff();
            const double low = eig.eigenvalues().minCoeff();
            if (top > 0.0 && low > 1e-10 * top) {
                r.w = a.adjoint() * lu.inverse();
            } else {
                r.w = right_pseudo_inverse(a, 1e-10, nullptr);
                r.pinv_fallback = true;
            }
            break;
        }
        case BaselineKind::Mmse: {
            const double reg = noise * static_cast<double>(k) / power;
            const CMatrix gram = a * a.adjoint() + reg * CMatrix::Identity(k, k);
            r.w = a.adjoint() * gram.ldlt().solve(CMatrix::Identity(k, k));
            break;
        }
    }
    scale_streams(r.w, {analog}, power);
    return r;
}

BaselineResult run_baseline(BaselineKind kind, const ChannelSet& ch, const ObjectiveSetup& setup, int n_rf,
                            const BaselineOptions& options) {
    setup.noise.validate();
    const std::size_t M = ch.n_bs(), I = ch.n_users(), J = ch.n_targets();
    BaselineResult res;
    for (std::size_t m = 0; m < M; ++m) res.beams.analog.push_back(baseline_analog(ch, m, n_rf));
    auto stream_channel = [&](std::size_t m, std::size_t k) -> const CMatrix& {
        return k < I ? ch.com[m][k] : ch.sen[m][k - I];
    };
    const Eigen::Index K = static_cast<Eigen::Index>(I + J);
    if (!options.centralized) {
        for (std::size_t m = 0; m < M; ++m) {
            CMatrix a(K, n_rf);
            for (Eigen::Index k = 0; k < K; ++k) {
                const EffectiveChannel e = effective_channel(stream_channel(m, static_cast<std::size_t>(k)), res.beams.analog[m]);
                if (e.zero) ++res.zero_channels;
                a.row(k) = e.row.transpose();
            }
            DigitalResult d = baseline_digital(kind, a, res.beams.analog[m], setup.noise.noise_user, setup.noise.power);
            res.pinv_fallback = res.pinv_fallback || d.pinv_fallback;
            res.beams.digital.push_back(std::move(d.w));
        }
    } else {
        const Eigen::Index total = static_cast<Eigen::Index>(M) * n_rf;
        CMatrix a(K, total);
        for (Eigen::Index k = 0; k < K; ++k) {
            const std::size_t ks = static_cast<std::size_t>(k);
            const Eigen::Index rows = stream_channel(0, ks).rows();
            CMatrix joint(rows, total);
            for (std::size_t m = 0; m < M; ++m)
                joint.middleCols(static_cast<Eigen::Index>(m) * n_rf, n_rf) = stream_channel(m, ks) * res.beams.analog[m];
            if (joint.norm() == 0.0) {
                ++res.zero_channels;
                a.row(k).setZero();
            } else if (rows == 1) {
                a.row(k) = joint.row(0);
            } else {
                a.row(k) = dominant_left(joint).adjoint() * joint;
            }
        }
        DigitalResult d = baseline_digital(kind, a, CMatrix::Identity(total, total), setup.noise.noise_user,
                                           setup.noise.power);
        res.pinv_fallback = d.pinv_fallback;
        // Each BS takes its row block, rescaled to meet its own budget exactly.
        for (std::size_t m = 0; m < M; ++m) {
            CMatrix w = d.w.middleRows(static_cast<Eigen::Index>(m) * n_rf, n_rf);
            const double p = bs_power(res.beams.analog[m], w);
            if (p > 0.0) w *= std::sqrt(setup.noise.power / p);
            res.beams.digital.push_back(std::move(w));
        }
    }
    res.report = wscsc(ch, res.beams, setup.weights, setup.noise, setup.receive);
    return res;
}

}  // namespace isac::baselines
