// SPDX-License-Identifier: Apache-2.0
//
// Long-short-term decomposition (LSTD) predictor
//
//     V = sum_k v_k (x) (b_k b_k^H),
//
// where the unit vectors b_k are long-term space-time features and the N-tap
// filters v_k predict the fading amplitude b_k^H h of each feature. Features
// are fitted one at a time by alternating least squares on residual targets.
#pragma once

#include "lstdpred/dataset.hpp"
#include "lstdpred/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <limits>
#include <optional>
#include <vector>

namespace lstdpred {

struct LstdHyper {
    int K = 1;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::vector<CVec> long_bias;   // K unit S-vectors
    std::vector<CVec> short_bias;  // K N-vectors

    /// Hyperparameters with no prior: b_bar = e_1 (inactive when lambda1 = 0), v_bar = 0.
    static LstdHyper unbiased(int k, Index s, Index n, double lambda1, double lambda2) {
        LstdHyper h;
        h.K = k;
        h.lambda1 = lambda1;
        h.lambda2 = lambda2;
        for (int i = 0; i < k; ++i) {
            h.long_bias.push_back(CVec::Unit(s, 0));
            h.short_bias.push_back(CVec::Zero(n));
        }
        return h;
    }

    /// Re-normalizes every long-term bias to unit norm.
    void normalize() {
        for (auto& b : long_bias) {
            const double n = b.norm();
            detail::require(n > 0.0, "LstdHyper: zero long-term bias");
            b /= n;
        }
    }

    void validate(Index s, Index n) const {
        detail::require(K >= 1, "LstdHyper: K must be >= 1");
        detail::require(lambda1 >= 0.0 && lambda2 >= 0.0, "LstdHyper: negative regularization");
        detail::require(static_cast<int>(long_bias.size()) >= K && static_cast<int>(short_bias.size()) >= K,
                        "LstdHyper: fewer bias vectors than K");
        for (int k = 0; k < K; ++k) {
            detail::require(long_bias[k].size() == s, "LstdHyper: long-term bias has wrong length");
            detail::require(short_bias[k].size() == n, "LstdHyper: short-term bias has wrong length");
        }
    }

    /// First `k` features of this hyperparameter set.
    LstdHyper prefix(int k) const {
        detail::require(k >= 1 && k <= K, "LstdHyper::prefix: k out of range");
        LstdHyper h = *this;
        h.K = k;
        h.long_bias.resize(k);
        h.short_bias.resize(k);
        return h;
    }
};

/// v (x) (b b^H), an S*N x S matrix.
inline CMat lstd_term(const CVec& v, const CVec& b) {
    const Index s = b.size();
    const CMat proj = b * b.adjoint();
    CMat out(s * v.size(), s);
    for (Index n = 0; n < v.size(); ++n) out.middleRows(n * s, s) = v(n) * proj;
    return out;
}

struct LstdPredictor {
    std::vector<CVec> features;  // unit S-vectors
    std::vector<CVec> filters;   // N-vectors
    CMat V;                      // S*N x S

    int K() const { return static_cast<int>(features.size()); }
    Index channel_dim() const { return V.cols(); }
    Index window() const { return V.cols() == 0 ? 0 : V.rows() / V.cols(); }

    CVec predict(const CMat& history) const {
        detail::require(history.size() == V.rows(), "LstdPredictor::predict: history shape mismatch");
        return V.adjoint() * history.reshaped();
    }

    /// Project amplitudes per feature, filter them, reconstruct.
    CVec predict_pipeline(const CMat& history) const {
        detail::require(history.rows() == channel_dim() && history.cols() == window(),
                        "LstdPredictor::predict_pipeline: history shape mismatch");
        CVec out = CVec::Zero(channel_dim());
        for (int k = 0; k < K(); ++k) {
            const CVec past = (features[k].adjoint() * history).transpose();  // N amplitudes
            const cd next = filters[k].dot(past);                               // v^H d
            out += features[k] * next;
        }
        return out;
    }
};

/// Assembles V from feature/filter pairs. Features within 1e-6 of unit norm are
/// re-normalized; anything further off is rejected.
inline LstdPredictor assemble(std::vector<CVec> features, std::vector<CVec> filters) {
    detail::require(!features.empty() && features.size() == filters.size(),
                    "assemble: need matching, nonempty feature and filter lists");
    const Index s = features[0].size();
    const Index n = filters[0].size();
    LstdPredictor p;
    p.V = CMat::Zero(s * n, s);
    for (std::size_t k = 0; k < features.size(); ++k) {
        detail::require(features[k].size() == s && filters[k].size() == n, "assemble: inconsistent sizes");
        const double nrm = features[k].norm();
        if (std::abs(nrm - 1.0) > 1e-6) throw std::invalid_argument("assemble: feature is not unit-norm");
        features[k] /= nrm;
        p.V += lstd_term(filters[k], features[k]);
    }
    p.features = std::move(features);
    p.filters = std::move(filters);
    return p;
}

struct AlsConfig {
    double tol = 1e-8;
    int max_iters = 100;
};

struct AlsResult {
    CVec b;
    CVec v;
    double objective = 0.0;
    std::vector<double> trace;  // objective at start and after every half-step
    int iterations = 0;
    bool converged = false;
};

namespace detail {

/// C (L x N) with C(i, n) = b^H h_{i,n}.
inline CMat feature_amplitudes(const CMat& x, Index s, Index n, const CVec& b) {
    CMat c(x.rows(), n);
    for (Index j = 0; j < n; ++j) c.col(j) = (x.middleCols(j * s, s) * b).conjugate();
    return c;
}

/// Columns w_i = H_i u, returned as an S x L matrix.
inline CMat filtered_inputs(const CMat& x, Index s, Index n, const CVec& u) {
    CMat w = CMat::Zero(s, x.rows());
    for (Index j = 0; j < n; ++j) w += u(j) * x.middleCols(j * s, s).transpose().conjugate();
    return w;
}

/// Initial feature: dominant left singular vector of sum_i y_i xbar_i^H, with
/// xbar_i the mean of the N history columns.
inline CVec initial_feature(const CMat& x, const CMat& y, Index s, Index n, const CVec& fallback) {
    CMat xbar = CMat::Zero(x.rows(), s);
    for (Index j = 0; j < n; ++j) xbar += x.middleCols(j * s, s);
    // rows of y and xbar are conjugated vectors: sum_i y_i xbar_i^H = Y^H Xbar / N
    const CMat cross = y.adjoint() * xbar;
    if (cross.norm() > 0.0) {
        Eigen::JacobiSVD<CMat> svd(cross, Eigen::ComputeThinU);
        if (svd.singularValues()(0) > 0.0) return canonicalize_phase(svd.matrixU().col(0));
    }
    return canonicalize_phase(fallback / fallback.norm());
}

}  // namespace detail

/// Single-feature objective:
///   ||X (v (x) b b^H) - Y||_F^2 - lambda1 |b_bar^H b|^2 + lambda2 ||v - v_bar||^2.
inline double als_objective(const CMat& x, const CMat& y, const CVec& b, const CVec& v, double lambda1,
                            double lambda2, const CVec& bbar, const CVec& vbar) {
    const Index s = y.cols();
    const Index n = v.size();
    const CMat c = detail::feature_amplitudes(x, s, n, b);
    const CVec amp = c * v.conjugate();  // s_i = b^H H_i conj(v)
    const CMat fitted = amp.conjugate() * b.adjoint();
    return (fitted - y).squaredNorm() - lambda1 * std::norm(bbar.dot(b)) + lambda2 * (v - vbar).squaredNorm();
}

/// Alternating least squares for one (feature, filter) pair on the residual
/// targets `y`. Filter update first, then the unit-norm feature update
/// (smallest eigenvector of a Hermitian S x S matrix). Every half-step is an
/// exact minimizer, so the objective trace is non-increasing.
inline AlsResult als_feature_fit(const CMat& x, const CMat& y, double lambda1, double lambda2, const CVec& bbar,
                                 const CVec& vbar, const AlsConfig& cfg,
                                 const std::optional<CVec>& init_b = std::nullopt,
                                 const std::optional<CVec>& init_v = std::nullopt) {
    const Index s = y.cols();
    detail::require(s >= 1 && x.cols() % s == 0, "als_feature_fit: X columns must be a multiple of S");
    const Index n = x.cols() / s;
    detail::require(x.rows() == y.rows(), "als_feature_fit: X and Y row mismatch");
    detail::require(bbar.size() == s && vbar.size() == n, "als_feature_fit: bias dimension mismatch");
    detail::require(lambda1 >= 0.0 && lambda2 >= 0.0, "als_feature_fit: negative regularization");
    detail::require(cfg.tol > 0.0 && cfg.max_iters >= 1, "als_feature_fit: bad stopping rule");

    const CVec bbar_unit = bbar.norm() > 0.0 ? CVec(bbar / bbar.norm()) : CVec::Unit(s, 0);
    AlsResult res;
    res.b = init_b ? canonicalize_phase(*init_b / init_b->norm()) : detail::initial_feature(x, y, s, n, bbar_unit);
    res.v = init_v ? *init_v : vbar;
    const CMat ym = y.adjoint();  // S x L, columns y_i
    const double scale = y.squaredNorm() + lambda1 * bbar.squaredNorm() + lambda2 * vbar.squaredNorm();
    const double floor = 1e-14 * (scale > 0.0 ? scale : 1.0);

    auto objective = [&](const CVec& b, const CVec& v) {
        return als_objective(x, y, b, v, lambda1, lambda2, bbar, vbar);
    };
    double prev = objective(res.b, res.v);
    res.trace.push_back(prev);

    for (int it = 0; it < cfg.max_iters; ++it) {
        // filter step: ridge on the projected amplitudes
        const CMat c = detail::feature_amplitudes(x, s, n, res.b);
        const CVec t = (ym.adjoint() * res.b).conjugate();
        CMat gram = c.adjoint() * c;
        gram.diagonal().array() += lambda2;
        const CVec rhs = c.adjoint() * t + lambda2 * vbar.conjugate();
        const CVec u = solve_hermitian(gram, rhs).x.col(0);
        res.v = u.conjugate();
        res.trace.push_back(objective(res.b, res.v));

        // feature step: smallest eigenvector of W W^H - Y W^H - W Y^H - lambda1 bbar bbar^H
        const CMat w = detail::filtered_inputs(x, s, n, u);
        CMat m = w * w.adjoint() - ym * w.adjoint() - w * ym.adjoint() - lambda1 * (bbar * bbar.adjoint());
        m = 0.5 * (m + m.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<CMat> eig(m);
        if (eig.info() != Eigen::Success) throw std::runtime_error("als_feature_fit: eigen-solver failure");
        const RVec& ev = eig.eigenvalues();
        const double tie_tol = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
        Index tied = 1;
        while (tied < ev.size() && ev(tied) - ev(0) <= tie_tol) ++tied;
        CVec b_new = eig.eigenvectors().col(0);
        if (tied > 1) {
            // degenerate minimum: every unit vector of the eigenspace is optimal;
            // keep the one closest to the current feature
            const CMat basis = eig.eigenvectors().leftCols(tied);
            const CVec proj = basis * (basis.adjoint() * res.b);
            if (proj.norm() > 1e-8) b_new = proj / proj.norm();
        }
        CVec b_cand = canonicalize_phase(b_new / b_new.norm());
        const double cand = objective(b_cand, res.v);
        // the eigen-solution is exact up to roundoff; never accept an uphill step
        if (cand <= res.trace.back()) res.b = std::move(b_cand);
        res.trace.push_back(objective(res.b, res.v));

        res.iterations = it + 1;
        const double cur = res.trace.back();
        if (std::abs(prev - cur) <= cfg.tol * std::max(std::abs(cur), floor)) {
            res.converged = true;
            prev = cur;
            break;
        }
        prev = cur;
    }
    res.objective = prev;
    return res;
}

/// X (v (x) b b^H): the fitted contribution of one feature, L x S.
inline CMat feature_contribution(const CMat& x, const CVec& b, const CVec& v) {
    const Index s = b.size();
    const CMat c = detail::feature_amplitudes(x, s, v.size(), b);
    const CVec amp = c * v.conjugate();
    return amp.conjugate() * b.adjoint();
}

struct LstdFit {
    LstdPredictor predictor;
    std::vector<AlsResult> features;
    bool converged = true;
};

/// Sequential fit of K features with residual targets (conventional learning
/// with the regularizers and biases carried by `hyper`).
inline LstdFit lstd_fit_sequential(const RegressionDataset& tr, const LstdHyper& hyper, const AlsConfig& als) {
    const Index s = tr.channel_dim;
    const Index n = tr.window;
    hyper.validate(s, n);
    LstdFit out;
    CMat resid = tr.Y;
    std::vector<CVec> bs, vs;
    for (int k = 0; k < hyper.K; ++k) {
        auto r = als_feature_fit(tr.X, resid, hyper.lambda1, hyper.lambda2, hyper.long_bias[k], hyper.short_bias[k],
                                 als);
        resid -= feature_contribution(tr.X, r.b, r.v);
        out.converged = out.converged && r.converged;
        bs.push_back(r.b);
        vs.push_back(r.v);
        out.features.push_back(std::move(r));
    }
    out.predictor = assemble(std::move(bs), std::move(vs));
    return out;
}

inline LstdPredictor lstd_conventional_fit(const RegressionDataset& tr, const LstdHyper& hyper,
                                           const AlsConfig& als = {}) {
    return lstd_fit_sequential(tr, hyper, als).predictor;
}

/// Adapts to a new frame with prior features/filters; the same sequential
/// ALS as conventional learning, driven by the (transfer or meta) biases.
inline LstdPredictor lstd_adapt(const RegressionDataset& tr_new, const LstdHyper& hyper, const AlsConfig& als = {}) {
    return lstd_fit_sequential(tr_new, hyper, als).predictor;
}

/// Transfer learning: unregularized sequential fit on the row-stacked frames.
/// The fitted features and filters become the biases; lambda1/lambda2 of the
/// returned hyperparameters are left at zero for the caller to set.
inline LstdHyper lstd_transfer_fit(const std::vector<RegressionDataset>& frames, int K, const AlsConfig& als = {}) {
    detail::require(!frames.empty(), "lstd_transfer_fit: need at least one frame");
    detail::require(K >= 1, "lstd_transfer_fit: K must be >= 1");
    const RegressionDataset pooled = stack(frames);
    const auto zero = LstdHyper::unbiased(K, pooled.channel_dim, pooled.window, 0.0, 0.0);
    const auto fit = lstd_fit_sequential(pooled, zero, als);
    LstdHyper h;
    h.K = K;
    h.long_bias = fit.predictor.features;
    h.short_bias = fit.predictor.filters;
    return h;
}

/// Training loss ||X V - Y||_F^2.
inline double prediction_loss(const RegressionDataset& ds, const CMat& V) { return (ds.X * V - ds.Y).squaredNorm(); }

}  // namespace lstdpred
