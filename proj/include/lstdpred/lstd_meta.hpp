// SPDX-License-Identifier: Apache-2.0
//
// Meta-learning of the LSTD biases (b_bar_k, v_bar_k) by equilibrium
// propagation: the hypergradient of the summed test loss is estimated from the
// difference between the inner ALS solution on the training rows and the one
// on training rows plus alpha-weighted test rows.
#pragma once

#include "lstdpred/lstd.hpp"

#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace lstdpred {

struct EpConfig {
    double alpha = 1e-3;
    double step = 1e-2;  // Adam step size
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    int outer_iters = 100;
    double grad_tol = 1e-9;  // stop when both gradient norms fall below this
    AlsConfig als{};

    void validate() const {
        detail::require(alpha > 0.0 && alpha < 1.0, "EpConfig: alpha must lie in (0, 1)");
        detail::require(step > 0.0, "EpConfig: step must be positive");
        detail::require(outer_iters >= 0, "EpConfig: negative outer_iters");
        detail::require(als.tol > 0.0, "EpConfig: ALS tolerance must be positive");
    }
};

/// Hypergradients for one feature. Gradients use the real-gradient convention
/// d/dRe + j d/dIm (twice the derivative with respect to the conjugate).
struct EpGradient {
    CVec grad_long;   // w.r.t. b_bar
    CVec grad_short;  // w.r.t. v_bar
    double outer_loss = 0.0;  // summed test loss at the unperturbed solutions
    int frames_used = 0;
    int frames_skipped = 0;
    std::vector<AlsResult> inner;  // unperturbed solution per frame (skipped frames included)
};

namespace detail {

inline RegressionDataset nudged_stack(const SplitDataset& f, double alpha) {
    RegressionDataset out;
    out.window = f.train.window;
    out.lag = f.train.lag;
    out.channel_dim = f.train.channel_dim;
    const double w = std::sqrt(alpha);
    out.X.resize(f.train.size() + f.test.size(), f.train.X.cols());
    out.Y.resize(out.X.rows(), f.train.Y.cols());
    out.X << f.train.X, w * f.test.X;
    out.Y << f.train.Y, w * f.test.Y;
    return out;
}

}  // namespace detail

/// `frames` carry the current residual targets of feature k in their Y
/// matrices (train and test).
inline EpGradient ep_gradients(const std::vector<SplitDataset>& frames, const CVec& bbar, const CVec& vbar,
                               double lambda1, double lambda2, double alpha, const AlsConfig& als) {
    detail::require(alpha > 0.0, "ep_gradients: alpha must be positive");
    detail::require(!frames.empty(), "ep_gradients: need at least one frame");
    EpGradient g;
    g.grad_long = CVec::Zero(bbar.size());
    g.grad_short = CVec::Zero(vbar.size());
    for (const auto& f : frames) {
        auto star = als_feature_fit(f.train.X, f.train.Y, lambda1, lambda2, bbar, vbar, als);
        const auto nudged_ds = detail::nudged_stack(f, alpha);
        // the nudged solve starts from the free equilibrium
        auto nudged = als_feature_fit(nudged_ds.X, nudged_ds.Y, lambda1, lambda2, bbar, vbar, als, star.b, star.v);
        g.outer_loss += (feature_contribution(f.test.X, star.b, star.v) - f.test.Y).squaredNorm();
        if (!star.converged || !nudged.converged) {
            ++g.frames_skipped;
            g.inner.push_back(std::move(star));
            continue;
        }
        ++g.frames_used;
        g.grad_long += (star.b * star.b.dot(bbar) - nudged.b * nudged.b.dot(bbar));
        g.grad_short += (star.v - nudged.v);
        g.inner.push_back(std::move(star));
    }
    if (g.frames_used > 0) {
        // average over converged frames, rescaled to the full frame count
        const double rescale = static_cast<double>(frames.size()) / g.frames_used;
        g.grad_long *= rescale * 2.0 * lambda1 / alpha;
        g.grad_short *= rescale * 2.0 * lambda2 / alpha;
    }
    return g;
}

/// Summed test loss of the per-frame single-feature adaptations, as a
/// function of the biases (the bilevel outer objective).
inline double lstd_outer_loss(const std::vector<SplitDataset>& frames, const CVec& bbar, const CVec& vbar,
                              double lambda1, double lambda2, const AlsConfig& als) {
    double total = 0.0;
    for (const auto& f : frames) {
        const auto r = als_feature_fit(f.train.X, f.train.Y, lambda1, lambda2, bbar, vbar, als);
        total += (feature_contribution(f.test.X, r.b, r.v) - f.test.Y).squaredNorm();
    }
    return total;
}

struct LstdMetaResult {
    LstdHyper hyper;
    std::vector<std::vector<double>> outer_trace;  // per feature, outer loss per Adam iteration
    std::vector<double> feature_loss;              // per feature, outer loss at the returned biases
    int skipped_frames = 0;
};

namespace detail {

/// Adam on a complex vector, real and imaginary parts treated as separate
/// coordinates.
struct ComplexAdam {
    CVec m;
    RVec v_re, v_im;
    int t = 0;

    explicit ComplexAdam(Index n) : m(CVec::Zero(n)), v_re(RVec::Zero(n)), v_im(RVec::Zero(n)) {}

    CVec step(const CVec& g, const EpConfig& cfg) {
        ++t;
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
        v_re = cfg.beta2 * v_re + (1.0 - cfg.beta2) * g.real().cwiseAbs2();
        v_im = cfg.beta2 * v_im + (1.0 - cfg.beta2) * g.imag().cwiseAbs2();
        const double c1 = 1.0 - std::pow(cfg.beta1, t);
        const double c2 = 1.0 - std::pow(cfg.beta2, t);
        CVec d(g.size());
        for (Index i = 0; i < g.size(); ++i) {
            const double re = (m(i).real() / c1) / (std::sqrt(v_re(i) / c2) + cfg.eps);
            const double im = (m(i).imag() / c1) / (std::sqrt(v_im(i) / c2) + cfg.eps);
            d(i) = cd(re, im);
        }
        return cfg.step * d;
    }
};

}  // namespace detail

/// Called after each feature is meta-learned with the hyperparameters of the
/// first k features; returning false stops the sequence early.
using MetaFeatureCallback = std::function<bool(int k, const LstdHyper& prefix)>;

/// Hierarchical sequential meta-learning. For each feature, Adam iterations
/// on (b_bar, v_bar) driven by EP hypergradients; b_bar is re-normalized after
/// every step and the iterate with the lowest outer loss is kept. Residual
/// targets of train and test rows then advance by the adapted feature.
///
/// `init` supplies the starting biases (e.g. the transfer solution); when
/// absent, b_bar starts at the dominant feature of the pooled residuals and
/// v_bar at zero.
inline LstdMetaResult lstd_meta_fit(const std::vector<SplitDataset>& frames, int K, double lambda1, double lambda2,
                                    const EpConfig& ep, const std::optional<LstdHyper>& init = std::nullopt,
                                    const MetaFeatureCallback& on_feature = {}) {
    ep.validate();
    detail::require(!frames.empty(), "lstd_meta_fit: need at least one frame");
    detail::require(K >= 1, "lstd_meta_fit: K must be >= 1");
    const Index s = frames[0].train.channel_dim;
    const Index n = frames[0].train.window;
    if (init) detail::require(init->K >= K, "lstd_meta_fit: init has fewer than K features");

    std::vector<SplitDataset> work = frames;  // Y become residual targets
    LstdMetaResult out;
    out.hyper.K = 0;
    out.hyper.lambda1 = lambda1;
    out.hyper.lambda2 = lambda2;

    for (int k = 0; k < K; ++k) {
        CVec bbar, vbar;
        if (init) {
            bbar = init->long_bias[k] / init->long_bias[k].norm();
            vbar = init->short_bias[k];
        } else {
            std::vector<RegressionDataset> tr;
            for (const auto& f : work) tr.push_back(f.train);
            const auto pooled = stack(tr);
            bbar = detail::initial_feature(pooled.X, pooled.Y, s, n, CVec::Unit(s, 0));
            vbar = CVec::Zero(n);
        }
        detail::ComplexAdam adam_b(s), adam_v(n);
        CVec best_b = bbar, best_v = vbar;
        double best_loss = std::numeric_limits<double>::infinity();
        std::vector<double> trace;

        for (int it = 0; it <= ep.outer_iters; ++it) {
            const auto g = ep_gradients(work, bbar, vbar, lambda1, lambda2, ep.alpha, ep.als);
            out.skipped_frames += g.frames_skipped;
            if (!g.grad_long.allFinite() || !g.grad_short.allFinite() || !std::isfinite(g.outer_loss)) {
                std::ostringstream msg;
                msg << "lstd_meta_fit: non-finite hypergradient at feature " << k + 1 << ", iteration " << it;
                throw std::runtime_error(msg.str());
            }
            trace.push_back(g.outer_loss);
            if (g.outer_loss < best_loss) {
                best_loss = g.outer_loss;
                best_b = bbar;
                best_v = vbar;
            }
            if (it == ep.outer_iters) break;
            if (g.grad_long.norm() <= ep.grad_tol && g.grad_short.norm() <= ep.grad_tol) break;
            if (lambda1 > 0.0) {
                bbar -= adam_b.step(g.grad_long, ep);
                bbar /= bbar.norm();
            }
            if (lambda2 > 0.0) vbar -= adam_v.step(g.grad_short, ep);
        }

        out.hyper.long_bias.push_back(best_b);
        out.hyper.short_bias.push_back(best_v);
        out.hyper.K = k + 1;
        out.outer_trace.push_back(std::move(trace));
        out.feature_loss.push_back(best_loss);

        // advance residual targets with the adapted feature of every frame
        for (auto& f : work) {
            const auto r = als_feature_fit(f.train.X, f.train.Y, lambda1, lambda2, best_b, best_v, ep.als);
            f.train.Y -= feature_contribution(f.train.X, r.b, r.v);
            f.test.Y -= feature_contribution(f.test.X, r.b, r.v);
        }
        if (on_feature && !on_feature(k + 1, out.hyper)) break;
    }
    return out;
}

/// Summed test loss over frames of the predictors adapted on each train split.
inline double adapted_test_loss(const std::vector<SplitDataset>& frames, const LstdHyper& hyper,
                                const AlsConfig& als = {}) {
    double total = 0.0;
    for (const auto& f : frames) {
        const auto pred = lstd_adapt(f.train, hyper, als);
        total += prediction_loss(f.test, pred.V);
    }
    return total;
}

}  // namespace lstdpred
