// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lstdpred/lstd_meta.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace lstdpred {

enum class RankMethod { Aic, MetaValidation };

struct RankEstimate {
    int k_hat = 1;
    std::vector<double> curve;  // curve[k-1] = score of k features
    RankMethod method = RankMethod::Aic;
    bool undersampled = false;
    std::vector<double> train_curve;  // meta-validation only: meta-training loss per k
};

/// Akaike criterion of Wax and Kailath for `k` signals given descending
/// covariance eigenvalues from `n_samples` complex snapshots:
///   AIC(k) = -2 (p-k) n log(geo / arith) + 2 k (2p - k),
/// geo/arith being the geometric and arithmetic means of the p-k smallest
/// eigenvalues.
inline double aic_score(const std::vector<double>& eig_desc, Index n_samples, int k) {
    const int p = static_cast<int>(eig_desc.size());
    detail::require(k >= 0 && k <= p, "aic_score: k out of range");
    const double penalty = 2.0 * k * (2.0 * p - k);
    if (k == p) return penalty;
    double log_geo = 0.0, arith = 0.0;
    for (int i = k; i < p; ++i) {
        log_geo += std::log(eig_desc[i]);
        arith += eig_desc[i];
    }
    const int m = p - k;
    log_geo /= m;
    arith /= m;
    const double log_ratio = std::min(0.0, log_geo - std::log(arith));
    return -2.0 * m * static_cast<double>(n_samples) * log_ratio + penalty;
}

/// AIC rank estimate from pooled channel snapshots (columns of `samples`).
inline RankEstimate aic_rank(const CMat& samples) {
    const Index p = samples.rows();
    const Index n = samples.cols();
    if (n < 2) throw std::invalid_argument("aic_rank: need at least two samples");
    detail::require(p >= 1, "aic_rank: empty channel dimension");
    const CMat cov = samples * samples.adjoint() / static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<CMat> eig(cov, Eigen::EigenvaluesOnly);
    std::vector<double> ev(eig.eigenvalues().data(), eig.eigenvalues().data() + p);
    std::sort(ev.begin(), ev.end(), std::greater<>());
    // eigenvalues at roundoff level are indistinguishable from exact zeros
    const double floor = std::max(ev.front(), 1e-300) * 1e-12;
    for (auto& e : ev) e = std::max(e, floor);

    RankEstimate est;
    est.method = RankMethod::Aic;
    est.undersampled = n < p;
    double best = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= static_cast<int>(p); ++k) {
        const double score = aic_score(ev, n, k);
        est.curve.push_back(score);
        if (score < best) {
            best = score;
            est.k_hat = k;
        }
    }
    return est;
}

/// Sequential meta-validation: meta-learn features one at a time on the
/// meta-training frames and score every prefix k by the summed test loss of
/// the adapted predictors on the meta-validation frames. Stops once the
/// validation loss has increased `patience` times in a row.
inline RankEstimate meta_validation_rank(const std::vector<SplitDataset>& meta_train,
                                         const std::vector<SplitDataset>& meta_val, double lambda1, double lambda2,
                                         const EpConfig& ep, int k_max, int patience = 2,
                                         const std::optional<LstdHyper>& init = std::nullopt) {
    detail::require(!meta_train.empty() && !meta_val.empty(), "meta_validation_rank: need frames in both sets");
    detail::require(k_max >= 1, "meta_validation_rank: k_max must be >= 1");
    const Index s = meta_train[0].train.channel_dim;
    k_max = static_cast<int>(std::min<Index>(k_max, s));
    RankEstimate est;
    est.method = RankMethod::MetaValidation;
    int rises = 0;
    double best = std::numeric_limits<double>::infinity();
    lstd_meta_fit(meta_train, k_max, lambda1, lambda2, ep, init, [&](int k, const LstdHyper& prefix) {
        const double val = adapted_test_loss(meta_val, prefix, ep.als);
        est.train_curve.push_back(adapted_test_loss(meta_train, prefix, ep.als));
        if (!est.curve.empty() && val > est.curve.back()) ++rises;
        else rises = 0;
        est.curve.push_back(val);
        if (val < best) {
            best = val;
            est.k_hat = k;
        }
        return rises < patience;
    });
    return est;
}

}  // namespace lstdpred
