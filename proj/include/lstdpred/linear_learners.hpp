// SPDX-License-Identifier: Apache-2.0
//
// Biased ridge regression and its transfer- and meta-learned bias, for scalar
// (S = 1) and matrix targets.
#pragma once

#include "lstdpred/dataset.hpp"
#include "lstdpred/linalg.hpp"

#include <vector>

namespace lstdpred {

struct RidgeHyper {
    double lambda = 1.0;
    CMat bias;  // S*N x S
};

struct LinearPredictor {
    CMat V;  // S*N x S

    CVec predict(const CMat& history) const {
        detail::require(history.size() == V.rows(), "LinearPredictor::predict: history shape mismatch");
        const CVec x = history.reshaped();
        return V.adjoint() * x;
    }
};

/// Result of a bias fit; `degraded` marks a minimum-norm fallback on a
/// singular normal matrix.
struct BiasFit {
    CMat bias;
    bool degraded = false;
};

/// Scalar-target form of ridge_fit: (X^H X + lambda I)^{-1} (X^H y + lambda vbar).
inline CVec ridge_fit_scalar(const CMat& x, const CVec& y, double lambda, const CVec& vbar) {
    detail::require(lambda > 0.0, "ridge_fit_scalar: lambda must be positive");
    detail::require(x.rows() == y.size() && vbar.size() == x.cols(), "ridge_fit_scalar: dimension mismatch");
    CMat gram = x.adjoint() * x;
    gram.diagonal().array() += lambda;
    const CVec rhs = x.adjoint() * y + lambda * vbar;
    return solve_hermitian(gram, rhs).x.col(0);
}

/// argmin_V ||X V - Y||_F^2 + lambda ||V - bias||_F^2.
inline LinearPredictor ridge_fit(const RegressionDataset& tr, const RidgeHyper& hyper) {
    detail::require(hyper.lambda > 0.0, "ridge_fit: lambda must be positive");
    detail::require(hyper.bias.rows() == tr.X.cols() && hyper.bias.cols() == tr.Y.cols(),
                    "ridge_fit: bias dimensions do not match the dataset");
    // single target column: share the vector path so both forms agree bitwise
    if (tr.Y.cols() == 1) return {ridge_fit_scalar(tr.X, tr.Y.col(0), hyper.lambda, hyper.bias.col(0))};
    CMat gram = tr.X.adjoint() * tr.X;
    gram.diagonal().array() += hyper.lambda;
    const CMat rhs = tr.X.adjoint() * tr.Y + hyper.lambda * hyper.bias;
    return {solve_hermitian(gram, rhs).x};
}

inline CVec predict(const LinearPredictor& pred, const CMat& history) { return pred.predict(history); }

/// Pooled least squares over all frames: argmin_V sum_f ||X_f V - Y_f||_F^2.
inline BiasFit transfer_bias(const std::vector<RegressionDataset>& frames) {
    detail::require(!frames.empty(), "transfer_bias: need at least one frame");
    const RegressionDataset pooled = stack(frames);
    auto sol = least_squares(pooled.X, pooled.Y);
    return {std::move(sol.x), sol.degraded};
}

namespace detail {

/// Preconditioned test inputs (rows) and transformed test targets of one frame.
struct MetaRows {
    CMat x_tilde;
    CMat y_tilde;
};

inline MetaRows meta_rows(const SplitDataset& f, double lambda) {
    const auto& tr = f.train;
    const auto& te = f.test;
    CMat a = tr.X.adjoint() * tr.X;
    a.diagonal().array() += lambda;
    // columns of A^{-1} x_te for every test row
    const CMat ainv_xte = solve_hermitian(a, te.X.adjoint()).x;
    MetaRows out;
    out.x_tilde = lambda * ainv_xte.adjoint();
    // residual of the bias-free part of the adapted predictor, as rows
    out.y_tilde = te.Y - (tr.Y.adjoint() * tr.X * ainv_xte).adjoint();
    return out;
}

}  // namespace detail

/// Closed-form meta-learned bias: stacked least squares over all frames of
/// ||X~_f Vbar - Y~_f||^2 with preconditioned test inputs.
inline BiasFit meta_bias_closed_form(const std::vector<SplitDataset>& frames, double lambda) {
    detail::require(lambda > 0.0, "meta_bias_closed_form: lambda must be positive");
    detail::require(!frames.empty(), "meta_bias_closed_form: need at least one frame");
    Index rows = 0;
    for (const auto& f : frames) {
        detail::require(f.train.size() >= 1 && f.test.size() >= 1, "meta_bias_closed_form: empty split");
        rows += f.test.size();
    }
    const Index p = frames[0].train.X.cols();
    const Index s = frames[0].train.Y.cols();
    CMat xt(rows, p), yt(rows, s);
    Index at = 0;
    for (const auto& f : frames) {
        auto r = detail::meta_rows(f, lambda);
        xt.middleRows(at, f.test.size()) = r.x_tilde;
        yt.middleRows(at, f.test.size()) = r.y_tilde;
        at += f.test.size();
    }
    auto sol = least_squares(xt, yt);
    return {std::move(sol.x), sol.degraded};
}

/// Meta-learning objective: summed test loss of the per-frame ridge
/// predictors adapted from `bias`.
inline double meta_objective(const std::vector<SplitDataset>& frames, double lambda, const CMat& bias) {
    double total = 0.0;
    for (const auto& f : frames) {
        const auto pred = ridge_fit(f.train, {lambda, bias});
        total += (f.test.X * pred.V - f.test.Y).squaredNorm();
    }
    return total;
}

}  // namespace lstdpred
