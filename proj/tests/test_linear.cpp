// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include "lstdpred/linear_learners.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace lstdpred;
using namespace testutil;

namespace {

double ridge_objective(const RegressionDataset& tr, const CMat& v, double lambda, const CMat& bias) {
    return (tr.X * v - tr.Y).squaredNorm() + lambda * (v - bias).squaredNorm();
}

// Normal equations solved by a full-pivot LU, independent of the
// Cholesky / orthogonal-decomposition path of the library.
CMat dense_ridge(const CMat& x, const CMat& y, double lambda, const CMat& bias) {
    const CMat a = x.adjoint() * x + lambda * CMat::Identity(x.cols(), x.cols());
    return a.fullPivLu().solve(x.adjoint() * y + lambda * bias);
}

std::vector<SplitDataset> random_splits(std::mt19937_64& rng, int frames, Index s, int n, Index l_tr, Index l_te) {
    std::vector<SplitDataset> out;
    for (int f = 0; f < frames; ++f) {
        const auto ds = random_dataset(rng, l_tr + l_te, s, n);
        out.push_back(split(ds, l_tr));
    }
    return out;
}

}  // namespace

TEST_CASE("ridge matches a dense normal-equations solve", "[linear]") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const Index s = 1 + trial % 2;
        const auto tr = random_dataset(rng, 8, s, 5);
        const CMat bias = random_cmat(rng, s * 5, s);
        const double lambda = trial == 0 ? 0.1 : std::pow(10.0, -2.0 + 4.0 * (trial % 7) / 6.0);
        const auto pred = ridge_fit(tr, {lambda, bias});
        CHECK(rel_err(pred.V, dense_ridge(tr.X, tr.Y, lambda, bias)) <= 1e-10);
    }
}

TEST_CASE("ridge closed-form special cases", "[linear]") {
    std::mt19937_64 rng(2);
    SECTION("consistent data returns the bias") {
        auto tr = random_dataset(rng, 6, 2, 3);
        const CMat bias = random_cmat(rng, 6, 2);
        tr.Y = tr.X * bias;
        CHECK(rel_err(ridge_fit(tr, {0.7, bias}).V, bias) <= 1e-12);
    }
    SECTION("identity inputs shrink the targets") {
        RegressionDataset tr;
        tr.window = 4;
        tr.channel_dim = 1;
        tr.X = CMat::Identity(4, 4);
        tr.Y = random_cmat(rng, 4, 1);
        const double lambda = 0.3;
        const auto v = ridge_fit(tr, {lambda, CMat::Zero(4, 1)}).V;
        CHECK(rel_err(v, tr.Y / (1.0 + lambda)) <= 1e-14);
    }
    SECTION("large lambda approaches the bias monotonically") {
        const auto tr = random_dataset(rng, 10, 2, 2);
        const CMat bias = random_cmat(rng, 4, 2);
        double prev = std::numeric_limits<double>::infinity();
        for (double lambda : {1e2, 1e4, 1e6}) {
            const double d = (ridge_fit(tr, {lambda, bias}).V - bias).norm();
            CHECK(d < prev);
            prev = d;
        }
        CHECK(prev < 1e-3);
    }
    SECTION("nonpositive lambda is rejected") {
        const auto tr = random_dataset(rng, 4, 1, 2);
        CHECK_THROWS_AS(ridge_fit(tr, {0.0, CMat::Zero(2, 1)}), std::invalid_argument);
        CHECK_THROWS_AS(ridge_fit(tr, {1.0, CMat::Zero(3, 1)}), std::invalid_argument);
    }
}

TEST_CASE("ridge solution is a local minimum along random directions", "[linear]") {
    std::mt19937_64 rng(3);
    const auto tr = random_dataset(rng, 7, 2, 3);
    const CMat bias = random_cmat(rng, 6, 2);
    const double lambda = 0.5;
    const CMat v = ridge_fit(tr, {lambda, bias}).V;
    const double f0 = ridge_objective(tr, v, lambda, bias);
    for (int probe = 0; probe < 100; ++probe) {
        CMat delta = random_cmat(rng, 6, 2);
        delta *= 1e-3 / delta.norm();
        CHECK(ridge_objective(tr, v + delta, lambda, bias) > f0);
    }
}

TEST_CASE("scalar and matrix ridge agree for S=1", "[linear]") {
    std::mt19937_64 rng(4);
    const auto tr = random_dataset(rng, 9, 1, 5);
    const CVec vbar = random_cvec(rng, 5);
    const CVec scalar = ridge_fit_scalar(tr.X, tr.Y.col(0), 0.2, vbar);
    const CMat matrix = ridge_fit(tr, {0.2, vbar}).V;
    CHECK(matrix.col(0) == scalar);
}

TEST_CASE("transfer bias", "[linear]") {
    std::mt19937_64 rng(5);
    SECTION("one square invertible frame") {
        RegressionDataset f;
        f.window = 4;
        f.channel_dim = 1;
        f.X = random_cmat(rng, 4, 4);
        f.Y = random_cmat(rng, 4, 1);
        const auto fit = transfer_bias({f});
        CHECK_FALSE(fit.degraded);
        CHECK(rel_err(fit.bias, f.X.fullPivLu().solve(f.Y)) <= 1e-10);
    }
    SECTION("shared generator is recovered") {
        const CMat v = random_cmat(rng, 6, 2);
        std::vector<RegressionDataset> frames;
        for (int f = 0; f < 4; ++f) {
            auto ds = random_dataset(rng, 3, 2, 3);
            ds.Y = ds.X * v;
            frames.push_back(ds);
        }
        CHECK(rel_err(transfer_bias(frames).bias, v) <= 1e-10);
    }
    SECTION("stacked least-squares oracle") {
        std::vector<RegressionDataset> frames;
        for (int f = 0; f < 3; ++f) frames.push_back(random_dataset(rng, 5, 2, 2));
        CMat x(15, 4), y(15, 2);
        for (int f = 0; f < 3; ++f) {
            x.middleRows(5 * f, 5) = frames[f].X;
            y.middleRows(5 * f, 5) = frames[f].Y;
        }
        const CMat oracle = (x.adjoint() * x).fullPivLu().solve(x.adjoint() * y);
        CHECK(rel_err(transfer_bias(frames).bias, oracle) <= 1e-10);
    }
    SECTION("rank-deficient pool is flagged") {
        auto ds = random_dataset(rng, 2, 1, 4);
        const auto fit = transfer_bias({ds});
        CHECK(fit.degraded);
        CHECK(fit.bias.allFinite());
        CHECK((ds.X * fit.bias - ds.Y).norm() <= 1e-10 * ds.Y.norm());
    }
}

TEST_CASE("meta bias minimizes the meta objective", "[linear]") {
    std::mt19937_64 rng(6);
    for (Index s : {1, 2}) {
        const int n = 2;
        const double lambda = 0.8;
        const auto frames = random_splits(rng, 5, s, n, 2, 4);
        const Index p = s * n;

        // The adapted predictor is affine in the bias: test residual
        // R_f(b) = M_f b - C_f. Minimize sum ||M_f b - C_f||^2 by conjugate
        // gradients on the normal equations.
        CMat g = CMat::Zero(p, p), r = CMat::Zero(p, s);
        for (const auto& f : frames) {
            const CMat a = f.train.X.adjoint() * f.train.X + lambda * CMat::Identity(p, p);
            const CMat ainv = a.inverse();
            const CMat m = lambda * f.test.X * ainv;
            const CMat c = f.test.Y - f.test.X * ainv * f.train.X.adjoint() * f.train.Y;
            g += m.adjoint() * m;
            r += m.adjoint() * c;
        }
        CMat b = CMat::Zero(p, s);
        for (Index col = 0; col < s; ++col) {
            CVec x = CVec::Zero(p), res = r.col(col), dir = res;
            for (int it = 0; it < 200 && res.norm() > 1e-15; ++it) {
                const CVec gd = g * dir;
                const cd alpha = res.squaredNorm() / dir.dot(gd);
                x += alpha * dir;
                const CVec next = res - alpha * gd;
                dir = next + (next.squaredNorm() / res.squaredNorm()) * dir;
                res = next;
            }
            b.col(col) = x;
        }
        const auto fit = meta_bias_closed_form(frames, lambda);
        CHECK_FALSE(fit.degraded);
        const double closed = meta_objective(frames, lambda, fit.bias);
        const double oracle = meta_objective(frames, lambda, b);
        CHECK(std::abs(closed - oracle) <= 1e-6 * oracle);
        CHECK(rel_err(fit.bias, b) <= 1e-6);
        CHECK(closed <= meta_objective(frames, lambda, CMat::Zero(p, s)));
    }
}

TEST_CASE("meta bias special cases", "[linear]") {
    std::mt19937_64 rng(7);
    SECTION("zero residual targets give zero bias") {
        auto frames = random_splits(rng, 3, 2, 2, 3, 3);
        const CMat v = random_cmat(rng, 4, 2);
        // targets generated by V adapted from b = 0 are reproduced exactly
        for (auto& f : frames) {
            f.test.Y = f.test.X * ridge_fit(f.train, {0.5, CMat::Zero(4, 2)}).V;
            (void)v;
        }
        CHECK(meta_bias_closed_form(frames, 0.5).bias.norm() <= 1e-10);
    }
    SECTION("single interpolating frame has zero meta loss") {
        auto frames = random_splits(rng, 1, 1, 3, 2, 3);
        const auto fit = meta_bias_closed_form(frames, 0.4);
        CHECK(meta_objective(frames, 0.4, fit.bias) <= 1e-18 * frames[0].test.Y.squaredNorm() + 1e-20);
    }
    SECTION("duplicated test rows leave the bias unchanged") {
        auto frames = random_splits(rng, 4, 2, 2, 2, 3);
        const CMat b1 = meta_bias_closed_form(frames, 1.3).bias;
        for (auto& f : frames) f.test = stack({f.test, f.test});
        CHECK(rel_err(meta_bias_closed_form(frames, 1.3).bias, b1) <= 1e-10);
    }
    SECTION("nonpositive lambda is rejected") {
        const auto frames = random_splits(rng, 1, 1, 2, 2, 2);
        CHECK_THROWS_AS(meta_bias_closed_form(frames, 0.0), std::invalid_argument);
    }
}

TEST_CASE("prediction is the conjugate inner product", "[linear]") {
    std::mt19937_64 rng(8);
    const CMat hist = random_cmat(rng, 3, 4);
    LinearPredictor zero{CMat::Zero(12, 3)};
    CHECK(zero.predict(hist).norm() == 0.0);

    const cd c(0.3, -1.2), h(2.0, 0.5);
    LinearPredictor scalar{CMat::Constant(1, 1, c)};
    CHECK(std::abs(scalar.predict(CMat::Constant(1, 1, h))(0) - std::conj(c) * h) <= 1e-15);

    const LinearPredictor pred{random_cmat(rng, 12, 3)};
    const CVec got = predict(pred, hist);
    for (Index out = 0; out < 3; ++out) {
        cd acc = 0.0;
        for (Index n = 0; n < 4; ++n)
            for (Index s = 0; s < 3; ++s) acc += std::conj(pred.V(n * 3 + s, out)) * hist(s, n);
        CHECK(std::abs(got(out) - acc) <= 1e-13);
    }
    CHECK_THROWS_AS(pred.predict(random_cmat(rng, 3, 3)), std::invalid_argument);
}
