// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include "known_rank.hpp"
#include "lstdpred/rank_select.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace lstdpred;
using namespace testutil;

namespace {

// Criterion evaluated from singular values of the snapshot matrix, with the
// geometric mean taken as a product rather than a sum of logs.
std::vector<double> brute_force_aic(const CMat& samples) {
    const Index p = samples.rows(), n = samples.cols();
    Eigen::JacobiSVD<CMat> svd(samples);
    std::vector<double> ev(p, 0.0);
    for (Index i = 0; i < svd.singularValues().size(); ++i) ev[i] = std::pow(svd.singularValues()(i), 2) / n;
    const double floor = ev[0] * 1e-12;
    for (auto& e : ev) e = std::max(e, floor);
    std::vector<double> out;
    for (Index k = 1; k <= p; ++k) {
        const Index m = p - k;
        double score = 2.0 * k * (2.0 * p - k);
        if (m > 0) {
            double prod = 1.0, sum = 0.0;
            for (Index i = k; i < p; ++i) {
                prod *= ev[i] / ev[k];
                sum += ev[i] / ev[k];
            }
            const double ratio = std::pow(prod, 1.0 / m) / (sum / m);
            score += -2.0 * m * n * std::log(std::min(ratio, 1.0));
        }
        out.push_back(score);
    }
    return out;
}

}  // namespace

TEST_CASE("AIC on noiseless rank-1 snapshots", "[rank]") {
    std::mt19937_64 rng(1);
    const CVec b = random_unit(rng, 6);
    const CMat samples = b * random_cmat(rng, 1, 50);
    const auto est = aic_rank(samples);
    CHECK(est.k_hat == 1);
    CHECK(est.curve.size() == 6);
    CHECK_FALSE(est.undersampled);
}

TEST_CASE("AIC on mildly noisy rank-3 snapshots", "[rank]") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        std::mt19937_64 rng(10 + seed);
        const CMat basis = random_basis(rng, 8, 3);
        CMat samples = basis * random_cmat(rng, 3, 200);
        samples += 0.03 * random_cmat(rng, 8, 200);
        const auto est = aic_rank(samples);
        CHECK(est.k_hat == 3);
        const auto oracle = brute_force_aic(samples);
        REQUIRE(oracle.size() == est.curve.size());
        const auto best = std::min_element(oracle.begin(), oracle.end()) - oracle.begin() + 1;
        CHECK(est.k_hat == best);
        for (std::size_t k = 0; k < oracle.size(); ++k)
            CHECK(est.curve[k] == Catch::Approx(oracle[k]).epsilon(1e-6).margin(1e-6));
    }
}

TEST_CASE("AIC does not underestimate in high dimension", "[rank]") {
    std::mt19937_64 rng(2);
    const auto model = synth::KnownRankModel::draw(rng, 64, 3);
    CMat pooled(64, 0);
    for (int f = 0; f < 4; ++f) {
        const CMat h = model.frame(rng, 30);
        pooled.conservativeResize(64, pooled.cols() + h.cols());
        pooled.rightCols(h.cols()) = h;
    }
    const auto est = aic_rank(pooled);
    CHECK(est.k_hat >= 3);
    CHECK(aic_rank(model.frame(rng, 20)).undersampled);
    CHECK_THROWS_AS(aic_rank(CMat::Ones(4, 1)), std::invalid_argument);
}

TEST_CASE("meta-validation recovers a known rank", "[rank]") {
    for (int k : {1, 2}) {
        std::mt19937_64 rng(40 + k);
        const auto model = synth::KnownRankModel::draw(rng, 8, k);
        const auto tr = model.frames(rng, 10, 60, 1, 16);
        const auto va = model.frames(rng, 10, 60, 1, 16);
        std::vector<RegressionDataset> full;
        for (const auto& f : tr) full.push_back(stack({f.train, f.test}));
        const auto init = lstd_transfer_fit(full, 8);
        EpConfig ep;
        ep.outer_iters = 20;
        const auto est = meta_validation_rank(tr, va, 100.0, 0.01, ep, 8, 2, init);
        CHECK(est.k_hat == k);
        CHECK(est.method == RankMethod::MetaValidation);
        CHECK(est.curve.size() == est.train_curve.size());
        CHECK(static_cast<int>(est.curve.size()) >= k);
        const auto best = std::min_element(est.curve.begin(), est.curve.end()) - est.curve.begin() + 1;
        CHECK(est.k_hat == best);
    }
}

TEST_CASE("meta-training loss does not increase with K", "[rank]") {
    std::mt19937_64 rng(5);
    const auto model = synth::KnownRankModel::draw(rng, 6, 3, 0.05);
    const auto tr = model.frames(rng, 6, 30, 2, 10);
    const auto va = model.frames(rng, 6, 30, 2, 10);
    EpConfig ep;
    ep.outer_iters = 10;
    const auto est = meta_validation_rank(tr, va, 0.0, 0.0, ep, 6, 10);
    REQUIRE(est.train_curve.size() == 6);
    for (std::size_t k = 1; k < est.train_curve.size(); ++k)
        CHECK(est.train_curve[k] <= est.train_curve[k - 1] * (1.0 + 1e-8));
}
