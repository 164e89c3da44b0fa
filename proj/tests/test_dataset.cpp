// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <sstream>

using namespace lstdpred;
using namespace testutil;

TEST_CASE("window bookkeeping for N=2, lag 1", "[dataset]") {
    std::mt19937_64 rng(1);
    const CMat h = random_cmat(rng, 3, 3);
    const auto ds = build_dataset(h, 2, 1, false);
    REQUIRE(ds.size() == 1);
    CVec x(6);
    x << h.col(1), h.col(0);
    CHECK(ds.X.row(0) == x.adjoint());
    CHECK(ds.Y.row(0) == h.col(2).adjoint());
    CHECK(ds.history(0).col(0) == h.col(1));
    CHECK(ds.target(0) == h.col(2));
}

TEST_CASE("default window and lag give 100 pairs from 107 slots", "[dataset]") {
    std::mt19937_64 rng(2);
    const CMat h = random_cmat(rng, 4, 107);
    const auto ds = build_dataset(h, 5, 3, true);
    CHECK(ds.size() == 100);
    CHECK(ds.X.cols() == 20);
    CHECK(ds.Y.cols() == 4);
    for (Index i = 0; i < ds.size(); ++i) CHECK(std::abs(ds.Y.row(i).norm() - 1.0) <= 1e-12);
}

TEST_CASE("rows reproduce the slot vectors", "[dataset]") {
    std::mt19937_64 rng(3);
    const int n = 4, lag = 2;
    const CMat h = random_cmat(rng, 3, 20);
    const auto ds = build_dataset(h, n, lag, false);
    CHECK(ds.size() == 20 - n - lag + 1);
    for (Index i = 0; i < ds.size(); ++i) {
        const Index newest = i + n - 1;
        const CMat hist = ds.history(i);
        for (int k = 0; k < n; ++k) CHECK(hist.col(k) == h.col(newest - k));
        CHECK(ds.target(i) == h.col(newest + lag));
    }
}

TEST_CASE("normalization scales each pair by its target norm", "[dataset]") {
    std::mt19937_64 rng(4);
    const CMat h = random_cmat(rng, 2, 12);
    const auto raw = build_dataset(h, 3, 1, false);
    const auto nrm = build_dataset(h, 3, 1, true);
    for (Index i = 0; i < raw.size(); ++i) {
        const double s = raw.Y.row(i).norm();
        CHECK(rel_err(nrm.X.row(i) * s, raw.X.row(i)) <= 1e-14);
        CHECK(rel_err(nrm.Y.row(i) * s, raw.Y.row(i)) <= 1e-14);
    }
}

TEST_CASE("shifted slots drop one pair and gain one", "[dataset]") {
    std::mt19937_64 rng(5);
    const CMat h = random_cmat(rng, 2, 15);
    const auto a = build_dataset(h.leftCols(14), 3, 2, false);
    const auto b = build_dataset(h.rightCols(14), 3, 2, false);
    REQUIRE(a.size() == b.size());
    CHECK(a.X.bottomRows(a.size() - 1) == b.X.topRows(b.size() - 1));
    CHECK(a.Y.bottomRows(a.size() - 1) == b.Y.topRows(b.size() - 1));
    const auto full = build_dataset(h, 3, 2, false);
    CHECK(full.X.row(0) == a.X.row(0));
    CHECK(full.X.bottomRows(1) == b.X.bottomRows(1));
}

TEST_CASE("dataset construction errors", "[dataset]") {
    CMat h = CMat::Ones(2, 5);
    CHECK_THROWS_AS(build_dataset(h, 3, 3, false), std::invalid_argument);
    CHECK_THROWS_AS(build_dataset(h, 0, 1, false), std::invalid_argument);
    CHECK_THROWS_AS(build_dataset(h, 1, 0, false), std::invalid_argument);
    h.col(4).setZero();
    CHECK_THROWS_AS(build_dataset(h, 2, 1, true), std::domain_error);
    CHECK_NOTHROW(build_dataset(h, 2, 1, false));
}

TEST_CASE("split partitions the rows", "[dataset]") {
    std::mt19937_64 rng(6);
    const auto ds = build_dataset(random_cmat(rng, 2, 107), 5, 3, false);
    const auto one = split(ds, 1);
    CHECK(one.train.size() == 1);
    CHECK(one.test.size() == 99);
    for (Index l_tr : {1, 17, 99}) {
        const auto s = split(ds, l_tr);
        const auto back = stack({s.train, s.test});
        CHECK(back.X == ds.X);
        CHECK(back.Y == ds.Y);
    }
    CHECK_THROWS_AS(split(ds, 0), std::invalid_argument);
    CHECK_THROWS_AS(split(ds, 100), std::invalid_argument);
}

TEST_CASE("nmse edge cases", "[dataset]") {
    std::mt19937_64 rng(7);
    const CVec h = random_cvec(rng, 6);
    CHECK(nmse(h, h) == 0.0);
    CHECK(nmse(CVec::Zero(6), h) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(nmse(2.0 * h, h) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(nmse(h, CVec::Zero(6)), std::domain_error);
    CHECK_THROWS_AS(nmse(h, CVec::Zero(5)), std::invalid_argument);
}

TEST_CASE("dataset and matrix CSV round trips", "[dataset]") {
    std::mt19937_64 rng(8);
    const auto ds = build_dataset(random_cmat(rng, 3, 10), 2, 1, true);
    std::stringstream ss;
    write_dataset_csv(ss, ds);
    const auto back = read_dataset_csv(ss);
    CHECK(back.X == ds.X);
    CHECK(back.Y == ds.Y);
    CHECK(back.window == 2);
    CHECK(back.lag == 1);
    CHECK(back.channel_dim == 3);

    const CMat m = random_cmat(rng, 4, 3);
    std::stringstream ms;
    write_matrix_csv(ms, m, "predictor S=1 N=4");
    std::string header;
    CHECK(read_matrix_csv(ms, &header) == m);
    CHECK(header.rfind("predictor S=1 N=4", 0) == 0);

    std::stringstream truncated("# lstdpred-dataset N=1 lag=1 S=1 L=2\n1,0,1,0\n");
    CHECK_THROWS(read_dataset_csv(truncated));
}
