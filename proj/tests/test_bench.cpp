// SPDX-License-Identifier: Apache-2.0
#include "test_util.hpp"

#include "lstdpred/bench.hpp"
#include "sweep_config.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lstdpred;

namespace {

SweepConfig tiny_config() {
    SweepConfig c;
    c.antennas = {2};
    c.taps = {1};
    c.l_new = {2};
    c.n_frames = {5};
    c.learners = {Learner::ConvNaive, Learner::TransNaive, Learner::ConvLstd};
    c.window = 2;
    c.lag = 1;
    c.slots = 12;
    c.eval_frames = 3;
    c.eval_samples = 4;
    c.seeds = {1};
    c.lambda_grid = {0.1, 1.0};
    c.K = 1;
    c.clusters = 3;
    c.rays = 2;
    c.ep.outer_iters = 2;
    c.threads = 1;
    return c;
}

std::string render(const NmseReport& r) {
    std::ostringstream os;
    write_report(os, r);
    return os.str();
}

const NmseRecord* find(const NmseReport& r, Learner l, std::uint64_t seed, int antennas) {
    for (const auto& row : r.rows)
        if (row.learner == l && row.seed == seed && row.n_antennas == antennas) return &row;
    return nullptr;
}

}  // namespace

TEST_CASE("learner names round trip", "[bench]") {
    for (auto l : all_learners()) CHECK(learner_from_string(to_string(l)) == l);
    CHECK(to_string(Learner::MetaLstd) == "meta_lstd");
    CHECK_THROWS_AS(learner_from_string("kalman"), std::invalid_argument);
}

TEST_CASE("default sweep mirrors the reference settings", "[bench]") {
    SweepConfig c;
    CHECK(c.window == 5);
    CHECK(c.lag == 3);
    CHECK(c.n_frames == std::vector<int>{500});
    CHECK(c.slots == 100);
    CHECK(c.snr_db == 20.0);
    CHECK(c.pilots == 100);
    CHECK(c.eval_frames == 200);
    CHECK(c.eval_samples == 100);
    c.apply_desk_scale();
    CHECK(c.n_frames == std::vector<int>{100});
    CHECK(c.eval_frames == 50);
    CHECK(c.eval_samples == 20);
}

TEST_CASE("degenerate sweep emits one row", "[bench]") {
    auto c = tiny_config();
    c.learners = {Learner::ConvNaive};
    const auto rep = run_sweep(c);
    REQUIRE(rep.rows.size() == 1);
    const auto& r = rep.rows[0];
    CHECK(r.status == "ok");
    CHECK(r.nmse >= 0.0);
    CHECK(r.nmse_db == Catch::Approx(10.0 * std::log10(r.nmse)));
    CHECK(r.samples == 3 * 4);
    CHECK(r.wall_ms == 0.0);
}

TEST_CASE("report CSV", "[bench]") {
    SECTION("empty report is the header line only") {
        CHECK(render({}) == std::string(kReportHeader) + "\n");
    }
    SECTION("parse-back recovers every field") {
        NmseReport rep;
        NmseRecord a;
        a.learner = Learner::MetaLstd;
        a.env = Environment::Slow;
        a.n_antennas = 64;
        a.taps = 3;
        a.l_new = 7;
        a.n_frames = 500;
        a.seed = 18446744073709551615ull;
        a.nmse = 0.1234567890123456789;
        a.nmse_db = 10.0 * std::log10(a.nmse);
        a.wall_ms = 1.0 / 3.0;
        a.samples = 20000;
        a.K = 3;
        a.lambda1 = 1e-3;
        a.lambda2 = 10.0;
        NmseRecord b = a;
        b.learner = Learner::ConvNaive;
        b.status = "error: bad, \"quoted\" input";
        rep.rows = {a, b};
        std::istringstream is(render(rep));
        const auto back = read_report(is);
        REQUIRE(back.rows.size() == 2);
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& x = rep.rows[i];
            const auto& y = back.rows[i];
            CHECK(y.learner == x.learner);
            CHECK(y.env == x.env);
            CHECK(y.n_antennas == x.n_antennas);
            CHECK(y.taps == x.taps);
            CHECK(y.l_new == x.l_new);
            CHECK(y.n_frames == x.n_frames);
            CHECK(y.seed == x.seed);
            CHECK(y.nmse == x.nmse);
            CHECK(y.nmse_db == x.nmse_db);
            CHECK(y.wall_ms == x.wall_ms);
            CHECK(y.samples == x.samples);
            CHECK(y.K == x.K);
            CHECK(y.lambda1 == x.lambda1);
            CHECK(y.lambda2 == x.lambda2);
            CHECK(y.status == x.status);
        }
        std::istringstream bad("learner,nmse\n");
        CHECK_THROWS(read_report(bad));
    }
    SECTION("unwritable path is an error") {
        CHECK_THROWS_AS(emit_report({}, "/nonexistent-dir/report.csv"), std::runtime_error);
    }
}

TEST_CASE("sweeps are reproducible byte for byte", "[bench]") {
    const auto c = tiny_config();
    const auto dir = std::filesystem::temp_directory_path();
    const auto p1 = dir / "lstdpred_rerun_a.csv", p2 = dir / "lstdpred_rerun_b.csv";
    emit_report(run_sweep(c), p1.string());
    auto threaded = c;
    threaded.threads = 2;
    emit_report(run_sweep(threaded), p2.string());
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), {});
    };
    CHECK(slurp(p1) == slurp(p2));
    CHECK(slurp(p1).size() > std::string(kReportHeader).size());
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("sweep cells are isolated from each other", "[bench]") {
    auto a = tiny_config();
    a.seeds = {1, 2};
    a.antennas = {2};
    auto b = a;
    b.seeds = {1, 3};
    b.antennas = {2, 4};
    const auto ra = run_sweep(a), rb = run_sweep(b);
    for (auto l : a.learners) {
        const auto* x = find(ra, l, 1, 2);
        const auto* y = find(rb, l, 1, 2);
        REQUIRE(x != nullptr);
        REQUIRE(y != nullptr);
        CHECK(x->nmse == y->nmse);
        CHECK(x->lambda1 == y->lambda1);
        CHECK(x->lambda2 == y->lambda2);
        CHECK(find(ra, l, 2, 2)->nmse != x->nmse);
    }
}

TEST_CASE("evaluation frames never enter training data", "[bench]") {
    auto c = tiny_config();
    const detail::Cell cell{2, {1, c.base_delay_spread}, 2, 5, 7};
    const auto small = detail::make_cell_data(c, cell);
    c.eval_frames = 6;
    const auto big = detail::make_cell_data(c, cell);
    REQUIRE(small.source.size() == big.source.size());
    for (std::size_t f = 0; f < small.source.size(); ++f) CHECK(small.source[f].X == big.source[f].X);
    CHECK(small.pooled_channels == big.pooled_channels);
    REQUIRE(big.eval.size() == 6);
    // no evaluation input row appears among the (unnormalized) pooled channels
    for (const auto& e : big.eval) {
        const CVec first = e.eval_in.history(0).col(0);
        for (Index col = 0; col < big.pooled_channels.cols(); ++col)
            CHECK((big.pooled_channels.col(col) - first).norm() > 1e-9);
    }
    CHECK(small.holdout.size() == 1);
}

TEST_CASE("sweep configuration from JSON", "[bench]") {
    using nlohmann::json;
    SECTION("keys map onto the config") {
        const auto j = json::parse(R"({
            "env": "slow", "antennas": [4, 8], "taps": [2], "l_new": [1, 5], "n_frames": [50],
            "learners": ["conv_naive", "meta_lstd"], "window": 3, "lag": 2, "seeds": [7, 8],
            "rank": {"mode": "auto", "K": 2, "k_max": 6}, "k_factor_db": 9, "rays": 5,
            "ep": {"alpha": 0.01, "outer_iters": 7, "als_tol": 1e-9}, "threads": 1
        })");
        const auto c = cli::sweep_config_from_json(j);
        CHECK(c.env == Environment::Slow);
        CHECK(c.antennas == std::vector<int>{4, 8});
        CHECK(c.l_new == std::vector<int>{1, 5});
        CHECK(c.learners == std::vector<Learner>{Learner::ConvNaive, Learner::MetaLstd});
        CHECK(c.window == 3);
        CHECK(c.lag == 2);
        CHECK(c.seeds == std::vector<std::uint64_t>{7, 8});
        CHECK(c.rank_mode == RankMode::Auto);
        CHECK(c.K == 2);
        CHECK(c.k_max == 6);
        CHECK(c.k_factor_db == 9.0);
        CHECK(c.rays == 5);
        CHECK(c.ep.alpha == 0.01);
        CHECK(c.ep.outer_iters == 7);
        CHECK(c.ep.als.tol == 1e-9);
        CHECK_NOTHROW(c.validate());
    }
    SECTION("unknown keys are rejected") {
        CHECK_THROWS_AS(cli::sweep_config_from_json(json::parse(R"({"antenas": [4]})")), std::invalid_argument);
        CHECK_THROWS_AS(cli::sweep_config_from_json(json::parse(R"({"rank": {"kk": 1}})")), std::invalid_argument);
        CHECK_THROWS_AS(cli::sweep_config_from_json(json::parse(R"({"rank": {"mode": "guess"}})")),
                        std::invalid_argument);
        CHECK_THROWS_AS(cli::sweep_config_from_json(json::parse("[1, 2]")), std::invalid_argument);
    }
    SECTION("invalid values fail validation") {
        auto c = cli::sweep_config_from_json(json::parse(R"({"l_new": [0]})"));
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
        c = cli::sweep_config_from_json(json::parse(R"({"n_frames": []})"));
        CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    }
}
