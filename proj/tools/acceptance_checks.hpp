// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks shared by the `selftest` subcommand and the acceptance
// test binary. Each check prints one PASS/FAIL line with its measurements and
// runtime; a check that exceeds its time budget fails.
#pragma once

#include "known_rank.hpp"
#include "lstdpred/bench.hpp"
#include "lstdpred/linear_learners.hpp"
#include "lstdpred/lstd.hpp"
#include "lstdpred/lstd_meta.hpp"
#include "lstdpred/rank_select.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace lstdpred::acceptance {

struct CheckResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

namespace detail {

inline CMat gaussian(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = cd(g(rng), g(rng));
    return m;
}

inline CVec gaussian_vec(std::mt19937_64& rng, Index n) { return gaussian(rng, n, 1).col(0); }

inline CVec unit_vec(std::mt19937_64& rng, Index n) { return gaussian_vec(rng, n).normalized(); }

inline RegressionDataset gaussian_dataset(std::mt19937_64& rng, Index rows, Index s, int n) {
    RegressionDataset ds;
    ds.window = n;
    ds.lag = 1;
    ds.channel_dim = s;
    ds.X = gaussian(rng, rows, s * n);
    ds.Y = gaussian(rng, rows, s);
    return ds;
}

inline std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

inline double rel(const CMat& a, const CMat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

struct Outcome {
    bool passed = false;
    std::string detail;
};

// ---- 1: ridge against a full-pivot LU solve of the normal equations
inline Outcome ridge_oracle() {
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Index s = 1 + trial % 2;
        const int n = 5;
        const auto tr = gaussian_dataset(rng, 12, s, n);
        const CMat bias = gaussian(rng, s * n, s);
        const double lambda = std::pow(10.0, -2.0 + 4.0 * (trial % 9) / 8.0);
        const CMat a = tr.X.adjoint() * tr.X + lambda * CMat::Identity(s * n, s * n);
        const CMat oracle = a.fullPivLu().solve(tr.X.adjoint() * tr.Y + lambda * bias);
        worst = std::max(worst, rel(ridge_fit(tr, {lambda, bias}).V, oracle));
    }
    return {worst <= 1e-10, "max rel err " + fmt("%.2e", worst) + " over 50 instances (tol 1e-10)"};
}

// ---- 2: meta closed form against conjugate gradients on the affine test residual
inline Outcome meta_closed_form() {
    std::mt19937_64 rng(202);
    const Index s = 2;
    const int n = 5, frames = 5, rows = 20;
    const Index l_tr = 10, p = s * n;
    const double lambda = 0.5;
    std::vector<SplitDataset> fs;
    for (int f = 0; f < frames; ++f) fs.push_back(split(gaussian_dataset(rng, rows, s, n), l_tr));
    // adapted predictor on frame f: V_f(b) = A^{-1}(X^H Y + lambda b), so the
    // test residual is M_f b - C_f
    CMat g = CMat::Zero(p, p), r = CMat::Zero(p, s);
    for (const auto& f : fs) {
        const CMat ainv = (f.train.X.adjoint() * f.train.X + lambda * CMat::Identity(p, p)).inverse();
        const CMat m = lambda * f.test.X * ainv;
        const CMat c = f.test.Y - f.test.X * ainv * f.train.X.adjoint() * f.train.Y;
        g += m.adjoint() * m;
        r += m.adjoint() * c;
    }
    CMat b = CMat::Zero(p, s);
    for (Index col = 0; col < s; ++col) {
        CVec x = CVec::Zero(p), res = r.col(col), dir = res;
        for (int it = 0; it < 500 && res.norm() > 1e-15 * r.norm(); ++it) {
            const CVec gd = g * dir;
            const cd step = res.squaredNorm() / dir.dot(gd);
            x += step * dir;
            const CVec next = res - step * gd;
            dir = next + (next.squaredNorm() / res.squaredNorm()) * dir;
            res = next;
        }
        b.col(col) = x;
    }
    const double closed = meta_objective(fs, lambda, meta_bias_closed_form(fs, lambda).bias);
    const double iterative = meta_objective(fs, lambda, b);
    const double gap = std::abs(closed - iterative) / iterative;
    return {gap <= 1e-6, "objective closed " + fmt("%.10g", closed) + " vs iterative " + fmt("%.10g", iterative) +
                             ", rel gap " + fmt("%.2e", gap) + " (tol 1e-6)"};
}

// ---- 3: EP filter hypergradient against central differences of the outer loss
inline Outcome ep_gradient() {
    std::mt19937_64 rng(303);
    const Index s = 2;
    const int n = 3, frames = 3, slots = 14;
    const Index l_tr = 6;
    const CVec feature = unit_vec(rng, s);
    std::normal_distribution<double> g(0.0, 0.1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<SplitDataset> fs;
    for (int f = 0; f < frames; ++f) {
        const cd z = std::polar(0.98 + 0.02 * u(rng), 2.0 * std::numbers::pi * u(rng));
        cd a = std::polar(1.0 + u(rng), 2.0 * std::numbers::pi * u(rng));
        CMat h(s, slots);
        for (int l = 0; l < slots; ++l, a *= z) h.col(l) = feature * a;
        for (Index i = 0; i < h.size(); ++i) h.data()[i] += cd(g(rng), g(rng));
        fs.push_back(split(build_dataset(h, n, 1, true), l_tr));
    }
    const CVec bbar = unit_vec(rng, s), vbar = 0.3 * gaussian_vec(rng, n);
    const AlsConfig als{1e-12, 5000};
    const double l1 = 0.5, l2 = 0.5, h = 1e-5;
    CVec fd(n);
    for (Index i = 0; i < n; ++i) {
        double parts[2];
        for (int part = 0; part < 2; ++part) {
            const cd dir = part == 0 ? cd(h, 0.0) : cd(0.0, h);
            CVec up = vbar, dn = vbar;
            up(i) += dir;
            dn(i) -= dir;
            parts[part] = (lstd_outer_loss(fs, bbar, up, l1, l2, als) - lstd_outer_loss(fs, bbar, dn, l1, l2, als)) /
                          (2.0 * h);
        }
        fd(i) = cd(parts[0], parts[1]);
    }
    double err[2];
    const double alphas[2] = {1e-2, 1e-3};
    bool all_used = true;
    for (int i = 0; i < 2; ++i) {
        const auto grad = ep_gradients(fs, bbar, vbar, l1, l2, alphas[i], als);
        all_used = all_used && grad.frames_used == frames;
        err[i] = (grad.grad_short - fd).norm() / fd.norm();
    }
    return {all_used && err[1] <= 5e-2 && err[1] < err[0],
            "rel err " + fmt("%.2e", err[0]) + " at alpha 1e-2, " + fmt("%.2e", err[1]) +
                " at alpha 1e-3 (tol 5e-2, must decrease)"};
}

// ---- 4: ALS half-step monotonicity and exact recovery of realizable data
inline Outcome als_monotone() {
    std::mt19937_64 rng(404);
    int violations = 0;
    double worst_rise = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Index s = 3;
        const int n = 4;
        const CMat x = gaussian(rng, 12, s * n), y = gaussian(rng, 12, s);
        const double l1 = trial % 2 ? 0.5 : 0.0, l2 = 0.1 * (trial % 3);
        const auto r = als_feature_fit(x, y, l1, l2, unit_vec(rng, s), gaussian_vec(rng, n), {1e-10, 200});
        for (std::size_t i = 1; i < r.trace.size(); ++i) {
            const double rise = r.trace[i] - r.trace[i - 1];
            worst_rise = std::max(worst_rise, rise);
            if (rise > 1e-10 * std::max(1.0, std::abs(r.trace[i - 1]))) ++violations;
        }
    }
    const Index s = 4;
    const int n = 3;
    const CMat x = gaussian(rng, 30, s * n);
    const CMat y = x * lstd_term(gaussian_vec(rng, n), unit_vec(rng, s));
    const auto r = als_feature_fit(x, y, 0.0, 0.0, CVec::Unit(s, 0), CVec::Zero(n), {1e-14, 1000});
    const double ratio = r.objective / y.squaredNorm();
    return {violations == 0 && ratio <= 1e-10,
            std::to_string(violations) + " half-step increases over 20 instances (largest rise " +
                fmt("%.1e", worst_rise) + "); realizable objective/||Y||^2 " + fmt("%.2e", ratio) + " (tol 1e-10)"};
}

// ---- 5: assembled V against the project-filter-reconstruct pipeline
inline Outcome lstd_identity() {
    std::mt19937_64 rng(505);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const Index s = 1 + trial % 6;
        const int n = 1 + trial % 5;
        const int k = 1 + trial % 3;
        std::vector<CVec> bs, vs;
        for (int i = 0; i < k; ++i) {
            bs.push_back(unit_vec(rng, s));
            vs.push_back(gaussian_vec(rng, n));
        }
        const auto p = assemble(bs, vs);
        const CMat hist = gaussian(rng, s, n);
        worst = std::max(worst, rel(p.predict(hist), p.predict_pipeline(hist)));
    }
    return {worst <= 1e-10, "max rel err " + fmt("%.2e", worst) + " over 100 inputs (tol 1e-10)"};
}

inline std::uint64_t synth_seed(int k, int trial) {
    return lstdpred::detail::derive_seed({6, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(trial)});
}

// ---- 6: rank recovery by meta-validation, and AIC overestimation
inline Outcome rank_recovery() {
    const Index s = 8;
    const int frames = 10, slots = 60, k_max = 8;
    const Index l_tr = 16;
    std::string detail = "meta-validation hits";
    bool ok = true;
    for (int k : {1, 2, 3}) {
        int hits = 0;
        for (int trial = 0; trial < 20; ++trial) {
            std::mt19937_64 rng(synth_seed(k, trial));
            const auto model = synth::KnownRankModel::draw(rng, s, k);
            const auto tr = model.frames(rng, frames, slots, 1, l_tr);
            const auto va = model.frames(rng, frames, slots, 1, l_tr);
            std::vector<RegressionDataset> full;
            for (const auto& f : tr) full.push_back(stack({f.train, f.test}));
            EpConfig ep;
            ep.outer_iters = 20;
            const auto est =
                meta_validation_rank(tr, va, 100.0, 0.01, ep, k_max, 2, lstd_transfer_fit(full, k_max));
            hits += est.k_hat == k;
        }
        ok = ok && hits >= 18;
        detail += " k=" + std::to_string(k) + ":" + std::to_string(hits) + "/20";
    }
    // high-dimensional analog: 64 antennas, 3 features, noisy pooled slots
    std::mt19937_64 rng(606);
    const auto model = synth::KnownRankModel::draw(rng, 64, 3);
    CMat pooled(64, 0);
    for (int f = 0; f < 4; ++f) {
        const CMat h = model.frame(rng, 30);
        pooled.conservativeResize(64, pooled.cols() + h.cols());
        pooled.rightCols(h.cols()) = h;
    }
    const int aic = aic_rank(pooled).k_hat;
    ok = ok && aic >= 3;
    detail += " (need 18/20); AIC k_hat " + std::to_string(aic) + " for k_true 3 on S=64";
    return {ok, detail};
}

inline std::map<std::pair<Environment, Learner>, double> mean_db(const NmseReport& rep) {
    std::map<std::pair<Environment, Learner>, std::pair<double, int>> acc;
    for (const auto& r : rep.rows) {
        auto& a = acc[{r.env, r.learner}];
        a.first += r.nmse_db;
        ++a.second;
    }
    std::map<std::pair<Environment, Learner>, double> out;
    for (const auto& [key, a] : acc) out[key] = a.first / a.second;
    return out;
}

// ---- 7: fast-environment comparison at desk scale
inline SweepConfig fast_comparison_config() {
    SweepConfig c;
    c.env = Environment::Fast;
    c.antennas = {8};
    c.taps = {2};
    c.l_new = {1};
    c.apply_desk_scale();
    c.clusters = 19;
    c.ray_spread = 0.1;
    c.k_factor_db = 9.0;
    c.K = 2;
    c.learners = {Learner::ConvNaive, Learner::ConvLstd, Learner::TransLstd, Learner::MetaLstd};
    c.seeds = {1};
    return c;
}

inline Outcome fast_comparison() {
    const auto db = mean_db(run_sweep(fast_comparison_config()));
    const auto at = [&](Learner l) { return db.at({Environment::Fast, l}); };
    const double meta = at(Learner::MetaLstd), trans = at(Learner::TransLstd), conv = at(Learner::ConvLstd),
                 naive = at(Learner::ConvNaive);
    const bool order = meta < trans && trans < conv;
    const double margin = naive - meta;
    return {order && margin >= 2.0, "NMSE dB meta_lstd " + fmt("%.2f", meta) + ", trans_lstd " + fmt("%.2f", trans) +
                                        ", conv_lstd " + fmt("%.2f", conv) + ", conv_naive " + fmt("%.2f", naive) +
                                        "; ordering " + (order ? "holds" : "violated") + ", margin " +
                                        fmt("%.2f", margin) + " dB (need 2)"};
}

// ---- 8: slow versus fast environments
inline SweepConfig slow_fast_config(Environment env) {
    SweepConfig c;
    c.env = env;
    c.antennas = {8};
    c.taps = {1};
    c.l_new = {1};
    c.apply_desk_scale();
    // default multi-cluster geometry; W = 1 and K = 1 keep the meta-learned
    // LSTD cells inside the time budget
    c.K = 1;
    c.learners = {Learner::MetaNaive, Learner::MetaLstd};
    c.seeds = {1, 2, 3, 4, 5};
    return c;
}

inline Outcome slow_vs_fast() {
    auto db = mean_db(run_sweep(slow_fast_config(Environment::Slow)));
    const auto fast = mean_db(run_sweep(slow_fast_config(Environment::Fast)));
    db.insert(fast.begin(), fast.end());
    const double sn = db.at({Environment::Slow, Learner::MetaNaive}), sl = db.at({Environment::Slow, Learner::MetaLstd});
    const double fn = db.at({Environment::Fast, Learner::MetaNaive}), fl = db.at({Environment::Fast, Learner::MetaLstd});
    return {sn < sl && fl < fn, "mean NMSE dB over 5 seeds: slow meta_naive " + fmt("%.2f", sn) + " vs meta_lstd " +
                                    fmt("%.2f", sl) + "; fast meta_naive " + fmt("%.2f", fn) + " vs meta_lstd " +
                                    fmt("%.2f", fl)};
}

// ---- 9: byte-identical reruns
inline Outcome determinism() {
    SweepConfig c;
    c.antennas = {4};
    c.taps = {2};
    c.l_new = {2};
    c.n_frames = {8};
    c.slots = 30;
    c.eval_frames = 4;
    c.eval_samples = 5;
    c.K = 1;
    c.clusters = 4;
    c.rays = 3;
    c.ep.outer_iters = 5;
    c.seeds = {1, 2};
    const auto dir = std::filesystem::temp_directory_path();
    const auto p1 = dir / "lstdpred_acceptance_a.csv", p2 = dir / "lstdpred_acceptance_b.csv";
    emit_report(run_sweep(c), p1.string());
    emit_report(run_sweep(c), p2.string());
    const auto slurp = [](const std::filesystem::path& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), {});
    };
    const std::string a = slurp(p1), b = slurp(p2);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
    const auto lines = std::count(a.begin(), a.end(), '\n');
    return {a == b && lines > 1, std::to_string(lines - 1) + " rows, " + std::to_string(a.size()) + " bytes, " +
                                     (a == b ? "identical" : "different")};
}

struct Check {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
};

inline const std::vector<Check>& checks() {
    static const std::vector<Check> all{
        {1, "ridge oracle", 5.0, ridge_oracle},
        {2, "meta closed form", 30.0, meta_closed_form},
        {3, "EP gradient", 60.0, ep_gradient},
        {4, "ALS monotonicity", 10.0, als_monotone},
        {5, "LSTD identity", 2.0, lstd_identity},
        {6, "rank recovery", 300.0, rank_recovery},
        {7, "fast-environment comparison", 600.0, fast_comparison},
        {8, "slow vs fast", 600.0, slow_vs_fast},
        {9, "determinism", 60.0, determinism},
    };
    return all;
}

}  // namespace detail

/// Runs the selected checks (all when `only` is empty), printing one line each.
inline std::vector<CheckResult> run_all(const std::vector<int>& only, std::ostream& os) {
    std::vector<CheckResult> out;
    for (const auto& c : detail::checks()) {
        if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
        CheckResult r{c.id, c.name, false, {}, 0.0};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            auto o = c.run();
            r.passed = o.passed;
            r.detail = std::move(o.detail);
        } catch (const std::exception& e) {
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (r.seconds > c.budget_s) {
            r.passed = false;
            r.detail += "; over time budget";
        }
        os << (r.passed ? "PASS " : "FAIL ") << r.id << ' ' << r.name << ": " << r.detail << " ["
           << detail::fmt("%.1f", r.seconds) << " s / " << detail::fmt("%.0f", c.budget_s) << " s]" << std::endl;
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace lstdpred::acceptance
