// SPDX-License-Identifier: Apache-2.0
//
// Seeded NMSE benchmark over antenna count, tap count, pilot count L_new and
// number of previous frames F, for the naive and LSTD learners in their
// conventional, transfer and meta-learned variants.
#pragma once

#include "lstdpred/channel_sim.hpp"
#include "lstdpred/dataset.hpp"
#include "lstdpred/linear_learners.hpp"
#include "lstdpred/lstd.hpp"
#include "lstdpred/lstd_meta.hpp"
#include "lstdpred/rank_select.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace lstdpred {

enum class Learner { ConvNaive, ConvLstd, TransNaive, TransLstd, MetaNaive, MetaLstd };

inline const std::vector<Learner>& all_learners() {
    static const std::vector<Learner> all{Learner::ConvNaive, Learner::ConvLstd,  Learner::TransNaive,
                                          Learner::TransLstd, Learner::MetaNaive, Learner::MetaLstd};
    return all;
}

inline std::string to_string(Learner l) {
    switch (l) {
        case Learner::ConvNaive: return "conv_naive";
        case Learner::ConvLstd: return "conv_lstd";
        case Learner::TransNaive: return "trans_naive";
        case Learner::TransLstd: return "trans_lstd";
        case Learner::MetaNaive: return "meta_naive";
        case Learner::MetaLstd: return "meta_lstd";
    }
    return "unknown";
}

inline Learner learner_from_string(const std::string& s) {
    for (auto l : all_learners())
        if (to_string(l) == s) return l;
    throw std::invalid_argument("unknown learner '" + s + "'");
}

inline bool is_lstd(Learner l) { return l == Learner::ConvLstd || l == Learner::TransLstd || l == Learner::MetaLstd; }

/// How the LSTD feature count is chosen: fixed K, or estimated (AIC for
/// conventional/transfer, meta-validation for meta-learning).
enum class RankMode { Fixed, Auto };

struct SweepConfig {
    Environment env = Environment::Fast;
    std::vector<int> antennas{8};             // total N_R * N_T, mapped through the layout table
    std::vector<int> taps{2};                 // W
    std::vector<double> delay_spread_ratios;  // when set, W follows the 90%-power rule instead of `taps`
    double base_delay_spread = 45e-9;
    std::vector<int> l_new{1};
    std::vector<int> n_frames{500};
    std::vector<Learner> learners = all_learners();

    int window = 5;     // N
    int lag = 3;        // delta
    int slots = 100;    // L, pairs per previous frame
    int eval_frames = 200;
    int eval_samples = 100;
    double snr_db = 20.0;
    int pilots = 100;
    std::vector<std::uint64_t> seeds{1};

    std::vector<double> lambda_grid{1e-3, 1e-2, 1e-1, 1.0, 10.0};
    double holdout_fraction = 0.2;  // share of previous frames used to pick lambdas
    int K = 2;
    RankMode rank_mode = RankMode::Fixed;
    int k_max = 16;

    int clusters = 19;
    double symbol_period = 50e-9;
    double rolloff = 0.22;
    double srs_rate = 200.0;
    bool shared_site = true;  // frames of a cell perturb one site geometry
    double angle_jitter = 0.05;
    double delay_jitter = 0.05;
    double power_jitter_db = 1.0;
    double angle_spread = 0.25;
    double shadowing_db = 3.0;
    int rays = 20;
    double ray_spread = 0.3;
    std::optional<double> k_factor_db;

    EpConfig ep{};
    int threads = 0;      // 0: hardware concurrency
    bool timing = false;  // wall_ms is written as 0 unless set, keeping reports byte-stable

    void validate() const {
        detail::require(!antennas.empty() && !l_new.empty() && !n_frames.empty() && !learners.empty() &&
                            !seeds.empty() && !lambda_grid.empty(),
                        "SweepConfig: sweep lists must be nonempty");
        detail::require(!taps.empty() || !delay_spread_ratios.empty(), "SweepConfig: need taps or delay spreads");
        detail::require(window >= 1 && lag >= 1, "SweepConfig: window and lag must be >= 1");
        for (int l : l_new) detail::require(l >= 1 && l < slots, "SweepConfig: l_new must lie in [1, L)");
        for (int f : n_frames) detail::require(f >= 2, "SweepConfig: need at least two previous frames");
        for (double lam : lambda_grid) detail::require(lam > 0.0, "SweepConfig: lambdas must be positive");
        detail::require(eval_frames >= 1 && eval_samples >= 1, "SweepConfig: empty evaluation");
        detail::require(holdout_fraction > 0.0 && holdout_fraction < 1.0, "SweepConfig: bad holdout fraction");
        detail::require(K >= 1 && k_max >= 1, "SweepConfig: K must be >= 1");
        detail::require(clusters >= 1 && pilots >= 1, "SweepConfig: clusters and pilots must be >= 1");
        ep.validate();
    }

    /// Shrinks the frame counts so a sweep point runs in minutes on one core.
    void apply_desk_scale() {
        n_frames = {100};
        eval_frames = 50;
        eval_samples = 20;
    }
};

struct NmseRecord {
    Learner learner = Learner::ConvNaive;
    Environment env = Environment::Fast;
    int n_antennas = 1;
    int taps = 1;
    int l_new = 1;
    int n_frames = 1;
    std::uint64_t seed = 0;
    double nmse = 0.0;
    double nmse_db = 0.0;
    double wall_ms = 0.0;
    Index samples = 0;
    int K = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    std::string status = "ok";
};

struct NmseReport {
    std::vector<NmseRecord> rows;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x51ed270b27a3c1f5ULL;
    for (auto p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

enum class FrameRole : std::uint64_t { Source = 1, Eval = 2, SourceNoise = 3, EvalNoise = 4, Site = 5 };

/// Noisy training pairs plus raw evaluation pairs of one frame.
struct PreparedFrame {
    RegressionDataset train;      // normalized, from noisy channels
    RegressionDataset eval_in;    // raw noisy inputs
    RegressionDataset eval_true;  // raw noiseless targets
};

struct CellData {
    std::vector<RegressionDataset> source;  // normalized noisy datasets of previous frames
    std::vector<PreparedFrame> holdout;     // last previous frames, prepared like evaluation frames
    std::vector<PreparedFrame> eval;
    CMat pooled_channels;                   // noisy previous-frame channels, for AIC
};

inline PreparedFrame prepare_eval_frame(const ChannelFrame& clean, const ChannelFrame& noisy, int window, int lag,
                                        int l_new, int eval_samples) {
    PreparedFrame p;
    const auto all = build_dataset(noisy.channels, window, lag, true);
    p.train = all.rows(0, l_new);
    const auto raw_in = build_dataset(noisy.channels, window, lag, false);
    const auto raw_true = build_dataset(clean.channels, window, lag, false);
    const Index count = std::min<Index>(eval_samples, raw_in.size() - l_new);
    p.eval_in = raw_in.rows(l_new, count);
    p.eval_true = raw_true.rows(l_new, count);
    return p;
}

/// Mean NMSE of the predictor V over the evaluation pairs of `frames`.
template <typename FitFn>
double mean_nmse(const std::vector<PreparedFrame>& frames, FitFn&& fit, Index* count = nullptr) {
    double total = 0.0;
    Index n = 0;
    for (const auto& f : frames) {
        const CMat v = fit(f.train);
        const CMat pred = f.eval_in.X * v;  // rows: predicted h^H
        for (Index i = 0; i < pred.rows(); ++i) {
            total += (pred.row(i) - f.eval_true.Y.row(i)).squaredNorm() / f.eval_true.Y.row(i).squaredNorm();
            ++n;
        }
    }
    if (count) *count = n;
    return n ? total / n : std::numeric_limits<double>::quiet_NaN();
}

struct LearnerOutcome {
    double nmse = 0.0;
    Index samples = 0;
    int K = 0;
    double lambda1 = 0.0;
    double lambda2 = 0.0;
};

inline std::vector<SplitDataset> meta_splits(const std::vector<RegressionDataset>& frames, int l_tr) {
    std::vector<SplitDataset> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(split(f, l_tr));
    return out;
}

/// Feature count for an LSTD learner.
inline int choose_rank(const SweepConfig& cfg, const CellData& data, Learner learner,
                       const std::vector<RegressionDataset>& fit_frames, int l_new, double lambda1,
                       double lambda2) {
    if (cfg.rank_mode == RankMode::Fixed) return cfg.K;
    const int s = static_cast<int>(data.source.front().channel_dim);
    if (learner != Learner::MetaLstd) return std::min(aic_rank(data.pooled_channels).k_hat, cfg.k_max);
    // meta-validation: split the fitting frames in half
    const auto splits = meta_splits(fit_frames, l_new);
    const std::size_t half = std::max<std::size_t>(1, splits.size() / 2);
    std::vector<SplitDataset> tr(splits.begin(), splits.begin() + half);
    std::vector<SplitDataset> val(splits.begin() + half, splits.end());
    if (val.empty()) return cfg.K;
    return meta_validation_rank(tr, val, lambda1, lambda2, cfg.ep, std::min(cfg.k_max, s)).k_hat;
}

/// Bias fitting + lambda selection + evaluation of one learner in one cell.
inline LearnerOutcome run_learner(const SweepConfig& cfg, const CellData& data, Learner learner, int l_new) {
    const auto& grid = cfg.lambda_grid;
    const std::size_t n_hold = data.holdout.size();
    const std::vector<RegressionDataset> fit_frames(data.source.begin(), data.source.end() - n_hold);
    const Index s = data.source.front().channel_dim;
    const Index n = data.source.front().window;
    const AlsConfig& als = cfg.ep.als;
    LearnerOutcome out;

    switch (learner) {
        case Learner::ConvNaive:
        case Learner::TransNaive:
        case Learner::MetaNaive: {
            // bias as a function of lambda on a given frame set
            auto bias_for = [&](const std::vector<RegressionDataset>& frames, double lambda) -> CMat {
                if (learner == Learner::ConvNaive) return CMat::Zero(s * n, s);
                if (learner == Learner::TransNaive) return transfer_bias(frames).bias;
                return meta_bias_closed_form(meta_splits(frames, l_new), lambda).bias;
            };
            double best = std::numeric_limits<double>::infinity();
            double best_lambda = grid.front();
            CMat trans_cache;
            for (double lambda : grid) {
                CMat bias;
                if (learner == Learner::TransNaive) {
                    if (trans_cache.size() == 0) trans_cache = bias_for(fit_frames, lambda);
                    bias = trans_cache;
                } else {
                    bias = bias_for(fit_frames, lambda);
                }
                const double score = mean_nmse(
                    data.holdout, [&](const RegressionDataset& tr) { return ridge_fit(tr, {lambda, bias}).V; });
                if (score < best) best = score, best_lambda = lambda;
            }
            const CMat bias = bias_for(data.source, best_lambda);
            out.nmse = mean_nmse(
                data.eval, [&](const RegressionDataset& tr) { return ridge_fit(tr, {best_lambda, bias}).V; },
                &out.samples);
            out.lambda1 = best_lambda;
            return out;
        }
        case Learner::ConvLstd: {
            const int k = choose_rank(cfg, data, learner, fit_frames, l_new, 0.0, grid.front());
            double best = std::numeric_limits<double>::infinity();
            double best_l2 = grid.front();
            for (double l2 : grid) {
                const auto hyper = LstdHyper::unbiased(k, s, n, 0.0, l2);
                const double score = mean_nmse(
                    data.holdout, [&](const RegressionDataset& tr) { return lstd_adapt(tr, hyper, als).V; });
                if (score < best) best = score, best_l2 = l2;
            }
            const auto hyper = LstdHyper::unbiased(k, s, n, 0.0, best_l2);
            out.nmse = mean_nmse(
                data.eval, [&](const RegressionDataset& tr) { return lstd_adapt(tr, hyper, als).V; }, &out.samples);
            out.K = k;
            out.lambda2 = best_l2;
            return out;
        }
        case Learner::TransLstd:
        case Learner::MetaLstd: {
            const int k_trans = choose_rank(cfg, data, Learner::TransLstd, fit_frames, l_new, 0.0, 0.0);
            // lambda pair for the transfer biases (cheap: adaptation only)
            auto select_pair = [&](const LstdHyper& base, const std::vector<double>& g1, const std::vector<double>& g2) {
                double best = std::numeric_limits<double>::infinity();
                std::pair<double, double> arg{g1.front(), g2.front()};
                for (double l1 : g1)
                    for (double l2 : g2) {
                        LstdHyper h = base;
                        h.lambda1 = l1;
                        h.lambda2 = l2;
                        const double score = mean_nmse(
                            data.holdout, [&](const RegressionDataset& tr) { return lstd_adapt(tr, h, als).V; });
                        if (score < best) best = score, arg = {l1, l2};
                    }
                return arg;
            };
            const auto trans_fit = lstd_transfer_fit(fit_frames, k_trans, als);
            const auto [t1, t2] = select_pair(trans_fit, grid, grid);

            if (learner == Learner::TransLstd) {
                LstdHyper h = lstd_transfer_fit(data.source, k_trans, als);
                h.lambda1 = t1;
                h.lambda2 = t2;
                out.nmse = mean_nmse(
                    data.eval, [&](const RegressionDataset& tr) { return lstd_adapt(tr, h, als).V; }, &out.samples);
                out.K = k_trans;
                out.lambda1 = t1;
                out.lambda2 = t2;
                return out;
            }

            // meta-learning: the regularization strengths picked for the
            // transfer biases seed a one-step neighbourhood search
            auto neighbours = [&](double v) {
                std::vector<double> nb;
                const auto it = std::find(grid.begin(), grid.end(), v);
                const auto idx = static_cast<std::size_t>(it - grid.begin());
                if (idx > 0) nb.push_back(grid[idx - 1]);
                nb.push_back(v);
                if (idx + 1 < grid.size()) nb.push_back(grid[idx + 1]);
                return nb;
            };
            const int k = choose_rank(cfg, data, learner, fit_frames, l_new, t1, t2);
            const auto fit_splits = meta_splits(fit_frames, l_new);
            const auto trans_init = k <= k_trans ? trans_fit : lstd_transfer_fit(fit_frames, k, als);
            double best = std::numeric_limits<double>::infinity();
            std::pair<double, double> arg{t1, t2};
            for (double l1 : neighbours(t1))
                for (double l2 : neighbours(t2)) {
                    auto meta = lstd_meta_fit(fit_splits, k, l1, l2, cfg.ep, trans_init).hyper;
                    const double score = mean_nmse(
                        data.holdout, [&](const RegressionDataset& tr) { return lstd_adapt(tr, meta, als).V; });
                    if (score < best) best = score, arg = {l1, l2};
                }
            const auto all_splits = meta_splits(data.source, l_new);
            const auto init = lstd_transfer_fit(data.source, k, als);
            const auto meta = lstd_meta_fit(all_splits, k, arg.first, arg.second, cfg.ep, init).hyper;
            out.nmse = mean_nmse(
                data.eval, [&](const RegressionDataset& tr) { return lstd_adapt(tr, meta, als).V; }, &out.samples);
            out.K = k;
            out.lambda1 = arg.first;
            out.lambda2 = arg.second;
            return out;
        }
    }
    return out;
}

struct DelayPoint {
    int taps;
    double delay_spread;
};

inline std::vector<DelayPoint> delay_points(const SweepConfig& cfg) {
    std::vector<DelayPoint> pts;
    if (!cfg.delay_spread_ratios.empty()) {
        for (double r : cfg.delay_spread_ratios) {
            const double ds = cfg.base_delay_spread * r;
            pts.push_back({taps_for_power_fraction(ds, cfg.symbol_period, cfg.rolloff, 0.9), ds});
        }
    } else {
        for (int w : cfg.taps) pts.push_back({w, cfg.base_delay_spread});
    }
    return pts;
}

struct Cell {
    int n_antennas;
    DelayPoint delay;
    int l_new;
    int n_frames;
    std::uint64_t seed;
};

/// Generates the frames of a cell. Frame f of a given (seed, antennas, taps)
/// is identical across L_new and F values, so sweeps over those axes are paired.
inline CellData make_cell_data(const SweepConfig& cfg, const Cell& cell) {
    ChannelSimConfig sim;
    sim.antennas = AntennaConfig::from_total_antennas(cell.n_antennas, cell.delay.taps);
    sim.env = cfg.env;
    sim.clusters = cfg.clusters;
    sim.delay_spread = cell.delay.delay_spread;
    sim.symbol_period = cfg.symbol_period;
    sim.rolloff = cfg.rolloff;
    sim.srs_rate = cfg.srs_rate;
    sim.angle_jitter = cfg.angle_jitter;
    sim.delay_jitter = cfg.delay_jitter;
    sim.power_jitter_db = cfg.power_jitter_db;
    sim.angle_spread = cfg.angle_spread;
    sim.shadowing_db = cfg.shadowing_db;
    sim.rays = cfg.rays;
    sim.ray_spread = cfg.ray_spread;
    sim.k_factor_db = cfg.k_factor_db;
    const NoiseModel noise{std::pow(10.0, cfg.snr_db / 10.0), cfg.pilots};
    const auto key = [&](FrameRole role, int idx) {
        return derive_seed({cell.seed, static_cast<std::uint64_t>(cfg.env), static_cast<std::uint64_t>(cell.n_antennas),
                            static_cast<std::uint64_t>(cell.delay.taps),
                            static_cast<std::uint64_t>(std::llround(cell.delay.delay_spread * 1e12)),
                            static_cast<std::uint64_t>(role), static_cast<std::uint64_t>(idx)});
    };

    if (cfg.shared_site) sim.site_seed = key(FrameRole::Site, 0);

    CellData data;
    const int src_slots = cfg.slots + cfg.window + cfg.lag - 1;
    const int n_hold = std::max(1, static_cast<int>(std::lround(cfg.holdout_fraction * cell.n_frames)));
    std::vector<CMat> pooled;
    for (int f = 0; f < cell.n_frames; ++f) {
        const auto clean = draw_frame(key(FrameRole::Source, f), sim, src_slots, f);
        const auto noisy = add_estimation_noise(clean, noise, key(FrameRole::SourceNoise, f));
        data.source.push_back(build_dataset(noisy.channels, cfg.window, cfg.lag, true));
        pooled.push_back(noisy.channels);
        if (f >= cell.n_frames - n_hold)
            data.holdout.push_back(prepare_eval_frame(clean, noisy, cfg.window, cfg.lag, cell.l_new, cfg.eval_samples));
    }
    Index cols = 0;
    for (const auto& p : pooled) cols += p.cols();
    data.pooled_channels.resize(pooled.front().rows(), cols);
    cols = 0;
    for (const auto& p : pooled) {
        data.pooled_channels.middleCols(cols, p.cols()) = p;
        cols += p.cols();
    }
    const int eval_slots = cell.l_new + cfg.eval_samples + cfg.window + cfg.lag - 1;
    for (int e = 0; e < cfg.eval_frames; ++e) {
        const auto clean = draw_frame(key(FrameRole::Eval, e), sim, eval_slots, e);
        const auto noisy = add_estimation_noise(clean, noise, key(FrameRole::EvalNoise, e));
        data.eval.push_back(prepare_eval_frame(clean, noisy, cfg.window, cfg.lag, cell.l_new, cfg.eval_samples));
    }
    return data;
}

}  // namespace detail

/// Runs every (antennas, taps, L_new, F, seed) cell for every learner. Cells
/// run on a thread pool; row order is fixed by the configuration, and a failing
/// learner is recorded in its row without aborting the sweep.
inline NmseReport run_sweep(const SweepConfig& cfg) {
    cfg.validate();
    std::vector<detail::Cell> cells;
    for (int ant : cfg.antennas)
        for (const auto& dp : detail::delay_points(cfg))
            for (int l : cfg.l_new)
                for (int f : cfg.n_frames)
                    for (auto seed : cfg.seeds) cells.push_back({ant, dp, l, f, seed});

    const std::size_t n_learners = cfg.learners.size();
    std::vector<NmseRecord> rows(cells.size() * n_learners);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t c = next++; c < cells.size(); c = next++) {
            const auto& cell = cells[c];
            std::optional<detail::CellData> data;
            std::string data_error;
            try {
                data = detail::make_cell_data(cfg, cell);
            } catch (const std::exception& e) {
                data_error = e.what();
            }
            for (std::size_t li = 0; li < n_learners; ++li) {
                NmseRecord& r = rows[c * n_learners + li];
                r.learner = cfg.learners[li];
                r.env = cfg.env;
                r.n_antennas = cell.n_antennas;
                r.taps = cell.delay.taps;
                r.l_new = cell.l_new;
                r.n_frames = cell.n_frames;
                r.seed = cell.seed;
                const auto t0 = std::chrono::steady_clock::now();
                try {
                    if (!data) throw std::runtime_error(data_error);
                    const auto o = detail::run_learner(cfg, *data, r.learner, cell.l_new);
                    r.nmse = o.nmse;
                    r.nmse_db = 10.0 * std::log10(o.nmse);
                    r.samples = o.samples;
                    r.K = o.K;
                    r.lambda1 = o.lambda1;
                    r.lambda2 = o.lambda2;
                } catch (const std::exception& e) {
                    r.nmse = r.nmse_db = std::numeric_limits<double>::quiet_NaN();
                    r.status = std::string("error: ") + e.what();
                }
                if (cfg.timing)
                    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            }
        }
    };
    unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(cells.size())));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    }
    return {std::move(rows)};
}

// ---------------------------------------------------------------------------
// Report CSV

inline const char* kReportHeader =
    "learner,env,n_antennas,taps,l_new,n_frames,seed,nmse,nmse_db,wall_ms,samples,K,lambda1,lambda2,status";

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

}  // namespace detail

inline void write_report(std::ostream& os, const NmseReport& report) {
    os << kReportHeader << '\n';
    os << std::setprecision(17);
    for (const auto& r : report.rows) {
        os << to_string(r.learner) << ',' << to_string(r.env) << ',' << r.n_antennas << ',' << r.taps << ','
           << r.l_new << ',' << r.n_frames << ',' << r.seed << ',' << r.nmse << ',' << r.nmse_db << ',' << r.wall_ms
           << ',' << r.samples << ',' << r.K << ',' << r.lambda1 << ',' << r.lambda2 << ','
           << detail::csv_escape(r.status) << '\n';
    }
}

inline void emit_report(const NmseReport& report, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("emit_report: cannot open '" + path + "' for writing");
    write_report(os, report);
    os.flush();
    if (!os) throw std::runtime_error("emit_report: write to '" + path + "' failed");
}

/// Parses a report written by write_report.
inline NmseReport read_report(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kReportHeader) throw std::runtime_error("read_report: unexpected header");
    NmseReport rep;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') cur += '"', ++i;
                else if (c == '"') quoted = false;
                else cur += c;
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                f.push_back(cur), cur.clear();
            } else {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != 15) throw std::runtime_error("read_report: expected 15 fields");
        NmseRecord r;
        r.learner = learner_from_string(f[0]);
        r.env = environment_from_string(f[1]);
        r.n_antennas = std::stoi(f[2]);
        r.taps = std::stoi(f[3]);
        r.l_new = std::stoi(f[4]);
        r.n_frames = std::stoi(f[5]);
        r.seed = std::stoull(f[6]);
        r.nmse = std::stod(f[7]);
        r.nmse_db = std::stod(f[8]);
        r.wall_ms = std::stod(f[9]);
        r.samples = std::stoll(f[10]);
        r.K = std::stoi(f[11]);
        r.lambda1 = std::stod(f[12]);
        r.lambda2 = std::stod(f[13]);
        r.status = f[14];
        rep.rows.push_back(std::move(r));
    }
    return rep;
}

}  // namespace lstdpred
