// SPDX-License-Identifier: Apache-2.0
#include "acceptance_checks.hpp"
#include "sweep_config.hpp"

#include "lstdpred/bench.hpp"
#include "lstdpred/channel_sim.hpp"
#include "lstdpred/rank_select.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace lstdpred;

namespace {

struct FrameOptions {
    std::string env = "fast";
    int antennas = 8;
    int taps = 2;
    int clusters = 19;
    std::uint64_t seed = 1;
    double snr_db = 20.0;
    int pilots = 100;

    void add_to(CLI::App& app) {
        app.add_option("--env", env, "slow or fast")->check(CLI::IsMember({"slow", "fast"}));
        app.add_option("--antennas", antennas, "total antennas (1, 2, 4, ..., 128)");
        app.add_option("--taps", taps, "delay taps W")->check(CLI::PositiveNumber);
        app.add_option("--clusters", clusters, "path count D")->check(CLI::PositiveNumber);
        app.add_option("--seed", seed, "RNG seed");
        app.add_option("--snr-db", snr_db, "estimation SNR in dB (inf for noiseless)");
        app.add_option("--pilots", pilots, "pilots averaged per estimate")->check(CLI::PositiveNumber);
    }

    ChannelSimConfig sim() const {
        ChannelSimConfig c;
        c.antennas = AntennaConfig::from_total_antennas(antennas, taps);
        c.env = environment_from_string(env);
        c.clusters = clusters;
        return c;
    }

    NoiseModel noise() const { return {std::pow(10.0, snr_db / 10.0), pilots}; }
};

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path == "-") return std::cout;
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    return file;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lstdpred: channel prediction with transfer- and meta-learned linear predictors"};
    app.require_subcommand(1);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "run an NMSE sweep and write a CSV report");
    std::string config_path, out_path = "-";
    std::optional<std::uint64_t> sweep_seed;
    bool desk = false, timing = false;
    int threads = -1;
    sweep->add_option("--config", config_path, "JSON sweep configuration (defaults apply to missing keys)");
    sweep->add_option("--seed", sweep_seed, "single master seed, replacing the configured seed list");
    sweep->add_option("--out", out_path, "CSV report path ('-' for stdout)");
    sweep->add_flag("--desk-scale", desk, "F=100 previous frames, 50 evaluation frames x 20 samples");
    sweep->add_flag("--timing", timing, "record wall time per row (otherwise 0, keeping reports byte-stable)");
    sweep->add_option("--threads", threads, "worker threads (0: all cores)");

    // gen
    auto* gen = app.add_subcommand("gen", "draw one frame and write its channels as CSV");
    FrameOptions gen_opts;
    int gen_slots = 107;
    bool gen_noisy = false;
    std::string gen_out = "-";
    gen_opts.add_to(*gen);
    gen->add_option("--slots", gen_slots, "slots to synthesize")->check(CLI::PositiveNumber);
    gen->add_flag("--noisy", gen_noisy, "add pilot-averaged estimation noise");
    gen->add_option("--out", gen_out, "output path ('-' for stdout)");

    // rank
    auto* rank = app.add_subcommand("rank", "estimate the feature count K from simulated frames");
    FrameOptions rank_opts;
    int rank_frames = 20, rank_slots = 100, rank_l_new = 1, k_max = 16;
    double rank_l1 = 1.0, rank_l2 = 1.0;
    std::string method = "both", rank_out = "-";
    rank_opts.add_to(*rank);
    rank->add_option("--frames", rank_frames, "frames, split evenly into meta-training and meta-validation")
        ->check(CLI::Range(2, 100000));
    rank->add_option("--slots", rank_slots, "pairs per frame L")->check(CLI::PositiveNumber);
    rank->add_option("--l-new", rank_l_new, "training pairs per frame for meta-validation")
        ->check(CLI::PositiveNumber);
    rank->add_option("--k-max", k_max, "largest K considered")->check(CLI::PositiveNumber);
    rank->add_option("--lambda1", rank_l1, "long-term regularization");
    rank->add_option("--lambda2", rank_l2, "short-term regularization");
    rank->add_option("--method", method, "aic, meta or both")->check(CLI::IsMember({"aic", "meta", "both"}));
    rank->add_option("--out", rank_out, "CSV of the score curves ('-' for stdout)");

    // selftest
    auto* selftest = app.add_subcommand("selftest", "run the acceptance checks; nonzero exit on any failure");
    std::vector<int> only;
    selftest->add_option("--only", only, "criterion numbers to run (default: all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sweep) {
            SweepConfig cfg = config_path.empty() ? SweepConfig{} : cli::load_sweep_config(config_path);
            if (sweep_seed) cfg.seeds = {*sweep_seed};
            if (desk) cfg.apply_desk_scale();
            if (timing) cfg.timing = true;
            if (threads >= 0) cfg.threads = threads;
            const auto report = run_sweep(cfg);
            if (out_path == "-") write_report(std::cout, report);
            else emit_report(report, out_path);
            int failed = 0;
            for (const auto& r : report.rows)
                if (r.status != "ok") ++failed;
            if (failed) std::cerr << failed << " row(s) failed; see the status column\n";
            return 0;
        }
        if (*gen) {
            const auto sim = gen_opts.sim();
            auto frame = draw_frame(gen_opts.seed, sim, gen_slots);
            if (gen_noisy) frame = add_estimation_noise(frame, gen_opts.noise(), gen_opts.seed + 1);
            std::ofstream file;
            write_frame_csv(open_out(gen_out, file), frame);
            return 0;
        }
        if (*rank) {
            const auto sim = rank_opts.sim();
            const int window = 5, lag = 3;
            std::vector<SplitDataset> splits;
            std::vector<CMat> chans;
            for (int f = 0; f < rank_frames; ++f) {
                const std::uint64_t seed = lstdpred::detail::derive_seed({rank_opts.seed, static_cast<std::uint64_t>(f)});
                const auto clean = draw_frame(seed, sim, rank_slots + window + lag - 1, f);
                const auto noisy = add_estimation_noise(clean, rank_opts.noise(), seed + 1);
                chans.push_back(noisy.channels);
                splits.push_back(split(build_dataset(noisy.channels, window, lag, true), rank_l_new));
            }
            std::ofstream file;
            std::ostream& os = open_out(rank_out, file);
            os << "method,k,score\n" << std::setprecision(17);
            if (method != "meta") {
                CMat pooled(chans.front().rows(), static_cast<Index>(chans.size()) * chans.front().cols());
                for (std::size_t i = 0; i < chans.size(); ++i)
                    pooled.middleCols(static_cast<Index>(i) * chans[i].cols(), chans[i].cols()) = chans[i];
                const auto est = aic_rank(pooled);
                for (std::size_t k = 0; k < est.curve.size(); ++k) os << "aic," << k + 1 << ',' << est.curve[k] << '\n';
                std::cerr << "aic: K = " << est.k_hat << '\n';
            }
            if (method != "aic") {
                const std::size_t half = splits.size() / 2;
                std::vector<SplitDataset> tr(splits.begin(), splits.begin() + half), val(splits.begin() + half, splits.end());
                const auto est = meta_validation_rank(tr, val, rank_l1, rank_l2, EpConfig{}, k_max);
                for (std::size_t k = 0; k < est.curve.size(); ++k) os << "meta," << k + 1 << ',' << est.curve[k] << '\n';
                std::cerr << "meta-validation: K = " << est.k_hat << '\n';
            }
            return 0;
        }
        if (*selftest) {
            const auto results = acceptance::run_all(only, std::cout);
            for (const auto& r : results)
                if (!r.passed) return 1;
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
