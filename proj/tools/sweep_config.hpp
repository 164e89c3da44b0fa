// SPDX-License-Identifier: Apache-2.0
//
// JSON form of SweepConfig. Every key is optional; unknown keys are rejected so
// that typos do not silently fall back to defaults. Schema: see README.
#pragma once

#include "lstdpred/bench.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace lstdpred::cli {

using nlohmann::json;

namespace detail {

inline void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw std::invalid_argument("config: unknown key '" + where + it.key() + "'");
}

template <typename T>
void read(const json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

inline SweepConfig sweep_config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    detail::reject_unknown(j,
                           {"env", "antennas", "taps", "delay_spread_ratios", "base_delay_spread", "l_new",
                            "n_frames", "learners", "window", "lag", "slots", "eval_frames", "eval_samples", "snr_db",
                            "pilots", "seeds", "lambda_grid", "holdout_fraction", "rank", "clusters", "symbol_period",
                            "rolloff", "srs_rate", "shared_site", "angle_jitter", "delay_jitter",
                            "power_jitter_db", "angle_spread", "shadowing_db", "rays", "ray_spread", "k_factor_db", "ep",
                            "threads"},
                           "");
    SweepConfig c;
    if (j.contains("env")) c.env = environment_from_string(j.at("env").get<std::string>());
    detail::read(j, "antennas", c.antennas);
    detail::read(j, "taps", c.taps);
    detail::read(j, "delay_spread_ratios", c.delay_spread_ratios);
    detail::read(j, "base_delay_spread", c.base_delay_spread);
    detail::read(j, "l_new", c.l_new);
    detail::read(j, "n_frames", c.n_frames);
    if (j.contains("learners")) {
        c.learners.clear();
        for (const auto& name : j.at("learners")) c.learners.push_back(learner_from_string(name.get<std::string>()));
    }
    detail::read(j, "window", c.window);
    detail::read(j, "lag", c.lag);
    detail::read(j, "slots", c.slots);
    detail::read(j, "eval_frames", c.eval_frames);
    detail::read(j, "eval_samples", c.eval_samples);
    detail::read(j, "snr_db", c.snr_db);
    detail::read(j, "pilots", c.pilots);
    detail::read(j, "seeds", c.seeds);
    detail::read(j, "lambda_grid", c.lambda_grid);
    detail::read(j, "holdout_fraction", c.holdout_fraction);
    if (j.contains("rank")) {
        const auto& r = j.at("rank");
        detail::reject_unknown(r, {"mode", "K", "k_max"}, "rank.");
        if (r.contains("mode")) {
            const auto mode = r.at("mode").get<std::string>();
            if (mode == "fixed") c.rank_mode = RankMode::Fixed;
            else if (mode == "auto") c.rank_mode = RankMode::Auto;
            else throw std::invalid_argument("config: rank.mode must be 'fixed' or 'auto'");
        }
        detail::read(r, "K", c.K);
        detail::read(r, "k_max", c.k_max);
    }
    detail::read(j, "clusters", c.clusters);
    detail::read(j, "symbol_period", c.symbol_period);
    detail::read(j, "rolloff", c.rolloff);
    detail::read(j, "srs_rate", c.srs_rate);
    detail::read(j, "shared_site", c.shared_site);
    detail::read(j, "angle_jitter", c.angle_jitter);
    detail::read(j, "delay_jitter", c.delay_jitter);
    detail::read(j, "power_jitter_db", c.power_jitter_db);
    detail::read(j, "angle_spread", c.angle_spread);
    detail::read(j, "shadowing_db", c.shadowing_db);
    detail::read(j, "rays", c.rays);
    detail::read(j, "ray_spread", c.ray_spread);
    if (j.contains("k_factor_db") && !j.at("k_factor_db").is_null()) c.k_factor_db = j.at("k_factor_db").get<double>();
    if (j.contains("ep")) {
        const auto& e = j.at("ep");
        detail::reject_unknown(e, {"alpha", "step", "outer_iters", "als_tol", "als_max_iters"}, "ep.");
        detail::read(e, "alpha", c.ep.alpha);
        detail::read(e, "step", c.ep.step);
        detail::read(e, "outer_iters", c.ep.outer_iters);
        detail::read(e, "als_tol", c.ep.als.tol);
        detail::read(e, "als_max_iters", c.ep.als.max_iters);
    }
    detail::read(j, "threads", c.threads);
    return c;
}

inline SweepConfig load_sweep_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(is, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("config '" + path + "': " + e.what());
    }
    return sweep_config_from_json(j);
}

}  // namespace lstdpred::cli
