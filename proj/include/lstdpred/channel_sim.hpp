// SPDX-License-Identifier: Apache-2.0
//
// Parametric multi-antenna, frequency-selective channel generator.
//
// Each frame draws its long-term parameters (path powers, delays, Doppler
// shifts, arrival/departure angles) once; the slot-indexed channel vectors are
// then h_l = T * beta_l with T the S x D space-time signature matrix and
// beta_l[d] = exp(-j 2 pi gamma_d t_l). Entries of h_l are ordered
// tap-major: [h[1]; ...; h[W]], each h[w] being the N_R*N_T spatial vector
// with the receive index running fastest.
#pragma once

#include "lstdpred/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace lstdpred {

enum class Environment { Slow, Fast };

inline std::string to_string(Environment env) { return env == Environment::Slow ? "slow" : "fast"; }

inline Environment environment_from_string(const std::string& s) {
    if (s == "slow") return Environment::Slow;
    if (s == "fast") return Environment::Fast;
    throw std::invalid_argument("unknown environment '" + s + "' (expected slow|fast)");
}

/// Normalized Doppler range drawn per frame for each environment.
inline std::pair<double, double> doppler_range(Environment env) {
    return env == Environment::Slow ? std::pair{0.005, 0.05} : std::pair{0.1, 1.0};
}

struct AntennaConfig {
    int n_rx_hor = 1;
    int n_rx_ver = 1;
    int n_rx_pol = 1;
    int n_tx_hor = 1;
    int n_tx_ver = 1;
    int n_tx_pol = 1;
    int n_taps = 1;
    double carrier_wavelength = 0.0107;  // ~28 GHz

    int n_rx() const { return n_rx_hor * n_rx_ver * n_rx_pol; }
    int n_tx() const { return n_tx_hor * n_tx_ver * n_tx_pol; }
    int spatial_dim() const { return n_rx() * n_tx(); }
    int channel_dim() const { return spatial_dim() * n_taps; }

    void validate() const {
        detail::require(n_rx_hor > 0 && n_rx_ver > 0 && n_rx_pol > 0 && n_tx_hor > 0 &&
                            n_tx_ver > 0 && n_tx_pol > 0,
                        "AntennaConfig: antenna counts must be positive");
        detail::require(n_rx_pol <= 2 && n_tx_pol <= 2, "AntennaConfig: at most two polarizations");
        detail::require(n_taps > 0, "AntennaConfig: n_taps must be positive");
        detail::require(carrier_wavelength > 0.0, "AntennaConfig: wavelength must be positive");
    }

    /// The antenna layouts used for the antenna-count sweeps, keyed by the total
    /// number of antennas N_R * N_T.
    static AntennaConfig from_total_antennas(int total, int taps = 1) {
        AntennaConfig c;
        c.n_taps = taps;
        auto set = [&](int rh, int rv, int rp, int th, int tv, int tp) {
            c.n_rx_hor = rh, c.n_rx_ver = rv, c.n_rx_pol = rp;
            c.n_tx_hor = th, c.n_tx_ver = tv, c.n_tx_pol = tp;
        };
        switch (total) {
            case 1: set(1, 1, 1, 1, 1, 1); break;
            case 2: set(1, 1, 1, 2, 1, 1); break;
            case 4: set(1, 1, 1, 2, 2, 1); break;
            case 8: set(2, 1, 1, 2, 2, 1); break;
            case 16: set(2, 1, 1, 2, 2, 2); break;
            case 32: set(2, 1, 1, 4, 2, 2); break;
            case 64: set(2, 1, 1, 4, 4, 2); break;
            case 128: set(2, 2, 1, 4, 4, 2); break;
            default:
                throw std::invalid_argument("no antenna layout for " + std::to_string(total) +
                                            " total antennas");
        }
        return c;
    }
};

/// Knobs of the frame generator beyond the antenna layout.
struct ChannelSimConfig {
    AntennaConfig antennas;
    Environment env = Environment::Fast;
    int clusters = 1;              // D
    double delay_spread = 45e-9;   // exponential power-delay-profile constant, seconds
    double symbol_period = 50e-9;  // T, seconds
    double rolloff = 0.22;
    double srs_rate = 200.0;  // pilot (slot) rate, Hz
    // angle draw ranges, radians
    double azimuth_min = -std::numbers::pi / 3.0;
    double azimuth_max = std::numbers::pi / 3.0;
    double zenith_min = std::numbers::pi / 3.0;
    double zenith_max = 2.0 * std::numbers::pi / 3.0;
    // Frames of one site share a base geometry (delays, powers, angles) drawn
    // from site_seed and perturbed per frame; without a site seed every frame
    // draws an independent geometry.
    std::optional<std::uint64_t> site_seed;
    // Cluster angles scatter around a mean direction (drawn within the ranges
    // above) with this standard deviation; <= 0 draws every angle uniformly.
    double angle_spread = 0.25;
    double shadowing_db = 3.0;  // std of per-cluster lognormal power
    // Each cluster is the sum of `rays` paths sharing its delay and spatial
    // signature, with random phases and Doppler angles scattered by ray_spread
    // (radians) around the cluster direction.
    int rays = 1;
    double ray_spread = 0.3;
    // Line-of-sight: the first cluster becomes a single specular ray carrying
    // K/(K+1) of the power. Absent: all clusters scatter.
    std::optional<double> k_factor_db;
    double angle_jitter = 0.05;    // std of per-frame angle perturbation, radians
    double delay_jitter = 0.05;    // std of per-frame delay perturbation, in symbol periods
    double power_jitter_db = 1.0;  // std of per-frame path power perturbation

    void validate() const {
        antennas.validate();
        detail::require(clusters >= 1, "ChannelSimConfig: cluster count must be >= 1");
        detail::require(rays >= 1, "ChannelSimConfig: need at least one ray per cluster");
        detail::require(delay_spread > 0.0, "ChannelSimConfig: delay spread must be positive");
        detail::require(symbol_period > 0.0, "ChannelSimConfig: symbol period must be positive");
        detail::require(rolloff >= 0.0 && rolloff <= 1.0, "ChannelSimConfig: rolloff outside [0,1]");
        detail::require(srs_rate > 0.0, "ChannelSimConfig: srs rate must be positive");
        detail::require(angle_jitter >= 0.0 && delay_jitter >= 0.0 && power_jitter_db >= 0.0 && shadowing_db >= 0.0,
                        "ChannelSimConfig: negative jitter");
    }
};

/// Raised-cosine Nyquist pulse evaluated at `t / symbol_period`.
inline double pulse(double t_over_T, double rolloff) {
    detail::require(rolloff >= 0.0 && rolloff <= 1.0, "pulse: rolloff outside [0,1]");
    const double x = t_over_T;
    if (x == 0.0) return 1.0;
    const double pi = std::numbers::pi;
    const double sinc = std::sin(pi * x) / (pi * x);
    if (rolloff == 0.0) return sinc;
    const double denom = 1.0 - 4.0 * rolloff * rolloff * x * x;
    if (std::abs(denom) < 1e-10) return (pi / 4.0) * std::sin(pi / (2.0 * rolloff)) / (pi / (2.0 * rolloff));
    return sinc * std::cos(pi * rolloff * x) / denom;
}

/// Unit-magnitude-per-element steering vector of a uniform planar array with
/// half-wavelength spacing. Both polarization ports reuse the same phases.
inline CVec planar_steering(int n_hor, int n_ver, int n_pol, double zenith, double azimuth) {
    const double pi = std::numbers::pi;
    CVec a(n_hor * n_ver * n_pol);
    Index idx = 0;
    for (int p = 0; p < n_pol; ++p)
        for (int v = 0; v < n_ver; ++v)
            for (int h = 0; h < n_hor; ++h) {
                const double phase =
                    pi * (h * std::sin(zenith) * std::sin(azimuth) + v * std::cos(zenith));
                a(idx++) = std::polar(1.0, phase);
            }
    return a;
}

struct FrameLongTerm {
    int paths = 0;  // D
    std::vector<double> powers;
    std::vector<double> delays;
    std::vector<double> dopplers;
    std::vector<CVec> spatial_vectors;
    CMat signature;      // T_f, S x D
    CMat feature_basis;  // B_f, S x K_true, orthonormal columns
    double slot_period = 1.0 / 200.0;

    Index true_rank() const { return feature_basis.cols(); }
};

struct ChannelFrame {
    int frame_index = 0;
    std::uint64_t seed = 0;
    CMat channels;  // S x n_slots, column l = h_l
    FrameLongTerm long_term;
    double normalized_doppler = 0.0;
    AntennaConfig antennas;

    Index channel_dim() const { return channels.rows(); }
    Index slots() const { return channels.cols(); }
};

struct NoiseModel {
    double snr = 100.0;  // linear E_x / N_0
    int pilots_per_block = 100;

    double variance() const { return std::isinf(snr) ? 0.0 : 1.0 / (snr * pilots_per_block); }
};

inline constexpr double kRankTolerance = 1e-9;

namespace detail {

inline CMat orthonormal_span(const CMat& t) {
    if (t.cols() == 0) return CMat(t.rows(), 0);
    Eigen::JacobiSVD<CMat> svd(t, Eigen::ComputeThinU);
    const RVec& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return CMat(t.rows(), 0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > kRankTolerance * sv(0)) ++rank;
    return svd.matrixU().leftCols(rank);
}

}  // namespace detail

/// Builds T_f and B_f from explicit per-path parameters.
inline FrameLongTerm make_long_term(const ChannelSimConfig& cfg, std::vector<double> powers,
                                    std::vector<double> delays, std::vector<double> dopplers,
                                    std::vector<CVec> spatial_vectors) {
    cfg.validate();
    const auto d = powers.size();
    detail::require(d >= 1 && delays.size() == d && dopplers.size() == d && spatial_vectors.size() == d,
                    "make_long_term: per-path parameter lists must share one nonzero length");
    const int w_taps = cfg.antennas.n_taps;
    const int nrnt = cfg.antennas.spatial_dim();
    FrameLongTerm lt;
    lt.paths = static_cast<int>(d);
    lt.slot_period = 1.0 / cfg.srs_rate;
    lt.signature.resize(static_cast<Index>(w_taps) * nrnt, static_cast<Index>(d));
    for (std::size_t p = 0; p < d; ++p) {
        detail::require(powers[p] >= 0.0, "make_long_term: negative path power");
        detail::require(spatial_vectors[p].size() == nrnt, "make_long_term: spatial vector length");
        const double amp = std::sqrt(powers[p]);
        for (int w = 0; w < w_taps; ++w) {
            const double g = pulse((w * cfg.symbol_period - delays[p]) / cfg.symbol_period, cfg.rolloff);
            lt.signature.col(static_cast<Index>(p)).segment(static_cast<Index>(w) * nrnt, nrnt) =
                (amp * g) * spatial_vectors[p];
        }
    }
    lt.feature_basis = detail::orthonormal_span(lt.signature);
    lt.powers = std::move(powers);
    lt.delays = std::move(delays);
    lt.dopplers = std::move(dopplers);
    lt.spatial_vectors = std::move(spatial_vectors);
    return lt;
}

/// Evaluates the slot channels of a frame with fixed long-term parameters.
inline CMat synthesize_channels(const FrameLongTerm& lt, int n_slots) {
    detail::require(n_slots >= 1, "synthesize_channels: n_slots must be >= 1");
    const double two_pi = 2.0 * std::numbers::pi;
    CMat beta(lt.paths, n_slots);
    for (int l = 0; l < n_slots; ++l) {
        const double t = l * lt.slot_period;
        for (int p = 0; p < lt.paths; ++p) beta(p, l) = std::polar(1.0, -two_pi * lt.dopplers[p] * t);
    }
    return lt.signature * beta;
}

/// Draws one frame. All long-term randomness is a function of `seed` only.
inline ChannelFrame draw_frame(std::uint64_t seed, const ChannelSimConfig& cfg, int n_slots,
                               int frame_index = 0) {
    cfg.validate();
    detail::require(n_slots >= 1, "draw_frame: n_slots must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    auto draw = [&](double lo, double hi) { return lo + (hi - lo) * unif(rng); };

    const auto [rho_lo, rho_hi] = doppler_range(cfg.env);
    const double rho = draw(rho_lo, rho_hi);
    const int d = cfg.clusters;
    const auto& ant = cfg.antennas;
    const double max_delay = ant.n_taps * cfg.symbol_period;

    struct Path {
        double delay, log_power, zoa, aoa, zod, aod;
    };
    auto draw_geometry = [&](auto& gen) {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        auto in = [&](double lo, double hi) { return lo + (hi - lo) * u(gen); };
        const Path mean{0.0, 0.0, in(cfg.zenith_min, cfg.zenith_max), in(cfg.azimuth_min, cfg.azimuth_max),
                        in(cfg.zenith_min, cfg.zenith_max), in(cfg.azimuth_min, cfg.azimuth_max)};
        auto angle = [&](double centre, double lo, double hi) {
            return cfg.angle_spread > 0.0 ? centre + cfg.angle_spread * gauss(gen) : in(lo, hi);
        };
        std::vector<Path> paths(d);
        for (auto& p : paths) {
            p.delay = in(0.0, max_delay);
            p.log_power = -p.delay / cfg.delay_spread + cfg.shadowing_db * std::log(10.0) / 10.0 * gauss(gen);
            p.zoa = angle(mean.zoa, cfg.zenith_min, cfg.zenith_max);
            p.aoa = angle(mean.aoa, cfg.azimuth_min, cfg.azimuth_max);
            p.zod = angle(mean.zod, cfg.zenith_min, cfg.zenith_max);
            p.aod = angle(mean.aod, cfg.azimuth_min, cfg.azimuth_max);
        }
        return paths;
    };
    std::vector<Path> geometry;
    if (cfg.site_seed) {
        std::mt19937_64 site_rng(*cfg.site_seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        geometry = draw_geometry(site_rng);
        // jittered delays are reflected back into [0, W T): clamping would put
        // mass exactly on W T, a zero of the pulse for the last tap window
        const auto reflect = [&](double t) {
            t = std::fmod(std::abs(t), 2.0 * max_delay);
            return t > max_delay ? 2.0 * max_delay - t : t;
        };
        for (auto& p : geometry) {
            p.delay = reflect(p.delay + cfg.delay_jitter * cfg.symbol_period * gauss(rng));
            p.log_power += cfg.power_jitter_db * std::log(10.0) / 10.0 * gauss(rng);
            p.zoa += cfg.angle_jitter * gauss(rng);
            p.aoa += cfg.angle_jitter * gauss(rng);
            p.zod += cfg.angle_jitter * gauss(rng);
            p.aod += cfg.angle_jitter * gauss(rng);
        }
    } else {
        geometry = draw_geometry(rng);
    }
    // the transmitter moves along a random direction; each path sees the
    // projection of that motion on its departure azimuth
    const double heading = draw(0.0, 2.0 * std::numbers::pi);

    std::vector<double> delays, powers, dopplers;
    std::vector<CVec> spatial;
    double total = 0.0;
    for (int p = 0; p < d; ++p) {
        const auto& g = geometry[p];
        const CVec a_rx = planar_steering(ant.n_rx_hor, ant.n_rx_ver, ant.n_rx_pol, g.zoa, g.aoa);
        const CVec a_tx = planar_steering(ant.n_tx_hor, ant.n_tx_ver, ant.n_tx_pol, g.zod, g.aod);
        CVec a(a_rx.size() * a_tx.size());
        for (Index t = 0; t < a_tx.size(); ++t) a.segment(t * a_rx.size(), a_rx.size()) = a_tx(t) * a_rx;
        std::normal_distribution<double> gauss(0.0, 1.0);
        const bool specular = cfg.k_factor_db && p == 0;
        const int rays = specular ? 1 : cfg.rays;
        for (int r = 0; r < rays; ++r) {
            delays.push_back(specular ? 0.0 : g.delay);  // line of sight arrives first
            powers.push_back(specular ? 0.0 : std::exp(g.log_power) / rays);
            total += powers.back();
            const double spread = rays > 1 ? cfg.ray_spread * gauss(rng) : 0.0;
            dopplers.push_back(rho * cfg.srs_rate * std::cos(g.aod + spread - heading));
            // random initial phase of the ray, carried by its spatial vector
            spatial.push_back(std::polar(1.0, draw(0.0, 2.0 * std::numbers::pi)) * a);
        }
    }
    if (cfg.k_factor_db) {
        // scattered power sums to 1/(K+1), the specular ray (index 0) to K/(K+1)
        const double k = std::pow(10.0, *cfg.k_factor_db / 10.0);
        if (d == 1) {
            powers[0] = 1.0;
        } else {
            for (auto& w : powers) w /= total * (k + 1.0);
            powers[0] = k / (k + 1.0);
        }
        total = 1.0;
    }
    for (auto& w : powers) w /= total;

    ChannelFrame frame;
    frame.frame_index = frame_index;
    frame.seed = seed;
    frame.antennas = ant;
    frame.normalized_doppler = rho;
    frame.long_term = make_long_term(cfg, std::move(powers), std::move(delays), std::move(dopplers),
                                     std::move(spatial));
    frame.channels = synthesize_channels(frame.long_term, n_slots);
    return frame;
}

struct LstdGroundTruth {
    CMat basis;       // B_f
    CMat amplitudes;  // K x n_slots, column l = d_l
};

inline LstdGroundTruth lstd_ground_truth(const ChannelFrame& frame) {
    const auto& b = frame.long_term.feature_basis;
    if (b.cols() == 0) throw std::domain_error("lstd_ground_truth: signature matrix has rank 0");
    return {b, b.adjoint() * frame.channels};
}

/// Returns a copy whose channels carry i.i.d. circular Gaussian estimation
/// noise of per-entry variance 1 / (snr * pilots).
inline ChannelFrame add_estimation_noise(const ChannelFrame& frame, const NoiseModel& noise,
                                         std::uint64_t seed) {
    detail::require(noise.snr > 0.0 && !std::isnan(noise.snr), "add_estimation_noise: snr must be > 0");
    detail::require(noise.pilots_per_block >= 1, "add_estimation_noise: need at least one pilot");
    ChannelFrame out = frame;
    const double var = noise.variance();
    if (var == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
    for (Index c = 0; c < out.channels.cols(); ++c)
        for (Index r = 0; r < out.channels.rows(); ++r) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            out.channels(r, c) += cd(re, im);
        }
    return out;
}

/// Smallest tap count whose taps hold at least `fraction` of the average
/// channel power under an exponential power-delay profile.
inline int taps_for_power_fraction(double delay_spread, double symbol_period, double rolloff,
                                   double fraction = 0.9, int max_taps = 64) {
    detail::require(delay_spread > 0.0 && symbol_period > 0.0, "taps_for_power_fraction: bad input");
    // midpoint quadrature of E|g(wT - tau)|^2 over tau ~ Exp(delay_spread)
    const int n_quad = 4000;
    const double tau_max = 12.0 * delay_spread;
    std::vector<double> tap_power(max_taps + 8, 0.0);
    for (int q = 0; q < n_quad; ++q) {
        const double tau = (q + 0.5) * tau_max / n_quad;
        const double weight = std::exp(-tau / delay_spread);
        for (std::size_t w = 0; w < tap_power.size(); ++w) {
            const double g = pulse((w * symbol_period - tau) / symbol_period, rolloff);
            tap_power[w] += weight * g * g;
        }
    }
    double total = 0.0;
    for (double p : tap_power) total += p;
    double acc = 0.0;
    for (int w = 0; w < max_taps; ++w) {
        acc += tap_power[w];
        if (acc >= fraction * total) return w + 1;
    }
    return max_taps;
}

// ---------------------------------------------------------------------------
// CSV export/import: a '#' header with S, L, N_R, N_T, W and seed, followed
// by one line per slot holding interleaved re,im values of the S entries.

inline void write_frame_csv(std::ostream& os, const ChannelFrame& frame) {
    os << "# lstdpred-frame S=" << frame.channel_dim() << " L=" << frame.slots()
       << " N_R=" << frame.antennas.n_rx() << " N_T=" << frame.antennas.n_tx()
       << " W=" << frame.antennas.n_taps << " seed=" << frame.seed << '\n';
    os << std::setprecision(17);
    for (Index l = 0; l < frame.slots(); ++l) {
        for (Index s = 0; s < frame.channel_dim(); ++s) {
            if (s) os << ',';
            os << frame.channels(s, l).real() << ',' << frame.channels(s, l).imag();
        }
        os << '\n';
    }
}

struct FrameCsvHeader {
    Index channel_dim = 0;
    Index slots = 0;
    int n_rx = 0;
    int n_tx = 0;
    int taps = 0;
    std::uint64_t seed = 0;
};

/// Parses the export format back into an S x L channel matrix.
inline CMat read_frame_csv(std::istream& is, FrameCsvHeader* header_out = nullptr) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# lstdpred-frame", 0) != 0)
        throw std::runtime_error("read_frame_csv: missing header");
    FrameCsvHeader h;
    std::istringstream hs(line.substr(16));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "S") h.channel_dim = std::stoll(val);
        else if (key == "L") h.slots = std::stoll(val);
        else if (key == "N_R") h.n_rx = std::stoi(val);
        else if (key == "N_T") h.n_tx = std::stoi(val);
        else if (key == "W") h.taps = std::stoi(val);
        else if (key == "seed") h.seed = std::stoull(val);
    }
    if (h.channel_dim <= 0 || h.slots <= 0) throw std::runtime_error("read_frame_csv: bad header");
    CMat out(h.channel_dim, h.slots);
    for (Index l = 0; l < h.slots; ++l) {
        if (!std::getline(is, line)) throw std::runtime_error("read_frame_csv: truncated file");
        std::istringstream ls(line);
        for (Index s = 0; s < h.channel_dim; ++s) {
            std::string re, im;
            if (!std::getline(ls, re, ',') || !std::getline(ls, im, ','))
                throw std::runtime_error("read_frame_csv: short row");
            out(s, l) = cd(std::stod(re), std::stod(im));
        }
    }
    if (header_out) *header_out = h;
    return out;
}

}  // namespace lstdpred
