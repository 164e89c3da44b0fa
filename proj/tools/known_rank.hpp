// SPDX-License-Identifier: Apache-2.0
//
// Synthetic frames with a known number of LSTD features: k orthonormal
// features shared by every frame, each with its own slot-to-slot rotation
// z_k (also shared), per-frame random amplitude phases, and white estimation
// noise. Used by the rank-recovery checks.
#pragma once

#include "lstdpred/dataset.hpp"

#include <numbers>
#include <random>
#include <vector>

namespace lstdpred::synth {

struct KnownRankModel {
    CMat basis;              // S x k, orthonormal
    std::vector<cd> z;       // per-feature rotation per slot
    std::vector<double> amp; // per-feature amplitude
    double noise_std = 0.2;  // per real/imag component

    static KnownRankModel draw(std::mt19937_64& rng, Index s, int k, double noise_std = 0.2) {
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        CMat m(s, k);
        for (Index j = 0; j < k; ++j)
            for (Index i = 0; i < s; ++i) m(i, j) = cd(g(rng), g(rng));
        KnownRankModel out;
        out.basis = Eigen::HouseholderQR<CMat>(m).householderQ() * CMat::Identity(s, k);
        for (int i = 0; i < k; ++i) {
            out.z.push_back(std::polar(1.0 - 0.01 * u(rng), 2.0 * std::numbers::pi * u(rng)));
            out.amp.push_back(1.0 - 0.1 * i);
        }
        out.noise_std = noise_std;
        return out;
    }

    int rank() const { return static_cast<int>(basis.cols()); }

    /// Noisy S x n_slots channel matrix of one frame.
    CMat frame(std::mt19937_64& rng, int n_slots) const {
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> g(0.0, noise_std);
        CMat h = CMat::Zero(basis.rows(), n_slots);
        for (int i = 0; i < rank(); ++i) {
            cd a = std::polar(amp[i], 2.0 * std::numbers::pi * u(rng));
            for (int l = 0; l < n_slots; ++l) {
                h.col(l) += basis.col(i) * a;
                a *= z[i];
            }
        }
        for (Index i = 0; i < h.size(); ++i) h.data()[i] += cd(g(rng), g(rng));
        return h;
    }

    std::vector<SplitDataset> frames(std::mt19937_64& rng, int count, int n_slots, int window, Index l_tr) const {
        std::vector<SplitDataset> out;
        for (int f = 0; f < count; ++f) out.push_back(split(build_dataset(frame(rng, n_slots), window, 1, true), l_tr));
        return out;
    }
};

}  // namespace lstdpred::synth
