// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lstdpred/dataset.hpp"
#include "lstdpred/linalg.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace testutil {

using lstdpred::cd;
using lstdpred::CMat;
using lstdpred::CVec;
using lstdpred::Index;

inline CMat random_cmat(std::mt19937_64& rng, Index rows, Index cols) {
    std::normal_distribution<double> g(0.0, 1.0);
    CMat m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = cd(g(rng), g(rng));
    return m;
}

inline CVec random_cvec(std::mt19937_64& rng, Index n) { return random_cmat(rng, n, 1).col(0); }

inline CVec random_unit(std::mt19937_64& rng, Index n) { return random_cvec(rng, n).normalized(); }

inline double rel_err(const CMat& a, const CMat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

/// Dataset with independent Gaussian rows, for algebraic tests that do not
/// need channel structure.
inline lstdpred::RegressionDataset random_dataset(std::mt19937_64& rng, Index rows, Index s, int n) {
    lstdpred::RegressionDataset ds;
    ds.window = n;
    ds.lag = 1;
    ds.channel_dim = s;
    ds.X = random_cmat(rng, rows, s * n);
    ds.Y = random_cmat(rng, rows, s);
    return ds;
}

/// Slots h_l = sum_k b_k d_{k,l} with d_{k,l} = c_k z_k^l: K orthonormal
/// features whose amplitudes are damped complex exponentials, hence exactly
/// predictable by an N >= 1 tap filter per feature.
/// Feature amplitudes scale[k] * c_k z_k^l on a given orthonormal basis.
inline CMat lstd_channel_on(std::mt19937_64& rng, const CMat& basis, int n_slots,
                            const std::vector<double>& scale = {}) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    CMat h = CMat::Zero(basis.rows(), n_slots);
    for (Index f = 0; f < basis.cols(); ++f) {
        const cd z = std::polar(0.98 + 0.02 * u(rng), 2.0 * 3.141592653589793 * u(rng));
        const double mag = scale.empty() ? 1.0 : scale[f];
        cd amp = std::polar(mag * (1.0 + u(rng)), 2.0 * 3.141592653589793 * u(rng));
        for (int l = 0; l < n_slots; ++l) {
            h.col(l) += basis.col(f) * amp;
            amp *= z;
        }
    }
    return h;
}

inline CMat random_basis(std::mt19937_64& rng, Index s, int k) {
    const CMat g = random_cmat(rng, s, k);
    return Eigen::HouseholderQR<CMat>(g).householderQ() * CMat::Identity(s, k);
}

inline CMat lstd_channel(std::mt19937_64& rng, Index s, int k, int n_slots, CMat* basis_out = nullptr,
                         const std::vector<double>& scale = {}) {
    const CMat basis = random_basis(rng, s, k);
    if (basis_out) *basis_out = basis;
    return lstd_channel_on(rng, basis, n_slots, scale);
}

}  // namespace testutil
