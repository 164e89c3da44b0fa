// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lstdpred/linalg.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace lstdpred {

/// Windowed regression pairs. Row i of X is vec(H_l)^H with
/// H_l = [h_l, h_{l-1}, ..., h_{l-N+1}] (newest first); row i of Y is
/// h_{l+lag}^H. A linear predictor V (S*N x S) then predicts V^H vec(H_l) and
/// the training loss is ||X V - Y||_F^2.
struct RegressionDataset {
    CMat X;
    CMat Y;
    int window = 1;
    int lag = 1;
    Index channel_dim = 1;

    Index size() const { return X.rows(); }

    /// Reconstructs the S x N history matrix of row i.
    CMat history(Index i) const {
        CMat h(channel_dim, window);
        for (int n = 0; n < window; ++n)
            h.col(n) = X.row(i).segment(static_cast<Index>(n) * channel_dim, channel_dim).adjoint();
        return h;
    }

    CVec target(Index i) const { return Y.row(i).adjoint(); }

    RegressionDataset rows(Index start, Index count) const {
        detail::require(start >= 0 && count >= 0 && start + count <= size(), "RegressionDataset::rows out of range");
        RegressionDataset out{X.middleRows(start, count), Y.middleRows(start, count), window, lag, channel_dim};
        return out;
    }
};

struct SplitDataset {
    RegressionDataset train;
    RegressionDataset test;
};

/// Builds (x_i, y_i) pairs from the S x T slot matrix `channels`. With
/// `normalize`, each pair is divided by the norm of its target channel.
inline RegressionDataset build_dataset(const CMat& channels, int window, int lag, bool normalize) {
    detail::require(window >= 1, "build_dataset: window must be >= 1");
    detail::require(lag >= 1, "build_dataset: lag must be >= 1");
    const Index s = channels.rows();
    const Index t = channels.cols();
    detail::require(t >= window + lag, "build_dataset: too few slots for window + lag");
    const Index l = t - window - lag + 1;
    RegressionDataset ds;
    ds.window = window;
    ds.lag = lag;
    ds.channel_dim = s;
    ds.X.resize(l, s * window);
    ds.Y.resize(l, s);
    for (Index i = 0; i < l; ++i) {
        const Index newest = i + window - 1;  // 0-based slot of h_l
        double scale = 1.0;
        if (normalize) {
            const double nrm = channels.col(newest + lag).norm();
            if (!(nrm > 0.0)) throw std::domain_error("build_dataset: zero-norm target channel");
            scale = 1.0 / nrm;
        }
        for (int n = 0; n < window; ++n)
            ds.X.row(i).segment(static_cast<Index>(n) * s, s) = scale * channels.col(newest - n).adjoint();
        ds.Y.row(i) = scale * channels.col(newest + lag).adjoint();
    }
    return ds;
}

inline SplitDataset split(const RegressionDataset& ds, Index l_tr) {
    detail::require(l_tr >= 1 && l_tr < ds.size(), "split: l_tr must satisfy 1 <= l_tr < L");
    return {ds.rows(0, l_tr), ds.rows(l_tr, ds.size() - l_tr)};
}

/// Row-stacks datasets sharing window, lag and channel dimension.
inline RegressionDataset stack(const std::vector<RegressionDataset>& parts) {
    detail::require(!parts.empty(), "stack: no datasets");
    Index rows = 0;
    for (const auto& p : parts) {
        detail::require(p.channel_dim == parts[0].channel_dim && p.window == parts[0].window,
                        "stack: incompatible datasets");
        rows += p.size();
    }
    RegressionDataset out;
    out.window = parts[0].window;
    out.lag = parts[0].lag;
    out.channel_dim = parts[0].channel_dim;
    out.X.resize(rows, parts[0].X.cols());
    out.Y.resize(rows, parts[0].Y.cols());
    Index at = 0;
    for (const auto& p : parts) {
        out.X.middleRows(at, p.size()) = p.X;
        out.Y.middleRows(at, p.size()) = p.Y;
        at += p.size();
    }
    return out;
}

inline double nmse(const CVec& h_hat, const CVec& h_true) {
    detail::require(h_hat.size() == h_true.size(), "nmse: length mismatch");
    const double denom = h_true.squaredNorm();
    if (!(denom > 0.0)) throw std::domain_error("nmse: zero-norm reference channel");
    return (h_hat - h_true).squaredNorm() / denom;
}

// CSV: '#' header with N, lag, S, L then one line per pair holding the re,im
// values of the X row followed by those of the Y row.

inline void write_dataset_csv(std::ostream& os, const RegressionDataset& ds) {
    os << "# lstdpred-dataset N=" << ds.window << " lag=" << ds.lag << " S=" << ds.channel_dim
       << " L=" << ds.size() << '\n';
    os << std::setprecision(17);
    for (Index i = 0; i < ds.size(); ++i) {
        bool first = true;
        auto put = [&](cd z) {
            if (!first) os << ',';
            first = false;
            os << z.real() << ',' << z.imag();
        };
        for (Index c = 0; c < ds.X.cols(); ++c) put(ds.X(i, c));
        for (Index c = 0; c < ds.Y.cols(); ++c) put(ds.Y(i, c));
        os << '\n';
    }
}

inline RegressionDataset read_dataset_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# lstdpred-dataset", 0) != 0)
        throw std::runtime_error("read_dataset_csv: missing header");
    RegressionDataset ds;
    Index rows = -1;
    std::istringstream hs(line.substr(18));
    std::string tok;
    while (hs >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "N") ds.window = std::stoi(val);
        else if (key == "lag") ds.lag = std::stoi(val);
        else if (key == "S") ds.channel_dim = std::stoll(val);
        else if (key == "L") rows = std::stoll(val);
    }
    if (rows < 0 || ds.channel_dim < 1 || ds.window < 1) throw std::runtime_error("read_dataset_csv: bad header");
    const Index xc = ds.channel_dim * ds.window;
    ds.X.resize(rows, xc);
    ds.Y.resize(rows, ds.channel_dim);
    for (Index i = 0; i < rows; ++i) {
        if (!std::getline(is, line)) throw std::runtime_error("read_dataset_csv: truncated file");
        std::istringstream ls(line);
        auto next = [&]() {
            std::string re, im;
            if (!std::getline(ls, re, ',') || !std::getline(ls, im, ','))
                throw std::runtime_error("read_dataset_csv: short row");
            return cd(std::stod(re), std::stod(im));
        };
        for (Index c = 0; c < xc; ++c) ds.X(i, c) = next();
        for (Index c = 0; c < ds.channel_dim; ++c) ds.Y(i, c) = next();
    }
    return ds;
}

/// Re/im CSV of a plain complex matrix (used for predictors and biases).
inline void write_matrix_csv(std::ostream& os, const CMat& m, const std::string& header) {
    os << "# " << header << " rows=" << m.rows() << " cols=" << m.cols() << '\n';
    os << std::setprecision(17);
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) os << ',';
            os << m(r, c).real() << ',' << m(r, c).imag();
        }
        os << '\n';
    }
}

inline CMat read_matrix_csv(std::istream& is, std::string* header_out = nullptr) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw std::runtime_error("read_matrix_csv: missing header");
    Index rows = -1, cols = -1;
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
        if (tok.rfind("rows=", 0) == 0) rows = std::stoll(tok.substr(5));
        else if (tok.rfind("cols=", 0) == 0) cols = std::stoll(tok.substr(5));
    }
    if (rows < 0 || cols < 0) throw std::runtime_error("read_matrix_csv: bad header");
    if (header_out) *header_out = line.substr(2);
    CMat m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        if (!std::getline(is, line)) throw std::runtime_error("read_matrix_csv: truncated file");
        std::istringstream ls(line);
        for (Index c = 0; c < cols; ++c) {
            std::string re, im;
            if (!std::getline(ls, re, ',') || !std::getline(ls, im, ','))
                throw std::runtime_error("read_matrix_csv: short row");
            m(r, c) = cd(std::stod(re), std::stod(im));
        }
    }
    return m;
}

}  // namespace lstdpred
