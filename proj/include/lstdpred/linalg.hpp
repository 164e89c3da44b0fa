// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace lstdpred {

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Index = Eigen::Index;

/// Solution of a linear system together with a flag telling whether the
/// Cholesky route failed and a minimum-norm pseudo-inverse was used instead.
struct SolveResult {
    CMat x;
    bool degraded = false;
};

namespace detail {

inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

inline bool all_finite(const CMat& m) { return m.allFinite(); }

}  // namespace detail

/// Solves `gram * x = rhs` for a Hermitian positive semi-definite `gram`.
/// Ill-conditioned or singular systems fall back to the minimum-norm solution.
inline SolveResult solve_hermitian(const CMat& gram, const CMat& rhs) {
    detail::require(gram.rows() == gram.cols() && gram.rows() == rhs.rows(),
                    "solve_hermitian: dimension mismatch");
    SolveResult out;
    if (gram.rows() == 0) {
        out.x = CMat::Zero(0, rhs.cols());
        return out;
    }
    Eigen::LLT<CMat> llt(gram);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-13) {
        out.x = llt.solve(rhs);
        if (out.x.allFinite()) return out;
    }
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(gram);
    cod.setThreshold(1e-12);
    out.x = cod.solve(rhs);
    out.degraded = true;
    return out;
}

/// Ordinary least squares `argmin ||A x - B||_F`; rank-deficient problems
/// return the minimum-norm minimizer and set `degraded`.
inline SolveResult least_squares(const CMat& a, const CMat& b) {
    detail::require(a.rows() == b.rows(), "least_squares: row mismatch");
    SolveResult out;
    const CMat gram = a.adjoint() * a;
    Eigen::LLT<CMat> llt(gram);
    if (a.rows() >= a.cols() && llt.info() == Eigen::Success && llt.rcond() > 1e-12) {
        out.x = llt.solve(a.adjoint() * b);
        if (out.x.allFinite()) return out;
    }
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(a);
    cod.setThreshold(1e-10);
    out.x = cod.solve(b);
    out.degraded = true;
    return out;
}

/// Rotates `b` so that its largest-magnitude entry is real and nonnegative.
/// `b` and `b * exp(j theta)` map to the same representative.
inline CVec canonicalize_phase(const CVec& b) {
    if (b.size() == 0) return b;
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < b.size(); ++i) {
        // ties resolved toward the lowest index; 1e-12 slack keeps the choice
        // stable under a global phase rotation
        const double m = std::abs(b(i));
        if (m > best * (1.0 + 1e-12)) {
            best = m;
            arg = i;
        }
    }
    if (best == 0.0) return b;
    const cd phase = std::conj(b(arg)) / best;
    CVec out = b * phase;
    out(arg) = cd(out(arg).real(), 0.0);
    return out;
}

}  // namespace lstdpred
