// SPDX-License-Identifier: Apache-2.0
//
// chanpred - channel predictors for time-variant flat-fading channels
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>

#include "chanpred/errors.hpp"

namespace chanpred {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// ------------------------------------------------------------------------
// Special functions
// ------------------------------------------------------------------------

namespace detail {

// Below this argument the Taylor series (in extended precision) is used; above it the
// Hankel expansion's smallest term is < 1e-15.
inline constexpr double kBesselSeriesLimit = 17.0;

inline double bessel_j0_series(double x) {
    const long double q = -static_cast<long double>(x) * x / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::fabs(term) < 1e-24L) break;
    }
    return static_cast<double>(sum);
}

inline double bessel_j0_asymptotic(double x) {
    // J0(x) = sqrt(2/(pi x)) * (P cos(x - pi/4) - Q sin(x - pi/4))
    // t_k = a_k(0) / x^k with t_k / t_{k-1} = -(2k-1)^2 / (8 k x)
    const long double lx = x;
    long double p = 1.0L;
    long double q = 0.0L;
    long double term = 1.0L;
    long double prev = 1.0L;
    for (int k = 1; k < 200; ++k) {
        const long double odd = 2.0L * k - 1.0L;
        term *= -(odd * odd) / (8.0L * k * lx);
        if (std::fabs(term) > std::fabs(prev)) break;  // series started to diverge
        // P collects even k with alternating sign, Q odd k with alternating sign.
        switch (k % 4) {
        case 0: p += term; break;
        case 1: q += term; break;
        case 2: p -= term; break;
        case 3: q -= term; break;
        }
        prev = term;
        if (std::fabs(term) < 1e-22L) break;
    }
    const long double phase = lx - std::numbers::pi_v<long double> / 4.0L;
    const long double scale = std::sqrt(2.0L / (std::numbers::pi_v<long double> * lx));
    return static_cast<double>(scale * (p * std::cos(phase) - q * std::sin(phase)));
}

}  // namespace detail

/// Zeroth-order Bessel function of the first kind.
inline double bessel_j0(double x) {
    if (!std::isfinite(x)) throw DomainError("bessel_j0: non-finite argument");
    x = std::fabs(x);
    return x < detail::kBesselSeriesLimit ? detail::bessel_j0_series(x)
                                          : detail::bessel_j0_asymptotic(x);
}

// ------------------------------------------------------------------------
// Matrix helpers
// ------------------------------------------------------------------------

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
    return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

/// True when max|A - A^H| <= rel_tol * max|A|.
inline bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12) {
    if (a.rows() != a.cols()) return false;
    return max_abs(a - a.adjoint()) <= rel_tol * max_abs(a);
}

inline CMatrix hermitian_part(const CMatrix& a) { return (a + a.adjoint()) * 0.5; }

/// DFT matrix with entries exp(-j 2 pi k m / K), k < K, m < M.
/// K must be M (square DFT) or 2M (first M columns of the 2M-point DFT). With
/// `normalized` every entry is scaled by 1/sqrt(K), so the columns are orthonormal.
inline CMatrix dft_matrix(std::size_t num_rows, std::size_t num_cols, bool normalized = true) {
    if (num_cols == 0 || (num_rows != num_cols && num_rows != 2 * num_cols))
        throw DimensionError("dft_matrix: row count must be M or 2M");
    const auto k_total = static_cast<Eigen::Index>(num_rows);
    const auto m_total = static_cast<Eigen::Index>(num_cols);
    const double scale = normalized ? 1.0 / std::sqrt(static_cast<double>(num_rows)) : 1.0;
    CMatrix q(k_total, m_total);
    for (Eigen::Index k = 0; k < k_total; ++k) {
        for (Eigen::Index m = 0; m < m_total; ++m) {
            // reduce k*m mod K first so the angle stays in [0, 2 pi)
            const auto r = static_cast<double>((k * m) % k_total);
            const double angle = -2.0 * std::numbers::pi * r / static_cast<double>(k_total);
            q(k, m) = std::polar(scale, angle);
        }
    }
    return q;
}

/// Solves A X = B for Hermitian positive-definite A through a Cholesky factorization A = L L^H.
inline CMatrix hermitian_solve(const CMatrix& a, const CMatrix& b) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw DimensionError("hermitian_solve: matrix is not square");
    if (b.rows() != n) throw DimensionError("hermitian_solve: right-hand side row count mismatch");
    if (!is_hermitian(a, 1e-10)) throw DomainError("hermitian_solve: matrix is not Hermitian");

    CMatrix l = CMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double diag = a(j, j).real();
        for (Eigen::Index k = 0; k < j; ++k) diag -= std::norm(l(j, k));
        if (!(diag > 0.0) || !std::isfinite(diag))
            throw SingularMatrixError("hermitian_solve: matrix not positive definite",
                                      static_cast<std::size_t>(j));
        const double ljj = std::sqrt(diag);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            cplx s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
            l(i, j) = s / ljj;
        }
    }
    const CMatrix z = l.triangularView<Eigen::Lower>().solve(b);
    return l.adjoint().triangularView<Eigen::Upper>().solve(z);
}

/// log det(A) from an LU factorization with partial pivoting. Real part is log|det A|,
/// imaginary part the argument of det A (modulo 2 pi).
inline cplx logdet(const CMatrix& a) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw DimensionError("logdet: matrix is not square");
    if (n == 0) return {0.0, 0.0};
    const Eigen::PartialPivLU<CMatrix> lu(a);
    const CMatrix& packed = lu.matrixLU();
    const double tiny = std::numeric_limits<double>::epsilon() * static_cast<double>(n) *
                        std::max(max_abs(a), std::numeric_limits<double>::min());
    cplx sum{0.0, 0.0};
    for (Eigen::Index i = 0; i < n; ++i) {
        const cplx u = packed(i, i);
        if (!(std::abs(u) > tiny))
            throw SingularMatrixError("logdet: matrix singular to working precision",
                                      static_cast<std::size_t>(i));
        sum += std::log(u);
    }
    if (lu.permutationP().determinant() < 0) sum += cplx(0.0, std::numbers::pi);
    return sum;
}

/// Numerically stable softmax: scores are shifted by their maximum before exponentiation.
inline RVector softmax(const RVector& scores) {
    if (scores.size() == 0) return scores;
    const RVector e = (scores.array() - scores.maxCoeff()).exp();
    return e / e.sum();
}

}  // namespace chanpred
