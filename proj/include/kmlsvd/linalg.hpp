#pragma once

#include <span>
#include <vector>

#include "kmlsvd/tensor.hpp"

namespace kmlsvd {

/// Relative threshold below which singular/eigen values count as zero.
inline constexpr double kDefaultRankTol = 1e-12;

/// Compact SVD a = u * diag(s) * v^T with orthonormal u, v and s sorted
/// descending. The sign convention makes factors deterministic: in each
/// column of u the entry of largest magnitude is positive (ties resolved
/// toward the lowest row index), with v compensating.
struct ThinSvd {
    DenseMatrix u;          ///< rows(a) x r
    std::vector<double> s;  ///< r nonnegative values, descending
    DenseMatrix v;          ///< cols(a) x r
};

/// Rank-truncated SVD: keeps singular values with s_i > rank_tol * s_0.
ThinSvd thin_svd(const DenseMatrix& a, double rank_tol = kDefaultRankTol);

/// Full compact SVD: keeps all min(rows, cols) triplets, zeros included.
ThinSvd thin_svd_full(const DenseMatrix& a);

/// Eigendecomposition of a symmetric matrix, values sorted descending,
/// orthonormal vectors under the same sign convention as thin_svd.
struct SymEig {
    DenseMatrix vectors;
    std::vector<double> values;
};

/// Throws NumericsError unless ||a - a^T|| <= 1e-10 * ||a||.
SymEig sym_eig(const DenseMatrix& a);

/// Moore-Penrose pseudoinverse; singular values below tol * s_0 are dropped.
DenseMatrix pinv(const DenseMatrix& a, double tol = kDefaultRankTol);

struct KronLstsqResult {
    std::vector<double> x;
    double residual = 0.0;
};

/// Minimum-2-norm least-squares solution of (A_1 (x) ... (x) A_q) x = b,
/// computed as (pinv(A_1) (x) ... (x) pinv(A_q)) b through successive mode
/// products. No Kronecker product is ever materialized; no matrix larger
/// than any single factor (or its pseudoinverse) is allocated.
KronLstsqResult min_norm_lstsq_kron(std::span<const DenseMatrix> factors,
                                    std::span<const double> b,
                                    double tol = kDefaultRankTol);

/// Inverse square root of a symmetric PSD matrix on its range: eigenvalues
/// below tol * lambda_0 are treated as zero, so result * g * result is the
/// orthogonal projector onto range(g). Throws NumericsError if g has an
/// eigenvalue below -1e-10 * ||g||.
DenseMatrix psd_sqrt_inv(const DenseMatrix& g, double tol = kDefaultRankTol);

/// Square root of a symmetric PSD matrix, same eigenvalue clipping rule.
DenseMatrix psd_sqrt(const DenseMatrix& g, double tol = kDefaultRankTol);

}  // namespace kmlsvd
