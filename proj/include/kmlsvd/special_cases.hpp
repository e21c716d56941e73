#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "kmlsvd/kernels.hpp"
#include "kmlsvd/tensor.hpp"

namespace kmlsvd {

/// Solution of the coupled shifted eigenvalue problems
/// U_1 S = K U_2 and U_2 S^T = K^T U_1: the compact SVD of K.
struct KsvdResult {
    DenseMatrix u1;  ///< N_1 x R, orthonormal columns
    DenseMatrix s;   ///< R x R nonnegative diagonal, descending
    DenseMatrix u2;  ///< N_2 x R, orthonormal columns
    std::array<double, 2> shifted_residuals{};  ///< residuals of the two equations / ||K||
};

/// Kernel SVD of an arbitrary (not necessarily symmetric or positive)
/// kernel matrix, truncated to `rank`. Throws RankError when `rank`
/// exceeds min(rows, cols).
KsvdResult ksvd(const DenseMatrix& k, std::size_t rank);

struct KpcaResult {
    DenseMatrix u;
    std::vector<double> s;
};

/// Kernel PCA: eigendecomposition of a symmetric positive semidefinite
/// kernel matrix truncated to `rank`; the two shifted problems coincide so
/// a single factor is returned. Rejects asymmetric or indefinite input.
KpcaResult kpca(const DenseMatrix& k, std::size_t rank);

struct HoKpcaResult {
    DenseMatrix u;        ///< shared factor (mode-1 factor after sign alignment)
    DenseTensor core;
    double unfolding_deviation = 0.0;    ///< max_d ||K_(d) - K_(1)|| / ||K||
    double projector_discrepancy = 0.0;  ///< max_d ||U_d U_d^T - U_1 U_1^T||
    bool symmetry_breaking = false;      ///< discrepancy above 1e-6 (degenerate spectrum)
};

/// Higher-order KPCA: identical features on every mode coupled by a
/// supersymmetric compatibility tensor. Builds the kernel tensor, verifies
/// its unfoldings agree, decomposes it, aligns factor signs across modes
/// and reports how far the factors are from a single shared subspace.
/// Throws NumericsError when compat is not supersymmetric within 1e-10.
HoKpcaResult higher_order_kpca(const DenseMatrix& phi, const DenseTensor& compat,
                               std::size_t rank, std::size_t budget = kDefaultEntryBudget);

}  // namespace kmlsvd
