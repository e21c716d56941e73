#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kmlsvd/linalg.hpp"
#include "kmlsvd/tensor.hpp"

namespace kmlsvd {

/// Per-mode rank selection: explicit ranks, an energy threshold, or
/// everything the input supports.
class RankSpec {
public:
    /// Explicit per-mode ranks (one entry per mode).
    static RankSpec exact(std::vector<std::size_t> ranks);

    /// Keep the smallest R with sum_{i<=R} e_i >= (1 - eps^2) * sum e_i,
    /// where e_i are the squared mode singular values. eps in (0, 1].
    static RankSpec energy(double eps);

    /// Keep every available mode singular triplet, zeros included.
    static RankSpec full();

    /// Resolves the rank for `mode` given that mode's descending energy
    /// sequence (squared singular values). Throws RankError when an explicit
    /// rank exceeds the available count.
    std::size_t resolve(std::span<const double> energies, std::size_t mode,
                        std::size_t order) const;

    bool is_exact() const { return kind_ == Kind::exact; }

private:
    enum class Kind { exact, energy, full };
    Kind kind_ = Kind::full;
    std::vector<std::size_t> ranks_;
    double eps_ = 0.0;
};

/// Factor matrices U_d (N_d x R_d, orthonormal columns) and core tensor
/// (R_1 x ... x R_D) with diagonal mode Gram matrices of nonincreasing
/// nonnegative diagonal.
struct MlsvdFactors {
    std::vector<DenseMatrix> factors;
    DenseTensor core;
};

/// Multilinear SVD: U_d are the leading left singular vectors of the mode-d
/// unfoldings, the core is the tensor contracted with every U_d^T. Column
/// signs are normalized so the decomposition of a matrix (order 2) carries a
/// nonnegative diagonal core. Throws ValueError on a zero tensor and
/// RankError on unsatisfiable explicit ranks.
MlsvdFactors mlsvd(const DenseTensor& t, const RankSpec& spec = RankSpec::full());

/// Applies every factor to the core by mode products.
DenseTensor reconstruct(const MlsvdFactors& f);

/// Relative residual per mode of the coupled equations
/// U_d S_(d) = X_(d) (U_D (x) ... (x) U_{d+1} (x) U_{d-1} (x) ... (x) U_1),
/// evaluated with mode products; ~0 for a full-rank decomposition of t.
std::vector<double> lanczos_residuals(const MlsvdFactors& f, const DenseTensor& t);

/// Off-diagonal Frobenius mass ratio of S_(d) S_(d)^T per mode.
std::vector<double> gram_diagonality(const DenseTensor& core);

/// Fraction of squared Frobenius mass on the superdiagonal; 1 means the
/// decomposition is an orthogonal CPD.
double superdiagonality(const DenseTensor& core);

/// diag(S_(d) S_(d)^T): the squared mode-d singular values of the
/// decomposed tensor, nonincreasing.
std::vector<double> core_gram_diagonal(const DenseTensor& core, std::size_t mode);

}  // namespace kmlsvd
