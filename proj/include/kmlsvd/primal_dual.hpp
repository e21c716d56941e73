#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kmlsvd/kernels.hpp"
#include "kmlsvd/mlsvd.hpp"
#include "kmlsvd/tensor.hpp"

namespace kmlsvd {

/// Feature matrices Phi_d (N_d x M_d), compatibility tensor C
/// (M_1 x ... x M_D) and a regularization core S whose mode Gram matrices
/// S_(d) S_(d)^T must be diagonal with strictly positive diagonal.
///
/// The regularization core plays two roles: it is the prior used when
/// evaluating the objective and the KKT system of candidate models, while
/// the solvers return the self-consistent core of the kernel tensor's
/// decomposition. Use with_reg_core to evaluate a solved model against its
/// own core.
class PrimalProblem {
public:
    PrimalProblem(std::vector<DenseMatrix> features, DenseTensor compat, DenseTensor reg_core);

    /// Uses a unit scalar regularization core (1 x ... x 1).
    PrimalProblem(std::vector<DenseMatrix> features, DenseTensor compat);

    std::size_t order() const { return features_.size(); }
    const std::vector<DenseMatrix>& features() const { return features_; }
    const DenseTensor& compat() const { return compat_; }
    const DenseTensor& reg_core() const { return reg_core_; }
    std::size_t sample_count(std::size_t d) const { return features_[d].rows(); }
    std::size_t feature_dim(std::size_t d) const { return features_[d].cols(); }

private:
    void check_consistency() const;

    std::vector<DenseMatrix> features_;
    DenseTensor compat_;
    DenseTensor reg_core_;
};

/// Copy of the problem with the regularization core replaced (revalidated).
PrimalProblem with_reg_core(const PrimalProblem& p, DenseTensor core);

/// Weights W_d (M_d x R_d) and error matrices E_d (N_d x R_d).
struct PrimalModel {
    std::vector<DenseMatrix> weights;
    std::vector<DenseMatrix> errors;
};

/// Lagrange multipliers U_d (N_d x R_d, orthonormal at a solution), error
/// matrices, the core they were solved against, and optionally the
/// materialized kernel tensor.
struct DualModel {
    std::vector<DenseMatrix> multipliers;
    std::optional<DenseTensor> kernel;
    std::vector<DenseMatrix> errors;
    DenseTensor core;
};

/// Error matrices of the primal representation,
/// E_d = Phi_d C_(d) (W_D (x) ... (x) W_{d+1} (x) W_{d-1} ... (x) W_1) S_(d)^T,
/// evaluated by mode products; no product-of-feature-dims matrix other than
/// the unfoldings of the (small) coupling tensors is formed.
std::vector<DenseMatrix> primal_errors(const PrimalProblem& p,
                                       std::span<const DenseMatrix> weights);

/// Error matrices of the dual representation,
/// E_d = K_(d) (U_D (x) ... (x) U_{d+1} (x) U_{d-1} ... (x) U_1) S_(d)^T.
/// Requires a materialized kernel on the model.
std::vector<DenseMatrix> dual_errors(const DualModel& dm, const DenseTensor& reg_core);

/// Objective value
///   J = 1/2 sum_d tr(E_d (S_(d) S_(d)^T)^{-1} E_d^T)
///     - (D-1) vec(C)^T (W_D (x) ... (x) W_1) vec(S)
///     + (D-2)/2 vec(C)^T (G_D (x) ... (x) G_1) vec(C),   G_d = Phi_d^T Phi_d,
/// with S the problem's regularization core. Zero at a solver optimum when
/// evaluated against the solved core. Throws NumericsError if any
/// S_(d) S_(d)^T is singular.
double objective(const PrimalProblem& p, std::span<const DenseMatrix> weights,
                 std::span<const DenseMatrix> errors);

/// Dual solver: materializes the kernel tensor (budget-guarded), decomposes
/// it, and derives the error matrices from the stationarity condition
/// E_d = U_d S_(d) S_(d)^T. The returned core is the decomposition core.
DualModel solve_dual(const PrimalProblem& p, const RankSpec& spec,
                     std::size_t budget = kDefaultEntryBudget);

struct PrimalSolveResult {
    PrimalModel primal;
    DualModel dual;                           ///< kernel not materialized
    std::vector<std::size_t> whitening_ranks; ///< numerical rank of each G_d
    std::vector<std::string> warnings;
};

/// Primal solver: never materializes the kernel tensor. Per mode it forms
/// A_d = C_(d) (G (x) ... (x) G) C_(d)^T over the other modes' Gram
/// matrices, symmetrizes it as B_d = G_d^{1/2} A_d G_d^{1/2}, and recovers
/// U_d = Phi_d G_d^{-1/2} V_d from the leading eigenvectors of B_d. The
/// eigenvalues equal diag(S_(d) S_(d)^T) of the dual core. Rank-deficient
/// Gram matrices whiten on their range only, with a warning.
PrimalSolveResult solve_primal(const PrimalProblem& p, const RankSpec& spec);

/// W_d = Phi_d^T U_d with errors recomputed through the primal
/// representation against p's regularization core.
PrimalModel dual_to_primal(const PrimalProblem& p, const DualModel& dm);

/// U_d = Phi_d pinv(G_d) W_d, exact when the weights came from a dual
/// model; errors recomputed through the dual representation (materializes
/// the kernel, budget-guarded). Throws NumericsError when W_d is not in
/// range(Phi_d^T) within 1e-8 relative.
DualModel primal_to_dual(const PrimalProblem& p, const PrimalModel& pm,
                         std::size_t budget = kDefaultEntryBudget);

/// Relative Frobenius residuals of the full KKT system for a candidate
/// primal/dual model pair, each normalized by its left-hand side:
///   stationarity[d]: (D-1) C_(d) ((x) W_e) S_(d)^T  vs  the (D-1)-term
///                    mixed sum with one W_e replaced by Phi_e^T U_e;
///   error_condition[d]: pm.errors[d]  vs  U_d S_(d) S_(d)^T;
///   constraint[d]: dm.errors[d]  vs  Phi_d C_(d) ((x) W_e) S_(d)^T.
struct KktReport {
    std::vector<double> stationarity;
    std::vector<double> error_condition;
    std::vector<double> constraint;
    double max_residual() const;
};

KktReport kkt_residuals(const PrimalProblem& p, const PrimalModel& pm, const DualModel& dm);

}  // namespace kmlsvd
