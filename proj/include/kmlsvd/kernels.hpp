#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kmlsvd/tensor.hpp"

namespace kmlsvd {

/// Default cap on materialized tensor entries (guards the exponential
/// growth of kernel tensors in the order).
inline constexpr std::size_t kDefaultEntryBudget = 100'000'000;

/// Kernel tensor from features and a compatibility tensor:
/// vec(K) = (Phi_D (x) ... (x) Phi_1) vec(C), computed as successive mode
/// products of C with each Phi_d. Throws BudgetError before any
/// intermediate or the result would exceed `budget` entries.
DenseTensor kernel_tensor(std::span<const DenseMatrix> features, const DenseTensor& compat,
                          std::size_t budget = kDefaultEntryBudget);

struct CompatibilityResult {
    DenseTensor compat;
    double residual = 0.0;
};

/// Minimum-Frobenius-norm solution C of
/// vec(X) = (X_(D) (x) ... (x) X_(1)) vec(C).
/// For order >= 3 the residual vanishes: X lies in the product of its own
/// mode ranges, because the exact multilinear decomposition
/// X = G x_1 U_1 ... x_D U_D with range(U_d) = range(X_(d)) rewrites each
/// U_d as X_(d) Y_d, exhibiting an exact solution C = G x_d Y_d. For order
/// 2 the solution is pinv(X), the inverse when X is square invertible.
CompatibilityResult min_norm_compatibility(const DenseTensor& x);

/// Polynomial tensor kernel of degree p >= 1 over inputs sharing feature
/// width M: K[i_1,...,i_D] = (sum_m prod_d X_d[i_d, m])^p. The identity
/// coupling tensor is never materialized; the contraction runs directly
/// over the shared feature index.
DenseTensor polynomial_kernel(std::span<const DenseMatrix> inputs, unsigned degree,
                              std::size_t budget = kDefaultEntryBudget);

/// Elementwise exp of the degree-1 polynomial kernel. Throws ValueError
/// naming the offending entry on overflow.
DenseTensor exponential_kernel(std::span<const DenseMatrix> inputs,
                               std::size_t budget = kDefaultEntryBudget);

struct ElementwiseKernelResult {
    DenseTensor kernel;
    DenseTensor compat;
    double residual = 0.0;
};

/// K = f applied entrywise to x, with the compatibility tensor fitted by
/// least squares against the linear features of x. The residual is
/// reported, not asserted: f(X) need not lie in the product of X's mode
/// ranges, so exact consistency is not guaranteed.
ElementwiseKernelResult elementwise_kernel(const DenseTensor& x,
                                           const std::function<double(double)>& f);

// ---------------------------------------------------------------------------
// Declarative kernel selection used by the command-line tool.

struct GenericKernelSpec {
    std::vector<DenseMatrix> features;
    DenseTensor compat;
};

struct LinearKernelSpec {
    DenseTensor data;
};

struct PolynomialKernelSpec {
    std::vector<DenseMatrix> inputs;
    unsigned degree = 1;
};

struct ExponentialKernelSpec {
    std::vector<DenseMatrix> inputs;
};

struct ElementwiseKernelSpec {
    DenseTensor data;
    std::function<double(double)> fn;
    std::string fn_name;
};

using KernelSpec = std::variant<GenericKernelSpec, LinearKernelSpec, PolynomialKernelSpec,
                                ExponentialKernelSpec, ElementwiseKernelSpec>;

struct KernelBuild {
    DenseTensor kernel;
    std::optional<DenseTensor> compat;
    std::optional<double> residual;
};

KernelBuild build_kernel(const KernelSpec& spec, std::size_t budget = kDefaultEntryBudget);

}  // namespace kmlsvd
