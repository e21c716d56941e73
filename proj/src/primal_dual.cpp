#include "kmlsvd/primal_dual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kmlsvd/linalg.hpp"
#include "kmlsvd/parallel.hpp"

namespace kmlsvd {

namespace {

void validate_reg_core(const DenseTensor& core, std::size_t order) {
    if (core.order() != order) {
        throw ShapeError("regularization core order " + std::to_string(core.order()) +
                         " does not match problem order " + std::to_string(order));
    }
    const std::vector<double> ratios = gram_diagonality(core);
    for (std::size_t d = 0; d < order; ++d) {
        if (ratios[d] > 1e-8) {
            throw ValueError("regularization core mode " + std::to_string(d) +
                             " Gram matrix is not diagonal (off-diagonal ratio " +
                             std::to_string(ratios[d]) + ")");
        }
        for (double g : core_gram_diagonal(core, d)) {
            if (!(g > 0.0)) {
                throw ValueError("regularization core mode " + std::to_string(d) +
                                 " Gram diagonal must be strictly positive");
            }
        }
    }
}

DenseTensor unit_core(std::size_t order) {
    return DenseTensor(std::vector<std::size_t>(order, 1), {1.0});
}

/// S_(d) S_(d)^T of a core tensor as a dense (small) matrix.
Eigen::MatrixXd mode_gram(const DenseTensor& core, std::size_t d) {
    const DenseMatrix s = unfold(core, d);
    const auto es = as_eigen(s);
    return es * es.transpose();
}

/// C_(d) ((x)_{e != d, descending} A_e) S_(d)^T as a dense M_d x R_d matrix,
/// evaluated by contracting C with A_e^T on every mode e != d.
DenseMatrix coupling_chain(const DenseTensor& compat, std::size_t d,
                           std::span<const DenseMatrix> mode_maps, const DenseTensor& core) {
    DenseTensor t = compat;
    for (std::size_t e = 0; e < compat.order(); ++e) {
        if (e != d) t = mode_product_transposed(t, mode_maps[e], e);
    }
    const DenseMatrix td = unfold(t, d);
    const DenseMatrix sd = unfold(core, d);
    if (td.cols() != sd.cols()) {
        throw ShapeError("coupling chain for mode " + std::to_string(d) +
                         " is inconsistent with the core ranks");
    }
    return from_eigen(as_eigen(td) * as_eigen(sd).transpose());
}

void check_model_shapes(const PrimalProblem& p, std::span<const DenseMatrix> mats,
                        std::span<const std::size_t> rows_per_mode, const char* what) {
    if (mats.size() != p.order()) {
        throw ShapeError(std::string(what) + ": expected " + std::to_string(p.order()) +
                         " matrices, got " + std::to_string(mats.size()));
    }
    for (std::size_t d = 0; d < p.order(); ++d) {
        if (mats[d].rows() != rows_per_mode[d] || mats[d].cols() != p.reg_core().extent(d)) {
            throw ShapeError(std::string(what) + ": matrix " + std::to_string(d) +
                             " has shape " + std::to_string(mats[d].rows()) + "x" +
                             std::to_string(mats[d].cols()) + ", expected " +
                             std::to_string(rows_per_mode[d]) + "x" +
                             std::to_string(p.reg_core().extent(d)));
        }
    }
}

std::vector<std::size_t> feature_dims(const PrimalProblem& p) {
    std::vector<std::size_t> dims(p.order());
    for (std::size_t d = 0; d < p.order(); ++d) dims[d] = p.feature_dim(d);
    return dims;
}

std::vector<std::size_t> sample_counts(const PrimalProblem& p) {
    std::vector<std::size_t> dims(p.order());
    for (std::size_t d = 0; d < p.order(); ++d) dims[d] = p.sample_count(d);
    return dims;
}

double relative_residual(const DenseMatrix& actual, const DenseMatrix& target) {
    const double lhs_norm = frobenius_norm(actual);
    const double diff = (as_eigen(actual) - as_eigen(target)).norm();
    return lhs_norm > 0.0 ? diff / lhs_norm : diff;
}

}  // namespace

void PrimalProblem::check_consistency() const {
    if (features_.size() < 2) {
        throw ShapeError("primal problem needs at least 2 feature matrices");
    }
    if (compat_.order() != features_.size()) {
        throw ShapeError("compatibility tensor order " + std::to_string(compat_.order()) +
                         " does not match feature count " + std::to_string(features_.size()));
    }
    for (std::size_t d = 0; d < features_.size(); ++d) {
        if (features_[d].rows() == 0 || features_[d].cols() != compat_.extent(d)) {
            throw ShapeError("feature matrix " + std::to_string(d) +
                             " is inconsistent with the compatibility tensor");
        }
    }
    validate_reg_core(reg_core_, features_.size());
}

PrimalProblem::PrimalProblem(std::vector<DenseMatrix> features, DenseTensor compat,
                             DenseTensor reg_core)
    : features_(std::move(features)), compat_(std::move(compat)), reg_core_(std::move(reg_core)) {
    check_consistency();
}

PrimalProblem::PrimalProblem(std::vector<DenseMatrix> features, DenseTensor compat)
    : features_(std::move(features)), compat_(std::move(compat)) {
    reg_core_ = unit_core(features_.size());
    check_consistency();
}

PrimalProblem with_reg_core(const PrimalProblem& p, DenseTensor core) {
    return PrimalProblem(p.features(), p.compat(), std::move(core));
}

std::vector<DenseMatrix> primal_errors(const PrimalProblem& p,
                                       std::span<const DenseMatrix> weights) {
    check_model_shapes(p, weights, feature_dims(p), "primal_errors");
    std::vector<DenseMatrix> errors(p.order());
    for (std::size_t d = 0; d < p.order(); ++d) {
        const DenseMatrix chain = coupling_chain(p.compat(), d, weights, p.reg_core());
        errors[d] = from_eigen(as_eigen(p.features()[d]) * as_eigen(chain));
    }
    return errors;
}

std::vector<DenseMatrix> dual_errors(const DualModel& dm, const DenseTensor& reg_core) {
    if (!dm.kernel.has_value()) {
        throw ValueError("dual_errors: model carries no materialized kernel tensor");
    }
    const DenseTensor& k = *dm.kernel;
    if (dm.multipliers.size() != k.order() || reg_core.order() != k.order()) {
        throw ShapeError("dual_errors: order mismatch");
    }
    std::vector<DenseMatrix> errors(k.order());
    for (std::size_t d = 0; d < k.order(); ++d) {
        errors[d] = coupling_chain(k, d, dm.multipliers, reg_core);
    }
    return errors;
}

double objective(const PrimalProblem& p, std::span<const DenseMatrix> weights,
                 std::span<const DenseMatrix> errors) {
    check_model_shapes(p, weights, feature_dims(p), "objective(weights)");
    check_model_shapes(p, errors, sample_counts(p), "objective(errors)");
    const std::size_t order = p.order();
    const DenseTensor& core = p.reg_core();

    double variance = 0.0;
    for (std::size_t d = 0; d < order; ++d) {
        const Eigen::MatrixXd gram = mode_gram(core, d);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
        lu.setThreshold(1e-12);
        if (!lu.isInvertible()) {
            throw NumericsError("objective: singular S_(d) S_(d)^T for mode " +
                                std::to_string(d));
        }
        const auto e = as_eigen(errors[d]);
        variance += 0.5 * (e * lu.inverse()).cwiseProduct(e).sum();
    }

    DenseTensor ws = core;
    for (std::size_t d = 0; d < order; ++d) ws = mode_product(ws, weights[d], d);
    const double cross = dot(p.compat(), ws);

    DenseTensor gc = p.compat();
    for (std::size_t d = 0; d < order; ++d) {
        const auto phi = as_eigen(p.features()[d]);
        gc = mode_product(gc, from_eigen(phi.transpose() * phi), d);
    }
    const double quad = dot(p.compat(), gc);

    const double dm1 = static_cast<double>(order) - 1.0;
    const double dm2 = static_cast<double>(order) - 2.0;
    return variance - dm1 * cross + 0.5 * dm2 * quad;
}

DualModel solve_dual(const PrimalProblem& p, const RankSpec& spec, std::size_t budget) {
    DenseTensor k = kernel_tensor(p.features(), p.compat(), budget);
    MlsvdFactors f = mlsvd(k, spec);

    std::vector<DenseMatrix> errors(p.order());
    for (std::size_t d = 0; d < p.order(); ++d) {
        errors[d] = from_eigen(as_eigen(f.factors[d]) * mode_gram(f.core, d));
    }
    DualModel dm;
    dm.multipliers = std::move(f.factors);
    dm.kernel = std::move(k);
    dm.errors = std::move(errors);
    dm.core = std::move(f.core);
    return dm;
}

PrimalSolveResult solve_primal(const PrimalProblem& p, const RankSpec& spec) {
    const std::size_t order = p.order();

    std::vector<DenseMatrix> grams(order);
    for (std::size_t d = 0; d < order; ++d) {
        const auto phi = as_eigen(p.features()[d]);
        grams[d] = from_eigen(phi.transpose() * phi);
    }

    PrimalSolveResult result;
    result.whitening_ranks.assign(order, 0);
    std::vector<DenseMatrix> multipliers(order);
    std::vector<std::string> warnings(order);

    detail::for_each_mode(order, [&](std::size_t d) {
        // A_d = C_(d) ((x)_{e != d} G_e) C_(d)^T without forming the
        // Kronecker product.
        DenseTensor t = p.compat();
        for (std::size_t e = 0; e < order; ++e) {
            if (e != d) t = mode_product(t, grams[e], e);
        }
        const DenseMatrix cd = unfold(p.compat(), d);
        const DenseMatrix td = unfold(t, d);
        const Eigen::MatrixXd a = as_eigen(td) * as_eigen(cd).transpose();

        const SymEig gram_eig = sym_eig(grams[d]);
        const double gmax = gram_eig.values.empty() ? 0.0 : gram_eig.values.front();
        std::size_t grank = 0;
        while (grank < gram_eig.values.size() && gram_eig.values[grank] > kDefaultRankTol * gmax &&
               gram_eig.values[grank] > 0.0) {
            ++grank;
        }
        result.whitening_ranks[d] = grank;
        if (grank < p.feature_dim(d)) {
            warnings[d] = "mode " + std::to_string(d) + ": feature Gram matrix is singular (rank " +
                          std::to_string(grank) + " of " + std::to_string(p.feature_dim(d)) +
                          "), whitening restricted to its range";
        }
        const auto gv = as_eigen(gram_eig.vectors);
        Eigen::VectorXd sqrt_vals(static_cast<Eigen::Index>(grank));
        Eigen::VectorXd inv_sqrt_vals(static_cast<Eigen::Index>(grank));
        for (std::size_t i = 0; i < grank; ++i) {
            sqrt_vals(static_cast<Eigen::Index>(i)) = std::sqrt(gram_eig.values[i]);
            inv_sqrt_vals(static_cast<Eigen::Index>(i)) = 1.0 / sqrt_vals(static_cast<Eigen::Index>(i));
        }
        const Eigen::MatrixXd range = gv.leftCols(static_cast<Eigen::Index>(grank));
        const Eigen::MatrixXd g_half = range * sqrt_vals.asDiagonal() * range.transpose();
        const Eigen::MatrixXd g_half_inv = range * inv_sqrt_vals.asDiagonal() * range.transpose();

        Eigen::MatrixXd b = g_half * a * g_half;
        b = 0.5 * (b + b.transpose()).eval();
        const SymEig eig = sym_eig(from_eigen(b));

        std::vector<double> energies(eig.values.size());
        for (std::size_t i = 0; i < eig.values.size(); ++i) {
            energies[i] = std::max(eig.values[i], 0.0);
        }
        std::size_t rank = spec.resolve(energies, d, order);
        const double emax = energies.empty() ? 0.0 : energies.front();
        std::size_t positive = 0;
        while (positive < energies.size() && energies[positive] > kDefaultRankTol * emax &&
               energies[positive] > 0.0) {
            ++positive;
        }
        if (rank > positive) {
            warnings[d] += std::string(warnings[d].empty() ? "" : "; ") + "mode " +
                           std::to_string(d) + ": rank reduced from " + std::to_string(rank) +
                           " to the " + std::to_string(positive) +
                           " numerically positive eigenvalues";
            rank = positive;
        }
        if (rank == 0) {
            throw NumericsError("solve_primal: mode " + std::to_string(d) +
                                " has no positive eigenvalue; the kernel tensor is zero");
        }

        const Eigen::MatrixXd v = as_eigen(eig.vectors).leftCols(static_cast<Eigen::Index>(rank));
        multipliers[d] = from_eigen(as_eigen(p.features()[d]) * (g_half_inv * v));
    });

    for (const std::string& w : warnings) {
        if (!w.empty()) result.warnings.push_back(w);
    }

    std::vector<DenseMatrix> weights(order);
    for (std::size_t d = 0; d < order; ++d) {
        weights[d] = from_eigen(as_eigen(p.features()[d]).transpose() * as_eigen(multipliers[d]));
    }

    // Core of the kernel tensor's decomposition, contracted in feature space:
    // S = C x_1 W_1^T ... x_D W_D^T.
    DenseTensor core = p.compat();
    for (std::size_t d = 0; d < order; ++d) {
        core = mode_product_transposed(core, weights[d], d);
    }

    std::vector<DenseMatrix> dual_err(order);
    for (std::size_t d = 0; d < order; ++d) {
        dual_err[d] = from_eigen(as_eigen(multipliers[d]) * mode_gram(core, d));
    }

    const PrimalProblem solved = with_reg_core(p, core);
    result.primal.weights = std::move(weights);
    result.primal.errors = primal_errors(solved, result.primal.weights);
    result.dual.multipliers = std::move(multipliers);
    result.dual.kernel = std::nullopt;
    result.dual.errors = std::move(dual_err);
    result.dual.core = std::move(core);
    return result;
}

PrimalModel dual_to_primal(const PrimalProblem& p, const DualModel& dm) {
    check_model_shapes(p, dm.multipliers, sample_counts(p), "dual_to_primal");
    PrimalModel pm;
    pm.weights.resize(p.order());
    for (std::size_t d = 0; d < p.order(); ++d) {
        pm.weights[d] = from_eigen(as_eigen(p.features()[d]).transpose() *
                                   as_eigen(dm.multipliers[d]));
    }
    pm.errors = primal_errors(p, pm.weights);
    return pm;
}

DualModel primal_to_dual(const PrimalProblem& p, const PrimalModel& pm, std::size_t budget) {
    check_model_shapes(p, pm.weights, feature_dims(p), "primal_to_dual");
    DualModel dm;
    dm.multipliers.resize(p.order());
    for (std::size_t d = 0; d < p.order(); ++d) {
        const auto phi = as_eigen(p.features()[d]);
        const DenseMatrix gram = from_eigen(phi.transpose() * phi);
        const DenseMatrix gram_pinv = pinv(gram);
        const auto w = as_eigen(pm.weights[d]);

        const Eigen::MatrixXd realizable = as_eigen(gram) * (as_eigen(gram_pinv) * w);
        const double wnorm = w.norm();
        if (wnorm > 0.0 && (realizable - w).norm() > 1e-8 * wnorm) {
            throw NumericsError("primal_to_dual: weights for mode " + std::to_string(d) +
                                " are not realizable in the feature range");
        }
        dm.multipliers[d] = from_eigen(phi * (as_eigen(gram_pinv) * w));
    }
    dm.kernel = kernel_tensor(p.features(), p.compat(), budget);
    dm.core = p.reg_core();
    dm.errors = dual_errors(dm, p.reg_core());
    return dm;
}

double KktReport::max_residual() const {
    double m = 0.0;
    for (double r : stationarity) m = std::max(m, r);
    for (double r : error_condition) m = std::max(m, r);
    for (double r : constraint) m = std::max(m, r);
    return m;
}

KktReport kkt_residuals(const PrimalProblem& p, const PrimalModel& pm, const DualModel& dm) {
    const std::size_t order = p.order();
    check_model_shapes(p, pm.weights, feature_dims(p), "kkt_residuals(weights)");
    check_model_shapes(p, pm.errors, sample_counts(p), "kkt_residuals(primal errors)");
    check_model_shapes(p, dm.multipliers, sample_counts(p), "kkt_residuals(multipliers)");
    check_model_shapes(p, dm.errors, sample_counts(p), "kkt_residuals(dual errors)");

    std::vector<DenseMatrix> projected(order);
    for (std::size_t d = 0; d < order; ++d) {
        projected[d] = from_eigen(as_eigen(p.features()[d]).transpose() *
                                  as_eigen(dm.multipliers[d]));
    }

    KktReport report;
    report.stationarity.resize(order);
    report.error_condition.resize(order);
    report.constraint.resize(order);

    for (std::size_t d = 0; d < order; ++d) {
        // Stationarity in W_d: (D-1) C_(d) ((x) W_e) S_(d)^T equals the sum
        // over the other modes of the same chain with W_j replaced by
        // Phi_j^T U_j.
        const DenseMatrix base = coupling_chain(p.compat(), d, pm.weights, p.reg_core());
        Eigen::MatrixXd lhs = (static_cast<double>(order) - 1.0) * as_eigen(base);
        Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(lhs.rows(), lhs.cols());
        for (std::size_t j = 0; j < order; ++j) {
            if (j == d) continue;
            std::vector<DenseMatrix> maps = pm.weights;
            maps[j] = projected[j];
            const DenseMatrix term = coupling_chain(p.compat(), d, maps, p.reg_core());
            rhs += as_eigen(term);
        }
        const double lhs_norm = lhs.norm();
        report.stationarity[d] =
            lhs_norm > 0.0 ? (lhs - rhs).norm() / lhs_norm : (lhs - rhs).norm();

        const DenseMatrix stationary_error =
            from_eigen(as_eigen(dm.multipliers[d]) * mode_gram(p.reg_core(), d));
        report.error_condition[d] = relative_residual(pm.errors[d], stationary_error);

        const DenseMatrix constraint_target =
            from_eigen(as_eigen(p.features()[d]) * as_eigen(base));
        report.constraint[d] = relative_residual(dm.errors[d], constraint_target);
    }
    return report;
}

}  // namespace kmlsvd
