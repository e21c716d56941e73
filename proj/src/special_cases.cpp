#include "kmlsvd/special_cases.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kmlsvd/linalg.hpp"
#include "kmlsvd/mlsvd.hpp"

namespace kmlsvd {

KsvdResult ksvd(const DenseMatrix& k, std::size_t rank) {
    const std::size_t available = std::min(k.rows(), k.cols());
    if (rank == 0 || rank > available) {
        throw RankError("ksvd: rank " + std::to_string(rank) + " not in [1, " +
                        std::to_string(available) + "]");
    }
    const ThinSvd f = thin_svd_full(k);
    const Eigen::Index r = static_cast<Eigen::Index>(rank);

    KsvdResult out;
    out.u1 = from_eigen(as_eigen(f.u).leftCols(r));
    out.u2 = from_eigen(as_eigen(f.v).leftCols(r));
    DenseMatrix s(rank, rank);
    for (std::size_t i = 0; i < rank; ++i) s(i, i) = f.s[i];
    out.s = std::move(s);

    const auto ek = as_eigen(k);
    const auto u1 = as_eigen(out.u1);
    const auto u2 = as_eigen(out.u2);
    const auto es = as_eigen(out.s);
    const double scale = ek.norm();
    const double r1 = (u1 * es - ek * u2).norm();
    const double r2 = (u2 * es.transpose() - ek.transpose() * u1).norm();
    out.shifted_residuals = {scale > 0.0 ? r1 / scale : r1, scale > 0.0 ? r2 / scale : r2};
    return out;
}

KpcaResult kpca(const DenseMatrix& k, std::size_t rank) {
    if (k.rows() != k.cols()) throw ShapeError("kpca: kernel matrix must be square");
    if (rank == 0 || rank > k.rows()) {
        throw RankError("kpca: rank " + std::to_string(rank) + " not in [1, " +
                        std::to_string(k.rows()) + "]");
    }
    const SymEig eig = sym_eig(k);  // rejects asymmetric input
    const double scale = frobenius_norm(k);
    if (!eig.values.empty() && eig.values.back() < -1e-10 * scale) {
        throw NumericsError("kpca: kernel matrix is indefinite (min eigenvalue " +
                            std::to_string(eig.values.back()) + ")");
    }
    KpcaResult out;
    out.u = from_eigen(as_eigen(eig.vectors).leftCols(static_cast<Eigen::Index>(rank)));
    out.s.assign(eig.values.begin(), eig.values.begin() + static_cast<std::ptrdiff_t>(rank));
    return out;
}

namespace {

void check_supersymmetric(const DenseTensor& c) {
    const std::size_t order = c.order();
    for (std::size_t d = 1; d < order; ++d) {
        if (c.extent(d) != c.extent(0)) {
            throw ShapeError("higher_order_kpca: compatibility tensor must be cubical");
        }
    }
    double max_abs = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) max_abs = std::max(max_abs, std::abs(c[i]));

    // Every entry must match its index-sorted representative.
    std::vector<std::size_t> idx(order, 0);
    std::vector<std::size_t> sorted(order);
    do {
        sorted.assign(idx.begin(), idx.end());
        std::sort(sorted.begin(), sorted.end());
        const double a = c.at(std::span<const std::size_t>(idx));
        const double b = c.at(std::span<const std::size_t>(sorted));
        if (std::abs(a - b) > 1e-10 * max_abs) {
            throw NumericsError("higher_order_kpca: compatibility tensor is not supersymmetric");
        }
        // odometer step
        std::size_t d = 0;
        for (; d < order; ++d) {
            if (++idx[d] < c.extent(d)) break;
            idx[d] = 0;
        }
        if (d == order) break;
    } while (true);
}

}  // namespace

HoKpcaResult higher_order_kpca(const DenseMatrix& phi, const DenseTensor& compat,
                               std::size_t rank, std::size_t budget) {
    const std::size_t order = compat.order();
    if (order < 2) throw ShapeError("higher_order_kpca: order must be >= 2");
    check_supersymmetric(compat);
    if (phi.cols() != compat.extent(0)) {
        throw ShapeError("higher_order_kpca: feature width does not match compatibility extent");
    }

    const std::vector<DenseMatrix> features(order, phi);
    const DenseTensor k = kernel_tensor(features, compat, budget);

    const double knorm = frobenius_norm(k);
    const DenseMatrix k1 = unfold(k, 0);
    double unfolding_dev = 0.0;
    for (std::size_t d = 1; d < order; ++d) {
        const DenseMatrix kd = unfold(k, d);
        unfolding_dev = std::max(
            unfolding_dev, (as_eigen(kd) - as_eigen(k1)).norm() / (knorm > 0.0 ? knorm : 1.0));
    }

    MlsvdFactors f = mlsvd(k, RankSpec::exact(std::vector<std::size_t>(order, rank)));

    // Align column signs of every factor with mode 1, flipping the matching
    // core slice to keep the decomposition intact.
    const auto u0 = as_eigen(f.factors[0]);
    for (std::size_t d = 1; d < order; ++d) {
        auto ud = as_eigen(f.factors[d]);
        for (std::size_t j = 0; j < rank; ++j) {
            const Eigen::Index jj = static_cast<Eigen::Index>(j);
            if (u0.col(jj).dot(ud.col(jj)) >= 0.0) continue;
            ud.col(jj) = -ud.col(jj);
            std::size_t inner = 1;
            for (std::size_t e = 0; e < d; ++e) inner *= f.core.extent(e);
            std::size_t outer = 1;
            for (std::size_t e = d + 1; e < order; ++e) outer *= f.core.extent(e);
            for (std::size_t o = 0; o < outer; ++o) {
                double* slice = f.core.data() + (j + o * rank) * inner;
                for (std::size_t i = 0; i < inner; ++i) slice[i] = -slice[i];
            }
        }
    }

    double discrepancy = 0.0;
    const Eigen::MatrixXd p0 = u0 * u0.transpose();
    for (std::size_t d = 1; d < order; ++d) {
        const auto ud = as_eigen(f.factors[d]);
        discrepancy = std::max(discrepancy, (ud * ud.transpose() - p0).norm());
    }

    HoKpcaResult out;
    out.u = std::move(f.factors[0]);
    out.core = std::move(f.core);
    out.unfolding_deviation = unfolding_dev;
    out.projector_discrepancy = discrepancy;
    out.symmetry_breaking = discrepancy > 1e-6;
    return out;
}

}  // namespace kmlsvd
