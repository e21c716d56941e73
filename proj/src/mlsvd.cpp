#include "kmlsvd/mlsvd.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "kmlsvd/parallel.hpp"

namespace kmlsvd {

RankSpec RankSpec::exact(std::vector<std::size_t> ranks) {
    for (std::size_t r : ranks) {
        if (r == 0) throw ValueError("RankSpec: ranks must be >= 1");
    }
    RankSpec s;
    s.kind_ = Kind::exact;
    s.ranks_ = std::move(ranks);
    return s;
}

RankSpec RankSpec::energy(double eps) {
    if (!(eps > 0.0) || eps > 1.0) throw ValueError("RankSpec: eps must be in (0, 1]");
    RankSpec s;
    s.kind_ = Kind::energy;
    s.eps_ = eps;
    return s;
}

RankSpec RankSpec::full() { return RankSpec{}; }

std::size_t RankSpec::resolve(std::span<const double> energies, std::size_t mode,
                              std::size_t order) const {
    switch (kind_) {
        case Kind::full:
            return energies.size();
        case Kind::exact: {
            if (ranks_.size() != order) {
                throw RankError("RankSpec: got " + std::to_string(ranks_.size()) +
                                " ranks for an order-" + std::to_string(order) + " tensor");
            }
            const std::size_t r = ranks_[mode];
            if (r > energies.size()) {
                throw RankError("rank " + std::to_string(r) + " for mode " +
                                std::to_string(mode) + " exceeds the " +
                                std::to_string(energies.size()) + " available components");
            }
            return r;
        }
        case Kind::energy: {
            double total = 0.0;
            for (double e : energies) total += e;
            if (total <= 0.0) return 1;
            const double target = (1.0 - eps_ * eps_) * total;
            double acc = 0.0;
            for (std::size_t r = 0; r < energies.size(); ++r) {
                acc += energies[r];
                if (acc >= target) return r + 1;
            }
            return energies.size();
        }
    }
    return energies.size();
}

namespace {

/// Negates factor column j of mode d together with the matching core slice,
/// whenever the reference core entry (all other indices clamped to j) is
/// negative. Keeps the reconstruction invariant while making the order-2
/// core diagonal nonnegative.
void normalize_core_signs(std::vector<DenseMatrix>& factors, DenseTensor& core) {
    const std::size_t order = core.order();
    const auto& rshape = core.shape();
    for (std::size_t d = 1; d < order; ++d) {
        std::size_t inner = 1;
        for (std::size_t e = 0; e < d; ++e) inner *= rshape[e];
        const std::size_t nd = rshape[d];
        std::size_t outer = 1;
        for (std::size_t e = d + 1; e < order; ++e) outer *= rshape[e];

        for (std::size_t j = 0; j < nd; ++j) {
            std::vector<std::size_t> ref(order);
            for (std::size_t e = 0; e < order; ++e) ref[e] = std::min(j, rshape[e] - 1);
            ref[d] = j;
            if (core.at(std::span<const std::size_t>(ref)) >= 0.0) continue;

            auto fm = as_eigen(factors[d]);
            fm.col(static_cast<Eigen::Index>(j)) = -fm.col(static_cast<Eigen::Index>(j));
            for (std::size_t o = 0; o < outer; ++o) {
                double* slice = core.data() + (j + o * nd) * inner;
                for (std::size_t i = 0; i < inner; ++i) slice[i] = -slice[i];
            }
        }
    }
}

}  // namespace

MlsvdFactors mlsvd(const DenseTensor& t, const RankSpec& spec) {
    if (frobenius_norm(t) == 0.0) throw ValueError("mlsvd: zero tensor");
    const std::size_t order = t.order();

    std::vector<DenseMatrix> factors(order);
    detail::for_each_mode(order, [&](std::size_t d) {
        const ThinSvd svd = thin_svd_full(unfold(t, d));
        std::vector<double> energies(svd.s.size());
        for (std::size_t i = 0; i < svd.s.size(); ++i) energies[i] = svd.s[i] * svd.s[i];
        const std::size_t rank = spec.resolve(energies, d, order);

        DenseMatrix u(svd.u.rows(), rank);
        as_eigen(u) = as_eigen(svd.u).leftCols(static_cast<Eigen::Index>(rank));
        factors[d] = std::move(u);
    });

    DenseTensor core = t;
    for (std::size_t d = 0; d < order; ++d) {
        core = mode_product_transposed(core, factors[d], d);
    }
    normalize_core_signs(factors, core);
    return {std::move(factors), std::move(core)};
}

DenseTensor reconstruct(const MlsvdFactors& f) {
    if (f.factors.size() != f.core.order()) {
        throw ShapeError("reconstruct: factor count does not match core order");
    }
    DenseTensor t = f.core;
    for (std::size_t d = 0; d < f.factors.size(); ++d) {
        t = mode_product(t, f.factors[d], d);
    }
    return t;
}

std::vector<double> lanczos_residuals(const MlsvdFactors& f, const DenseTensor& t) {
    const std::size_t order = t.order();
    if (f.factors.size() != order || f.core.order() != order) {
        throw ShapeError("lanczos_residuals: factor/tensor order mismatch");
    }
    const double scale = frobenius_norm(t);
    std::vector<double> residuals(order);
    for (std::size_t d = 0; d < order; ++d) {
        // lhs = S x_d U_d; rhs = t contracted with U_e^T on every mode e != d.
        DenseTensor lhs = mode_product(f.core, f.factors[d], d);
        DenseTensor rhs = t;
        for (std::size_t e = 0; e < order; ++e) {
            if (e != d) rhs = mode_product_transposed(rhs, f.factors[e], e);
        }
        if (lhs.shape() != rhs.shape()) {
            throw ShapeError("lanczos_residuals: inconsistent factor shapes");
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < lhs.size(); ++i) {
            const double diff = lhs[i] - rhs[i];
            acc += diff * diff;
        }
        residuals[d] = scale > 0.0 ? std::sqrt(acc) / scale : std::sqrt(acc);
    }
    return residuals;
}

std::vector<double> gram_diagonality(const DenseTensor& core) {
    std::vector<double> ratios(core.order());
    for (std::size_t d = 0; d < core.order(); ++d) {
        const DenseMatrix s = unfold(core, d);
        const auto es = as_eigen(s);
        const Eigen::MatrixXd gram = es * es.transpose();
        const double total = gram.norm();
        const double diag = gram.diagonal().norm();
        const double off_sq = std::max(0.0, total * total - diag * diag);
        ratios[d] = total > 0.0 ? std::sqrt(off_sq) / total : 0.0;
    }
    return ratios;
}

double superdiagonality(const DenseTensor& core) {
    const double total = frobenius_norm(core);
    if (total == 0.0) return 0.0;
    std::size_t r = core.extent(0);
    for (std::size_t d = 1; d < core.order(); ++d) r = std::min(r, core.extent(d));
    double diag_sq = 0.0;
    std::vector<std::size_t> idx(core.order());
    for (std::size_t i = 0; i < r; ++i) {
        std::fill(idx.begin(), idx.end(), i);
        const double v = core.at(std::span<const std::size_t>(idx));
        diag_sq += v * v;
    }
    return diag_sq / (total * total);
}

std::vector<double> core_gram_diagonal(const DenseTensor& core, std::size_t mode) {
    const DenseMatrix s = unfold(core, mode);
    const auto es = as_eigen(s);
    std::vector<double> diag(s.rows());
    for (std::size_t i = 0; i < s.rows(); ++i) {
        diag[i] = es.row(static_cast<Eigen::Index>(i)).squaredNorm();
    }
    return diag;
}

}  // namespace kmlsvd
