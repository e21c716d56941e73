#include "kmlsvd/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kmlsvd {

namespace {

/// Largest-magnitude entry of each column made positive; ties go to the
/// lowest row index. `partner`, when present, absorbs the compensating flip.
void fix_column_signs(Eigen::MatrixXd& m, Eigen::MatrixXd* partner) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        Eigen::Index pivot = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const double mag = std::abs(m(i, j));
            if (mag > best) {
                best = mag;
                pivot = i;
            }
        }
        if (m(pivot, j) < 0.0) {
            m.col(j) = -m.col(j);
            if (partner) partner->col(j) = -partner->col(j);
        }
    }
}

ThinSvd thin_svd_impl(const DenseMatrix& a, double rank_tol, bool keep_zeros) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(as_eigen(a),
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double s0 = sv.size() > 0 ? sv(0) : 0.0;

    Eigen::Index r = 0;
    if (keep_zeros) {
        r = sv.size();
    } else {
        while (r < sv.size() && sv(r) > rank_tol * s0 && sv(r) > 0.0) ++r;
    }

    Eigen::MatrixXd u = svd.matrixU().leftCols(r);
    Eigen::MatrixXd v = svd.matrixV().leftCols(r);
    fix_column_signs(u, &v);

    ThinSvd out;
    out.u = from_eigen(u);
    out.v = from_eigen(v);
    out.s.assign(sv.data(), sv.data() + r);
    return out;
}

}  // namespace

ThinSvd thin_svd(const DenseMatrix& a, double rank_tol) {
    return thin_svd_impl(a, rank_tol, false);
}

ThinSvd thin_svd_full(const DenseMatrix& a) {
    return thin_svd_impl(a, 0.0, true);
}

SymEig sym_eig(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("sym_eig: matrix must be square");
    const auto ea = as_eigen(a);
    const double norm = ea.norm();
    const double asym = (ea - ea.transpose()).norm();
    if (asym > 1e-10 * norm) {
        throw NumericsError("sym_eig: input is not symmetric (deviation " +
                            std::to_string(asym) + ")");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ea);
    if (es.info() != Eigen::Success) throw NumericsError("sym_eig: eigensolver failed");

    // Descending order, stable across ties so that e.g. the identity maps
    // to itself.
    const Eigen::Index n = ea.rows();
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    std::stable_sort(perm.begin(), perm.end(), [&](Eigen::Index a, Eigen::Index b) {
        return es.eigenvalues()(a) > es.eigenvalues()(b);
    });
    Eigen::MatrixXd vecs(n, n);
    Eigen::VectorXd vals(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        vals(i) = es.eigenvalues()(perm[static_cast<std::size_t>(i)]);
        vecs.col(i) = es.eigenvectors().col(perm[static_cast<std::size_t>(i)]);
    }
    fix_column_signs(vecs, nullptr);

    SymEig out;
    out.vectors = from_eigen(vecs);
    out.values.assign(vals.data(), vals.data() + n);
    return out;
}

DenseMatrix pinv(const DenseMatrix& a, double tol) {
    const ThinSvd f = thin_svd(a, tol);
    const Eigen::Index r = static_cast<Eigen::Index>(f.s.size());
    if (r == 0) return DenseMatrix(a.cols(), a.rows());
    Eigen::VectorXd inv_s(r);
    for (Eigen::Index i = 0; i < r; ++i) inv_s(i) = 1.0 / f.s[static_cast<std::size_t>(i)];
    return from_eigen(as_eigen(f.v) * inv_s.asDiagonal() * as_eigen(f.u).transpose());
}

KronLstsqResult min_norm_lstsq_kron(std::span<const DenseMatrix> factors,
                                    std::span<const double> b, double tol) {
    if (factors.empty()) throw ValueError("min_norm_lstsq_kron: empty factor list");
    const std::size_t q = factors.size();

    // Tensor mode k corresponds to factor A_{q-k} (vec is mode-1 fastest).
    std::vector<std::size_t> row_shape(q);
    for (std::size_t k = 0; k < q; ++k) row_shape[k] = factors[q - 1 - k].rows();
    if (b.size() != shape_product(row_shape)) {
        throw ShapeError("min_norm_lstsq_kron: rhs length " + std::to_string(b.size()) +
                         " does not match factor row product");
    }

    DenseTensor x = devectorize({b.begin(), b.end()}, row_shape);
    for (std::size_t k = 0; k < q; ++k) {
        x = mode_product(x, pinv(factors[q - 1 - k], tol), k);
    }

    DenseTensor back = x;
    for (std::size_t k = 0; k < q; ++k) {
        back = mode_product(back, factors[q - 1 - k], k);
    }
    double res_sq = 0.0;
    for (std::size_t i = 0; i < back.size(); ++i) {
        const double d = back[i] - b[i];
        res_sq += d * d;
    }

    KronLstsqResult out;
    out.x = vectorize(x);
    out.residual = std::sqrt(res_sq);
    return out;
}

namespace {

DenseMatrix psd_eig_power(const DenseMatrix& g, double tol, double exponent,
                          const char* what) {
    const SymEig eig = sym_eig(g);
    const double norm = frobenius_norm(g);
    const double lmax = eig.values.empty() ? 0.0 : eig.values.front();
    const double lmin = eig.values.empty() ? 0.0 : eig.values.back();
    if (lmin < -1e-10 * norm) {
        throw NumericsError(std::string(what) + ": input is indefinite (min eigenvalue " +
                            std::to_string(lmin) + ")");
    }
    const Eigen::Index n = static_cast<Eigen::Index>(g.rows());
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lambda = eig.values[static_cast<std::size_t>(i)];
        d(i) = lambda > tol * lmax ? std::pow(lambda, exponent) : 0.0;
    }
    const auto v = as_eigen(eig.vectors);
    return from_eigen(v * d.asDiagonal() * v.transpose());
}

}  // namespace

DenseMatrix psd_sqrt_inv(const DenseMatrix& g, double tol) {
    return psd_eig_power(g, tol, -0.5, "psd_sqrt_inv");
}

DenseMatrix psd_sqrt(const DenseMatrix& g, double tol) {
    return psd_eig_power(g, tol, 0.5, "psd_sqrt");
}

}  // namespace kmlsvd
