#pragma once

// Independent reference implementations used to verify the library. These
// deliberately avoid the code paths under test: index arithmetic is done by
// explicit multi-index enumeration, eigenvalues by a hand-rolled Jacobi
// sweep, and Kronecker-structured operators by full materialization.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "kmlsvd/rng.hpp"
#include "kmlsvd/tensor.hpp"

namespace oracles {

/// Steps a multi-index odometer-style (first index fastest). Returns false
/// after the last combination.
inline bool next_index(std::vector<std::size_t>& idx, const std::vector<std::size_t>& shape) {
    for (std::size_t d = 0; d < shape.size(); ++d) {
        if (++idx[d] < shape[d]) return true;
        idx[d] = 0;
    }
    return false;
}

/// Mode-d unfolding by brute-force enumeration of every index tuple.
inline kmlsvd::DenseMatrix unfold_by_enumeration(const kmlsvd::DenseTensor& t, std::size_t mode) {
    const auto& shape = t.shape();
    std::size_t cols = 1;
    for (std::size_t d = 0; d < shape.size(); ++d) {
        if (d != mode) cols *= shape[d];
    }
    kmlsvd::DenseMatrix m(shape[mode], cols);
    std::vector<std::size_t> idx(shape.size(), 0);
    do {
        std::size_t col = 0;
        std::size_t stride = 1;
        for (std::size_t d = 0; d < shape.size(); ++d) {
            if (d == mode) continue;
            col += idx[d] * stride;
            stride *= shape[d];
        }
        m(idx[mode], col) = t.at(std::span<const std::size_t>(idx));
    } while (next_index(idx, shape));
    return m;
}

/// Mode-d product by direct summation over the contracted index.
inline kmlsvd::DenseTensor mode_product_by_loops(const kmlsvd::DenseTensor& t,
                                                 const kmlsvd::DenseMatrix& m,
                                                 std::size_t mode) {
    std::vector<std::size_t> out_shape = t.shape();
    out_shape[mode] = m.rows();
    kmlsvd::DenseTensor out = kmlsvd::DenseTensor::zeros(out_shape);
    std::vector<std::size_t> idx(out_shape.size(), 0);
    do {
        double sum = 0.0;
        std::vector<std::size_t> src = idx;
        for (std::size_t c = 0; c < t.extent(mode); ++c) {
            src[mode] = c;
            sum += m(idx[mode], c) * t.at(std::span<const std::size_t>(src));
        }
        out.at(std::span<const std::size_t>(idx)) = sum;
    } while (next_index(idx, out_shape));
    return out;
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (descending).
inline std::vector<double> jacobi_eigenvalues(kmlsvd::DenseMatrix a) {
    const std::size_t n = a.rows();
    for (std::size_t sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = a(i, i);
    std::sort(vals.begin(), vals.end(), std::greater<>());
    return vals;
}

/// Minimum-norm least-squares solution of the materialized Kronecker system,
/// via Eigen's SVD directly.
inline Eigen::VectorXd kron_lstsq_materialized(std::span<const kmlsvd::DenseMatrix> factors,
                                               const Eigen::VectorXd& b) {
    const kmlsvd::DenseMatrix big = kmlsvd::kron_seq(factors);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(kmlsvd::as_eigen(big),
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-12);
    return svd.solve(b);
}

inline kmlsvd::DenseMatrix random_matrix(std::size_t rows, std::size_t cols, kmlsvd::Lcg64& rng) {
    kmlsvd::DenseMatrix m(rows, cols);
    for (std::size_t j = 0; j < cols; ++j)
        for (std::size_t i = 0; i < rows; ++i) m(i, j) = rng.symmetric();
    return m;
}

inline kmlsvd::DenseTensor random_tensor(std::vector<std::size_t> shape, kmlsvd::Lcg64& rng) {
    kmlsvd::DenseTensor t = kmlsvd::DenseTensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.symmetric();
    return t;
}

inline double max_abs_diff(const kmlsvd::DenseMatrix& a, const kmlsvd::DenseMatrix& b) {
    return (kmlsvd::as_eigen(a) - kmlsvd::as_eigen(b)).cwiseAbs().maxCoeff();
}

inline double max_abs_diff(const kmlsvd::DenseTensor& a, const kmlsvd::DenseTensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// Distance between column-space projectors U U^T and V V^T.
inline double projector_distance(const kmlsvd::DenseMatrix& u, const kmlsvd::DenseMatrix& v) {
    const auto eu = kmlsvd::as_eigen(u);
    const auto ev = kmlsvd::as_eigen(v);
    return (eu * eu.transpose() - ev * ev.transpose()).norm();
}

}  // namespace oracles
