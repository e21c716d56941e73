#include "kmlsvd/tensor.hpp"

#include <cmath>
#include <cstring>
#include <string>

namespace kmlsvd {

namespace {

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw ValueError(std::string(what) + ": non-finite entry");
        }
    }
}

std::size_t checked_shape_product(std::span<const std::size_t> shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have order >= 1");
    std::size_t n = 1;
    for (std::size_t ext : shape) {
        if (ext == 0) throw ShapeError("tensor extents must be >= 1");
        n *= ext;
    }
    return n;
}

void check_mode(std::size_t mode, std::size_t order) {
    if (mode >= order) {
        throw ShapeError("mode " + std::to_string(mode) + " out of range for order " +
                         std::to_string(order));
    }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), storage_(rows * cols, alloc_stats::Kind::matrix) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols) {
    if (data.size() != rows * cols) {
        throw LengthError("matrix data length " + std::to_string(data.size()) +
                          " does not match " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    check_finite(data, "matrix");
    storage_ = detail::TrackedStorage(std::move(data), alloc_stats::Kind::matrix);
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    DenseMatrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        if (row.size() != c) throw ShapeError("ragged row list");
        std::size_t j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    check_finite({m.data(), m.size()}, "matrix");
    return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseTensor::DenseTensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)) {
    const std::size_t n = checked_shape_product(shape_);
    if (data.size() != n) {
        throw LengthError("tensor data length " + std::to_string(data.size()) +
                          " does not match shape product " + std::to_string(n));
    }
    check_finite(data, "tensor");
    storage_ = detail::TrackedStorage(std::move(data), alloc_stats::Kind::tensor);
}

DenseTensor DenseTensor::zeros(std::vector<std::size_t> shape) {
    DenseTensor t;
    t.shape_ = std::move(shape);
    const std::size_t n = checked_shape_product(t.shape_);
    t.storage_ = detail::TrackedStorage(n, alloc_stats::Kind::tensor);
    return t;
}

std::size_t DenseTensor::size() const { return shape_product(shape_); }

namespace {

std::size_t flat_index(std::span<const std::size_t> shape, std::span<const std::size_t> idx) {
    if (idx.size() != shape.size()) throw ShapeError("index order does not match tensor order");
    std::size_t flat = 0;
    std::size_t stride = 1;
    for (std::size_t d = 0; d < shape.size(); ++d) {
        if (idx[d] >= shape[d]) throw ShapeError("index out of bounds");
        flat += idx[d] * stride;
        stride *= shape[d];
    }
    return flat;
}

}  // namespace

double& DenseTensor::at(std::span<const std::size_t> idx) {
    return storage_.values()[flat_index(shape_, idx)];
}

double DenseTensor::at(std::span<const std::size_t> idx) const {
    return storage_.values()[flat_index(shape_, idx)];
}

Eigen::Map<const Eigen::MatrixXd> as_eigen(const DenseMatrix& m) {
    return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

Eigen::Map<Eigen::MatrixXd> as_eigen(DenseMatrix& m) {
    return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

DenseMatrix from_eigen(const Eigen::MatrixXd& e) {
    DenseMatrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
    as_eigen(m) = e;
    return m;
}

std::size_t shape_product(std::span<const std::size_t> shape) {
    std::size_t n = 1;
    for (std::size_t ext : shape) n *= ext;
    return n;
}

DenseMatrix unfold(const DenseTensor& t, std::size_t mode) {
    check_mode(mode, t.order());
    const auto& shape = t.shape();
    std::size_t inner = 1;
    for (std::size_t d = 0; d < mode; ++d) inner *= shape[d];
    const std::size_t nd = shape[mode];
    std::size_t outer = 1;
    for (std::size_t d = mode + 1; d < t.order(); ++d) outer *= shape[d];

    DenseMatrix m(nd, inner * outer);
    if (mode == 0) {
        // Mode-0 unfolding is a plain reshape of the column-major buffer.
        std::memcpy(m.data(), t.data(), sizeof(double) * t.size());
        return m;
    }
    const double* src = t.data();
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < nd; ++j) {
            const double* chunk = src + (j + o * nd) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
                m(j, i + o * inner) = chunk[i];
            }
        }
    }
    return m;
}

DenseTensor fold(const DenseMatrix& m, std::size_t mode, std::span<const std::size_t> shape) {
    check_mode(mode, shape.size());
    const std::size_t n = checked_shape_product(shape);
    std::size_t inner = 1;
    for (std::size_t d = 0; d < mode; ++d) inner *= shape[d];
    const std::size_t nd = shape[mode];
    const std::size_t outer = n / (inner * nd);
    if (m.rows() != nd || m.cols() != inner * outer) {
        throw ShapeError("matrix dimensions inconsistent with fold target shape");
    }

    DenseTensor t = DenseTensor::zeros({shape.begin(), shape.end()});
    if (mode == 0) {
        std::memcpy(t.data(), m.data(), sizeof(double) * n);
        return t;
    }
    double* dst = t.data();
    for (std::size_t o = 0; o < outer; ++o) {
        for (std::size_t j = 0; j < nd; ++j) {
            double* chunk = dst + (j + o * nd) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
                chunk[i] = m(j, i + o * inner);
            }
        }
    }
    return t;
}

std::vector<double> vectorize(const DenseTensor& t) {
    return {t.data(), t.data() + t.size()};
}

DenseTensor devectorize(std::vector<double> values, std::span<const std::size_t> shape) {
    return DenseTensor({shape.begin(), shape.end()}, std::move(values));
}

namespace {

DenseMatrix kron_pair(const DenseMatrix& a, const DenseMatrix& b) {
    DenseMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ja = 0; ja < a.cols(); ++ja) {
        for (std::size_t ia = 0; ia < a.rows(); ++ia) {
            const double s = a(ia, ja);
            for (std::size_t jb = 0; jb < b.cols(); ++jb) {
                for (std::size_t ib = 0; ib < b.rows(); ++ib) {
                    out(ia * b.rows() + ib, ja * b.cols() + jb) = s * b(ib, jb);
                }
            }
        }
    }
    return out;
}

}  // namespace

DenseMatrix kron_seq(std::span<const DenseMatrix> ms) {
    if (ms.empty()) throw ValueError("kron_seq: empty factor list");
    // Right fold, so kron_seq({A, B, C}) == kron_seq({A, kron_seq({B, C})})
    // holds bit-exactly.
    DenseMatrix acc = ms.back();
    for (std::size_t k = ms.size() - 1; k-- > 0;) {
        acc = kron_pair(ms[k], acc);
    }
    return acc;
}

namespace {

enum class ProductKind { plain, transposed };

DenseTensor mode_product_impl(const DenseTensor& t, const DenseMatrix& m, std::size_t mode,
                              ProductKind kind) {
    check_mode(mode, t.order());
    const std::size_t nd = t.extent(mode);
    const std::size_t in_dim = kind == ProductKind::plain ? m.cols() : m.rows();
    const std::size_t out_dim = kind == ProductKind::plain ? m.rows() : m.cols();
    if (in_dim != nd) {
        throw ShapeError("mode_product: matrix contraction length " + std::to_string(in_dim) +
                         " does not match extent " + std::to_string(nd) + " of mode " +
                         std::to_string(mode));
    }
    if (out_dim == 0) throw ShapeError("mode_product: matrix has no output dimension");

    const auto& shape = t.shape();
    std::size_t inner = 1;
    for (std::size_t d = 0; d < mode; ++d) inner *= shape[d];
    std::size_t outer = 1;
    for (std::size_t d = mode + 1; d < t.order(); ++d) outer *= shape[d];

    std::vector<std::size_t> out_shape = shape;
    out_shape[mode] = out_dim;
    DenseTensor out = DenseTensor::zeros(std::move(out_shape));

    const auto em = as_eigen(m);
    for (std::size_t o = 0; o < outer; ++o) {
        Eigen::Map<const Eigen::MatrixXd> src(t.data() + o * inner * nd,
                                              static_cast<Eigen::Index>(inner),
                                              static_cast<Eigen::Index>(nd));
        Eigen::Map<Eigen::MatrixXd> dst(out.data() + o * inner * out_dim,
                                        static_cast<Eigen::Index>(inner),
                                        static_cast<Eigen::Index>(out_dim));
        if (kind == ProductKind::plain) {
            dst.noalias() = src * em.transpose();
        } else {
            dst.noalias() = src * em;
        }
    }
    return out;
}

}  // namespace

DenseTensor mode_product(const DenseTensor& t, const DenseMatrix& m, std::size_t mode) {
    return mode_product_impl(t, m, mode, ProductKind::plain);
}

DenseTensor mode_product_transposed(const DenseTensor& t, const DenseMatrix& m, std::size_t mode) {
    return mode_product_impl(t, m, mode, ProductKind::transposed);
}

DenseMatrix transposed(const DenseMatrix& m) {
    DenseMatrix out(m.cols(), m.rows());
    as_eigen(out) = as_eigen(m).transpose();
    return out;
}

double frobenius_norm(const DenseTensor& t) {
    return Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size())).norm();
}

double frobenius_norm(const DenseMatrix& m) {
    return as_eigen(m).norm();
}

double dot(const DenseTensor& a, const DenseTensor& b) {
    if (a.shape() != b.shape()) throw ShapeError("dot: shape mismatch");
    Eigen::Map<const Eigen::VectorXd> va(a.data(), static_cast<Eigen::Index>(a.size()));
    Eigen::Map<const Eigen::VectorXd> vb(b.data(), static_cast<Eigen::Index>(b.size()));
    return va.dot(vb);
}

}  // namespace kmlsvd
