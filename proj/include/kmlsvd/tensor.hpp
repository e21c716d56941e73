#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "kmlsvd/alloc_stats.hpp"
#include "kmlsvd/errors.hpp"

namespace kmlsvd {

namespace detail {

/// Owning double buffer that reports its size to alloc_stats.
class TrackedStorage {
public:
    TrackedStorage() = default;

    TrackedStorage(std::size_t n, alloc_stats::Kind kind)
        : values_(n), registered_(n), kind_(kind) {
        alloc_stats::record_alloc(registered_, kind_);
    }

    TrackedStorage(std::vector<double> values, alloc_stats::Kind kind)
        : values_(std::move(values)), registered_(values_.size()), kind_(kind) {
        alloc_stats::record_alloc(registered_, kind_);
    }

    TrackedStorage(const TrackedStorage& other)
        : values_(other.values_), registered_(other.registered_), kind_(other.kind_) {
        alloc_stats::record_alloc(registered_, kind_);
    }

    TrackedStorage(TrackedStorage&& other) noexcept
        : values_(std::move(other.values_)), registered_(other.registered_), kind_(other.kind_) {
        other.registered_ = 0;
    }

    TrackedStorage& operator=(const TrackedStorage& other) {
        if (this != &other) {
            alloc_stats::record_free(registered_);
            values_ = other.values_;
            registered_ = other.registered_;
            kind_ = other.kind_;
            alloc_stats::record_alloc(registered_, kind_);
        }
        return *this;
    }

    TrackedStorage& operator=(TrackedStorage&& other) noexcept {
        if (this != &other) {
            alloc_stats::record_free(registered_);
            values_ = std::move(other.values_);
            registered_ = other.registered_;
            kind_ = other.kind_;
            other.registered_ = 0;
        }
        return *this;
    }

    ~TrackedStorage() { alloc_stats::record_free(registered_); }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
    std::size_t registered_ = 0;
    alloc_stats::Kind kind_ = alloc_stats::Kind::matrix;
};

}  // namespace detail

/// Dense real matrix, column-major storage.
class DenseMatrix {
public:
    DenseMatrix() = default;

    /// Zero-initialized rows x cols matrix.
    DenseMatrix(std::size_t rows, std::size_t cols);

    /// Takes ownership of column-major data. Throws LengthError on a size
    /// mismatch and ValueError on non-finite entries.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    /// Row-by-row construction, convenient for literals in tests and tools.
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return rows_ * cols_; }

    double& operator()(std::size_t i, std::size_t j) { return storage_.values()[i + j * rows_]; }
    double operator()(std::size_t i, std::size_t j) const { return storage_.values()[i + j * rows_]; }

    double* data() { return storage_.values().data(); }
    const double* data() const { return storage_.values().data(); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    detail::TrackedStorage storage_;
};

/// Dense real tensor of order >= 1 with column-major storage: the first
/// index varies fastest, so vec() of the tensor is the data buffer itself.
class DenseTensor {
public:
    DenseTensor() = default;

    /// Takes ownership of column-major data. Throws ShapeError on an empty
    /// or zero-extent shape, LengthError if the data length does not match
    /// the shape product and ValueError on non-finite entries.
    DenseTensor(std::vector<std::size_t> shape, std::vector<double> data);

    static DenseTensor zeros(std::vector<std::size_t> shape);

    std::size_t order() const { return shape_.size(); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t extent(std::size_t mode) const { return shape_[mode]; }
    std::size_t size() const;

    double& operator[](std::size_t flat) { return storage_.values()[flat]; }
    double operator[](std::size_t flat) const { return storage_.values()[flat]; }

    /// Multi-index access; idx.size() must equal order().
    double& at(std::span<const std::size_t> idx);
    double at(std::span<const std::size_t> idx) const;
    double& at(std::initializer_list<std::size_t> idx) { return at(std::span(idx.begin(), idx.size())); }
    double at(std::initializer_list<std::size_t> idx) const { return at(std::span(idx.begin(), idx.size())); }

    double* data() { return storage_.values().data(); }
    const double* data() const { return storage_.values().data(); }

private:
    std::vector<std::size_t> shape_;
    detail::TrackedStorage storage_;
};

// Eigen interop. Maps alias the column-major buffers directly; mapping a
// temporary would dangle, so rvalues are rejected.
Eigen::Map<const Eigen::MatrixXd> as_eigen(const DenseMatrix& m);
Eigen::Map<Eigen::MatrixXd> as_eigen(DenseMatrix& m);
Eigen::Map<const Eigen::MatrixXd> as_eigen(DenseMatrix&& m) = delete;
DenseMatrix from_eigen(const Eigen::MatrixXd& e);

std::size_t shape_product(std::span<const std::size_t> shape);

/// Mode-d unfolding (0-based mode): rows index mode d, columns index the
/// remaining modes with the smaller mode index varying fastest. Under this
/// convention vec(unfold(t, 0)) == vec(t).
DenseMatrix unfold(const DenseTensor& t, std::size_t mode);

/// Inverse of unfold: fold(unfold(t, d), d, t.shape()) == t exactly.
DenseTensor fold(const DenseMatrix& m, std::size_t mode, std::span<const std::size_t> shape);

/// Column-major flattening and its inverse.
std::vector<double> vectorize(const DenseTensor& t);
DenseTensor devectorize(std::vector<double> values, std::span<const std::size_t> shape);

/// Kronecker product of the list in written order: A1 (x) A2 (x) ... (x) Aq.
/// Materializes the product; higher layers use mode products instead.
DenseMatrix kron_seq(std::span<const DenseMatrix> ms);

/// Mode-d product: unfold(result, d) == m * unfold(t, d).
DenseTensor mode_product(const DenseTensor& t, const DenseMatrix& m, std::size_t mode);

/// Mode-d product with the transpose: unfold(result, d) == m^T * unfold(t, d).
DenseTensor mode_product_transposed(const DenseTensor& t, const DenseMatrix& m, std::size_t mode);

DenseMatrix transposed(const DenseMatrix& m);

double frobenius_norm(const DenseTensor& t);
double frobenius_norm(const DenseMatrix& m);
double dot(const DenseTensor& a, const DenseTensor& b);

}  // namespace kmlsvd
