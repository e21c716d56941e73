#include "kmlsvd/kernels.hpp"

#include <cmath>
#include <string>

#include "kmlsvd/linalg.hpp"

namespace kmlsvd {

namespace {

void check_budget(std::size_t entries, std::size_t budget) {
    if (entries > budget) {
        throw BudgetError("materializing " + std::to_string(entries) +
                          " entries exceeds the budget of " + std::to_string(budget));
    }
}

std::string index_string(const DenseTensor& t, std::size_t flat) {
    std::string s = "(";
    for (std::size_t d = 0; d < t.order(); ++d) {
        if (d > 0) s += ",";
        s += std::to_string(flat % t.extent(d));
        flat /= t.extent(d);
    }
    return s + ")";
}

void apply_elementwise(DenseTensor& t, const std::function<double(double)>& f,
                       const char* what) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double v = f(t[i]);
        if (!std::isfinite(v)) {
            throw ValueError(std::string(what) + ": non-finite value at entry " +
                             index_string(t, i));
        }
        t[i] = v;
    }
}

std::vector<DenseMatrix> all_unfoldings(const DenseTensor& x) {
    std::vector<DenseMatrix> u;
    u.reserve(x.order());
    for (std::size_t d = 0; d < x.order(); ++d) u.push_back(unfold(x, d));
    return u;
}

/// Descending-mode factor list [X_(D), ..., X_(1)] for the compatibility
/// system, plus the min-norm solve against rhs.
KronLstsqResult solve_compatibility(const DenseTensor& x, std::span<const double> rhs) {
    std::vector<DenseMatrix> factors;
    factors.reserve(x.order());
    for (std::size_t d = x.order(); d-- > 0;) factors.push_back(unfold(x, d));
    return min_norm_lstsq_kron(factors, rhs);
}

std::vector<std::size_t> compat_shape(const DenseTensor& x) {
    std::vector<std::size_t> shape(x.order());
    const std::size_t total = x.size();
    for (std::size_t d = 0; d < x.order(); ++d) shape[d] = total / x.extent(d);
    return shape;
}

void check_shared_width(std::span<const DenseMatrix> inputs, const char* what) {
    if (inputs.empty()) throw ValueError(std::string(what) + ": empty input list");
    const std::size_t m = inputs.front().cols();
    for (const DenseMatrix& x : inputs) {
        if (x.cols() != m) {
            throw ShapeError(std::string(what) + ": inputs must share the feature width");
        }
    }
}

/// Accumulated column products over all but the last input:
/// P[i_1,...,i_{D-1}, m] = prod_{d<D} X_d[i_d, m].
DenseTensor column_product_expansion(std::span<const DenseMatrix> inputs, std::size_t budget) {
    const std::size_t m = inputs.front().cols();
    DenseTensor p({m}, std::vector<double>(m, 1.0));
    for (std::size_t d = 0; d + 1 < inputs.size(); ++d) {
        const DenseMatrix& x = inputs[d];
        const std::size_t block = p.size() / m;
        check_budget(block * x.rows() * m, budget);

        std::vector<std::size_t> shape(p.shape().begin(), p.shape().end() - 1);
        shape.push_back(x.rows());
        shape.push_back(m);
        DenseTensor next = DenseTensor::zeros(std::move(shape));
        for (std::size_t c = 0; c < m; ++c) {
            const double* src = p.data() + c * block;
            for (std::size_t i = 0; i < x.rows(); ++i) {
                const double scale = x(i, c);
                double* dst = next.data() + (i + c * x.rows()) * block;
                for (std::size_t b = 0; b < block; ++b) dst[b] = src[b] * scale;
            }
        }
        p = std::move(next);
    }
    return p;
}

}  // namespace

DenseTensor kernel_tensor(std::span<const DenseMatrix> features, const DenseTensor& compat,
                          std::size_t budget) {
    if (features.size() != compat.order()) {
        throw ShapeError("kernel_tensor: feature count does not match compatibility order");
    }
    for (std::size_t d = 0; d < features.size(); ++d) {
        if (features[d].cols() != compat.extent(d)) {
            throw ShapeError("kernel_tensor: feature " + std::to_string(d) +
                             " has width " + std::to_string(features[d].cols()) +
                             ", compatibility extent is " + std::to_string(compat.extent(d)));
        }
    }
    std::size_t entries = compat.size();
    check_budget(entries, budget);
    DenseTensor k = compat;
    for (std::size_t d = 0; d < features.size(); ++d) {
        entries = entries / compat.extent(d) * features[d].rows();
        check_budget(entries, budget);
        k = mode_product(k, features[d], d);
    }
    return k;
}

CompatibilityResult min_norm_compatibility(const DenseTensor& x) {
    if (frobenius_norm(x) == 0.0) throw ValueError("min_norm_compatibility: zero tensor");
    KronLstsqResult r = solve_compatibility(x, std::span(x.data(), x.size()));
    return {devectorize(std::move(r.x), compat_shape(x)), r.residual};
}

DenseTensor polynomial_kernel(std::span<const DenseMatrix> inputs, unsigned degree,
                              std::size_t budget) {
    check_shared_width(inputs, "polynomial_kernel");
    if (degree < 1) throw ValueError("polynomial_kernel: degree must be >= 1");

    std::size_t out = 1;
    for (const DenseMatrix& x : inputs) out *= x.rows();
    check_budget(out, budget);

    const DenseTensor p = column_product_expansion(inputs, budget);
    DenseTensor k = mode_product(p, inputs.back(), p.order() - 1);
    if (degree > 1) {
        apply_elementwise(
            k,
            [degree](double v) {
                double acc = v;
                for (unsigned e = 1; e < degree; ++e) acc *= v;
                return acc;
            },
            "polynomial_kernel");
    }
    return k;
}

DenseTensor exponential_kernel(std::span<const DenseMatrix> inputs, std::size_t budget) {
    DenseTensor k = polynomial_kernel(inputs, 1, budget);
    apply_elementwise(k, [](double v) { return std::exp(v); }, "exponential_kernel");
    return k;
}

ElementwiseKernelResult elementwise_kernel(const DenseTensor& x,
                                           const std::function<double(double)>& f) {
    if (frobenius_norm(x) == 0.0) throw ValueError("elementwise_kernel: zero tensor");
    DenseTensor k = x;
    apply_elementwise(k, f, "elementwise_kernel");
    KronLstsqResult r = solve_compatibility(x, std::span(k.data(), k.size()));
    return {std::move(k), devectorize(std::move(r.x), compat_shape(x)), r.residual};
}

KernelBuild build_kernel(const KernelSpec& spec, std::size_t budget) {
    return std::visit(
        [budget](const auto& s) -> KernelBuild {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GenericKernelSpec>) {
                return {kernel_tensor(s.features, s.compat, budget), std::nullopt, std::nullopt};
            } else if constexpr (std::is_same_v<T, LinearKernelSpec>) {
                CompatibilityResult c = min_norm_compatibility(s.data);
                DenseTensor k = kernel_tensor(all_unfoldings(s.data), c.compat, budget);
                return {std::move(k), std::move(c.compat), c.residual};
            } else if constexpr (std::is_same_v<T, PolynomialKernelSpec>) {
                return {polynomial_kernel(s.inputs, s.degree, budget), std::nullopt,
                        std::nullopt};
            } else if constexpr (std::is_same_v<T, ExponentialKernelSpec>) {
                return {exponential_kernel(s.inputs, budget), std::nullopt, std::nullopt};
            } else {
                ElementwiseKernelResult r = elementwise_kernel(s.data, s.fn);
                return {std::move(r.kernel), std::move(r.compat), r.residual};
            }
        },
        spec);
}

}  // namespace kmlsvd
