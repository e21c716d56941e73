#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kmlsvd/tensor.hpp"
#include "oracles.hpp"

using namespace kmlsvd;

namespace {

DenseTensor iota_tensor(std::vector<std::size_t> shape) {
    DenseTensor t = DenseTensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
    return t;
}

}  // namespace

TEST_CASE("construction enforces the shape and finiteness invariants") {
    CHECK_THROWS_AS(DenseTensor({2, 2}, {1.0, 2.0, 3.0}), LengthError);
    CHECK_THROWS_AS(DenseTensor({}, {}), ShapeError);
    CHECK_THROWS_AS(DenseTensor({2, 0}, {}), ShapeError);
    CHECK_THROWS_AS(DenseTensor({2}, {1.0, std::nan("")}), ValueError);
    CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), LengthError);
    CHECK_THROWS_AS(DenseMatrix(1, 2, {1.0, HUGE_VAL}), ValueError);
}

TEST_CASE("unfold of the 2x2x2 iota tensor") {
    const DenseTensor t = iota_tensor({2, 2, 2});

    const DenseMatrix m0 = unfold(t, 0);
    const DenseMatrix expected0 = DenseMatrix::from_rows({{1, 3, 5, 7}, {2, 4, 6, 8}});
    CHECK(oracles::max_abs_diff(m0, expected0) == 0.0);

    const DenseMatrix m2 = unfold(t, 2);
    const DenseMatrix expected2 = DenseMatrix::from_rows({{1, 2, 3, 4}, {5, 6, 7, 8}});
    CHECK(oracles::max_abs_diff(m2, expected2) == 0.0);

    CHECK_THROWS_AS(unfold(t, 3), ShapeError);
}

TEST_CASE("unfold of an order-1 tensor is the vector itself") {
    const DenseTensor t({3}, {5.0, -1.0, 2.0});
    const DenseMatrix m = unfold(t, 0);
    REQUIRE(m.rows() == 3);
    REQUIRE(m.cols() == 1);
    CHECK(m(0, 0) == 5.0);
    CHECK(m(1, 0) == -1.0);
    CHECK(m(2, 0) == 2.0);
}

TEST_CASE("unfold matches the enumeration oracle on random tensors") {
    Lcg64 rng(1);
    for (const auto& shape :
         {std::vector<std::size_t>{3, 4, 2}, {2, 3, 4, 2}, {5, 2}, {2, 2, 2, 2, 3}}) {
        const DenseTensor t = oracles::random_tensor(shape, rng);
        for (std::size_t d = 0; d < t.order(); ++d) {
            CHECK(oracles::max_abs_diff(unfold(t, d), oracles::unfold_by_enumeration(t, d)) == 0.0);
        }
    }
}

TEST_CASE("fold round trips bit-exactly for every mode up to order 5") {
    Lcg64 rng(2);
    for (const auto& shape :
         {std::vector<std::size_t>{2, 2, 2}, {3, 4, 2}, {4}, {2, 3, 2, 3}, {2, 2, 3, 2, 2}}) {
        const DenseTensor t = oracles::random_tensor(shape, rng);
        for (std::size_t d = 0; d < t.order(); ++d) {
            const DenseTensor back = fold(unfold(t, d), d, t.shape());
            CHECK(oracles::max_abs_diff(back, t) == 0.0);
        }
    }
}

TEST_CASE("fold rejects inconsistent dimensions") {
    const DenseMatrix m(2, 4);
    CHECK_THROWS_AS(fold(m, 0, std::vector<std::size_t>{2, 2}), ShapeError);
    CHECK_THROWS_AS(fold(m, 1, std::vector<std::size_t>{2, 3, 2}), ShapeError);
}

TEST_CASE("vectorize is the column-major flattening") {
    const DenseTensor m({2, 2}, {1, 2, 3, 4});  // [[1,3],[2,4]]
    CHECK(m.at({0, 0}) == 1.0);
    CHECK(m.at({1, 0}) == 2.0);
    CHECK(m.at({0, 1}) == 3.0);
    const std::vector<double> v = vectorize(m);
    CHECK(v == std::vector<double>{1, 2, 3, 4});

    const DenseTensor t = devectorize({1, 2, 3, 4, 5, 6, 7, 8}, std::vector<std::size_t>{2, 2, 2});
    CHECK(vectorize(t) == std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8});
    CHECK_THROWS_AS(devectorize({1, 2, 3}, std::vector<std::size_t>{2, 2}), LengthError);
}

TEST_CASE("vectorize agrees with vec of the mode-0 unfolding") {
    Lcg64 rng(3);
    const DenseTensor t = oracles::random_tensor({3, 2, 4}, rng);
    const DenseMatrix m = unfold(t, 0);
    const std::vector<double> v = vectorize(t);
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(v[i] == m.data()[i]);
    }
}

TEST_CASE("kron_seq block structure and scalar case") {
    const DenseMatrix a = DenseMatrix::from_rows({{1, 2}, {3, 4}});
    const std::vector<DenseMatrix> ia{DenseMatrix::identity(2), a};
    const DenseMatrix k = kron_seq(ia);
    const DenseMatrix expected = DenseMatrix::from_rows(
        {{1, 2, 0, 0}, {3, 4, 0, 0}, {0, 0, 1, 2}, {0, 0, 3, 4}});
    CHECK(oracles::max_abs_diff(k, expected) == 0.0);

    const std::vector<DenseMatrix> scalars{DenseMatrix(1, 1, {2.0}), DenseMatrix(1, 1, {3.0})};
    CHECK(kron_seq(scalars)(0, 0) == 6.0);

    CHECK_THROWS_AS(kron_seq(std::vector<DenseMatrix>{}), ValueError);
}

TEST_CASE("kron_seq satisfies the mixed-product property") {
    Lcg64 rng(4);
    const DenseMatrix a = oracles::random_matrix(2, 2, rng);
    const DenseMatrix b = oracles::random_matrix(2, 2, rng);
    const DenseMatrix c = oracles::random_matrix(2, 2, rng);
    const DenseMatrix d = oracles::random_matrix(2, 2, rng);

    const DenseMatrix kab = kron_seq(std::vector{a, b});
    const DenseMatrix kcd = kron_seq(std::vector{c, d});
    const DenseMatrix lhs = from_eigen(as_eigen(kab) * as_eigen(kcd));
    const DenseMatrix ac = from_eigen(as_eigen(a) * as_eigen(c));
    const DenseMatrix bd = from_eigen(as_eigen(b) * as_eigen(d));
    const DenseMatrix rhs = kron_seq(std::vector{ac, bd});
    CHECK(oracles::max_abs_diff(lhs, rhs) < 1e-14);
}

TEST_CASE("kron_seq is associative bit-exactly") {
    Lcg64 rng(5);
    const DenseMatrix a = oracles::random_matrix(2, 3, rng);
    const DenseMatrix b = oracles::random_matrix(3, 2, rng);
    const DenseMatrix c = oracles::random_matrix(2, 2, rng);
    const DenseMatrix abc = kron_seq(std::vector{a, b, c});
    const DenseMatrix bc = kron_seq(std::vector{b, c});
    const DenseMatrix nested = kron_seq(std::vector{a, bc});
    CHECK(oracles::max_abs_diff(abc, nested) == 0.0);
}

TEST_CASE("mode_product with the identity is exact") {
    Lcg64 rng(6);
    const DenseTensor t = oracles::random_tensor({3, 4, 2}, rng);
    for (std::size_t d = 0; d < 3; ++d) {
        const DenseTensor r = mode_product(t, DenseMatrix::identity(t.extent(d)), d);
        CHECK(oracles::max_abs_diff(r, t) == 0.0);
    }
}

TEST_CASE("mode_product hand-contraction example") {
    const DenseTensor t = iota_tensor({2, 2, 2});
    const DenseMatrix ones_row = DenseMatrix::from_rows({{1, 1}});
    const DenseTensor r = mode_product(t, ones_row, 0);
    REQUIRE(r.shape() == std::vector<std::size_t>{1, 2, 2});
    CHECK(vectorize(r) == std::vector<double>{3, 7, 11, 15});

    CHECK_THROWS_AS(mode_product(t, DenseMatrix::identity(3), 0), ShapeError);
}

TEST_CASE("mode_product matches the loop oracle and commutes across modes") {
    Lcg64 rng(7);
    const DenseTensor t = oracles::random_tensor({3, 2, 4}, rng);
    const DenseMatrix m0 = oracles::random_matrix(2, 3, rng);
    const DenseMatrix m1 = oracles::random_matrix(4, 2, rng);
    const DenseMatrix m2 = oracles::random_matrix(3, 4, rng);

    for (std::size_t d = 0; d < 3; ++d) {
        const DenseMatrix& m = d == 0 ? m0 : (d == 1 ? m1 : m2);
        CHECK(oracles::max_abs_diff(mode_product(t, m, d),
                                    oracles::mode_product_by_loops(t, m, d)) < 1e-14);
    }

    const DenseTensor fwd = mode_product(mode_product(mode_product(t, m0, 0), m1, 1), m2, 2);
    const DenseTensor rev = mode_product(mode_product(mode_product(t, m2, 2), m1, 1), m0, 0);
    const DenseTensor mid = mode_product(mode_product(mode_product(t, m1, 1), m2, 2), m0, 0);
    CHECK(oracles::max_abs_diff(fwd, rev) < 1e-13);
    CHECK(oracles::max_abs_diff(fwd, mid) < 1e-13);
}

TEST_CASE("mode_product_transposed applies the transposed matrix") {
    Lcg64 rng(8);
    const DenseTensor t = oracles::random_tensor({3, 2, 4}, rng);
    const DenseMatrix m = oracles::random_matrix(3, 5, rng);
    const DenseTensor a = mode_product_transposed(t, m, 0);
    const DenseTensor b = mode_product(t, transposed(m), 0);
    CHECK(oracles::max_abs_diff(a, b) == 0.0);
}

TEST_CASE("vec of a mode-product chain equals the Kronecker operator") {
    // The identity behind the multilinear reconstruction formula:
    // vec(t x_1 M_1 x_2 M_2 x_3 M_3) = (M_3 (x) M_2 (x) M_1) vec(t).
    Lcg64 rng(9);
    const DenseTensor t = oracles::random_tensor({2, 3, 2}, rng);
    const DenseMatrix m0 = oracles::random_matrix(4, 2, rng);
    const DenseMatrix m1 = oracles::random_matrix(2, 3, rng);
    const DenseMatrix m2 = oracles::random_matrix(3, 2, rng);

    const DenseTensor chain = mode_product(mode_product(mode_product(t, m0, 0), m1, 1), m2, 2);
    const std::vector<double> lhs = vectorize(chain);

    const DenseMatrix big = kron_seq(std::vector{m2, m1, m0});
    const std::vector<double> vt = vectorize(t);
    Eigen::VectorXd rhs = as_eigen(big) * Eigen::Map<const Eigen::VectorXd>(
                                              vt.data(), static_cast<Eigen::Index>(vt.size()));

    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < lhs.size(); ++i) {
        num += (lhs[i] - rhs(static_cast<Eigen::Index>(i))) *
               (lhs[i] - rhs(static_cast<Eigen::Index>(i)));
        den += lhs[i] * lhs[i];
    }
    CHECK(std::sqrt(num) <= 1e-12 * std::sqrt(den));
}

TEST_CASE("allocation stats see matrix and tensor buffers") {
    alloc_stats::reset_peaks();
    const auto before = alloc_stats::snapshot();
    {
        const DenseTensor t = DenseTensor::zeros({10, 10});
        const DenseMatrix m(7, 3);
        const auto during = alloc_stats::snapshot();
        CHECK(during.live_doubles >= before.live_doubles + 121);
        CHECK(during.peak_tensor_doubles >= 100);
        CHECK(during.peak_matrix_doubles >= 21);
    }
    const auto after = alloc_stats::snapshot();
    CHECK(after.live_doubles == before.live_doubles);
}
