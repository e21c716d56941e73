#pragma once

// Seeded random fixtures shared by the unit tests and the acceptance suite.

#include <cstddef>
#include <vector>

#include "kmlsvd/primal_dual.hpp"
#include "kmlsvd/rng.hpp"
#include "oracles.hpp"

namespace fixtures {

/// Random primal problem of the given order with mode sizes in
/// [2, max_samples] and feature widths in [2, max_features].
inline kmlsvd::PrimalProblem random_problem(std::size_t order, kmlsvd::Lcg64& rng,
                                            std::size_t max_samples = 6,
                                            std::size_t max_features = 5) {
    std::vector<std::size_t> n(order);
    std::vector<std::size_t> m(order);
    for (std::size_t d = 0; d < order; ++d) {
        n[d] = 2 + rng.next() % (max_samples - 1);
        m[d] = 2 + rng.next() % (max_features - 1);
    }
    std::vector<kmlsvd::DenseMatrix> features;
    features.reserve(order);
    for (std::size_t d = 0; d < order; ++d) {
        features.push_back(oracles::random_matrix(n[d], m[d], rng));
    }
    kmlsvd::DenseTensor compat = oracles::random_tensor(m, rng);
    return kmlsvd::PrimalProblem(std::move(features), std::move(compat));
}

/// Cubical superdiagonal core with positive entries: a valid
/// regularization parameter of any rank r.
inline kmlsvd::DenseTensor superdiagonal_core(std::size_t order, std::size_t r,
                                              kmlsvd::Lcg64& rng) {
    kmlsvd::DenseTensor s = kmlsvd::DenseTensor::zeros(std::vector<std::size_t>(order, r));
    std::vector<std::size_t> idx(order);
    for (std::size_t i = 0; i < r; ++i) {
        idx.assign(order, i);
        s.at(std::span<const std::size_t>(idx)) = 1.0 + rng.uniform();
    }
    return s;
}

}  // namespace fixtures
