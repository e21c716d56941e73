#pragma once

#include <cstddef>

namespace kmlsvd::alloc_stats {

enum class Kind { matrix, tensor };

/// Counters over every DenseMatrix / DenseTensor buffer currently alive.
/// peak_* values accumulate since the last reset_peaks() call.
struct Snapshot {
    std::size_t live_doubles = 0;         ///< sum of all live buffer sizes
    std::size_t peak_live_doubles = 0;    ///< max of live_doubles seen
    std::size_t peak_matrix_doubles = 0;  ///< largest single matrix buffer
    std::size_t peak_tensor_doubles = 0;  ///< largest single tensor buffer
};

void record_alloc(std::size_t count, Kind kind) noexcept;
void record_free(std::size_t count) noexcept;

Snapshot snapshot() noexcept;

/// Resets peak_live to the current live total and the single-buffer
/// peaks to zero. Live bookkeeping is unaffected.
void reset_peaks() noexcept;

}  // namespace kmlsvd::alloc_stats
