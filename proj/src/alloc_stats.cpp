#include "kmlsvd/alloc_stats.hpp"

#include <atomic>

namespace kmlsvd::alloc_stats {

namespace {

std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak_live{0};
std::atomic<std::size_t> g_peak_matrix{0};
std::atomic<std::size_t> g_peak_tensor{0};

void raise_to(std::atomic<std::size_t>& peak, std::size_t candidate) noexcept {
    std::size_t cur = peak.load(std::memory_order_relaxed);
    while (candidate > cur &&
           !peak.compare_exchange_weak(cur, candidate, std::memory_order_relaxed)) {
    }
}

}  // namespace

void record_alloc(std::size_t count, Kind kind) noexcept {
    if (count == 0) return;
    const std::size_t live = g_live.fetch_add(count, std::memory_order_relaxed) + count;
    raise_to(g_peak_live, live);
    raise_to(kind == Kind::matrix ? g_peak_matrix : g_peak_tensor, count);
}

void record_free(std::size_t count) noexcept {
    if (count == 0) return;
    g_live.fetch_sub(count, std::memory_order_relaxed);
}

Snapshot snapshot() noexcept {
    Snapshot s;
    s.live_doubles = g_live.load(std::memory_order_relaxed);
    s.peak_live_doubles = g_peak_live.load(std::memory_order_relaxed);
    s.peak_matrix_doubles = g_peak_matrix.load(std::memory_order_relaxed);
    s.peak_tensor_doubles = g_peak_tensor.load(std::memory_order_relaxed);
    return s;
}

void reset_peaks() noexcept {
    g_peak_live.store(g_live.load(std::memory_order_relaxed), std::memory_order_relaxed);
    g_peak_matrix.store(0, std::memory_order_relaxed);
    g_peak_tensor.store(0, std::memory_order_relaxed);
}

}  // namespace kmlsvd::alloc_stats
