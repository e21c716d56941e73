#pragma once

#include <cstddef>
#include <functional>

namespace kmlsvd {

/// Caps the number of worker threads used for independent per-mode work
/// (mode SVDs, per-mode eigenproblems). 1 disables threading.
void set_max_threads(unsigned n);
unsigned max_threads();

namespace detail {

/// Runs fn(0), ..., fn(count - 1); concurrently when max_threads() > 1.
/// Exceptions propagate to the caller.
void for_each_mode(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace detail

}  // namespace kmlsvd
