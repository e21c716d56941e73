#include "kmlsvd/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <vector>

namespace kmlsvd {

namespace {
std::atomic<unsigned> g_max_threads{1};
}

void set_max_threads(unsigned n) { g_max_threads.store(n == 0 ? 1 : n); }

unsigned max_threads() { return g_max_threads.load(); }

namespace detail {

void for_each_mode(std::size_t count, const std::function<void(std::size_t)>& fn) {
    if (max_threads() <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(max_threads(), count);
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> jobs;
    jobs.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                fn(i);
            }
        }));
    }
    for (auto& j : jobs) j.get();
}

}  // namespace detail

}  // namespace kmlsvd
