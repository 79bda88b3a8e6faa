#include "gapcore/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace gapcore {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() {
    int n = g_max_threads.load();
    if (n > 0) return n;
    // hardware_concurrency goes through a syscall; cache it.
    static const int hw = [] {
        unsigned c = std::thread::hardware_concurrency();
        return c == 0 ? 1 : static_cast<int>(c);
    }();
    return hw;
}

void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn,
                  int64_t grain) {
    if (n <= 0) return;
    int workers = std::min<int64_t>(max_threads(), (n + grain - 1) / grain);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    int64_t chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        int64_t begin = w * chunk;
        int64_t end = std::min<int64_t>(begin + chunk, n);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace gapcore
