#pragma once

#include <charconv>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace galign {

// Invalid configuration / user input. CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem / stream failure. CLI maps this to exit code 2.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal representation. Used for every number written
// to CSV, dataset and config files so that re-runs are byte-identical.
inline std::string fmt_double(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

// Runs fn(i) for i in [0, count). Results must be written into per-index
// slots by the caller; the index partition is the only thing that depends on
// the worker count, so outputs are identical for any number of workers.
inline void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count < 2) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    const std::size_t chunk = (count + n_threads - 1) / n_threads;
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace galign
