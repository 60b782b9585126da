// Shared basics: error taxonomy, the observation matrix, and a small
// fork-join helper used by the heavier numeric loops.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mnsbs {

// Raised for malformed user input (bad files, non-finite data, shape errors).
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised for invalid configuration values (out-of-range tuning parameters).
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a computation cannot produce a usable numeric result.
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Row-major T x p data matrix. Observations are addressed 1..T in the
// statistical interface; storage is 0-based.
struct ObservationMatrix {
    std::int64_t rows = 0;
    int cols = 0;
    std::vector<double> data;

    ObservationMatrix() = default;
    ObservationMatrix(std::int64_t T, int p)
        : rows(T), cols(p), data(static_cast<std::size_t>(T) * static_cast<std::size_t>(p), 0.0) {}

    double operator()(std::int64_t i, int j) const {
        return data[static_cast<std::size_t>(i) * cols + j];
    }
    double& operator()(std::int64_t i, int j) {
        return data[static_cast<std::size_t>(i) * cols + j];
    }
    std::span<const double> row(std::int64_t i) const {
        return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
    }
    std::span<double> row(std::int64_t i) {
        return {data.data() + static_cast<std::size_t>(i) * cols, static_cast<std::size_t>(cols)};
    }

    void validate() const {
        if (rows < 1 || cols < 1) throw input_error("observation matrix must have at least one row and one column");
        if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
            throw input_error("observation matrix storage does not match its declared shape");
        for (double v : data)
            if (!std::isfinite(v)) throw input_error("observation matrix contains a non-finite entry");
    }
};

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return static_cast<int>(hw > 16 ? 16 : hw);
}

// Static range split over worker threads. fn receives [begin, end) chunks.
// Deterministic output must not depend on chunk scheduling; callers write to
// disjoint slots or reduce over per-chunk partials in index order.
inline void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t, std::int64_t)>& fn) {
    threads = resolve_threads(threads);
    if (n <= 0) return;
    if (threads <= 1 || n == 1) {
        fn(0, n);
        return;
    }
    std::int64_t nchunks = std::min<std::int64_t>(threads, n);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nchunks));
    std::int64_t base = n / nchunks, extra = n % nchunks, lo = 0;
    for (std::int64_t c = 0; c < nchunks; ++c) {
        std::int64_t hi = lo + base + (c < extra ? 1 : 0);
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
        lo = hi;
    }
    for (auto& t : pool) t.join();
}

}  // namespace mnsbs
