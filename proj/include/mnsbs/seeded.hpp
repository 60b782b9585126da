// Deterministic multiscale interval system for binary segmentation.
//
// Layer k holds 2^k - 1 intervals of length about T * 2^{1-k}, each shifted
// by half a length, so every sufficiently long stretch of the sample is
// straddled at some scale by an interval sitting mostly inside it. The
// number of layers grows like log T and is clamped so the finest layer
// still has length >= 2.
#pragma once

#include <cstdint>
#include <vector>

#include "mnsbs/common.hpp"

namespace mnsbs {

struct SeededInterval {
    int layer = 0;       // 1-based layer index
    std::int64_t s = 0;  // half-open (s, e]
    std::int64_t e = 0;
};

struct SeededIntervalSet {
    std::int64_t T = 0;
    int layers = 0;
    // Generation order: layer 1 first, within a layer left to right. Scan
    // code relies on this order to break argmax ties deterministically.
    std::vector<SeededInterval> intervals;
};

// Depth before the length clamp: ceil(c_frak * ln T). The clamp keeps the
// finest layer length T * 2^{1-k} at 2 or more, i.e. k <= floor(log2 T).
int seeded_layer_count(std::int64_t T, double c_frak);

// Enumerates the full system. c_frak defaults to 1.5, which is past
// 1/ln(2), so the depth clamp is what binds and the finest layer always
// reaches lengths in (2, 4].
SeededIntervalSet generate_seeded_intervals(std::int64_t T, double c_frak = 1.5);

}  // namespace mnsbs
