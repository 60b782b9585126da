#include "mnsbs/seeded.hpp"

#include <algorithm>
#include <cmath>

namespace mnsbs {

int seeded_layer_count(std::int64_t T, double c_frak) {
    if (T < 4) {
        throw input_error("seeded intervals need T >= 4");
    }
    if (!(c_frak > 0.0)) {
        throw config_error("c_frak must be positive");
    }
    const int raw = static_cast<int>(std::ceil(c_frak * std::log(static_cast<double>(T))));
    const int depth_cap = static_cast<int>(std::floor(std::log2(static_cast<double>(T)) + 1e-12));
    return std::max(1, std::min(raw, depth_cap));
}

SeededIntervalSet generate_seeded_intervals(std::int64_t T, double c_frak) {
    SeededIntervalSet set;
    set.T = T;
    set.layers = seeded_layer_count(T, c_frak);
    const double Td = static_cast<double>(T);
    for (int k = 1; k <= set.layers; ++k) {
        const double len = Td * std::pow(2.0, 1 - k);
        const double shift = len / 2.0;
        const std::int64_t count = (std::int64_t{1} << k) - 1;
        for (std::int64_t i = 1; i <= count; ++i) {
            const double start = static_cast<double>(i - 1) * shift;
            std::int64_t s = static_cast<std::int64_t>(std::floor(start));
            std::int64_t e = static_cast<std::int64_t>(std::ceil(start + len));
            s = std::max<std::int64_t>(s, 0);
            e = std::min<std::int64_t>(e, T);  // the ceiling can overshoot the sample
            set.intervals.push_back({k, s, e});
        }
    }
    return set;
}

}  // namespace mnsbs
