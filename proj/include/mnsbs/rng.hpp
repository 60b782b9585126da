// Deterministic random sampling. The mt19937_64 engine has a fully
// specified output sequence, and all distribution transforms below are
// written out explicitly, so a seed reproduces the same stream on any
// platform. std::normal_distribution and friends are avoided on purpose:
// their algorithms are implementation-defined.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mnsbs {

// SplitMix64 step; used to derive independent substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 0x51'7c'c1'b7'27'22'0a'95ULL));
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t raw() { return eng_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Box-Muller, one value per call (the sine mate is discarded so the
    // stream position never depends on call history).
    double normal() {
        double u1 = 1.0 - uniform01();  // (0, 1]
        double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Pareto(shape=3, scale=1) via inverse CDF.
    double pareto31() {
        double u = 1.0 - uniform01();  // (0, 1]
        return std::pow(u, -1.0 / 3.0);
    }

    // Pareto(3, 1) standardized to mean 0, variance 1: mean 3/2, var 3/4.
    double std_pareto31() { return (pareto31() - 1.5) / std::sqrt(0.75); }

    // LogNormal(0, 1) standardized to mean 0, variance 1:
    // mean e^{1/2}, var e(e - 1).
    double std_lognormal01() {
        const double m = std::exp(0.5);
        const double s = std::sqrt(std::exp(1.0) * (std::exp(1.0) - 1.0));
        return (std::exp(normal()) - m) / s;
    }

    bool bernoulli_half() { return (eng_() >> 63) != 0; }

    // Fisher-Yates with draws from this engine.
    template <class Vec>
    void shuffle(Vec& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(eng_() % i);
            std::swap(v[i - 1], v[j]);
        }
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace mnsbs
