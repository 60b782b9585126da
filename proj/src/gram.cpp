#include "mnsbs/gram.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mnsbs {

namespace {

void check_boundary(std::int64_t v, std::int64_t T, const char* name) {
    if (v < 0 || v > T) {
        throw input_error(std::string(name) + " must lie in [0, T]");
    }
}

}  // namespace

GramContext::GramContext(const ObservationMatrix& obs, const KernelSpec& spec, GramOptions options) : spec_(spec), obs_(obs) {
    obs_.validate();
    spec_.validate();
    if (spec_.dim != obs_.cols) {
        throw input_error("kernel dimension does not match observation dimension");
    }
    T_ = obs_.rows;
    full_ = options.store_full;
    const int threads = resolve_threads(options.threads);
    const std::size_t Tz = static_cast<std::size_t>(T_);

    diag_.assign(Tz, 0.0);
    prefix_ = PrefixSums(T_);

    if (full_) {
        gram_.assign(Tz * Tz, 0.0);
        row_prefix_.assign(Tz * (Tz + 1), 0.0);
        // Rows are independent; symmetry is restored afterwards by copying
        // the strict upper triangle, so each thread fills i <= j only.
        parallel_for(T_, threads, [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                auto xi = obs_.row(i);
                for (std::int64_t j = i; j < T_; ++j) {
                    gram_[static_cast<std::size_t>(i) * Tz + j] = pairwise_l2_inner(spec_, xi, obs_.row(j));
                }
            }
        });
        for (std::int64_t i = 1; i < T_; ++i) {
            for (std::int64_t j = 0; j < i; ++j) {
                gram_[static_cast<std::size_t>(i) * Tz + j] = gram_[static_cast<std::size_t>(j) * Tz + i];
            }
        }
        parallel_for(T_, threads, [&](std::int64_t lo, std::int64_t hi) {
            for (std::int64_t i = lo; i < hi; ++i) {
                const double* g = &gram_[static_cast<std::size_t>(i) * Tz];
                double* rp = &row_prefix_[static_cast<std::size_t>(i) * (Tz + 1)];
                rp[0] = 0.0;
                for (std::int64_t j = 0; j < T_; ++j) {
                    rp[j + 1] = rp[j] + g[j];
                }
            }
        });
        for (std::int64_t i = 0; i < T_; ++i) {
            diag_[static_cast<std::size_t>(i)] = gram_[static_cast<std::size_t>(i) * Tz + i];
            const double* rp = &row_prefix_[static_cast<std::size_t>(i) * (Tz + 1)];
            for (std::int64_t j = 0; j <= T_; ++j) {
                prefix_.at(i + 1, j) = prefix_.at(i, j) + rp[j];
            }
        }
    } else {
        std::vector<double> row(Tz, 0.0);
        for (std::int64_t i = 0; i < T_; ++i) {
            auto xi = obs_.row(i);
            parallel_for(T_, threads, [&](std::int64_t lo, std::int64_t hi) {
                for (std::int64_t j = lo; j < hi; ++j) {
                    row[static_cast<std::size_t>(j)] = pairwise_l2_inner(spec_, xi, obs_.row(j));
                }
            });
            diag_[static_cast<std::size_t>(i)] = row[static_cast<std::size_t>(i)];
            double acc = 0.0;
            prefix_.at(i + 1, 0) = 0.0;
            for (std::int64_t j = 0; j < T_; ++j) {
                acc += row[static_cast<std::size_t>(j)];
                prefix_.at(i + 1, j + 1) = prefix_.at(i, j + 1) + acc;
            }
        }
    }
}

GramContext build_gram(const ObservationMatrix& obs, const KernelSpec& spec, GramOptions options) {
    return GramContext(obs, spec, options);
}

double GramContext::gram(std::int64_t i, std::int64_t j) const {
    if (i < 1 || i > T_ || j < 1 || j > T_) {
        throw input_error("gram indices must lie in [1, T]");
    }
    if (full_) {
        return gram_[static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(T_) + (j - 1)];
    }
    return pairwise_l2_inner(spec_, obs_.row(i - 1), obs_.row(j - 1));
}

double GramContext::row_block_sum(std::int64_t t, std::int64_t a, std::int64_t b) const {
    if (t < 1 || t > T_) {
        throw input_error("row index must lie in [1, T]");
    }
    check_boundary(a, T_, "a");
    check_boundary(b, T_, "b");
    if (a > b) {
        throw input_error("row block needs a <= b");
    }
    if (full_) {
        const double* rp = &row_prefix_[static_cast<std::size_t>(t - 1) * static_cast<std::size_t>(T_ + 1)];
        return rp[b] - rp[a];
    }
    auto xt = obs_.row(t - 1);
    double acc = 0.0;
    for (std::int64_t j = a; j < b; ++j) {
        acc += pairwise_l2_inner(spec_, xt, obs_.row(j));
    }
    return acc;
}

namespace {

double cusum_norm_impl(const PrefixSums& prefix, std::int64_t s, std::int64_t t, std::int64_t e) {
    const auto T = prefix.size();
    check_boundary(s, T, "s");
    check_boundary(e, T, "e");
    if (!(s < t && t < e)) {
        throw input_error("cusum_norm needs s < t < e");
    }
    const double n = static_cast<double>(e - s);
    const double nl = static_cast<double>(t - s);
    const double nr = static_cast<double>(e - t);
    const double a = std::sqrt(nr / (n * nl));
    const double b = std::sqrt(nl / (n * nr));
    const double s11 = prefix.block_sum(s, t, s, t);
    const double s12 = prefix.block_sum(s, t, t, e);
    const double s22 = prefix.block_sum(t, e, t, e);
    const double sq = a * a * s11 - 2.0 * a * b * s12 + b * b * s22;
    return std::sqrt(std::max(sq, 0.0));
}

}  // namespace

double cusum_norm(const PrefixSums& prefix, std::int64_t s, std::int64_t t, std::int64_t e) {
    return cusum_norm_impl(prefix, s, t, e);
}

double cusum_norm(const GramContext& ctx, std::int64_t s, std::int64_t t, std::int64_t e) {
    return cusum_norm_impl(ctx.prefix(), s, t, e);
}

std::optional<CusumArgmax> cusum_argmax(const PrefixSums& prefix, std::int64_t s, std::int64_t e, std::int64_t rho) {
    const auto T = prefix.size();
    check_boundary(s, T, "s");
    check_boundary(e, T, "e");
    if (s >= e) {
        throw input_error("cusum_argmax needs s < e");
    }
    if (rho < 1) {
        throw input_error("trim rho must be >= 1");
    }
    if (e - s <= 2 * rho) {
        return std::nullopt;
    }
    CusumArgmax best;
    for (std::int64_t t = s + rho; t <= e - rho; ++t) {
        const double v = cusum_norm_impl(prefix, s, t, e);
        if (v > best.a) {
            best.a = v;
            best.b = t;
        }
    }
    return best;
}

std::optional<CusumArgmax> cusum_argmax(const GramContext& ctx, std::int64_t s, std::int64_t e, std::int64_t rho) {
    return cusum_argmax(ctx.prefix(), s, e, rho);
}

double segment_mean_sq_dist(const GramContext& ctx, std::int64_t t, std::int64_t a, std::int64_t b) {
    const auto T = ctx.size();
    if (t < 1 || t > T) {
        throw input_error("t must lie in [1, T]");
    }
    check_boundary(a, T, "a");
    check_boundary(b, T, "b");
    if (a >= b) {
        throw input_error("segment (a, b] must be nonempty");
    }
    const double n = static_cast<double>(b - a);
    const double cross = ctx.row_block_sum(t, a, b);
    const double seg = ctx.block_sum(a, b, a, b);
    const double sq = ctx.diag(t) - 2.0 / n * cross + seg / (n * n);
    return std::max(sq, 0.0);
}

}  // namespace mnsbs
