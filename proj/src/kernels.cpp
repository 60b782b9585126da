#include "mnsbs/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>

namespace mnsbs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_dim(const KernelSpec& spec, std::span<const double> x, const char* what) {
    if (static_cast<int>(x.size()) != spec.dim)
        throw input_error(std::string(what) + ": point dimension does not match kernel dim");
}

// One-dimensional convolution factors. d >= 0 is the center distance.

double uniform_factor(double d, double ha, double hb) {
    double overlap = std::min(ha, hb) + std::max(ha, hb) - d;  // = ha + hb - d
    if (overlap <= 0.0) return 0.0;
    overlap = std::min(overlap, 2.0 * std::min(ha, hb));  // containment caps at the smaller box
    return overlap / (4.0 * ha * hb);
}

// Integral of (3/(4 ha))(1 - ((x-a)/ha)^2) (3/(4 hb))(1 - ((x-b)/hb)^2) over
// the support overlap. The integrand is a quartic; after shifting the
// overlap interval to be symmetric about 0 only even powers survive.
double epanechnikov_factor(double a, double ha, double b, double hb) {
    double lo = std::max(a - ha, b - hb);
    double hi = std::min(a + ha, b + hb);
    if (hi <= lo) return 0.0;
    double m = 0.5 * (lo + hi);
    double w = 0.5 * (hi - lo);
    double as = a - m, bs = b - m;
    // 1 - ((u - c)/h)^2 = q0 + q1 u + q2 u^2
    double a0 = 1.0 - as * as / (ha * ha), a1 = 2.0 * as / (ha * ha), a2 = -1.0 / (ha * ha);
    double b0 = 1.0 - bs * bs / (hb * hb), b1 = 2.0 * bs / (hb * hb), b2 = -1.0 / (hb * hb);
    double c0 = a0 * b0;
    double c2 = a0 * b2 + a1 * b1 + a2 * b0;
    double c4 = a2 * b2;
    double integral = 2.0 * w * (c0 + c2 * w * w / 3.0 + c4 * w * w * w * w / 5.0);
    return (9.0 / (16.0 * ha * hb)) * std::max(integral, 0.0);
}

}  // namespace

std::string to_string(KernelFamily f) {
    switch (f) {
        case KernelFamily::gaussian: return "gaussian";
        case KernelFamily::uniform_product: return "uniform";
        case KernelFamily::epanechnikov_product: return "epanechnikov";
    }
    return "unknown";
}

KernelFamily kernel_family_from_string(const std::string& name) {
    if (name == "gaussian") return KernelFamily::gaussian;
    if (name == "uniform") return KernelFamily::uniform_product;
    if (name == "epanechnikov") return KernelFamily::epanechnikov_product;
    throw config_error("unknown kernel family: " + name);
}

void KernelSpec::validate() const {
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw config_error("kernel bandwidth must be positive and finite");
    if (dim < 1) throw config_error("kernel dim must be at least 1");
}

double kernel_value(const KernelSpec& spec, std::span<const double> x) {
    spec.validate();
    check_dim(spec, x, "kernel_value");
    const double h = spec.bandwidth;
    switch (spec.family) {
        case KernelFamily::gaussian: {
            double s = 0.0;
            for (double v : x) s += (v / h) * (v / h);
            return std::pow(kTwoPi, -0.5 * spec.dim) * std::pow(h, -spec.dim) * std::exp(-0.5 * s);
        }
        case KernelFamily::uniform_product: {
            double val = 1.0;
            for (double v : x) {
                if (std::abs(v) > h) return 0.0;
                val *= 0.5 / h;
            }
            return val;
        }
        case KernelFamily::epanechnikov_product: {
            double val = 1.0;
            for (double v : x) {
                if (std::abs(v) > h) return 0.0;
                double u = v / h;
                val *= 0.75 * (1.0 - u * u) / h;
            }
            return val;
        }
    }
    throw config_error("unsupported kernel family");
}

double pairwise_l2_inner(KernelFamily family, int dim, double ha, std::span<const double> a, double hb,
                         std::span<const double> b) {
    if (static_cast<int>(a.size()) != dim || static_cast<int>(b.size()) != dim)
        throw input_error("pairwise_l2_inner: point dimension does not match kernel dim");
    if (!(ha > 0.0) || !(hb > 0.0)) throw config_error("pairwise_l2_inner: bandwidths must be positive");

    if (family == KernelFamily::gaussian) {
        double s2 = ha * ha + hb * hb;
        double d2 = 0.0;
        for (int j = 0; j < dim; ++j) {
            double diff = a[j] - b[j];
            d2 += diff * diff;
        }
        return std::pow(kTwoPi * s2, -0.5 * dim) * std::exp(-d2 / (2.0 * s2));
    }

    double val = 1.0;
    for (int j = 0; j < dim; ++j) {
        // Canonical argument order keeps the result bit-identical under
        // (a, b) swaps; the quartic expansion is not otherwise commutative
        // at the last ulp.
        double pa = a[j], pb = b[j], qa = ha, qb = hb;
        if (pb < pa || (pb == pa && qb < qa)) {
            std::swap(pa, pb);
            std::swap(qa, qb);
        }
        double factor = 0.0;
        if (family == KernelFamily::uniform_product) {
            factor = uniform_factor(pb - pa, qa, qb);
        } else {
            factor = epanechnikov_factor(pa, qa, pb, qb);
        }
        if (factor == 0.0) return 0.0;
        val *= factor;
    }
    return val;
}

double pairwise_l2_inner(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
    spec.validate();
    return pairwise_l2_inner(spec.family, spec.dim, spec.bandwidth, a, spec.bandwidth, b);
}

namespace {

// Tensor Gauss-Legendre rules; the 5-point rule embedded in the 7-point
// estimate supplies the per-box error gauge.
constexpr std::array<double, 7> kGl7X = {0.0,
                                         -0.4058451513773972, 0.4058451513773972,
                                         -0.7415311855993945, 0.7415311855993945,
                                         -0.9491079123427585, 0.9491079123427585};
constexpr std::array<double, 7> kGl7W = {0.4179591836734694,
                                         0.3818300505051189, 0.3818300505051189,
                                         0.2797053914892766, 0.2797053914892766,
                                         0.1294849661688697, 0.1294849661688697};
constexpr std::array<double, 5> kGl5X = {0.0,
                                         -0.5384693101056831, 0.5384693101056831,
                                         -0.9061798459386640, 0.9061798459386640};
constexpr std::array<double, 5> kGl5W = {0.5688888888888889,
                                         0.4786286704993665, 0.4786286704993665,
                                         0.2369268850561891, 0.2369268850561891};

constexpr int kMaxCubDim = 6;

struct MixtureSq {
    const KernelSpec* spec;
    const std::vector<std::vector<double>>* centers;
    const std::vector<double>* weights;
    mutable std::int64_t evals = 0;

    double operator()(const double* x) const {
        ++evals;
        double f = 0.0;
        std::array<double, kMaxCubDim> diff{};
        for (std::size_t i = 0; i < centers->size(); ++i) {
            const auto& c = (*centers)[i];
            for (int j = 0; j < spec->dim; ++j) diff[static_cast<std::size_t>(j)] = x[j] - c[static_cast<std::size_t>(j)];
            f += (*weights)[i] * kernel_value(*spec, std::span<const double>(diff.data(), static_cast<std::size_t>(spec->dim)));
        }
        return f * f;
    }
};

struct Box {
    std::array<double, kMaxCubDim> lo{}, hi{};
    double value = 0.0;
    double error = 0.0;
};

struct BoxWorse {
    bool operator()(const Box& a, const Box& b) const { return a.error < b.error; }
};

template <std::size_t N>
double tensor_rule(const MixtureSq& f, const Box& box, int dim, const std::array<double, N>& xs,
                   const std::array<double, N>& ws) {
    std::array<int, kMaxCubDim> idx{};
    std::array<double, kMaxCubDim> point{};
    std::array<double, kMaxCubDim> mid{}, half{};
    for (int j = 0; j < dim; ++j) {
        mid[static_cast<std::size_t>(j)] = 0.5 * (box.lo[static_cast<std::size_t>(j)] + box.hi[static_cast<std::size_t>(j)]);
        half[static_cast<std::size_t>(j)] = 0.5 * (box.hi[static_cast<std::size_t>(j)] - box.lo[static_cast<std::size_t>(j)]);
    }
    double total = 0.0;
    while (true) {
        double w = 1.0;
        for (int j = 0; j < dim; ++j) {
            auto k = static_cast<std::size_t>(idx[static_cast<std::size_t>(j)]);
            point[static_cast<std::size_t>(j)] = mid[static_cast<std::size_t>(j)] + half[static_cast<std::size_t>(j)] * xs[k];
            w *= ws[k] * half[static_cast<std::size_t>(j)];
        }
        total += w * f(point.data());
        int j = 0;
        for (; j < dim; ++j) {
            auto js = static_cast<std::size_t>(j);
            if (++idx[js] < static_cast<int>(N)) break;
            idx[js] = 0;
        }
        if (j == dim) break;
    }
    return total;
}

void evaluate_box(const MixtureSq& f, int dim, Box& box) {
    double i7 = tensor_rule(f, box, dim, kGl7X, kGl7W);
    double i5 = tensor_rule(f, box, dim, kGl5X, kGl5W);
    box.value = i7;
    box.error = std::abs(i7 - i5);
}

}  // namespace

CubatureResult cubature_l2_norm(const KernelSpec& spec, const std::vector<std::vector<double>>& centers,
                                const std::vector<double>& weights, CubatureOptions options) {
    spec.validate();
    if (spec.dim > kMaxCubDim) throw config_error("cubature_l2_norm supports dim <= 6");
    if (centers.empty()) throw input_error("cubature_l2_norm: no centers");
    if (centers.size() != weights.size()) throw input_error("cubature_l2_norm: centers/weights size mismatch");
    for (const auto& c : centers)
        if (static_cast<int>(c.size()) != spec.dim) throw input_error("cubature_l2_norm: center dimension mismatch");
    if (!(options.tol > 0.0)) throw config_error("cubature_l2_norm: tol must be positive");
    if (options.max_evals < 1000) throw config_error("cubature_l2_norm: evaluation budget too small");

    const int dim = spec.dim;
    const double h = spec.bandwidth;
    const bool compact = spec.family != KernelFamily::gaussian;
    const double margin = compact ? h : 6.0 * h;

    std::array<double, kMaxCubDim> dlo{}, dhi{};
    for (int j = 0; j < dim; ++j) {
        double mn = centers[0][static_cast<std::size_t>(j)], mx = mn;
        for (const auto& c : centers) {
            mn = std::min(mn, c[static_cast<std::size_t>(j)]);
            mx = std::max(mx, c[static_cast<std::size_t>(j)]);
        }
        dlo[static_cast<std::size_t>(j)] = mn - margin;
        dhi[static_cast<std::size_t>(j)] = mx + margin;
    }

    // Initial partition. Compact kernels get cuts aligned to support edges so
    // cells are polynomial inside; the gaussian gets cells a few bandwidths
    // wide, which the 7-point rule already resolves to near machine accuracy.
    std::vector<std::vector<double>> cuts(static_cast<std::size_t>(dim));
    const double rule_cost = std::pow(7.0, dim) + std::pow(5.0, dim);
    for (int j = 0; j < dim; ++j) {
        auto js = static_cast<std::size_t>(j);
        std::vector<double>& cj = cuts[js];
        cj.push_back(dlo[js]);
        if (compact) {
            std::vector<double> edges;
            for (const auto& c : centers) {
                edges.push_back(c[js] - h);
                edges.push_back(c[js] + h);
            }
            std::sort(edges.begin(), edges.end());
            for (double e : edges)
                if (e > dlo[js] + 1e-12 && e < dhi[js] - 1e-12 && (cj.empty() || e > cj.back() + 1e-12)) cj.push_back(e);
        } else {
            int pieces = static_cast<int>(std::ceil((dhi[js] - dlo[js]) / (3.0 * h)));
            pieces = std::max(1, std::min(pieces, 16));
            for (int k = 1; k < pieces; ++k) cj.push_back(dlo[js] + (dhi[js] - dlo[js]) * k / pieces);
        }
        cj.push_back(dhi[js]);
    }
    // Respect the evaluation budget when choosing the initial resolution.
    auto cell_count = [&]() {
        double n = 1.0;
        for (const auto& cj : cuts) n *= static_cast<double>(cj.size() - 1);
        return n;
    };
    while (cell_count() * rule_cost > 0.5 * static_cast<double>(options.max_evals)) {
        std::size_t worst = 0;
        for (std::size_t j = 1; j < cuts.size(); ++j)
            if (cuts[j].size() > cuts[worst].size()) worst = j;
        if (cuts[worst].size() <= 2) break;
        std::vector<double> thinned;
        for (std::size_t k = 0; k < cuts[worst].size(); k += 2) thinned.push_back(cuts[worst][k]);
        if (thinned.back() != cuts[worst].back()) thinned.push_back(cuts[worst].back());
        cuts[worst] = std::move(thinned);
    }

    MixtureSq f{&spec, &centers, &weights};
    std::priority_queue<Box, std::vector<Box>, BoxWorse> heap;
    double total_value = 0.0, total_error = 0.0;

    std::array<int, kMaxCubDim> idx{};
    while (true) {
        Box box;
        for (int j = 0; j < dim; ++j) {
            auto js = static_cast<std::size_t>(j);
            box.lo[js] = cuts[js][static_cast<std::size_t>(idx[js])];
            box.hi[js] = cuts[js][static_cast<std::size_t>(idx[js]) + 1];
        }
        evaluate_box(f, dim, box);
        total_value += box.value;
        total_error += box.error;
        heap.push(box);
        int j = 0;
        for (; j < dim; ++j) {
            auto js = static_cast<std::size_t>(j);
            if (++idx[js] < static_cast<int>(cuts[js].size()) - 1) break;
            idx[js] = 0;
        }
        if (j == dim) break;
    }

    auto within_tol = [&]() { return total_error <= options.tol * std::max(total_value, 0.0) || total_error == 0.0; };

    while (!within_tol() && f.evals + 2 * static_cast<std::int64_t>(rule_cost) <= options.max_evals && !heap.empty()) {
        Box worst = heap.top();
        heap.pop();
        total_value -= worst.value;
        total_error -= worst.error;
        int split = 0;
        for (int j = 1; j < dim; ++j) {
            auto js = static_cast<std::size_t>(j), ss = static_cast<std::size_t>(split);
            if (worst.hi[js] - worst.lo[js] > worst.hi[ss] - worst.lo[ss]) split = j;
        }
        auto ss = static_cast<std::size_t>(split);
        double mid = 0.5 * (worst.lo[ss] + worst.hi[ss]);
        Box left = worst, right = worst;
        left.hi[ss] = mid;
        right.lo[ss] = mid;
        evaluate_box(f, dim, left);
        evaluate_box(f, dim, right);
        total_value += left.value + right.value;
        total_error += left.error + right.error;
        heap.push(left);
        heap.push(right);
    }

    CubatureResult out;
    out.evals = f.evals;
    out.converged = within_tol();
    double v = std::max(total_value, 0.0);
    out.value = std::sqrt(v);
    out.rel_error = v > 0.0 ? total_error / (2.0 * v) : (total_error > 0.0 ? std::sqrt(total_error) : 0.0);
    return out;
}

}  // namespace mnsbs
