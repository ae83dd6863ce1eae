#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cslab/common.hpp"
#include "cslab/linalg.hpp"
#include "cslab/prng.hpp"

namespace cslab {

struct InvalidShape : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Random signal with exactly support_size spikes. Support drawn uniformly
// without replacement; amplitudes standard normal, redrawn while below the
// 0.1 magnitude floor so exact-recovery classification at 1e-6 is never
// ambiguous.
inline std::pair<Vector, std::vector<std::size_t>> sparse_signal(std::size_t n, std::size_t support_size,
                                                                 Seed seed) {
    if (support_size > n) throw InvalidShape("sparse_signal: support_size exceeds length");
    CounterRng rng(seed);
    std::vector<std::size_t> support = rng.sample_without_replacement(n, support_size);
    Vector f(n, 0.0);
    for (std::size_t t : support) {
        double a = rng.next_gaussian();
        while (std::abs(a) < 0.1) a = rng.next_gaussian();
        f[t] = a;
    }
    return {std::move(f), std::move(support)};
}

// Extremal member of the weak-lp ball: sorted magnitudes are exactly
// R * n^{-1/p}, signs i.i.d., positions a random permutation.
inline Vector weak_lp_signal(std::size_t n, double p, double radius, Seed seed) {
    if (n == 0) throw InvalidShape("weak_lp_signal: empty length");
    if (!(p > 0.0 && p <= 1.0)) throw InvalidShape("weak_lp_signal: p must lie in (0, 1]");
    if (!(radius > 0.0)) throw InvalidShape("weak_lp_signal: radius must be positive");
    CounterRng rng(seed);
    std::vector<std::size_t> pos(n);
    std::iota(pos.begin(), pos.end(), 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(pos[i], pos[j]);
    }
    Vector f(n, 0.0);
    for (std::size_t rank = 0; rank < n; ++rank)
        f[pos[rank]] = rng.next_sign() * radius * std::pow(static_cast<double>(rank + 1), -1.0 / p);
    return f;
}

// Least R such that the n-th largest magnitude is at most R * n^{-1/p}.
inline double weak_lp_radius(const Vector& f, double p) {
    if (!(p > 0.0)) throw std::invalid_argument("weak_lp_radius: p must be positive");
    Vector mags(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) mags[i] = std::abs(f[i]);
    std::sort(mags.begin(), mags.end(), std::greater<>());
    double radius = 0.0;
    for (std::size_t i = 0; i < mags.size(); ++i)
        radius = std::max(radius, mags[i] * std::pow(static_cast<double>(i + 1), 1.0 / p));
    return radius;
}

// Keep the k largest-magnitude entries, ties broken by lower index.
inline Vector best_k_term(const Vector& f, std::size_t k) {
    if (k > f.size()) throw InvalidShape("best_k_term: k exceeds length");
    std::vector<std::size_t> order(f.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return std::abs(f[i]) > std::abs(f[j]); });
    Vector out(f.size(), 0.0);
    for (std::size_t i = 0; i < k; ++i) out[order[i]] = f[order[i]];
    return out;
}

struct NormBundle {
    double l0 = 0;
    double l1 = 0;
    double l2 = 0;
    double linf = 0;
    double xnorm = 0;  // sqrt(N) * sup-norm of the unitary DFT
};

inline NormBundle norms(const Vector& f) {
    NormBundle b;
    for (double v : f) {
        if (v != 0.0) b.l0 += 1.0;
        b.l1 += std::abs(v);
        b.l2 += v * v;
        b.linf = std::max(b.linf, std::abs(v));
    }
    b.l2 = std::sqrt(b.l2);
    if (!f.empty()) b.xnorm = std::sqrt(static_cast<double>(f.size())) * norm_inf(dft(f));
    return b;
}

// Single-column CSV.
inline void write_signal_csv(std::ostream& os, const Vector& f) {
    for (double v : f) os << format_double(v) << "\n";
}

inline Vector read_signal_csv(std::istream& is) {
    Vector f;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        f.push_back(std::stod(line));
    }
    return f;
}

}  // namespace cslab
