#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace cslab {

// Trial-level seeding: (base, stream) pairs reproduce the same variate
// sequence bit-for-bit, and distinct streams are statistically independent,
// so Monte-Carlo trials can be farmed out to workers in any order.
struct Seed {
    std::uint64_t base = 0;
    std::uint64_t stream = 0;

    Seed derived(std::uint64_t salt) const { return Seed{base, stream ^ (0x9e3779b97f4a7c15ull + salt * 0xbf58476d1ce4e5b9ull)}; }
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace detail

// Counter-based generator: the i-th output is a pure function of (key, i),
// where key is derived from the seed pair. No hidden state beyond the
// counter, which keeps generation order-stable across refactors.
class CounterRng {
public:
    explicit CounterRng(Seed s) : key_(detail::mix64(detail::mix64(s.base) + s.stream)) {}

    std::uint64_t next_u64() { return detail::mix64(key_ + counter_++ * 0x9e3779b97f4a7c15ull); }

    // Uniform in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; the sine variate is cached.
    double next_gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 1.0 - next_unit();  // (0, 1]
        double u2 = next_unit();
        double radius = std::sqrt(-2.0 * std::log(u1));
        double angle = 2.0 * std::numbers::pi * u2;
        cached_ = radius * std::sin(angle);
        have_cached_ = true;
        return radius * std::cos(angle);
    }

    double next_sign() { return (next_u64() >> 63) ? 1.0 : -1.0; }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // k distinct indices from {0, ..., n-1}, ascending.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(next_below(n - i));
            std::swap(pool[i], pool[j]);
        }
        std::vector<std::size_t> out(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace cslab
