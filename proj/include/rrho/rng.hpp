#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace rrho::rng {

// splitmix64 finalizer; the basis of all randomness in the project.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (0x9e3779b97f4a7c15ull + b + (a << 6) + (a >> 2)));
}

// Counter-based stream: the value sequence is a pure function of the key, so
// streams keyed by (seed, iteration, query, ...) tuples are reproducible
// independently of evaluation order or thread schedule.
class Stream {
public:
    explicit Stream(std::uint64_t key) : state_(mix64(key)) {}

    Stream(std::initializer_list<std::uint64_t> parts) : state_(0x853c49e6748fea9bull) {
        for (std::uint64_t p : parts) state_ = combine(state_, p);
        state_ = mix64(state_);
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in [lo, hi)
    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // index in [0, n)
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>(next_double() * static_cast<double>(n)) % n;
    }

    double next_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = next_double();
        double u2 = next_double();
        double mag = std::sqrt(-2.0 * std::log(u1));
        cached_ = mag * std::sin(6.28318530717958647692 * u2);
        have_cached_ = true;
        return mag * std::cos(6.28318530717958647692 * u2);
    }

private:
    std::uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace rrho::rng
