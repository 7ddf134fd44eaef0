#pragma once

#include <cmath>
#include <cstdint>

namespace billiard {

// Counter-based stream: the state walks a fixed stride and every output is the
// splitmix64 finalizer of the state, so stream (key, k) is a pure function of
// (seed, orbit id, k). Orbits own disjoint streams regardless of scheduling.
class SplitMix64 {
public:
    using result_type = std::uint64_t;

    SplitMix64() = default;
    explicit SplitMix64(std::uint64_t key) : state_(mix(key + 0x9e3779b97f4a7c15ULL)) {}

    // Stream for orbit `id` under experiment `seed`.
    static SplitMix64 stream(std::uint64_t seed, std::uint64_t id) {
        SplitMix64 g;
        g.state_ = mix(seed + 0x9e3779b97f4a7c15ULL) ^ mix(id + 0xbf58476d1ce4e5b9ULL);
        return g;
    }

    std::uint64_t operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~0ULL; }

    // Uniform on the open interval (0,1); never returns an endpoint.
    double uniform() {
        for (;;) {
            double u = static_cast<double>((*this)() >> 11) * 0x1.0p-53;
            if (u > 0.0 && u < 1.0) return u;
        }
    }

    // Uniform on (a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential() { return -std::log(uniform()); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
};

} // namespace billiard
