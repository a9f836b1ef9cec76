#pragma once

#include <cmath>
#include <cstdint>

namespace hypokit {

/// Counter-based random stream: every draw is a pure function of
/// (seed, stream, counter), so replicas and particles get independent,
/// reproducible streams that can be evaluated in any order.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(seed ^ mix(stream ^ 0x9e3779b97f4a7c15ull))) {}

    /// Uniform in (0,1); counter identifies the draw.
    double uniform(std::uint64_t counter) const {
        const std::uint64_t z = mix(key_ ^ mix(counter + 0x632be59bd9b4e019ull));
        // 53-bit mantissa, strictly inside (0,1)
        return (static_cast<double>(z >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    /// Standard normal via Box-Muller; two counters per draw keep it stateless.
    double normal(std::uint64_t counter) const {
        const double u1 = uniform(2 * counter);
        const double u2 = uniform(2 * counter + 1);
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
};

} // namespace hypokit
