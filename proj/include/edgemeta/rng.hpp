#pragma once

// Stream-splittable RNG. Streams are derived by hashing a master seed with
// arbitrary index words, so draw b of stream (s, i, j) is reproducible
// independent of thread count or scheduling.

#include <cstdint>
#include <initializer_list>

namespace edgemeta {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// xoshiro256** seeded via splitmix64 over (seed, stream key words).
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> key = {}) {
        std::uint64_t sm = seed;
        for (std::uint64_t word : key) sm = splitmix64(sm) ^ (word * 0x9E3779B97F4A7C15ull);
        for (auto& s : state_) s = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0, 1), 53-bit resolution, endpoints excluded.
    double next_u01() {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return (u > 0.0) ? u : 0x1.0p-54;
    }

    double next_normal();
    double next_chi2(double df);

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    double next_gamma(double shape);

    std::uint64_t state_[4];
};

}  // namespace edgemeta
