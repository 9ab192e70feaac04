// rng.hpp -- deterministic random numbers (xoshiro256**), stable across
// platforms and standard libraries so seeded runs replay byte-identically.
#ifndef MAPSEARCH_RNG_HPP
#define MAPSEARCH_RNG_HPP

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>

namespace mapsearch {

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}
} // namespace detail

// Derives a stream seed from a master seed and an index; used to give every
// instance (and every sub-stage within an instance) its own rng.
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
    return detail::splitmix64(s);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = detail::splitmix64(s);
    }

    std::uint64_t next() {
        const std::uint64_t result = detail::rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = detail::rotl(state_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1); never returns an exact 0 or 1.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Uniform over {0, ..., n-1}, unbiased.
    std::uint64_t uniform_int(std::uint64_t n) {
        assert(n > 0);
        const std::uint64_t rem = (0xffffffffffffffffULL % n + 1) % n;
        const std::uint64_t limit = 0xffffffffffffffffULL - rem;
        std::uint64_t x = next();
        while (x > limit) x = next();
        return x % n;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Knuth's product-of-uniforms method; fine for the small means used here.
    int poisson(double lambda) {
        assert(lambda >= 0.0);
        if (lambda == 0.0) return 0;
        const double limit = std::exp(-lambda);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

private:
    std::array<std::uint64_t, 4> state_{};
};

} // namespace mapsearch

#endif
