#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace qtree {

// Portable randomness. std::mt19937_64's output sequence is fixed by the C++
// standard, but the std:: distributions are not, so every conversion below is
// spelled out:
//   uniform01()   = (next() >> 11) * 2^-53
//   below(n)      = rejection sampling on next() (no modulo bias)
//   exponential() = -log(1 - uniform01())
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

    double exponential() { return -std::log1p(-uniform01()); }

    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t k = items.size(); k > 1; --k) {
            const auto j = static_cast<std::size_t>(below(k));
            std::swap(items[k - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Child seed for stream `index` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t hash_indices(std::uint64_t seed, std::span<const int> values) {
    std::uint64_t h = splitmix64(seed);
    for (int v : values) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(v)));
    return h;
}

}  // namespace qtree
