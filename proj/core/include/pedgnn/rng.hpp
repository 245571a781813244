#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pedgnn {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seedable generator with named substreams. Deriving a child for "dropout",
// "sampler", etc. gives independent streams, so toggling one consumer does
// not shift the draws seen by the others.
class Rng {
public:
    explicit Rng(std::uint64_t seed)
        : seed_(splitmix64(seed)), engine_(seed_) {}

    Rng child(std::string_view name) const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (char c : name) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 0x100000001b3ULL;
        }
        return Rng(seed_ ^ h);
    }

    Rng child(std::uint64_t index) const {
        return Rng(seed_ ^ splitmix64(index + 1));
    }

    std::mt19937_64& engine() { return engine_; }

    double uniform(double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(engine_);
    }
    double normal(double mean, double stddev) {
        return std::normal_distribution<double>(mean, stddev)(engine_);
    }
    std::uint64_t uniform_index(std::uint64_t n) {
        return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
    }
    bool bernoulli(double p) {
        return std::bernoulli_distribution(p)(engine_);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

} // namespace pedgnn
