#pragma once

#include <cstdint>
#include <random>

namespace chirmt {

// mt19937_64 seeded through splitmix64 from (seed, stream), so independent
// streams can be derived deterministically from one recorded 64-bit seed.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {
        std::uint64_t s = mix(seed ^ mix(stream + 0x632be59bd9b4e019ULL));
        eng_.seed(s);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

    Rng split(std::uint64_t index) const { return Rng(seed_, mix(stream_ * 0x9e3779b97f4a7c15ULL + index + 1)); }

    double normal() { return normal_(eng_); }
    double uniform() { return uniform_(eng_); }
    std::uint64_t bits() { return eng_(); }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t seed_, stream_;
    std::mt19937_64 eng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace chirmt
