#pragma once

#include <cstdint>
#include <random>

namespace trigzero {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// 64-bit child seed for substream `stream` of `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Standard-normal source bound to one substream.
class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    double operator()() { return dist_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace trigzero
