#include "mtgl/rng.hpp"

#include <cmath>
#include <numbers>

namespace mtgl {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(mix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL))) {}

std::uint64_t Rng::next() {
    std::uint64_t c = counter_++;
    return mix64(key_ ^ mix64(c * 0x9e3779b97f4a7c15ULL));
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double a, double b) { return a + (b - a) * uniform(); }

double Rng::normal() {
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::exponential() { return -std::log(1.0 - uniform()); }

int Rng::below(int n) { return static_cast<int>(uniform() * n); }

bool Rng::coin() { return (next() >> 63) != 0; }

Rng Rng::split(std::uint64_t index) const {
    Rng child(0);
    child.key_ = mix64(key_ ^ mix64(index + 0x5851f42d4c957f2dULL));
    return child;
}

}  // namespace mtgl
