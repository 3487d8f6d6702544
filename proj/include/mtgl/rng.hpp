#pragma once

#include <cstdint>

namespace mtgl {

// Counter-based generator: output k is a pure function of (key, k), so a
// stream can be split into independent children without shared state.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next();
    double uniform();                // [0, 1)
    double uniform(double a, double b);
    double normal();
    double exponential();
    int below(int n);                // uniform in {0, ..., n-1}
    bool coin();

    Rng split(std::uint64_t index) const;
    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace mtgl
