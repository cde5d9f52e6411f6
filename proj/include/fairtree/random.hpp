#pragma once

// Platform-stable random draws. The standard distributions are
// implementation-defined, so reports would not be byte-identical across
// toolchains; these are built directly on mt19937_64 output.

#include <cstdint>
#include <random>
#include <span>

namespace fairtree {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, bound); bound > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via Box-Muller (one value cached).
    double normal();

    template <class T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[below(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace fairtree
