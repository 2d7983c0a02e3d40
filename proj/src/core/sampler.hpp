#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "error.hpp"
#include "types.hpp"

namespace expose {

enum class Sampling { with_replacement, without_replacement };

const char* sampling_name(Sampling mode);

// Draws row indices from [0, population). With replacement every draw is
// independent and uniform; without replacement the draws enumerate a uniform
// random permutation (built lazily, one swap per draw) and throw InputError
// once the population is exhausted.
class Sampler {
public:
    Sampler(Sampling mode, Index population, std::uint64_t seed);

    Index next();
    Index drawn() const { return drawn_; }
    Sampling mode() const { return mode_; }

private:
    Sampling mode_;
    Index population_;
    Index drawn_ = 0;
    std::mt19937_64 rng_;
    std::vector<Index> permutation_;
};

} // namespace expose
