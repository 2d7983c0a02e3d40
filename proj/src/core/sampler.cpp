#include "sampler.hpp"

#include <numeric>
#include <string>
#include <utility>

namespace expose {

const char* sampling_name(Sampling mode) {
    return mode == Sampling::with_replacement ? "with-replacement"
                                              : "without-replacement";
}

Sampler::Sampler(Sampling mode, Index population, std::uint64_t seed)
    : mode_(mode), population_(population), rng_(seed) {
    if (population < 1) {
        throw InputError("sampler population must be >= 1, got " +
                         std::to_string(population));
    }
    if (mode_ == Sampling::without_replacement) {
        permutation_.resize(static_cast<std::size_t>(population));
        std::iota(permutation_.begin(), permutation_.end(), Index{0});
    }
}

Index Sampler::next() {
    if (mode_ == Sampling::with_replacement) {
        std::uniform_int_distribution<Index> pick(0, population_ - 1);
        ++drawn_;
        return pick(rng_);
    }
    if (drawn_ == population_) {
        throw InputError("without-replacement sampler exhausted its population of " +
                         std::to_string(population_) +
                         " rows; switch to with-replacement sampling for longer runs");
    }
    std::uniform_int_distribution<Index> pick(drawn_, population_ - 1);
    const Index j = pick(rng_);
    std::swap(permutation_[static_cast<std::size_t>(drawn_)],
              permutation_[static_cast<std::size_t>(j)]);
    return permutation_[static_cast<std::size_t>(drawn_++)];
}

} // namespace expose
