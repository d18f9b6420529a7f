#ifndef MEDIATOP_RANDOM_HPP
#define MEDIATOP_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace mediatop {

/// Name recorded in output metadata. Bump the suffix whenever the way seeds
/// are turned into samples changes.
inline constexpr const char* kGeneratorName = "mt19937_64/v1";

/// Seeded generator. Bounded draws use rejection sampling on the raw engine
/// output so results do not depend on the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    /// Uniform real in [0, 1).
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// k distinct values from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

    /// Uniformly random permutation of [0, n).
    std::vector<std::size_t> permutation(std::size_t n);

    /// Derive an independent stream for a sub-task (run r, epoch t, ...).
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

private:
    std::mt19937_64 engine_;
};

}  // namespace mediatop

#endif  // MEDIATOP_RANDOM_HPP
