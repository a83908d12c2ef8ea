#pragma once

#include <cstdint>
#include <cstddef>

namespace tsr {

/// Independent random streams derived from one run seed.
enum class Stream : std::uint64_t {
    init = 1,
    shuffle = 2,
    dropout = 3,
    split = 4,
    test = 5,
};

/// Counter-based generator: output n is a SplitMix64 mix of (key, n).
///
/// A generator is fully described by its key and counter, so streams can be
/// split off deterministically (`derive`) and the state is trivially
/// serializable. Draws never depend on thread scheduling.
class CounterRng {
public:
    CounterRng() = default;
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static CounterRng from_seed(std::uint64_t seed, Stream stream) noexcept {
        return CounterRng(mix(seed ^ mix(static_cast<std::uint64_t>(stream))));
    }

    /// Child generator keyed by (this key, tag); does not advance this one.
    CounterRng derive(std::uint64_t tag) const noexcept {
        return CounterRng(mix(key_ ^ mix(tag + 0x632be59bd9b4e019ULL)));
    }

    std::uint64_t next_u64() noexcept { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, bound) by rejection; bound must be > 0.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return x % bound;
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

    friend bool operator==(const CounterRng&, const CounterRng&) = default;

    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Fisher-Yates shuffle driven by a CounterRng.
template <typename RandomIt>
void shuffle(RandomIt first, RandomIt last, CounterRng& rng) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
        const auto j = rng.below(i);
        using std::swap;
        swap(first[i - 1], first[j]);
    }
}

}  // namespace tsr
