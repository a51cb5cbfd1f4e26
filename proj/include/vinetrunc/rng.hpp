#pragma once

#include <cstdint>
#include <initializer_list>

namespace vinetrunc {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Folds a list of words into one 64-bit key. Order matters.
constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept {
    std::uint64_t h = 0x6A09E667F3BCC909ULL;
    for (std::uint64_t w : words) h = mix64(h ^ mix64(w + 0x9E3779B97F4A7C15ULL));
    return h;
}

/// Counter-based generator: the i-th draw of a stream is a pure function of
/// (key, i), so streams are reproducible bit-for-bit on every platform.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept {
        return mix64(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform draw strictly inside (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal draw via inversion.
    double normal();

    /// Independent child stream identified by `tag`.
    CounterRng split(std::uint64_t tag) const noexcept {
        return CounterRng(hash_words({key_, tag}));
    }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace vinetrunc
