#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace annosim {

// All randomness in the toolkit flows through SplitMix64 streams whose seeds
// are derived with mix64/stream_seed below. The constants are the published
// SplitMix64 ones (Steele, Lea & Flood 2014), so streams are reproducible
// from the documented recipe alone.

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (char c : s) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 1099511628211ULL;
    }
    return h;
}

// SplitMix64 single-step output for state x; doubles as the seed mixer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Folds parts into one seed: s = mix64(s ^ part), starting from s = 0.
constexpr std::uint64_t stream_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t s = 0;
    for (std::uint64_t p : parts) s = mix64(s ^ p);
    return s;
}

// Purpose tags keep independently-derived streams from colliding.
namespace seed_tag {
constexpr std::uint64_t split = fnv1a64("annosim.split");
constexpr std::uint64_t subset_shuffle = fnv1a64("annosim.subset_shuffle");
constexpr std::uint64_t batch_order = fnv1a64("annosim.batch_order");
constexpr std::uint64_t train = fnv1a64("annosim.train");
constexpr std::uint64_t null_train = fnv1a64("annosim.null_train");
constexpr std::uint64_t hashed_bow = fnv1a64("annosim.hashed_bow");
constexpr std::uint64_t synthetic = fnv1a64("annosim.synthetic");
}  // namespace seed_tag

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw in [0, n) via rejection sampling.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1]; safe as a log argument.
    double next_double_open() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    double next_gaussian();

private:
    std::uint64_t state_;
};

// In-place Fisher-Yates shuffle driven by the given stream.
template <typename T>
void fisher_yates(std::vector<T>& items, SplitMix64& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
        using std::swap;
        swap(items[i - 1], items[j]);
    }
}

}  // namespace annosim
