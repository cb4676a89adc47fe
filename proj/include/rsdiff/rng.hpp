#pragma once

#include <cstdint>

namespace rsdiff {

/**
 * CounterRng: a splittable counter-based generator.
 *
 * Streams are derived from (seed, id...) by hashing, so every
 * letter-application, sample, or level can own an independent stream.
 * Output depends only on the derivation path and the draw counter, never
 * on global state, which keeps Monte Carlo runs bit-reproducible across
 * thread counts.
 */
class CounterRng {
public:
    explicit CounterRng(uint64_t seed) : key_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

    /// Independent child stream labeled by one or two ids.
    CounterRng derive(uint64_t a, uint64_t b = 0x5bf0f7da384b1f07ull) const {
        CounterRng child(0);
        child.key_ = mix(key_ ^ mix(a + 0x6a09e667f3bcc909ull) ^ rotl(mix(b), 27));
        child.counter_ = 0;
        return child;
    }

    uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9e3779b97f4a7c15ull); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    static uint64_t mix(uint64_t z) {
        // splitmix64 finalizer
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    uint64_t key_;
    uint64_t counter_ = 0;
};

} // namespace rsdiff
