#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace dlsm {

// Deterministic, platform-independent randomness. All streams derive from a
// master seed through named substreams so that independent model components
// (splitting, initialization, per-epoch sampling) never share state.

uint64_t splitmix64(uint64_t& state);

// FNV-1a over bytes; also used for config hashes and checkpoint checksums.
uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 0xcbf29ce484222325ull);
uint64_t hash_combine(uint64_t a, uint64_t b);
uint64_t hash_name(uint64_t seed, std::string_view name);

// xoshiro256++ core with explicit scalar transforms; no libstdc++
// distributions so the byte-for-byte behaviour is ours to keep stable.
class RngStream {
public:
    explicit RngStream(uint64_t seed);

    uint64_t next_u64();
    // uniform on (0,1): never returns 0 or 1
    double uniform();
    // standard normal via Box-Muller; consumes exactly two uniforms
    double normal();
    // Gamma(shape, rate 1) by Marsaglia-Tsang with shape boosting below
    // min_shape; pathwise derivative d(sample)/d(shape) written to *dshape
    // when non-null.
    double gamma(double shape, double* dshape = nullptr, double min_shape = 8.0);
    // uniform integer in [0, n)
    uint64_t below(uint64_t n);

private:
    uint64_t s_[4];
};

// Substream derivation: hash the path parts into a fresh seed.
RngStream substream(uint64_t master, std::initializer_list<uint64_t> path);
RngStream substream(uint64_t master, std::string_view name, std::initializer_list<uint64_t> path = {});

} // namespace dlsm
