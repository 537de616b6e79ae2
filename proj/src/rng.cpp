#include "rng.hpp"

#include <cmath>
#include <cstring>

#include "errors.hpp"

namespace dlsm {

uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
    const auto* p = static_cast<const unsigned char*>(data);
    uint64_t h = seed;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

uint64_t hash_combine(uint64_t a, uint64_t b) {
    uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2));
    return splitmix64(s);
}

uint64_t hash_name(uint64_t seed, std::string_view name) {
    return hash_combine(seed, fnv1a64(name.data(), name.size()));
}

namespace {
inline uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
} // namespace

RngStream::RngStream(uint64_t seed) {
    uint64_t sm = seed;
    for (auto& s : s_) s = splitmix64(sm);
}

uint64_t RngStream::next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform() {
    // 53-bit mantissa in (0,1); add half an ulp so 0 is excluded
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

uint64_t RngStream::below(uint64_t n) {
    // rejection to kill modulo bias
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return x % n;
}

double RngStream::gamma(double shape, double* dshape, double min_shape) {
    if (!(shape > 0.0)) throw NumericError("gamma sampler requires positive shape");

    // Boost the shape so the Marsaglia-Tsang core runs in its high-acceptance
    // regime; the boost factors u^(1/(shape+k)) keep the sample exact and are
    // smooth in the shape, which the pathwise derivative relies on.
    int boost = 0;
    if (shape < min_shape) boost = static_cast<int>(std::ceil(min_shape - shape));
    const double a = shape + boost;

    const double d = a - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    double x, v, w;
    for (;;) {
        do {
            x = normal();
            w = 1.0 + c * x;
        } while (w <= 0.0);
        v = w * w * w;
        double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) break;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) break;
    }
    double y = d * v;
    // d(y)/d(a) down the accepted branch
    double dyda = v - 13.5 * d * (c * c * c) * x * w * w;

    double sample = y;
    double dlog_extra = 0.0;
    for (int k = 0; k < boost; ++k) {
        double u = uniform();
        double lk = std::log(u) / (shape + k);
        sample *= std::exp(lk);
        dlog_extra += -lk / (shape + k);
    }
    if (dshape) *dshape = sample * (dyda / y + dlog_extra);
    return sample;
}

RngStream substream(uint64_t master, std::initializer_list<uint64_t> path) {
    uint64_t h = master;
    for (uint64_t p : path) h = hash_combine(h, p);
    return RngStream(h);
}

RngStream substream(uint64_t master, std::string_view name, std::initializer_list<uint64_t> path) {
    uint64_t h = hash_name(master, name);
    for (uint64_t p : path) h = hash_combine(h, p);
    return RngStream(h);
}

} // namespace dlsm
