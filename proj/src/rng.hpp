#pragma once

#include <cstdint>

namespace nvm {

// Stateless 64-bit mixer (SplitMix64 finalizer). All randomness in the
// library is derived from this so that results are bit-identical across
// platforms and independent of evaluation order.
constexpr uint64_t mix64(uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

constexpr uint64_t GOLDEN = 0x9e3779b97f4a7c15ULL;

// Hash a key tuple into one 64-bit word.
constexpr uint64_t hash2(uint64_t a, uint64_t b) {
    return mix64(a + GOLDEN * (b + 1));
}
constexpr uint64_t hash3(uint64_t a, uint64_t b, uint64_t c) {
    return mix64(hash2(a, b) + GOLDEN * (c + 1));
}
constexpr uint64_t hash4(uint64_t a, uint64_t b, uint64_t c, uint64_t d) {
    return mix64(hash3(a, b, c) + GOLDEN * (d + 1));
}

// Double in [0,1) from the top 53 bits.
inline double to_unit(uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform index in [0,n) via the multiply-shift trick; the bias of
// ~n/2^64 is far below anything observable at desk scale.
inline uint32_t bounded(uint64_t bits, uint32_t n) {
    return static_cast<uint32_t>((static_cast<__uint128_t>(bits) * n) >> 64);
}

// Per-stream sequential generator (SplitMix64). Streams are keyed, so a
// replica's draws do not depend on which thread runs it.
class SplitMix {
public:
    explicit SplitMix(uint64_t stream_key) : state_(mix64(stream_key ^ 0x5851f42d4c957f2dULL)) {}

    uint64_t next() {
        state_ += GOLDEN;
        return mix64(state_);
    }
    double next_unit() { return to_unit(next()); }
    uint32_t next_below(uint32_t n) { return bounded(next(), n); }

private:
    uint64_t state_;
};

}  // namespace nvm
