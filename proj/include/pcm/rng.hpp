// Counter-based random number generation and complex Gaussian sampling.
//
// The generator is stateless apart from a 128-bit (seed, stream) key and a
// counter, so a given (seed, stream) pair produces the same sequence no
// matter how many threads are running or in which order streams are drawn.
#pragma once

#include <cstdint>

#include "pcm/complex3.hpp"

namespace pcm {

namespace detail {

inline std::uint64_t mix64(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
    return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

}  // namespace detail

/// Seedable counter-based stream. Single-owner: split() derives independent
/// child streams deterministically, which is how per-trial and per-window
/// randomness is distributed across workers.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(detail::hash_combine(detail::mix64(seed), stream)) {}

    /// Child stream for substream id; independent of this stream's position.
    RngStream split(std::uint64_t substream) const {
        RngStream child(0);
        child.key_ = detail::hash_combine(key_, substream + 1);
        return child;
    }

    std::uint64_t next_u64() { return detail::mix64(key_ ^ detail::mix64(counter_++)); }

    /// Uniform in (0, 1); never returns exactly 0, safe for log().
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard real normal N(0,1), Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Standard circular complex normal: real and imaginary parts N(0, 1/2).
    cplx complex_normal() {
        const double s = std::sqrt(0.5);
        const double re = s * normal();
        const double im = s * normal();
        return {re, im};
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Draw z ~ CN(0, m) as L w with L = cholesky(m) and w IID standard
/// circular complex normal.
inline Vec3c sample_gaussian(const Herm3& m, RngStream& rng) {
    const Lower3 L = cholesky(m);
    const cplx w0 = rng.complex_normal();
    const cplx w1 = rng.complex_normal();
    const cplx w2 = rng.complex_normal();
    Vec3c z;
    z[0] = L.d[0] * w0;
    z[1] = L.l10 * w0 + L.d[1] * w1;
    z[2] = L.l20 * w0 + L.l21 * w1 + L.d[2] * w2;
    return z;
}

/// Variant reusing a precomputed factor (hot path in the MC harness).
inline Vec3c sample_gaussian(const Lower3& L, RngStream& rng) {
    const cplx w0 = rng.complex_normal();
    const cplx w1 = rng.complex_normal();
    const cplx w2 = rng.complex_normal();
    Vec3c z;
    z[0] = L.d[0] * w0;
    z[1] = L.l10 * w0 + L.d[1] * w1;
    z[2] = L.l20 * w0 + L.l21 * w1 + L.d[2] * w2;
    return z;
}

}  // namespace pcm
