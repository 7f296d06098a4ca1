#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace harris {

namespace detail {

// Philox 4x32-10 block cipher (Salmon et al., SC 2011). Counter-based:
// the output block is a pure function of (counter, key), so streams can
// be replayed and parallelized without shared state.
inline constexpr std::uint32_t kPhiloxW32A = 0x9E3779B9u;
inline constexpr std::uint32_t kPhiloxW32B = 0xBB67AE85u;
inline constexpr std::uint32_t kPhiloxM4x32A = 0xD2511F53u;
inline constexpr std::uint32_t kPhiloxM4x32B = 0xCD9E8D57u;

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
    const std::uint64_t p0 = std::uint64_t(kPhiloxM4x32A) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kPhiloxM4x32B) * ctr[2];
    const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 9; ++r) {
        philox_round(ctr, key);
        key[0] += kPhiloxW32A;
        key[1] += kPhiloxW32B;
    }
    philox_round(ctr, key);
    return ctr;
}

// Inverse standard-normal CDF, AS 241 (Wichura), double precision.
// Rational approximations on three regimes; relative error below 1e-15.
inline double normal_icdf(double p) {
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        const double num =
            (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                  6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
              1.3314166789178437745e2) * r + 3.3871328727963666080e0);
        const double den =
            (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                  3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
              4.2313330701600911252e1) * r + 1.0);
        return q * num / den;
    }
    double r = (q < 0.0) ? p : 1.0 - p;
    if (r <= 0.0) return q < 0.0 ? -std::numeric_limits<double>::infinity()
                                 : std::numeric_limits<double>::infinity();
    r = std::sqrt(-std::log(r));
    double x;
    if (r <= 5.0) {
        r -= 1.6;
        const double num =
            (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0);
        const double den =
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
        x = num / den;
    } else {
        r -= 5.0;
        const double num =
            (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0);
        const double den =
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
        x = num / den;
    }
    return q < 0.0 ? -x : x;
}

}  // namespace detail

// Deterministic, splittable random source. A stream is identified by
// (seed, stream id); drawing advances only the local counter, so identical
// (seed, stream, counter) triples replay identical values regardless of
// thread scheduling. Replica streams must never be shared.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t replica, std::uint64_t lane = 0)
        : seed_(seed), stream_(replica * kLanes + lane) {}

    static constexpr std::uint64_t kLanes = 64;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t counter() const { return counter_; }

    std::uint64_t next_u64() {
        if (phase_ == 0) {
            const std::array<std::uint32_t, 4> ctr = {
                std::uint32_t(counter_), std::uint32_t(counter_ >> 32),
                std::uint32_t(stream_), std::uint32_t(stream_ >> 32)};
            const std::array<std::uint32_t, 2> key = {std::uint32_t(seed_),
                                                      std::uint32_t(seed_ >> 32)};
            block_ = detail::philox4x32_10(ctr, key);
            ++counter_;
        }
        const int i = 2 * phase_;
        phase_ ^= 1;
        return std::uint64_t(block_[i]) | (std::uint64_t(block_[i + 1]) << 32);
    }

    // Uniform on the open interval (0,1); never returns an endpoint, so the
    // inverse CDF below stays finite.
    double next_uniform() {
        return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double next_normal() { return detail::normal_icdf(next_uniform()); }

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    int phase_ = 0;
    std::array<std::uint32_t, 4> block_{};
};

}  // namespace harris
