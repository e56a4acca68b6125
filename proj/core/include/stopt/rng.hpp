#pragma once

#include <cstdint>
#include <cstring>

namespace stopt {

/// Counter-based random stream: every draw is a pure function of
/// (seed, path index, counter), so per-path streams are independent of
/// path scheduling and the simulation parallelizes deterministically.
namespace rng {

/// SplitMix64 finalizer; passes the usual statistical batteries when driven
/// by a Weyl sequence, which is exactly how counter_u64 uses it.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Key for one path's stream.
inline std::uint64_t path_key(std::uint64_t seed, std::uint64_t path_index) {
    return mix64(seed ^ (0xd1342543de82ef95ULL * (path_index + 1)));
}

/// The counter-th draw of the keyed stream.
inline std::uint64_t counter_u64(std::uint64_t key, std::uint64_t counter) {
    return mix64(key ^ (counter * 0x632be59bd9b4e019ULL));
}

/// Uniform strictly inside (0, 1): returns (k + 1/2) / 2^52, which never
/// rounds to either endpoint and maps u -> 1-u exactly.
inline double to_u01(std::uint64_t r) {
    return (static_cast<double>(r >> 12) + 0.5) * 0x1.0p-52;
}

inline double uniform(std::uint64_t key, std::uint64_t counter) {
    return to_u01(counter_u64(key, counter));
}

}  // namespace rng

/// Inverse standard-normal CDF (Acklam's rational approximation,
/// max relative error ~1.15e-9 — far below Monte Carlo resolution).
double inv_normal_cdf(double p);

/// Central-region part of inv_normal_cdf, valid for p in [0.02425, 0.97575].
/// Branch-free, so block loops over it vectorize; callers patch the tails
/// with inv_normal_cdf.
inline double inv_normal_cdf_central(double p) {
    static constexpr double a0 = -3.969683028665376e+01, a1 = 2.209460984245205e+02,
                            a2 = -2.759285104469687e+02, a3 = 1.383577518672690e+02,
                            a4 = -3.066479806614716e+01, a5 = 2.506628277459239e+00;
    static constexpr double b0 = -5.447609879822406e+01, b1 = 1.615858368580409e+02,
                            b2 = -1.556989798598866e+02, b3 = 6.680131188771972e+01,
                            b4 = -1.328068155288572e+01;
    const double q = p - 0.5, r = q * q;
    return (((((a0 * r + a1) * r + a2) * r + a3) * r + a4) * r + a5) * q /
           (((((b0 * r + b1) * r + b2) * r + b3) * r + b4) * r + 1.0);
}

/// exp with Cody-Waite reduction and a degree-10 polynomial; relative error
/// below 3e-14 on the range the simulator uses. Straight-line arithmetic so
/// the block loops vectorize.
inline double fast_exp(double x) {
    constexpr double log2e = 1.4426950408889634074;
    constexpr double ln2_hi = 6.93147180369123816490e-01;
    constexpr double ln2_lo = 1.90821492927058770002e-10;
    double k = __builtin_nearbyint(x * log2e);
    const double r = (x - k * ln2_hi) - k * ln2_lo;
    double p = 2.505210838544172e-08;   // 1/11!
    p = p * r + 2.7557319223985893e-07; // 1/10!
    p = p * r + 2.755731922398589e-06;  // 1/9!
    p = p * r + 2.48015873015873e-05;   // 1/8!
    p = p * r + 1.9841269841269841e-04; // 1/7!
    p = p * r + 1.3888888888888889e-03; // 1/6!
    p = p * r + 8.333333333333333e-03;  // 1/5!
    p = p * r + 4.1666666666666664e-02; // 1/4!
    p = p * r + 1.6666666666666666e-01; // 1/3!
    p = p * r + 0.5;
    p = p * r + 1.0;
    p = p * r + 1.0;
    std::uint64_t bits;
    std::memcpy(&bits, &p, sizeof bits);
    bits += static_cast<std::uint64_t>(static_cast<std::int64_t>(k)) << 52;
    std::memcpy(&p, &bits, sizeof p);
    return p;
}

}  // namespace stopt
