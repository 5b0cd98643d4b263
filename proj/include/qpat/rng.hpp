#pragma once

// Deterministic random streams. Every random quantity in the project is drawn
// from a SplitMix64 substream identified by (seed, stream id), so any run can
// be replayed bit-exactly from its manifest. Normal deviates use an inverse-CDF
// transform (Acklam's rational approximation refined by one Halley step); the
// C++ standard library's normal_distribution is unspecified per implementation
// and would break cross-toolchain reproducibility.

#include <cstdint>
#include <cmath>
#include <stdexcept>

namespace qpat {

inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Inverse of the standard normal CDF, accurate to ~1e-15 after refinement.
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("inverse_normal_cdf: p outside (0,1)");

    static constexpr double a[6] = {
        -3.969683028665376e+01,  2.209460984245205e+02, -2.759285104469687e+02,
         1.383577518672690e+02, -3.066479806614716e+01,  2.506628277459239e+00};
    static constexpr double b[5] = {
        -5.447609879822406e+01,  1.615858368580409e+02, -1.556989798598866e+02,
         6.680131188771972e+01, -1.328068155288572e+01};
    static constexpr double c[6] = {
        -7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
        -2.549732539343734e+00,  4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {
         7.784695709041462e-03,  3.224671290700398e-01,  2.445134137142996e+00,
         3.754408661907416e+00};

    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double u = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0]*u + c[1])*u + c[2])*u + c[3])*u + c[4])*u + c[5]) /
            ((((d[0]*u + d[1])*u + d[2])*u + d[3])*u + 1.0);
    } else if (p <= 1.0 - p_low) {
        double u = p - 0.5, r = u * u;
        x = (((((a[0]*r + a[1])*r + a[2])*r + a[3])*r + a[4])*r + a[5]) * u /
            (((((b[0]*r + b[1])*r + b[2])*r + b[3])*r + b[4])*r + 1.0);
    } else {
        double u = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0]*u + c[1])*u + c[2])*u + c[3])*u + c[4])*u + c[5]) /
             ((((d[0]*u + d[1])*u + d[2])*u + d[3])*u + 1.0);
    }

    // One Halley step against the exact CDF expressed through erfc.
    static const double sqrt2 = std::sqrt(2.0);
    static const double sqrt_2pi = std::sqrt(8.0 * std::atan(1.0));
    double e = 0.5 * std::erfc(-x / sqrt2) - p;
    double u = e * sqrt_2pi * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform on the open interval (0,1); 53 significant bits.
    double uniform01() {
        return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return inverse_normal_cdf(uniform01()); }

private:
    std::uint64_t state_;
};

// Substream ids in use: 1000+ell for illumination coefficients of channel ell,
// 2000+ell for the nodal noise of channel ell.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t id) {
    return SplitMix64(mix64(seed) ^ mix64(~id));
}

} // namespace qpat
