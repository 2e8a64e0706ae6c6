// Small numeric and formatting helpers shared across modules.
#pragma once

#include <complex>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace dispersim {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Natural-unit conversions used at configuration boundaries. Core modules
// work in SI angular units (rad/s) and seconds throughout.
constexpr double mhz_to_rads(double f_mhz) { return kTwoPi * f_mhz * 1e6; }
constexpr double rads_to_mhz(double w) { return w / (kTwoPi * 1e6); }
constexpr double us_to_s(double t_us) { return t_us * 1e-6; }

// Trapezoid rule on a uniformly sampled series.
template <typename Scalar>
Scalar trapezoid(const std::vector<Scalar>& y, double dx) {
    if (y.size() < 2) return Scalar(0);
    Scalar acc = Scalar(0.5) * (y.front() + y.back());
    for (std::size_t i = 1; i + 1 < y.size(); ++i) acc += y[i];
    return acc * Scalar(dx);
}

// FNV-1a 64-bit content hash, used for output manifests.
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

// Locale-independent float formatting (12 significant digits) for CSV and
// manifest output; identical input bits always produce identical text.
inline std::string fmt_g(double v, int significant = 12) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", significant, v);
    return buf;
}

} // namespace dispersim
