#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace ddident {

/// Deterministic random source. Conversions from raw mt19937_64 output are
/// done by hand so the produced streams do not depend on the standard
/// library's distribution internals; identical seeds give identical streams
/// everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Independent stream for subtask `index` of a root seed (counter scheme).
    static Rng substream(std::uint64_t root, std::uint64_t index) {
        return Rng(mix(root + 0x9e3779b97f4a7c15ull * (index + 1)));
    }

    std::uint64_t bits() { return eng_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t index(std::uint64_t n) { return eng_() % n; }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 == 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Circularly symmetric complex normal with E|w|^2 = 1.
    std::complex<double> complex_normal() {
        const double re = normal();
        const double im = normal();
        return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
    }

    /// Log-normal magnitude with unit mean.
    double lognormal_unit_mean(double sigma) {
        return std::exp(sigma * normal() - 0.5 * sigma * sigma);
    }

    /// Uniform phase factor e^{i theta}, theta in [0, 2pi).
    std::complex<double> phase() {
        const double theta = 2.0 * std::numbers::pi * uniform();
        return {std::cos(theta), std::sin(theta)};
    }

private:
    // splitmix64 finalizer; decorrelates consecutive counter seeds.
    static std::uint64_t mix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace ddident
