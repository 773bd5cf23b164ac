#pragma once

/// Delay-Doppler channel operator on sampled signals, the Gaussian probe,
/// grid L2 machinery, and the empirical identifiability ratio
/// ||Hx - Kx|| / ||H - K||.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "ddident/errors.hpp"
#include "ddident/measures.hpp"

namespace ddident {

/// Unit-energy Gaussian probe sqrt(B) exp(-pi B^2 (t-T)^2 / 2).
struct GaussianProbe {
    double bandwidth = 1.0;  // B, hertz
    double center = 0.0;     // T, seconds

    GaussianProbe(double b, double t) : bandwidth(b), center(t) {
        if (!(b > 0.0)) throw ValidationError("probe: bandwidth must be positive");
    }

    double value(double t) const {
        const double arg = bandwidth * (t - center);
        return std::sqrt(bandwidth) * std::exp(-std::numbers::pi * arg * arg / 2.0);
    }
};

inline double probe_value(const GaussianProbe& probe, double t) { return probe.value(t); }

/// Uniformly sampled complex signal.
struct SampledSignal {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<Complex> values;

    SampledSignal() = default;
    SampledSignal(double start, double step, std::vector<Complex> v)
        : t0(start), dt(step), values(std::move(v)) {
        if (!(dt > 0.0)) throw ValidationError("signal: dt must be positive");
        if (values.empty()) throw ValidationError("signal: needs at least one sample");
    }

    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
    double t_end() const { return time_at(values.size() - 1); }
};

/// Uniform time grid t0 + i*dt, i = 0..count-1.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 1.0;
    std::size_t count = 0;

    std::vector<double> times() const {
        std::vector<double> t(count);
        for (std::size_t i = 0; i < count; ++i) t[i] = t0 + static_cast<double>(i) * dt;
        return t;
    }
};

/// Grid covering the channel response to `probe` for tap delays in
/// [tau_lo, tau_hi]: radius 8/B beyond the shifted probe support, pitch
/// 1/(8 B oversample).
inline TimeGrid response_grid(const GaussianProbe& probe, double tau_lo, double tau_hi,
                              double oversample = 1.0) {
    if (!(oversample > 0.0)) throw ValidationError("response_grid: oversample must be positive");
    const double radius = 8.0 / probe.bandwidth;
    const double lo = probe.center + tau_lo - radius;
    const double hi = probe.center + tau_hi + radius;
    const double dt = 1.0 / (8.0 * probe.bandwidth * oversample);
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / dt)) + 1;
    return {lo, dt, n};
}

/// (Hx)(t_m) = sum_k a_k x(t_m - tau_k) e^{-2 pi i nu_k t_m}, taps summed in
/// stored order for bitwise-reproducible results.
inline std::vector<Complex> apply_channel(const ChannelSpec& spec, const GaussianProbe& probe,
                                          std::span<const double> times) {
    std::vector<Complex> out(times.size(), Complex(0.0, 0.0));
    for (const Tap& tap : spec.taps()) {
        for (std::size_t m = 0; m < times.size(); ++m) {
            const double t = times[m];
            const double envelope = probe.value(t - tap.delay);
            const Complex rotation = std::polar(1.0, -2.0 * std::numbers::pi * tap.doppler * t);
            out[m] += tap.amplitude * envelope * rotation;
        }
    }
    return out;
}

inline SampledSignal sample_probe(const GaussianProbe& probe, const TimeGrid& grid) {
    std::vector<Complex> v(grid.count);
    for (std::size_t i = 0; i < grid.count; ++i)
        v[i] = Complex(probe.value(grid.t0 + static_cast<double>(i) * grid.dt), 0.0);
    return {grid.t0, grid.dt, std::move(v)};
}

/// Riemann approximation sqrt(dt * sum |v|^2) of the L2 norm. The caller is
/// responsible for a grid wide enough that the truncated tail is negligible.
inline double l2_norm_grid(const SampledSignal& signal) {
    double acc = 0.0;
    for (const Complex& v : signal.values) acc += std::norm(v);
    return std::sqrt(signal.dt * acc);
}

/// ||H - K|| as the l2 norm of the difference measure. Supports align by
/// exact lattice index after snapping when a lattice is declared (exact
/// coordinates otherwise); unmatched taps contribute their full magnitude.
inline double operator_distance(const ChannelSpec& h, const ChannelSpec& k) {
    const Lattice* lattice = nullptr;
    if (h.lattice()) lattice = &*h.lattice();
    else if (k.lattice()) lattice = &*k.lattice();

    double acc = 0.0;
    if (lattice) {
        std::map<std::pair<std::int64_t, std::int64_t>, Complex> diff;
        for (const Tap& t : h.taps()) {
            const auto idx = lattice->snap_index(t.delay, t.doppler);
            if (!idx) throw ValidationError("operator_distance: tap off the aligning lattice");
            diff[*idx] += t.amplitude;
        }
        for (const Tap& t : k.taps()) {
            const auto idx = lattice->snap_index(t.delay, t.doppler);
            if (!idx) throw ValidationError("operator_distance: tap off the aligning lattice");
            diff[*idx] -= t.amplitude;
        }
        for (const auto& [idx, a] : diff) acc += std::norm(a);
    } else {
        std::map<std::pair<double, double>, Complex> diff;
        for (const Tap& t : h.taps()) diff[{t.delay, t.doppler}] += t.amplitude;
        for (const Tap& t : k.taps()) diff[{t.delay, t.doppler}] -= t.amplitude;
        for (const auto& [key, a] : diff) acc += std::norm(a);
    }
    return std::sqrt(acc);
}

/// Empirical ratio ||Hx - Kx||_{L2,grid} / ||H - K||. Bounded by ||x||_{L2}
/// up to quadrature error for any admissible probe.
inline double identifiability_ratio(const ChannelSpec& h, const ChannelSpec& k,
                                    const GaussianProbe& probe, const TimeGrid& grid) {
    const double denom = operator_distance(h, k);
    if (denom == 0.0)
        throw ValidationError("identifiability_ratio: operators coincide (undefined ratio)");
    const std::vector<double> times = grid.times();
    const std::vector<Complex> hx = apply_channel(h, probe, times);
    const std::vector<Complex> kx = apply_channel(k, probe, times);
    double acc = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) acc += std::norm(hx[i] - kx[i]);
    return std::sqrt(grid.dt * acc) / denom;
}

}  // namespace ddident
