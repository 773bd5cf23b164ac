#pragma once

/// Gaussian-window STFT and Bargmann transform by trapezoidal quadrature,
/// plus the verification of the prefactor identity connecting them:
///
///   (V_g x)(tau, nu) = (Bf)(z) e^{-pi |z|^2 / 2} e^{-pi i tau nu},
///   f(u) = (sqrt(2)/B)^{1/2} x(u sqrt(2)/B),  z = tau B/sqrt(2) - i nu sqrt(2)/B.

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "ddident/channel.hpp"
#include "ddident/errors.hpp"

namespace ddident {

struct TimeFreqPoint {
    double tau = 0.0;  // seconds
    double nu = 0.0;   // hertz
};

/// Largest |z| accepted by bargmann_transform; beyond it the integrand's
/// dynamic range is no longer trustworthy in doubles.
inline constexpr double kBargmannMaxZ = 6.0;

namespace detail {

/// Trapezoidal weights: dt everywhere, dt/2 at the two endpoints.
template <typename F>
Complex trapezoid(const SampledSignal& s, F&& integrand) {
    const std::size_t n = s.values.size();
    if (n == 1) return integrand(0) * s.dt;
    Complex acc = (integrand(0) + integrand(n - 1)) * 0.5;
    for (std::size_t i = 1; i + 1 < n; ++i) acc += integrand(i);
    return acc * s.dt;
}

/// Catmull-Rom cubic interpolation of a stored signal at time t; indices are
/// clamped at the grid ends, where the signals handled here have decayed.
inline Complex cubic_interpolate(const SampledSignal& s, double t) {
    const auto n = static_cast<std::ptrdiff_t>(s.values.size());
    const double pos = (t - s.t0) / s.dt;
    const auto cell = static_cast<std::ptrdiff_t>(std::floor(pos));
    const double x = pos - static_cast<double>(cell);
    const auto at = [&](std::ptrdiff_t i) {
        return s.values[static_cast<std::size_t>(std::clamp(i, std::ptrdiff_t{0}, n - 1))];
    };
    const Complex p0 = at(cell - 1), p1 = at(cell), p2 = at(cell + 1), p3 = at(cell + 2);
    return p1 + 0.5 * x * (p2 - p0 +
                           x * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                x * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace detail

/// (V_g x)(tau, nu) with the unit-energy Gaussian window of parameter B.
/// The signal grid must cover [tau - 8/B, tau + 8/B].
inline Complex stft_gaussian(const SampledSignal& x, double bandwidth, TimeFreqPoint p) {
    if (!(bandwidth > 0.0)) throw ValidationError("stft: bandwidth must be positive");
    const double radius = 8.0 / bandwidth;
    if (x.t0 > p.tau - radius || x.t_end() < p.tau + radius)
        throw CoverageError("stft: signal grid does not cover the window support");
    const GaussianProbe window(bandwidth, 0.0);
    return detail::trapezoid(x, [&](std::size_t i) {
        const double t = x.time_at(i);
        return x.values[i] * window.value(t - p.tau) *
               std::polar(1.0, -2.0 * std::numbers::pi * p.nu * t);
    });
}

/// (Bf)(z) = 2^{1/4} e^{-pi z^2/2} \int f(u) e^{2 pi u z - pi u^2} du.
/// Rejects |z| > 6; the grid must reach far enough that the integrand is
/// negligible at both ends.
inline Complex bargmann_transform(const SampledSignal& f, Complex z) {
    if (std::abs(z) > kBargmannMaxZ)
        throw ValidationError("bargmann: |z| exceeds the supported range");

    const double pi = std::numbers::pi;
    // envelope of |f(u) e^{2 pi u Re z - pi u^2}| at the grid ends vs its peak
    double peak = 0.0, edge = 0.0;
    const std::size_t n = f.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double u = f.time_at(i);
        const double mag = std::abs(f.values[i]) * std::exp(2.0 * pi * u * z.real() - pi * u * u);
        peak = std::max(peak, mag);
        if (i == 0 || i + 1 == n) edge = std::max(edge, mag);
    }
    if (peak > 0.0 && edge > 1e-12 * peak)
        throw CoverageError("bargmann: integrand not negligible at the grid ends");

    const Complex integral = detail::trapezoid(f, [&](std::size_t i) {
        const double u = f.time_at(i);
        return f.values[i] * std::exp(Complex(2.0 * pi * u, 0.0) * z - Complex(pi * u * u, 0.0));
    });
    const Complex prefactor = std::pow(2.0, 0.25) * std::exp(-pi * z * z / 2.0);
    return prefactor * integral;
}

struct IdentitySample {
    TimeFreqPoint point;
    Complex lhs;  // STFT value
    Complex rhs;  // Bargmann value times prefactors
    double abs_err = 0.0;
};

struct IdentityReport {
    std::vector<IdentitySample> samples;
    double max_abs_err = 0.0;
};

/// Evaluates both sides of the STFT-Bargmann identity at each point and
/// reports the largest absolute discrepancy. The rescaled f(u) =
/// (sqrt(2)/B)^{1/2} x(u sqrt(2)/B) is built by cubic resampling onto a
/// u-grid slightly denser than the pushforward of x's grid, so the two
/// quadratures stay decoupled and the discrepancy tracks real numerical
/// error instead of a shared-grid cancellation.
inline IdentityReport verify_stft_bargmann(const SampledSignal& x, double bandwidth,
                                           std::span<const TimeFreqPoint> points) {
    if (!(bandwidth > 0.0)) throw ValidationError("verify: bandwidth must be positive");
    const double pi = std::numbers::pi;
    const double scale = bandwidth / std::numbers::sqrt2;  // u = t * scale

    const double u0 = x.t0 * scale;
    const double du = 0.75 * x.dt * scale;
    const auto count = static_cast<std::size_t>(std::floor((x.t_end() * scale - u0) / du)) + 1;
    const double amp = std::sqrt(std::numbers::sqrt2 / bandwidth);
    std::vector<Complex> fv(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = u0 + static_cast<double>(i) * du;
        fv[i] = amp * detail::cubic_interpolate(x, u / scale);
    }
    const SampledSignal f(u0, du, std::move(fv));

    IdentityReport report;
    for (const TimeFreqPoint& p : points) {
        const Complex lhs = stft_gaussian(x, bandwidth, p);
        const Complex z(p.tau * bandwidth / std::numbers::sqrt2,
                        -p.nu * std::numbers::sqrt2 / bandwidth);
        const Complex rhs = bargmann_transform(f, z) * std::exp(-pi * std::norm(z) / 2.0) *
                            std::polar(1.0, -pi * p.tau * p.nu);
        const double err = std::abs(lhs - rhs);
        report.samples.push_back({p, lhs, rhs, err});
        report.max_abs_err = std::max(report.max_abs_err, err);
    }
    return report;
}

}  // namespace ddident
