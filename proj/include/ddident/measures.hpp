#pragma once

/// Discrete delay-Doppler spreading measures: taps, lattices, periodic
/// residue support sets, translated-window counting for Beurling-density
/// estimates, and the density-threshold identifiability verdict.
///
/// Windows are half-open squares [0,r)^2 so that period counting is exact on
/// lattices; true densities are r -> infinity limits and the estimators here
/// only report finite-radius trajectories.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ddident/errors.hpp"

namespace ddident {

using Complex = std::complex<double>;

/// One point of the delay-Doppler plane (seconds, hertz).
struct Point {
    double tau = 0.0;
    double nu = 0.0;
};

/// Relative snap tolerance for lattice membership of tap coordinates
/// (double-precision construction noise only).
inline constexpr double kLatticeSnapTol = 1e-9;

/// Invertible generator A of the lattice A*Z^2; first row in seconds,
/// second in hertz. Carries density 1/|det A|.
class Lattice {
public:
    Lattice(double a11, double a12, double a21, double a22)
        : a_{a11, a12, a21, a22}, det_(a11 * a22 - a12 * a21) {
        if (det_ == 0.0 || !std::isfinite(det_))
            throw ValidationError("lattice: generator matrix must be invertible");
    }

    static Lattice identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static Lattice diagonal(double d1, double d2) { return {d1, 0.0, 0.0, d2}; }

    double det() const { return det_; }
    double density() const { return 1.0 / std::abs(det_); }

    /// A * (i, j).
    Point map(double i, double j) const {
        return {a_[0] * i + a_[1] * j, a_[2] * i + a_[3] * j};
    }

    /// A^{-1} * (tau, nu).
    std::pair<double, double> unmap(double tau, double nu) const {
        return {(a_[3] * tau - a_[1] * nu) / det_, (a_[0] * nu - a_[2] * tau) / det_};
    }

    /// Nearest integer index n with A*n == (tau, nu) within the snap
    /// tolerance, or nullopt if the point is off-lattice.
    std::optional<std::pair<std::int64_t, std::int64_t>> snap_index(double tau, double nu) const {
        auto [fi, fj] = unmap(tau, nu);
        const double i = std::round(fi);
        const double j = std::round(fj);
        const Point back = map(i, j);
        if (std::abs(back.tau - tau) > kLatticeSnapTol * std::max(1.0, std::abs(tau)) ||
            std::abs(back.nu - nu) > kLatticeSnapTol * std::max(1.0, std::abs(nu)))
            return std::nullopt;
        return std::make_pair(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j));
    }

    /// Row-major a11 a12 a21 a22.
    const double* data() const { return a_; }

private:
    double a_[4];
    double det_;
};

/// One atom of the spreading measure: complex gain at (delay, doppler).
struct Tap {
    Complex amplitude;
    double delay = 0.0;    // seconds
    double doppler = 0.0;  // hertz
};

/// Finite discrete spreading measure: an ordered tap list, optionally
/// declared to live on a lattice (every tap then snaps to an integer index).
class ChannelSpec {
public:
    ChannelSpec() = default;

    explicit ChannelSpec(std::vector<Tap> taps, std::optional<Lattice> lattice = std::nullopt)
        : taps_(std::move(taps)), lattice_(std::move(lattice)) {
        for (const Tap& t : taps_) {
            if (std::abs(t.amplitude) == 0.0)
                throw ValidationError("channel spec: zero-amplitude taps are not stored");
            if (!std::isfinite(t.delay) || !std::isfinite(t.doppler))
                throw ValidationError("channel spec: tap coordinates must be finite");
        }
        if (lattice_) {
            for (const Tap& t : taps_)
                if (!lattice_->snap_index(t.delay, t.doppler))
                    throw ValidationError("channel spec: tap off the declared lattice");
        }
        for (std::size_t i = 0; i < taps_.size(); ++i)
            for (std::size_t j = i + 1; j < taps_.size(); ++j)
                if (same_support(taps_[i], taps_[j]))
                    throw ValidationError("channel spec: duplicate (delay, doppler) support point");
    }

    const std::vector<Tap>& taps() const { return taps_; }
    const std::optional<Lattice>& lattice() const { return lattice_; }
    std::size_t size() const { return taps_.size(); }
    bool empty() const { return taps_.empty(); }

    std::vector<Point> support() const {
        std::vector<Point> pts;
        pts.reserve(taps_.size());
        for (const Tap& t : taps_) pts.push_back({t.delay, t.doppler});
        return pts;
    }

private:
    bool same_support(const Tap& a, const Tap& b) const {
        if (lattice_) {
            const auto ia = lattice_->snap_index(a.delay, a.doppler);
            const auto ib = lattice_->snap_index(b.delay, b.doppler);
            return ia == ib;
        }
        return a.delay == b.delay && a.doppler == b.doppler;
    }

    std::vector<Tap> taps_;
    std::optional<Lattice> lattice_;
};

/// Periodic residue support set over Z^2. The base pattern is the union over
/// r in `residues` of (modulus*Z + r)^2, i.e. both coordinates share the same
/// residue class. The optional outer level thins each class c = r to the
/// classes modulus*s + r (mod modulus*outer_modulus) for s in outer residues.
struct ResiduePattern {
    int modulus = 1;
    std::vector<int> residues{0};
    std::optional<int> outer_modulus;
    std::vector<int> outer_residues;

    /// Block pattern with residues {0..count-1} (mod m).
    static ResiduePattern block(int m, int count) {
        ResiduePattern p;
        p.modulus = m;
        p.residues.clear();
        for (int r = 0; r < count; ++r) p.residues.push_back(r);
        p.validate();
        return p;
    }

    /// Two-level pattern on the complementary residues {count..m-1}, thinned
    /// by outer residues {0..outer_count-1} (mod m*outer_m). Disjoint from
    /// block(m, count) by construction.
    static ResiduePattern complement_block(int m, int count, int outer_m, int outer_count) {
        ResiduePattern p;
        p.modulus = m;
        p.residues.clear();
        for (int r = count; r < m; ++r) p.residues.push_back(r);
        p.outer_modulus = outer_m;
        for (int s = 0; s < outer_count; ++s) p.outer_residues.push_back(s);
        p.validate();
        return p;
    }

    void validate() const {
        if (modulus < 1) throw ValidationError("residue pattern: modulus must be positive");
        if (residues.empty()) throw ValidationError("residue pattern: residues must be nonempty");
        for (int r : residues)
            if (r < 0 || r >= modulus)
                throw ValidationError("residue pattern: residues must lie in [0, modulus)");
        if (outer_modulus) {
            if (*outer_modulus < 1)
                throw ValidationError("residue pattern: outer modulus must be positive");
            if (outer_residues.empty())
                throw ValidationError("residue pattern: outer residues must be nonempty");
            for (int s : outer_residues)
                if (s < 0 || s >= *outer_modulus)
                    throw ValidationError("residue pattern: outer residues must lie in [0, outer modulus)");
        } else if (!outer_residues.empty()) {
            throw ValidationError("residue pattern: outer residues given without outer modulus");
        }
    }

    /// Period of the combined pattern.
    int effective_modulus() const { return outer_modulus ? modulus * *outer_modulus : modulus; }

    /// Sorted distinct residue classes mod effective_modulus().
    std::vector<int> combined_residues() const {
        std::vector<int> out;
        if (outer_modulus) {
            for (int s : outer_residues)
                for (int r : residues) out.push_back(modulus * s + r);
        } else {
            out = residues;
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
};

/// Finite-radius window-count trajectory plus the last-radius estimates.
/// Never a claim about the r -> infinity limit.
struct DensityReport {
    std::vector<double> radii;
    std::vector<long> n_minus;
    std::vector<long> n_plus;
    double lower_estimate = 0.0;
    double upper_estimate = 0.0;
};

/// Smallest/largest point count over grid-sampled translates of the
/// half-open window [0,r)^2. The maximum scans translate origins covering
/// the bounding box inflated by r; the minimum only translates fully inside
/// the bounding box (clamped to the single box-minimum origin when the box
/// is smaller than the window, so a window covering everything counts all
/// points).
inline std::pair<long, long> windowed_counts(std::span<const Point> points, double r,
                                             double grid_step) {
    if (!(r > 0.0)) throw ValidationError("windowed_counts: radius must be positive");
    if (!(grid_step > 0.0)) throw ValidationError("windowed_counts: grid step must be positive");
    if (points.empty()) return {0, 0};

    std::vector<Point> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const Point& a, const Point& b) { return a.tau < b.tau; });

    double xmin = sorted.front().tau, xmax = sorted.back().tau;
    double ymin = sorted.front().nu, ymax = sorted.front().nu;
    for (const Point& p : sorted) {
        ymin = std::min(ymin, p.nu);
        ymax = std::max(ymax, p.nu);
    }

    const auto count_in = [&](double x0, double y0) {
        auto lo = std::lower_bound(sorted.begin(), sorted.end(), x0,
                                   [](const Point& p, double v) { return p.tau < v; });
        long c = 0;
        for (auto it = lo; it != sorted.end() && it->tau < x0 + r; ++it)
            if (y0 <= it->nu && it->nu < y0 + r) ++c;
        return c;
    };

    const auto scan = [&](double x_lo, double x_hi, double y_lo, double y_hi, bool want_max) {
        const long nx = static_cast<long>(std::floor((x_hi - x_lo) / grid_step)) + 1;
        const long ny = static_cast<long>(std::floor((y_hi - y_lo) / grid_step)) + 1;
        long best = want_max ? 0 : std::numeric_limits<long>::max();
        for (long ix = 0; ix < nx; ++ix) {
            const double x0 = x_lo + static_cast<double>(ix) * grid_step;
            for (long iy = 0; iy < ny; ++iy) {
                const double y0 = y_lo + static_cast<double>(iy) * grid_step;
                const long c = count_in(x0, y0);
                best = want_max ? std::max(best, c) : std::min(best, c);
            }
        }
        return best;
    };

    const long n_plus = scan(xmin - r, xmax, ymin - r, ymax, true);
    const long n_minus = scan(xmin, std::max(xmax - r, xmin), ymin, std::max(ymax - r, ymin), false);
    return {n_minus, n_plus};
}

/// Per-radius counts plus the last-radius density estimates
/// n^{-}(r_max)/r_max^2 and n^{+}(r_max)/r_max^2. grid_step defaults to r/64
/// per radius when not supplied.
inline DensityReport density_estimates(std::span<const Point> points, std::span<const double> radii,
                                       std::optional<double> grid_step = std::nullopt) {
    if (radii.empty()) throw ValidationError("density_estimates: radii must be nonempty");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw ValidationError("density_estimates: radii must be positive");
        if (i > 0 && !(radii[i] > radii[i - 1]))
            throw ValidationError("density_estimates: radii must be strictly increasing");
    }
    DensityReport report;
    for (double r : radii) {
        const double step = grid_step ? *grid_step : r / 64.0;
        auto [lo, hi] = windowed_counts(points, r, step);
        report.radii.push_back(r);
        report.n_minus.push_back(lo);
        report.n_plus.push_back(hi);
    }
    const double rmax = report.radii.back();
    report.lower_estimate = static_cast<double>(report.n_minus.back()) / (rmax * rmax);
    report.upper_estimate = static_cast<double>(report.n_plus.back()) / (rmax * rmax);
    return report;
}

/// Points of A*(pattern within [-box, box]^2 integer window), ordered
/// lexicographically by integer coordinates.
inline std::vector<Point> residue_pattern_points(const ResiduePattern& pattern,
                                                 const Lattice& lattice, int box) {
    pattern.validate();
    if (box < pattern.modulus)
        throw ValidationError("residue_pattern_points: box half-width must be >= modulus");
    const int period = pattern.effective_modulus();
    const std::vector<int> classes = pattern.combined_residues();

    // per residue class c: coordinates in [-box, box] congruent to c
    std::vector<std::vector<int>> coords(classes.size());
    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const int c = classes[ci];
        int start = c - ((c + box) / period) * period;
        while (start < -box) start += period;
        for (int v = start; v <= box; v += period) coords[ci].push_back(v);
    }

    std::vector<std::pair<int, int>> integer_points;
    for (std::size_t ci = 0; ci < classes.size(); ++ci)
        for (int i : coords[ci])
            for (int j : coords[ci]) integer_points.emplace_back(i, j);
    std::sort(integer_points.begin(), integer_points.end());
    integer_points.erase(std::unique(integer_points.begin(), integer_points.end()),
                         integer_points.end());

    std::vector<Point> out;
    out.reserve(integer_points.size());
    for (auto [i, j] : integer_points) out.push_back(lattice.map(i, j));
    return out;
}

/// Counting ground truth: |pattern ∩ [0,m)^2| / m^2 scaled by the lattice
/// density, by exhaustive enumeration of one period.
inline double exact_pattern_density(const ResiduePattern& pattern, const Lattice& lattice) {
    pattern.validate();
    const int period = pattern.effective_modulus();
    const std::vector<int> classes = pattern.combined_residues();
    long count = 0;
    for (int i = 0; i < period; ++i) {
        for (int j = 0; j < period; ++j) {
            for (int c : classes) {
                if (i % period == c && j % period == c) {
                    ++count;
                    break;
                }
            }
        }
    }
    return static_cast<double>(count) / (static_cast<double>(period) * period) * lattice.density();
}

enum class Verdict { Identifiable, NotIdentifiable, Boundary, HypothesisViolated };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Identifiable: return "identifiable";
        case Verdict::NotIdentifiable: return "not_identifiable";
        case Verdict::Boundary: return "boundary";
        case Verdict::HypothesisViolated: return "hypothesis_violated";
    }
    return "unknown";
}

/// Density-threshold verdict for operator classes of upper density alpha on
/// the given lattice. The standing hypothesis 1/|det A| >= 2*alpha is checked
/// first; past it, alpha < 1/2 is identifiable, alpha > 1/2 is not, and the
/// critical value 1/2 is reported as Boundary (no claim either way).
inline Verdict identifiability_verdict(double alpha, const Lattice& lattice) {
    if (!(alpha > 0.0)) throw ValidationError("identifiability_verdict: alpha must be positive");
    if (lattice.density() < 2.0 * alpha) return Verdict::HypothesisViolated;
    if (alpha < 0.5) return Verdict::Identifiable;
    if (alpha > 0.5) return Verdict::NotIdentifiable;
    return Verdict::Boundary;
}

}  // namespace ddident
