#pragma once

/// Identification pipeline: sample the channel response on the plan grid,
/// normalize to a damped-cisoid sum y_m = sum_k alpha_k z_k^m, estimate the
/// poles and amplitudes with the matrix pencil method, and map the cisoid
/// parameters back to tap triplets (a_k, tau_k, nu_k).
///
/// Closed forms used throughout (probe centered at the horizon T, samples at
/// t_m = tau_min + m T / M):
///
///   r_m      = lambda_{M-m} sum_k alpha_k z_k^{M-m}
///   lambda_j = sqrt(B) exp(-pi B^2 T^2 j^2 / (2 M^2))
///   alpha_k  = a_k exp(-pi B^2 (tau_k - tau_min)^2 / 2) e^{-2 pi i nu_k T}
///              e^{-2 pi i nu_k tau_min}
///   z_k      = exp(-pi B^2 T (tau_k - tau_min) / M) e^{2 pi i nu_k T / M}

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ddident/channel.hpp"
#include "ddident/errors.hpp"
#include "ddident/measures.hpp"

namespace ddident {

/// Sample grid t_m = tau_min + m*horizon/count, m = 0..count-1, plus the
/// Doppler window that resolves the arg-z branch. The window must be
/// narrower than the unambiguous span count/horizon.
struct SamplingPlan {
    double tau_min = 0.0;
    double horizon = 1.0;  // T, seconds
    int count = 2;         // M
    double nu_min = -0.5;
    double nu_max = 0.5;

    SamplingPlan(double tmin, double t, int m, double nlo, double nhi)
        : tau_min(tmin), horizon(t), count(m), nu_min(nlo), nu_max(nhi) {
        if (!(horizon > 0.0)) throw ValidationError("plan: horizon must be positive");
        if (count < 2) throw ValidationError("plan: need at least 2 samples");
        if (!(nu_max > nu_min)) throw ValidationError("plan: empty Doppler window");
        if (!(nu_max - nu_min < doppler_period()))
            throw ValidationError("plan: Doppler window must be narrower than count/horizon");
    }

    double doppler_period() const { return static_cast<double>(count) / horizon; }

    std::vector<double> times() const {
        std::vector<double> t(count);
        for (int m = 0; m < count; ++m)
            t[m] = tau_min + static_cast<double>(m) * horizon / static_cast<double>(count);
        return t;
    }
};

/// Damped-cisoid sum y_m = sum_k amplitudes[k] * poles[k]^m.
struct CisoidModel {
    std::vector<Complex> poles;
    std::vector<Complex> amplitudes;

    int order() const { return static_cast<int>(poles.size()); }
};

/// Greedy truth/estimate assignment report.
struct MatchedPair {
    int truth_index = -1;
    int estimate_index = -1;
    double delay_err = 0.0;
    double doppler_err = 0.0;
    double amplitude_err = 0.0;
};

struct MatchReport {
    std::vector<MatchedPair> pairs;
    int unmatched_truth = 0;
    int unmatched_estimate = 0;
    double rmse_delay = 0.0;
    double rmse_doppler = 0.0;
    double rmse_amplitude = 0.0;

    int unmatched() const { return unmatched_truth + unmatched_estimate; }
};

struct EstimationResult {
    std::vector<Tap> taps;
    CisoidModel model;
    double vandermonde_cond = 1.0;
    double fit_residual = 0.0;  // relative l2 misfit of y
    std::optional<MatchReport> matching;
    std::vector<std::string> warnings;
};

/// lambda_j = sqrt(B) exp(-pi B^2 T^2 j^2 / (2 M^2)) for j = 0..M.
inline std::vector<double> lambda_weights(double bandwidth, double horizon, int count) {
    if (!(bandwidth > 0.0) || !(horizon > 0.0) || count < 1)
        throw ValidationError("lambda_weights: B, T, M must be positive");
    std::vector<double> lambda(count + 1);
    const double root_b = std::sqrt(bandwidth);
    const double c = std::numbers::pi * bandwidth * bandwidth * horizon * horizon /
                     (2.0 * static_cast<double>(count) * static_cast<double>(count));
    for (int j = 0; j <= count; ++j) lambda[j] = root_b * std::exp(-c * static_cast<double>(j) * j);
    return lambda;
}

/// y_m = r_{M-m} / lambda_m for m = 1..M (returned with y[i] holding y_{i+1}).
/// Throws when a needed weight underflows; the fix is reducing B^2 T^2 / M^2,
/// not accepting amplified garbage.
inline std::vector<Complex> normalize_samples(std::span<const Complex> r, double bandwidth,
                                              double horizon) {
    const int count = static_cast<int>(r.size());
    if (count < 1) throw ValidationError("normalize_samples: empty sample vector");
    const std::vector<double> lambda = lambda_weights(bandwidth, horizon, count);
    std::vector<Complex> y(count);
    for (int m = 1; m <= count; ++m) {
        if (lambda[m] < 1e-300)
            throw NumericError(
                "normalize_samples: lambda underflow; reduce B^2 T^2 / M^2 before sampling");
        y[m - 1] = r[count - m] / lambda[m];
    }
    return y;
}

/// Forward closed forms (alpha_k, z_k) for one tap.
inline std::pair<Complex, Complex> cisoid_parameters(const Tap& tap, double bandwidth,
                                                     const SamplingPlan& plan) {
    const double pi = std::numbers::pi;
    const double d = tap.delay - plan.tau_min;
    const Complex alpha = tap.amplitude * std::exp(-pi * bandwidth * bandwidth * d * d / 2.0) *
                          std::polar(1.0, -2.0 * pi * tap.doppler * plan.horizon) *
                          std::polar(1.0, -2.0 * pi * tap.doppler * plan.tau_min);
    const double decay =
        std::exp(-pi * bandwidth * bandwidth * plan.horizon * d / static_cast<double>(plan.count));
    const Complex z = decay * std::polar(1.0, 2.0 * pi * tap.doppler * plan.horizon /
                                                  static_cast<double>(plan.count));
    return {alpha, z};
}

/// r_m synthesized from the closed forms; must agree with apply_channel
/// sampling of the same taps to rounding error.
inline std::vector<Complex> synthesize_samples(const ChannelSpec& spec, double bandwidth,
                                               const SamplingPlan& plan) {
    const int count = plan.count;
    const std::vector<double> lambda = lambda_weights(bandwidth, plan.horizon, count);
    std::vector<std::pair<Complex, Complex>> params;
    params.reserve(spec.size());
    for (const Tap& tap : spec.taps()) params.push_back(cisoid_parameters(tap, bandwidth, plan));

    std::vector<Complex> r(count, Complex(0.0, 0.0));
    for (const auto& [alpha, z] : params) {
        for (int m = 0; m < count; ++m)
            r[m] += alpha * std::pow(z, static_cast<double>(count - m));
    }
    for (int m = 0; m < count; ++m) r[m] *= lambda[count - m];
    return r;
}

namespace detail {

inline Eigen::MatrixXcd vandermonde(std::span<const Complex> poles, int sample_count) {
    Eigen::MatrixXcd v(sample_count, static_cast<int>(poles.size()));
    for (int k = 0; k < static_cast<int>(poles.size()); ++k) {
        Complex power(1.0, 0.0);
        for (int m = 0; m < sample_count; ++m) {
            power *= poles[k];  // row m holds z^{m+1}
            v(m, k) = power;
        }
    }
    return v;
}

}  // namespace detail

/// Matrix pencil estimation of the cisoid model behind y (y[i] = y_{i+1}).
///
/// Builds the Hankel matrix Y[i][j] = y_{i+j+1} with pencil parameter
/// L = floor(M/3) (clipped to [K, M-K] once the order is known), takes its
/// SVD, keeps the K dominant right singular vectors, and reads the poles off
/// the shift-invariance equation V1 Z = V2. Amplitudes come from the
/// least-squares fit of y over all M equations.
///
/// Order selection: `order_hint` wins when given; otherwise K counts the
/// singular values >= rank_tol * sigma_max.
inline CisoidModel matrix_pencil(std::span<const Complex> y,
                                 std::optional<int> order_hint = std::nullopt,
                                 double rank_tol = 1e-8) {
    const int sample_count = static_cast<int>(y.size());
    if (sample_count < 2) throw ValidationError("matrix_pencil: need at least 2 samples");
    if (order_hint && *order_hint < 0)
        throw ValidationError("matrix_pencil: negative order hint");
    if (order_hint && *order_hint > sample_count / 2)
        throw ValidationError("matrix_pencil: order exceeds floor(M/2) for the sample count");

    double ymax = 0.0;
    for (const Complex& v : y) ymax = std::max(ymax, std::abs(v));
    if (ymax == 0.0 || (order_hint && *order_hint == 0)) return {};

    const auto hankel = [&](int pencil) {
        Eigen::MatrixXcd h(sample_count - pencil, pencil + 1);
        for (int i = 0; i < sample_count - pencil; ++i)
            for (int j = 0; j <= pencil; ++j) h(i, j) = y[i + j];
        return h;
    };

    const auto clip = [&](int pencil, int order) {
        return std::clamp(pencil, std::max(order, 1),
                          std::max(sample_count - order, std::max(order, 1)));
    };

    int pencil = std::max(sample_count / 3, 1);
    if (order_hint) pencil = clip(pencil, *order_hint);

    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(hankel(pencil),
                                           Eigen::ComputeThinU | Eigen::ComputeThinV);
    int order;
    if (order_hint) {
        order = *order_hint;
    } else {
        const auto& sigma = svd.singularValues();
        order = 0;
        for (int i = 0; i < sigma.size(); ++i)
            if (sigma(i) >= rank_tol * sigma(0)) ++order;
        if (order == 0) return {};
        if (order > sample_count / 2)
            throw ValidationError("matrix_pencil: detected order exceeds floor(M/2)");
        if (order > pencil || order > sample_count - pencil) {
            pencil = clip(pencil, order);
            svd = Eigen::JacobiSVD<Eigen::MatrixXcd>(hankel(pencil),
                                                     Eigen::ComputeThinU | Eigen::ComputeThinV);
        }
    }
    if (order > std::min(pencil, sample_count - pencil))
        throw ValidationError("matrix_pencil: order exceeds the pencil dimensions");

    const Eigen::MatrixXcd v = svd.matrixV().leftCols(order);
    const Eigen::MatrixXcd v1 = v.topRows(pencil);
    const Eigen::MatrixXcd v2 = v.bottomRows(pencil);
    const Eigen::MatrixXcd shift = v1.completeOrthogonalDecomposition().solve(v2);

    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(shift);
    if (eig.info() != Eigen::Success)
        throw NumericError("matrix_pencil: eigenvalue decomposition failed");

    // With Y = U S V^H, the right singular vectors span the conjugated
    // Vandermonde column space, so the shift eigenvalues come out conjugated.
    CisoidModel model;
    model.poles.reserve(order);
    for (int k = 0; k < order; ++k) model.poles.push_back(std::conj(eig.eigenvalues()(k)));
    std::sort(model.poles.begin(), model.poles.end(), [](const Complex& a, const Complex& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });

    Eigen::VectorXcd rhs(sample_count);
    for (int m = 0; m < sample_count; ++m) rhs(m) = y[m];
    const Eigen::MatrixXcd vand = detail::vandermonde(model.poles, sample_count);
    const Eigen::VectorXcd amp = vand.completeOrthogonalDecomposition().solve(rhs);
    model.amplitudes.assign(amp.data(), amp.data() + order);
    return model;
}

/// 2-norm condition number of the M x K Vandermonde matrix [z_k^m], m = 1..M.
/// Returns +infinity when the matrix is rank-deficient to machine precision.
inline double vandermonde_condition(std::span<const Complex> poles, int sample_count) {
    if (poles.empty()) throw ValidationError("vandermonde_condition: need at least one pole");
    if (sample_count < static_cast<int>(poles.size()))
        throw ValidationError("vandermonde_condition: sample count below pole count");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(detail::vandermonde(poles, sample_count));
    const auto& sigma = svd.singularValues();
    const double smax = sigma(0);
    const double smin = sigma(sigma.size() - 1);
    if (smin <= smax * std::numeric_limits<double>::epsilon() || smin == 0.0)
        return std::numeric_limits<double>::infinity();
    return smax / smin;
}

/// Tolerated pole-modulus excursion above 1 before backmap emits a warning
/// instead of silently clamping.
inline constexpr double kPoleClampTol = 1e-6;

/// Inverts the closed forms: tap delay from -log|z|, Doppler as the unique
/// representative of arg(z) * M/(2 pi T) modulo M/T inside the plan's window,
/// amplitude by removing the Gaussian decay and the two phase factors.
inline std::vector<Tap> backmap(const CisoidModel& model, double bandwidth,
                                const SamplingPlan& plan,
                                std::vector<std::string>* warnings = nullptr) {
    const double pi = std::numbers::pi;
    const double period = plan.doppler_period();
    std::vector<Tap> taps;
    taps.reserve(model.poles.size());
    for (std::size_t k = 0; k < model.poles.size(); ++k) {
        const Complex z = model.poles[k];
        double mod = std::abs(z);
        if (mod == 0.0) throw NumericError("backmap: degenerate zero pole");
        if (mod > 1.0) {
            if (mod > 1.0 + kPoleClampTol && warnings)
                warnings->push_back("pole modulus " + std::to_string(mod) +
                                    " clamped to 1 (delay pinned to tau_min)");
            mod = 1.0;
        }
        const double d = -static_cast<double>(plan.count) * std::log(mod) /
                         (pi * bandwidth * bandwidth * plan.horizon);

        const double nu0 = std::arg(z) * static_cast<double>(plan.count) / (2.0 * pi * plan.horizon);
        const double steps = std::ceil((plan.nu_min - nu0) / period);
        const double nu = nu0 + steps * period;
        if (!(nu < plan.nu_max))
            throw NumericError("backmap: no Doppler representative inside the plan window");

        const Complex amplitude = model.amplitudes[k] *
                                  std::exp(pi * bandwidth * bandwidth * d * d / 2.0) *
                                  std::polar(1.0, 2.0 * pi * nu * plan.horizon) *
                                  std::polar(1.0, 2.0 * pi * nu * plan.tau_min);
        taps.push_back({amplitude, plan.tau_min + d, nu});
    }
    return taps;
}

/// Greedy minimum-distance assignment between truth and estimate under the
/// scaled metric sqrt((d_tau/delay_scale)^2 + (d_nu/doppler_scale)^2).
inline MatchReport match_taps(std::span<const Tap> truth, std::span<const Tap> estimate,
                              double delay_scale, double doppler_scale) {
    if (!(delay_scale > 0.0) || !(doppler_scale > 0.0))
        throw ValidationError("match_taps: scales must be positive");

    struct Candidate {
        double distance;
        int truth_index;
        int estimate_index;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(truth.size() * estimate.size());
    for (int i = 0; i < static_cast<int>(truth.size()); ++i) {
        for (int j = 0; j < static_cast<int>(estimate.size()); ++j) {
            const double dt = (truth[i].delay - estimate[j].delay) / delay_scale;
            const double dn = (truth[i].doppler - estimate[j].doppler) / doppler_scale;
            candidates.push_back({std::sqrt(dt * dt + dn * dn), i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        if (a.truth_index != b.truth_index) return a.truth_index < b.truth_index;
        return a.estimate_index < b.estimate_index;
    });

    std::vector<bool> truth_used(truth.size(), false), est_used(estimate.size(), false);
    MatchReport report;
    for (const Candidate& c : candidates) {
        if (truth_used[c.truth_index] || est_used[c.estimate_index]) continue;
        truth_used[c.truth_index] = true;
        est_used[c.estimate_index] = true;
        const Tap& t = truth[c.truth_index];
        const Tap& e = estimate[c.estimate_index];
        report.pairs.push_back({c.truth_index, c.estimate_index, e.delay - t.delay,
                                e.doppler - t.doppler, std::abs(e.amplitude - t.amplitude)});
    }
    report.unmatched_truth = static_cast<int>(truth.size()) - static_cast<int>(report.pairs.size());
    report.unmatched_estimate =
        static_cast<int>(estimate.size()) - static_cast<int>(report.pairs.size());

    double st = 0.0, sn = 0.0, sa = 0.0;
    for (const MatchedPair& p : report.pairs) {
        st += p.delay_err * p.delay_err;
        sn += p.doppler_err * p.doppler_err;
        sa += p.amplitude_err * p.amplitude_err;
    }
    if (!report.pairs.empty()) {
        const auto n = static_cast<double>(report.pairs.size());
        report.rmse_delay = std::sqrt(st / n);
        report.rmse_doppler = std::sqrt(sn / n);
        report.rmse_amplitude = std::sqrt(sa / n);
    }
    return report;
}

struct EstimationOptions {
    std::optional<int> order_hint;
    double rank_tol = 1e-8;
};

/// Full normalize -> pencil -> backmap pipeline with conditioning and misfit
/// diagnostics.
inline EstimationResult estimate_channel(std::span<const Complex> samples, double bandwidth,
                                         const SamplingPlan& plan,
                                         const EstimationOptions& options = {}) {
    if (static_cast<int>(samples.size()) != plan.count)
        throw ValidationError("estimate_channel: sample count does not match the plan");
    EstimationResult result;
    const std::vector<Complex> y = normalize_samples(samples, bandwidth, plan.horizon);
    result.model = matrix_pencil(y, options.order_hint, options.rank_tol);
    result.taps = backmap(result.model, bandwidth, plan, &result.warnings);

    double ynorm = 0.0;
    for (const Complex& v : y) ynorm += std::norm(v);
    ynorm = std::sqrt(ynorm);
    if (result.model.order() == 0) {
        result.vandermonde_cond = 1.0;
        result.fit_residual = ynorm > 0.0 ? 1.0 : 0.0;
        return result;
    }
    result.vandermonde_cond = vandermonde_condition(result.model.poles, plan.count);

    const Eigen::MatrixXcd vand = detail::vandermonde(result.model.poles, plan.count);
    Eigen::VectorXcd amp(result.model.order()), rhs(plan.count);
    for (int k = 0; k < result.model.order(); ++k) amp(k) = result.model.amplitudes[k];
    for (int m = 0; m < plan.count; ++m) rhs(m) = y[m];
    const double misfit = (vand * amp - rhs).norm();
    result.fit_residual = ynorm > 0.0 ? misfit / ynorm : 0.0;
    return result;
}

}  // namespace ddident
