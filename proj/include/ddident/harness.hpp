#pragma once

/// Experiment orchestration: config ingestion and validation, scenario
/// generation (explicit taps, random lattice draws, periodic residue
/// patterns), the identify/density/verify/sweep runs, and deterministic
/// JSON/CSV artifact emission. Identical config and seed give byte-identical
/// artifacts.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ddident/analysis.hpp"
#include "ddident/channel.hpp"
#include "ddident/errors.hpp"
#include "ddident/estimation.hpp"
#include "ddident/io.hpp"
#include "ddident/measures.hpp"
#include "ddident/rng.hpp"
#include "ddident/version.hpp"

namespace ddident {

// ---------------------------------------------------------------------------
// configuration schema
// ---------------------------------------------------------------------------

struct ProbeConfig {
    double bandwidth = 1.0;
    double center = 8.0;
};

struct PlanConfig {
    double tau_min = 0.0;
    double horizon = 8.0;
    int count = 64;
    double nu_min = -4.0;
    double nu_max = 4.0;
};

struct TapInit {
    double a_re = 1.0;
    double a_im = 0.0;
    double tau = 0.0;
    double nu = 0.0;
};

struct PatternConfig {
    int modulus = 2;
    std::vector<int> residues{0};
    std::optional<int> outer_modulus;
    std::vector<int> outer_residues;
    int box = 8;

    ResiduePattern pattern() const {
        ResiduePattern p;
        p.modulus = modulus;
        p.residues = residues;
        p.outer_modulus = outer_modulus;
        p.outer_residues = outer_residues;
        p.validate();
        return p;
    }
};

struct ScenarioConfig {
    std::string mode = "explicit";  // explicit | random | pattern
    std::vector<TapInit> taps;
    int tap_count = 4;                          // random mode
    std::array<int, 4> index_box{0, 3, -3, 3};  // i_min, i_max, j_min, j_max
    double amplitude_sigma = 0.5;               // unit-mean log-normal magnitude
    std::uint64_t seed = 1;
    PatternConfig pattern;
};

struct NoiseConfig {
    std::vector<double> snr_db;
    int trials = 0;
};

struct EstimationConfig {
    std::optional<int> order_hint;
    bool use_true_order = false;
    double rank_tol = 1e-8;
    std::string samples_csv;  // measured samples (t,re,im); replaces simulation
};

struct DensityConfig {
    std::string mode = "lattice";  // lattice | pattern | csv
    std::vector<double> radii{5.0, 10.0, 20.0};
    std::optional<double> grid_step;
    double alpha = 0.4;
    double box_halfwidth = 25.0;  // real-coordinate box for lattice mode
    std::string points_csv;
    PatternConfig pattern;
};

struct VerifyConfig {
    int ratio_trials = 100;
    int ratio_max_taps = 8;
    std::array<double, 4> ratio_lattice{4.0, 0.0, 0.0, 4.0};
    std::array<int, 4> ratio_index_box{-4, 4, -2, 2};
    int identity_points = 20;
    double tf_radius = 2.0;
    double max_ratio = 1.0 + 1e-3;
    double max_discrepancy = 1e-6;
    std::string signal_csv;  // optional identity-check input signal
};

struct CheckConfig {
    double tap_tol = 1e-6;      // identify: relative tap-error threshold
    double density_tol = 0.05;  // density: |upper - exact| / max(exact, 1)
    double delay_scale = 1.0;   // tap-matching metric scales
    double doppler_scale = 1.0;
};

struct ExperimentConfig {
    std::array<double, 4> lattice{1.0, 0.0, 0.0, 1.0};
    ProbeConfig probe;
    PlanConfig plan;
    ScenarioConfig scenario;
    NoiseConfig noise;
    EstimationConfig estimation;
    DensityConfig density;
    VerifyConfig verify;
    CheckConfig check;

    Lattice make_lattice() const { return {lattice[0], lattice[1], lattice[2], lattice[3]}; }
    GaussianProbe make_probe() const { return {probe.bandwidth, probe.center}; }
    SamplingPlan make_plan() const {
        return {plan.tau_min, plan.horizon, plan.count, plan.nu_min, plan.nu_max};
    }
};

// ---- JSON mapping (every field serializes; missing input fields default) ----

inline void to_json(Json& j, const ProbeConfig& c) {
    j = Json{{"bandwidth", c.bandwidth}, {"center", c.center}};
}
inline void from_json(const Json& j, ProbeConfig& c) {
    c.bandwidth = j.value("bandwidth", c.bandwidth);
    c.center = j.value("center", c.center);
}

inline void to_json(Json& j, const PlanConfig& c) {
    j = Json{{"tau_min", c.tau_min},
             {"horizon", c.horizon},
             {"count", c.count},
             {"nu_window", {c.nu_min, c.nu_max}}};
}
inline void from_json(const Json& j, PlanConfig& c) {
    c.tau_min = j.value("tau_min", c.tau_min);
    c.horizon = j.value("horizon", c.horizon);
    c.count = j.value("count", c.count);
    if (j.contains("nu_window")) {
        const auto w = j.at("nu_window");
        if (!w.is_array() || w.size() != 2)
            throw ValidationError("plan.nu_window: expected [nu_min, nu_max]");
        c.nu_min = w[0].get<double>();
        c.nu_max = w[1].get<double>();
    }
}

inline void to_json(Json& j, const TapInit& t) {
    j = Json{{"a_re", t.a_re}, {"a_im", t.a_im}, {"tau", t.tau}, {"nu", t.nu}};
}
inline void from_json(const Json& j, TapInit& t) {
    t.a_re = j.value("a_re", t.a_re);
    t.a_im = j.value("a_im", t.a_im);
    t.tau = j.value("tau", t.tau);
    t.nu = j.value("nu", t.nu);
}

inline void to_json(Json& j, const PatternConfig& c) {
    j = Json{{"modulus", c.modulus}, {"residues", c.residues}, {"box", c.box}};
    if (c.outer_modulus) {
        j["outer_modulus"] = *c.outer_modulus;
        j["outer_residues"] = c.outer_residues;
    }
}
inline void from_json(const Json& j, PatternConfig& c) {
    c.modulus = j.value("modulus", c.modulus);
    if (j.contains("residues")) c.residues = j.at("residues").get<std::vector<int>>();
    c.box = j.value("box", c.box);
    if (j.contains("outer_modulus") && !j.at("outer_modulus").is_null()) {
        c.outer_modulus = j.at("outer_modulus").get<int>();
        if (j.contains("outer_residues"))
            c.outer_residues = j.at("outer_residues").get<std::vector<int>>();
    }
}

inline void to_json(Json& j, const ScenarioConfig& c) {
    j = Json{{"mode", c.mode},
             {"taps", c.taps},
             {"tap_count", c.tap_count},
             {"index_box", c.index_box},
             {"amplitude_sigma", c.amplitude_sigma},
             {"seed", c.seed},
             {"pattern", c.pattern}};
}
inline void from_json(const Json& j, ScenarioConfig& c) {
    c.mode = j.value("mode", c.mode);
    if (j.contains("taps")) c.taps = j.at("taps").get<std::vector<TapInit>>();
    c.tap_count = j.value("tap_count", c.tap_count);
    if (j.contains("index_box")) c.index_box = j.at("index_box").get<std::array<int, 4>>();
    c.amplitude_sigma = j.value("amplitude_sigma", c.amplitude_sigma);
    c.seed = j.value("seed", c.seed);
    if (j.contains("pattern")) c.pattern = j.at("pattern").get<PatternConfig>();
}

inline void to_json(Json& j, const NoiseConfig& c) {
    j = Json{{"snr_db", c.snr_db}, {"trials", c.trials}};
}
inline void from_json(const Json& j, NoiseConfig& c) {
    if (j.contains("snr_db")) c.snr_db = j.at("snr_db").get<std::vector<double>>();
    c.trials = j.value("trials", c.trials);
}

inline void to_json(Json& j, const EstimationConfig& c) {
    j = Json{{"use_true_order", c.use_true_order},
             {"rank_tol", c.rank_tol},
             {"samples_csv", c.samples_csv}};
    j["order_hint"] = c.order_hint ? Json(*c.order_hint) : Json(nullptr);
}
inline void from_json(const Json& j, EstimationConfig& c) {
    if (j.contains("order_hint") && !j.at("order_hint").is_null())
        c.order_hint = j.at("order_hint").get<int>();
    c.use_true_order = j.value("use_true_order", c.use_true_order);
    c.rank_tol = j.value("rank_tol", c.rank_tol);
    c.samples_csv = j.value("samples_csv", c.samples_csv);
}

inline void to_json(Json& j, const DensityConfig& c) {
    j = Json{{"mode", c.mode},
             {"radii", c.radii},
             {"alpha", c.alpha},
             {"box_halfwidth", c.box_halfwidth},
             {"points_csv", c.points_csv},
             {"pattern", c.pattern}};
    j["grid_step"] = c.grid_step ? Json(*c.grid_step) : Json(nullptr);
}
inline void from_json(const Json& j, DensityConfig& c) {
    c.mode = j.value("mode", c.mode);
    if (j.contains("radii")) c.radii = j.at("radii").get<std::vector<double>>();
    if (j.contains("grid_step") && !j.at("grid_step").is_null())
        c.grid_step = j.at("grid_step").get<double>();
    c.alpha = j.value("alpha", c.alpha);
    c.box_halfwidth = j.value("box_halfwidth", c.box_halfwidth);
    c.points_csv = j.value("points_csv", c.points_csv);
    if (j.contains("pattern")) c.pattern = j.at("pattern").get<PatternConfig>();
}

inline void to_json(Json& j, const VerifyConfig& c) {
    j = Json{{"ratio_trials", c.ratio_trials},
             {"ratio_max_taps", c.ratio_max_taps},
             {"ratio_lattice", c.ratio_lattice},
             {"ratio_index_box", c.ratio_index_box},
             {"identity_points", c.identity_points},
             {"tf_radius", c.tf_radius},
             {"max_ratio", c.max_ratio},
             {"max_discrepancy", c.max_discrepancy},
             {"signal_csv", c.signal_csv}};
}
inline void from_json(const Json& j, VerifyConfig& c) {
    c.ratio_trials = j.value("ratio_trials", c.ratio_trials);
    c.ratio_max_taps = j.value("ratio_max_taps", c.ratio_max_taps);
    if (j.contains("ratio_lattice"))
        c.ratio_lattice = j.at("ratio_lattice").get<std::array<double, 4>>();
    if (j.contains("ratio_index_box"))
        c.ratio_index_box = j.at("ratio_index_box").get<std::array<int, 4>>();
    c.identity_points = j.value("identity_points", c.identity_points);
    c.tf_radius = j.value("tf_radius", c.tf_radius);
    c.max_ratio = j.value("max_ratio", c.max_ratio);
    c.max_discrepancy = j.value("max_discrepancy", c.max_discrepancy);
    c.signal_csv = j.value("signal_csv", c.signal_csv);
}

inline void to_json(Json& j, const CheckConfig& c) {
    j = Json{{"tap_tol", c.tap_tol},
             {"density_tol", c.density_tol},
             {"delay_scale", c.delay_scale},
             {"doppler_scale", c.doppler_scale}};
}
inline void from_json(const Json& j, CheckConfig& c) {
    c.tap_tol = j.value("tap_tol", c.tap_tol);
    c.density_tol = j.value("density_tol", c.density_tol);
    c.delay_scale = j.value("delay_scale", c.delay_scale);
    c.doppler_scale = j.value("doppler_scale", c.doppler_scale);
}

inline void to_json(Json& j, const ExperimentConfig& c) {
    j = Json{{"lattice", c.lattice}, {"probe", c.probe},
             {"plan", c.plan},       {"scenario", c.scenario},
             {"noise", c.noise},     {"estimation", c.estimation},
             {"density", c.density}, {"verify", c.verify},
             {"check", c.check}};
}
inline void from_json(const Json& j, ExperimentConfig& c) {
    if (j.contains("lattice")) c.lattice = j.at("lattice").get<std::array<double, 4>>();
    if (j.contains("probe")) c.probe = j.at("probe").get<ProbeConfig>();
    if (j.contains("plan")) c.plan = j.at("plan").get<PlanConfig>();
    if (j.contains("scenario")) c.scenario = j.at("scenario").get<ScenarioConfig>();
    if (j.contains("noise")) c.noise = j.at("noise").get<NoiseConfig>();
    if (j.contains("estimation")) c.estimation = j.at("estimation").get<EstimationConfig>();
    if (j.contains("density")) c.density = j.at("density").get<DensityConfig>();
    if (j.contains("verify")) c.verify = j.at("verify").get<VerifyConfig>();
    if (j.contains("check")) c.check = j.at("check").get<CheckConfig>();
}

inline ExperimentConfig parse_config(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("config: not valid JSON: ") + e.what());
    }
    try {
        return j.get<ExperimentConfig>();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("config: schema error: ") + e.what());
    }
}

inline std::string serialize_config(const ExperimentConfig& config) {
    return Json(config).dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// validation and scenario generation
// ---------------------------------------------------------------------------

namespace detail {

inline void require(bool ok, const std::string& field, const std::string& message) {
    if (!ok) throw ValidationError("config." + field + ": " + message);
}

/// Amplitude with unit-mean log-normal magnitude and uniform phase.
inline Complex random_amplitude(Rng& rng, double sigma) {
    return rng.lognormal_unit_mean(sigma) * rng.phase();
}

}  // namespace detail

/// Taps used for identification must start at tau_min (so |z| <= 1) and carry
/// Dopplers inside the plan window.
inline void validate_tap_feasible(const Tap& tap, const SamplingPlan& plan,
                                  const std::string& field) {
    detail::require(tap.delay >= plan.tau_min - 1e-12, field,
                    "tap delay lies before plan.tau_min");
    detail::require(tap.doppler >= plan.nu_min && tap.doppler < plan.nu_max, field,
                    "tap Doppler lies outside the plan nu_window");
}

/// Scenario ground truth for identify/sweep runs.
inline ChannelSpec build_scenario(const ExperimentConfig& config) {
    const Lattice lattice = config.make_lattice();
    const SamplingPlan plan = config.make_plan();
    const ScenarioConfig& sc = config.scenario;
    Rng rng = Rng::substream(sc.seed, 0xdd5ce);

    std::vector<Tap> taps;
    if (sc.mode == "explicit") {
        detail::require(!sc.taps.empty(), "scenario.taps", "explicit mode needs at least one tap");
        for (const TapInit& t : sc.taps)
            taps.push_back({Complex(t.a_re, t.a_im), t.tau, t.nu});
    } else if (sc.mode == "random") {
        const auto [ilo, ihi, jlo, jhi] = sc.index_box;
        detail::require(ihi >= ilo && jhi >= jlo, "scenario.index_box", "empty index box");
        std::vector<std::pair<int, int>> feasible;
        for (int i = ilo; i <= ihi; ++i) {
            for (int j = jlo; j <= jhi; ++j) {
                const Point p = lattice.map(i, j);
                if (p.tau >= plan.tau_min && p.nu >= plan.nu_min && p.nu < plan.nu_max)
                    feasible.emplace_back(i, j);
            }
        }
        detail::require(static_cast<int>(feasible.size()) >= sc.tap_count, "scenario.tap_count",
                        "index box holds fewer feasible lattice points than tap_count");
        // draw without replacement
        for (int k = 0; k < sc.tap_count; ++k) {
            const auto pick = rng.index(feasible.size() - k);
            std::swap(feasible[pick], feasible[feasible.size() - 1 - k]);
        }
        for (int k = 0; k < sc.tap_count; ++k) {
            const auto [i, j] = feasible[feasible.size() - 1 - k];
            const Point p = lattice.map(i, j);
            taps.push_back({detail::random_amplitude(rng, sc.amplitude_sigma), p.tau, p.nu});
        }
    } else if (sc.mode == "pattern") {
        const auto points = residue_pattern_points(sc.pattern.pattern(), lattice, sc.pattern.box);
        for (const Point& p : points) {
            if (p.tau >= plan.tau_min && p.nu >= plan.nu_min && p.nu < plan.nu_max)
                taps.push_back({detail::random_amplitude(rng, sc.amplitude_sigma), p.tau, p.nu});
        }
        detail::require(!taps.empty(), "scenario.pattern",
                        "no pattern point is feasible for the sampling plan");
    } else {
        throw ValidationError("config.scenario.mode: expected explicit, random, or pattern");
    }

    for (const Tap& t : taps) validate_tap_feasible(t, plan, "scenario.taps");
    return ChannelSpec(std::move(taps),
                       sc.mode == "explicit" ? std::optional<Lattice>{} : lattice);
}

/// Every downstream precondition for identify/sweep, checked before any
/// computation; messages name the offending field.
inline ChannelSpec validate_identify(const ExperimentConfig& config) {
    detail::require(config.make_lattice().det() != 0.0, "lattice", "singular generator");
    detail::require(config.probe.bandwidth > 0.0, "probe.bandwidth", "must be positive");
    const SamplingPlan plan = config.make_plan();  // throws with its own message
    detail::require(config.probe.center == config.plan.horizon, "probe.center",
                    "identification assumes the probe peaks at plan.horizon");
    const ChannelSpec truth = build_scenario(config);
    const int k = static_cast<int>(truth.size());
    detail::require(plan.count >= 2 * k + 1, "plan.count",
                    "need count >= 2*K+1 = " + std::to_string(2 * k + 1) + " samples for K = " +
                        std::to_string(k) + " taps");
    detail::require(config.estimation.rank_tol > 0.0, "estimation.rank_tol", "must be positive");
    if (config.estimation.order_hint)
        detail::require(*config.estimation.order_hint >= 0, "estimation.order_hint",
                        "must be nonnegative");
    return truth;
}

// ---------------------------------------------------------------------------
// runs
// ---------------------------------------------------------------------------

/// Result of one harness run: the summary JSON, a pass verdict for --check,
/// and named artifact files (content held in memory so callers control all
/// filesystem writes).
struct RunArtifacts {
    Json result;
    bool pass = true;
    std::vector<std::pair<std::string, std::string>> files;
};

namespace detail {

inline double relative_tap_error(const MatchedPair& pair, const Tap& truth) {
    const double dtau = std::abs(pair.delay_err) / std::max(1.0, std::abs(truth.delay));
    const double dnu = std::abs(pair.doppler_err) / std::max(1.0, std::abs(truth.doppler));
    const double damp = pair.amplitude_err / std::abs(truth.amplitude);
    return std::max({dtau, dnu, damp});
}

inline Json identify_result_json(const ChannelSpec& truth, const EstimationResult& estimate,
                                 double check_tol) {
    Json j = to_json(estimate);
    double worst = 0.0;
    if (estimate.matching) {
        for (const MatchedPair& p : estimate.matching->pairs)
            worst = std::max(worst, relative_tap_error(p, truth.taps()[p.truth_index]));
    }
    j["max_rel_tap_error"] = worst;
    j["pass"] = estimate.matching && estimate.matching->unmatched() == 0 && worst <= check_tol;
    return j;
}

inline std::vector<Complex> noisy_samples(const std::vector<Complex>& clean,
                                          const std::vector<Complex>& unit_noise, double sigma) {
    std::vector<Complex> r(clean);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += sigma * unit_noise[i];
    return r;
}

inline double noise_sigma(const std::vector<Complex>& samples, double snr_db) {
    double power = 0.0;
    for (const Complex& v : samples) power += std::norm(v);
    power /= static_cast<double>(samples.size());
    return std::sqrt(power / std::pow(10.0, snr_db / 10.0));
}

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Simulate the configured scenario, estimate it back, and compare with the
/// ground truth. When noise is configured, the first SNR entry is applied
/// with one realization (use `run_sweep` for Monte-Carlo grids).
inline RunArtifacts run_identify(const ExperimentConfig& config) {
    const ChannelSpec truth = validate_identify(config);
    const GaussianProbe probe = config.make_probe();
    const SamplingPlan plan = config.make_plan();

    std::vector<Complex> samples;
    if (!config.estimation.samples_csv.empty()) {
        std::istringstream in(read_text_file(config.estimation.samples_csv));
        const SampledSignal measured = read_signal_csv(in);
        detail::require(static_cast<int>(measured.values.size()) == plan.count,
                        "estimation.samples_csv", "sample count does not match plan.count");
        detail::require(std::abs(measured.t0 - plan.tau_min) <=
                                1e-9 * std::max(1.0, std::abs(plan.tau_min)) &&
                            std::abs(measured.dt - plan.horizon / plan.count) <=
                                1e-9 * plan.horizon / plan.count,
                        "estimation.samples_csv", "time grid does not match the sampling plan");
        samples = measured.values;
    } else {
        samples = apply_channel(truth, probe, plan.times());
    }
    double applied_snr = std::numeric_limits<double>::infinity();
    double rank_tol = config.estimation.rank_tol;
    if (config.estimation.samples_csv.empty() && !config.noise.snr_db.empty()) {
        applied_snr = config.noise.snr_db.front();
        Rng noise_rng = Rng::substream(config.scenario.seed, 1);
        std::vector<Complex> unit(samples.size());
        for (auto& w : unit) w = noise_rng.complex_normal();
        samples = detail::noisy_samples(samples, unit, detail::noise_sigma(samples, applied_snr));
        rank_tol = std::max(rank_tol, 3.0 / std::sqrt(std::pow(10.0, applied_snr / 10.0)));
    }

    EstimationOptions options;
    options.rank_tol = rank_tol;
    if (config.estimation.use_true_order)
        options.order_hint = static_cast<int>(truth.size());
    else
        options.order_hint = config.estimation.order_hint;

    EstimationResult estimate = estimate_channel(samples, probe.bandwidth, plan, options);
    estimate.matching = match_taps(truth.taps(), estimate.taps, config.check.delay_scale,
                                   config.check.doppler_scale);

    RunArtifacts out;
    out.result = detail::identify_result_json(truth, estimate, config.check.tap_tol);
    if (std::isfinite(applied_snr)) out.result["snr_db"] = applied_snr;
    out.pass = out.result["pass"].get<bool>();

    std::ostringstream truth_csv, samples_csv;
    write_taps_csv(truth_csv, truth.taps());
    write_signal_csv(samples_csv,
                     SampledSignal(plan.tau_min, plan.horizon / plan.count, samples));
    out.files.emplace_back("truth.csv", truth_csv.str());
    out.files.emplace_back("samples.csv", samples_csv.str());
    out.files.emplace_back("estimate.json", out.result.dump(2) + "\n");
    return out;
}

/// Density estimates plus the Theorem-1 verdict for the configured point set.
inline RunArtifacts run_density(const ExperimentConfig& config) {
    const Lattice lattice = config.make_lattice();
    const DensityConfig& dc = config.density;
    detail::require(!dc.radii.empty(), "density.radii", "need at least one radius");

    std::vector<Point> points;
    std::optional<double> exact;
    if (dc.mode == "lattice") {
        detail::require(dc.box_halfwidth > 0.0, "density.box_halfwidth", "must be positive");
        // index ranges that surely cover the real box, then filter
        const double b = dc.box_halfwidth;
        const auto [i1, j1] = lattice.unmap(b, b);
        const auto [i2, j2] = lattice.unmap(-b, b);
        const auto [i3, j3] = lattice.unmap(b, -b);
        const auto [i4, j4] = lattice.unmap(-b, -b);
        const int imax = static_cast<int>(std::ceil(std::max({i1, i2, i3, i4}))) + 1;
        const int imin = static_cast<int>(std::floor(std::min({i1, i2, i3, i4}))) - 1;
        const int jmax = static_cast<int>(std::ceil(std::max({j1, j2, j3, j4}))) + 1;
        const int jmin = static_cast<int>(std::floor(std::min({j1, j2, j3, j4}))) - 1;
        for (int i = imin; i <= imax; ++i) {
            for (int j = jmin; j <= jmax; ++j) {
                const Point p = lattice.map(i, j);
                if (std::abs(p.tau) <= b && std::abs(p.nu) <= b) points.push_back(p);
            }
        }
        exact = lattice.density();
    } else if (dc.mode == "pattern") {
        points = residue_pattern_points(dc.pattern.pattern(), lattice, dc.pattern.box);
        exact = exact_pattern_density(dc.pattern.pattern(), lattice);
    } else if (dc.mode == "csv") {
        detail::require(!dc.points_csv.empty(), "density.points_csv", "path required in csv mode");
        std::istringstream in(read_text_file(dc.points_csv));
        points = read_points_csv(in);
    } else {
        throw ValidationError("config.density.mode: expected lattice, pattern, or csv");
    }

    const DensityReport report = density_estimates(points, dc.radii, dc.grid_step);
    const Verdict verdict = identifiability_verdict(dc.alpha, lattice);

    RunArtifacts out;
    out.result = to_json(report);
    out.result["mode"] = dc.mode;
    out.result["point_count"] = points.size();
    out.result["alpha"] = dc.alpha;
    out.result["lattice_density"] = lattice.density();
    out.result["verdict"] = to_string(verdict);
    if (exact) {
        out.result["exact_density"] = *exact;
        out.pass = std::abs(report.upper_estimate - *exact) <=
                   config.check.density_tol * std::max(*exact, 1e-300);
    }
    out.result["pass"] = out.pass;

    std::ostringstream points_csv;
    write_points_csv(points_csv, points);
    out.files.emplace_back("points.csv", points_csv.str());
    out.files.emplace_back("density.json", out.result.dump(2) + "\n");
    return out;
}

/// Property checks: the operator-norm ratio sweep and the STFT-Bargmann
/// identity discrepancy, each against its configured tolerance.
inline RunArtifacts run_verify(const ExperimentConfig& config) {
    const VerifyConfig& vc = config.verify;
    const GaussianProbe probe(config.probe.bandwidth, 0.0);
    Rng rng = Rng::substream(config.scenario.seed, 0x7e51f7);

    // --- ratio sweep over random well-separated operator pairs ---
    detail::require(vc.ratio_trials >= 0, "verify.ratio_trials", "must be nonnegative");
    detail::require(vc.ratio_max_taps >= 1, "verify.ratio_max_taps", "must be positive");
    const Lattice ratio_lattice(vc.ratio_lattice[0], vc.ratio_lattice[1], vc.ratio_lattice[2],
                                vc.ratio_lattice[3]);
    const auto [ilo, ihi, jlo, jhi] = vc.ratio_index_box;
    detail::require(ihi >= ilo && jhi >= jlo, "verify.ratio_index_box", "empty index box");

    const auto draw_spec = [&]() {
        const int k = 1 + static_cast<int>(rng.index(vc.ratio_max_taps));
        std::vector<Tap> taps;
        std::set<std::pair<int, int>> used;
        while (static_cast<int>(taps.size()) < k) {
            const int i = ilo + static_cast<int>(rng.index(ihi - ilo + 1));
            const int j = jlo + static_cast<int>(rng.index(jhi - jlo + 1));
            if (!used.insert({i, j}).second) continue;
            const Point p = ratio_lattice.map(i, j);
            taps.push_back({detail::random_amplitude(rng, 0.5), p.tau, p.nu});
        }
        return ChannelSpec(std::move(taps), ratio_lattice);
    };

    double max_ratio = 0.0;
    double tau_lo = 0.0, tau_hi = 0.0;
    {
        const Point lo = ratio_lattice.map(ilo, jlo), hi = ratio_lattice.map(ihi, jhi);
        const Point lx = ratio_lattice.map(ilo, jhi), hx = ratio_lattice.map(ihi, jlo);
        tau_lo = std::min({lo.tau, hi.tau, lx.tau, hx.tau});
        tau_hi = std::max({lo.tau, hi.tau, lx.tau, hx.tau});
    }
    const TimeGrid ratio_grid = response_grid(probe, tau_lo, tau_hi, 4.0);
    for (int trial = 0; trial < vc.ratio_trials; ++trial) {
        ChannelSpec h = draw_spec();
        ChannelSpec k = draw_spec();
        while (operator_distance(h, k) == 0.0) k = draw_spec();
        max_ratio = std::max(max_ratio, identifiability_ratio(h, k, probe, ratio_grid));
    }

    // --- STFT-Bargmann identity on random time-frequency points ---
    detail::require(vc.identity_points >= 1, "verify.identity_points", "must be positive");
    detail::require(vc.tf_radius > 0.0, "verify.tf_radius", "must be positive");
    SampledSignal x = [&]() {
        if (!vc.signal_csv.empty()) {
            std::istringstream in(read_text_file(vc.signal_csv));
            return read_signal_csv(in);
        }
        const double span = vc.tf_radius + 10.0 / probe.bandwidth;
        const double dt = 1.0 / (64.0 * probe.bandwidth);
        const auto n = static_cast<std::size_t>(std::ceil(2.0 * span / dt)) + 1;
        return sample_probe(probe, {-span, dt, n});
    }();

    const bool degenerate = l2_norm_grid(x) == 0.0;
    IdentityReport identity;
    if (!degenerate) {
        std::vector<TimeFreqPoint> points;
        for (int i = 0; i < vc.identity_points; ++i)
            points.push_back({rng.uniform(-vc.tf_radius, vc.tf_radius),
                              rng.uniform(-vc.tf_radius, vc.tf_radius)});
        identity = verify_stft_bargmann(x, probe.bandwidth, points);
    }

    RunArtifacts out;
    const bool ratio_ok = vc.ratio_trials == 0 || max_ratio <= vc.max_ratio;
    const bool identity_ok = degenerate || identity.max_abs_err <= vc.max_discrepancy;
    out.pass = ratio_ok && identity_ok;
    out.result = Json{{"ratio_trials", vc.ratio_trials},
                      {"max_ratio", max_ratio},
                      {"ratio_bound", vc.max_ratio},
                      {"ratio_pass", ratio_ok},
                      {"identity", to_json(identity)},
                      {"discrepancy_bound", vc.max_discrepancy},
                      {"identity_pass", identity_ok},
                      {"degenerate", degenerate},
                      {"pass", out.pass}};
    out.files.emplace_back("verify.json", out.result.dump(2) + "\n");
    return out;
}

/// Monte-Carlo noise sweep: per trial, one unit noise draw shared across all
/// SNR levels (counter-derived seed), scaled to each level. Reports per-SNR
/// median RMSEs; --check asserts the median delay RMSE is nonincreasing in
/// SNR.
inline RunArtifacts run_sweep(const ExperimentConfig& config) {
    const ChannelSpec truth = validate_identify(config);
    detail::require(!config.noise.snr_db.empty(), "noise.snr_db", "sweep needs SNR levels");
    detail::require(config.noise.trials >= 1, "noise.trials", "sweep needs at least one trial");
    for (std::size_t i = 1; i < config.noise.snr_db.size(); ++i)
        detail::require(config.noise.snr_db[i] > config.noise.snr_db[i - 1], "noise.snr_db",
                        "SNR levels must be strictly increasing");

    const GaussianProbe probe = config.make_probe();
    const SamplingPlan plan = config.make_plan();
    const std::vector<Complex> clean = apply_channel(truth, probe, plan.times());

    const std::size_t levels = config.noise.snr_db.size();
    std::vector<std::vector<double>> rmse_delay(levels), rmse_doppler(levels),
        rmse_amplitude(levels);
    std::vector<double> unmatched_sum(levels, 0.0);

    for (int trial = 0; trial < config.noise.trials; ++trial) {
        Rng noise_rng = Rng::substream(config.scenario.seed, static_cast<std::uint64_t>(trial));
        std::vector<Complex> unit(clean.size());
        for (auto& w : unit) w = noise_rng.complex_normal();

        for (std::size_t s = 0; s < levels; ++s) {
            const double snr_db = config.noise.snr_db[s];
            const double sigma = detail::noise_sigma(clean, snr_db);
            const auto samples = detail::noisy_samples(clean, unit, sigma);

            EstimationOptions options;
            options.rank_tol = std::max(config.estimation.rank_tol,
                                        3.0 / std::sqrt(std::pow(10.0, snr_db / 10.0)));
            if (config.estimation.use_true_order)
                options.order_hint = static_cast<int>(truth.size());
            else
                options.order_hint = config.estimation.order_hint;

            MatchReport report;
            try {
                EstimationResult est = estimate_channel(samples, probe.bandwidth, plan, options);
                report = match_taps(truth.taps(), est.taps, config.check.delay_scale,
                                    config.check.doppler_scale);
            } catch (const Error&) {
                // numerically failed trial: score as fully unmatched
                report.unmatched_truth = static_cast<int>(truth.size());
            }
            const double inf = std::numeric_limits<double>::infinity();
            rmse_delay[s].push_back(report.pairs.empty() ? inf : report.rmse_delay);
            rmse_doppler[s].push_back(report.pairs.empty() ? inf : report.rmse_doppler);
            rmse_amplitude[s].push_back(report.pairs.empty() ? inf : report.rmse_amplitude);
            unmatched_sum[s] += report.unmatched();
        }
    }

    std::vector<double> med_delay, med_doppler, med_amplitude, mean_unmatched;
    for (std::size_t s = 0; s < levels; ++s) {
        med_delay.push_back(detail::median(rmse_delay[s]));
        med_doppler.push_back(detail::median(rmse_doppler[s]));
        med_amplitude.push_back(detail::median(rmse_amplitude[s]));
        mean_unmatched.push_back(unmatched_sum[s] / config.noise.trials);
    }
    bool monotone = true;
    for (std::size_t s = 1; s < levels; ++s)
        if (med_delay[s] > med_delay[s - 1]) monotone = false;

    RunArtifacts out;
    out.pass = monotone;
    out.result = Json{{"snr_db", config.noise.snr_db},
                      {"trials", config.noise.trials},
                      {"median_rmse_tau", med_delay},
                      {"median_rmse_nu", med_doppler},
                      {"median_rmse_amp", med_amplitude},
                      {"mean_unmatched", mean_unmatched},
                      {"median_rmse_tau_nonincreasing", monotone},
                      {"pass", monotone}};
    out.files.emplace_back("sweep.json", out.result.dump(2) + "\n");

    std::ostringstream csv;
    csv << "snr_db,median_rmse_tau,median_rmse_nu,median_rmse_amp,mean_unmatched\n";
    for (std::size_t s = 0; s < levels; ++s)
        csv << format_g17(config.noise.snr_db[s]) << ',' << format_g17(med_delay[s]) << ','
            << format_g17(med_doppler[s]) << ',' << format_g17(med_amplitude[s]) << ','
            << format_g17(mean_unmatched[s]) << '\n';
    out.files.emplace_back("sweep.csv", csv.str());
    return out;
}

/// Writes artifacts plus a manifest (library version, command, config hash,
/// seed, artifact names). No timestamps, so identical runs are byte-identical.
inline void write_artifacts(const std::string& out_dir, const std::string& command,
                            const ExperimentConfig& config, const RunArtifacts& artifacts) {
    std::filesystem::create_directories(out_dir);
    Json manifest{{"version", std::string(kVersion)},
                  {"command", command},
                  {"config_hash", hex64(fnv1a64(serialize_config(config)))},
                  {"seed", config.scenario.seed}};
    Json names = Json::array();
    for (const auto& [name, content] : artifacts.files) {
        write_text_file(out_dir + "/" + name, content);
        names.push_back(name);
    }
    manifest["artifacts"] = std::move(names);
    manifest["pass"] = artifacts.pass;
    write_text_file(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

}  // namespace ddident
