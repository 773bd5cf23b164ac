// Acceptance suite: runs the project's top-level checks end to end and
// prints one [PASS]/[FAIL] line per criterion. Usage: acceptance [N] runs
// criterion N only (default: all). Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "ddident/ddident.hpp"

using namespace ddident;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(DDIDENT_FIXTURE_DIR) + "/" + name;
}

ExperimentConfig load_fixture(const std::string& name) {
    return parse_config(read_text_file(fixture_path(name)));
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

double vector_rel_err(const std::vector<Complex>& a, const std::vector<Complex>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += std::norm(a[i] - b[i]);
        den += std::norm(b[i]);
    }
    return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

struct Scenario {
    ChannelSpec spec;
    GaussianProbe probe;
    SamplingPlan plan;
};

Scenario random_scenario(Rng& rng) {
    const double bandwidth = rng.uniform(0.5, 2.0);
    const double horizon = rng.uniform(2.0, 8.0);
    const int count = 16 + static_cast<int>(rng.index(49));
    const double tau_min = rng.uniform(-1.0, 1.0);
    const double nu_half = 0.45 * count / horizon;
    const SamplingPlan plan(tau_min, horizon, count, -nu_half, nu_half);

    const int k = 1 + static_cast<int>(rng.index(5));
    std::vector<Tap> taps;
    std::set<std::pair<int, int>> used;
    while (static_cast<int>(taps.size()) < k) {
        const int di = static_cast<int>(rng.index(8));
        const int ni = -4 + static_cast<int>(rng.index(9));
        if (!used.insert({di, ni}).second) continue;
        const double nu = 0.25 * ni * std::min(1.0, nu_half / 2.0);
        taps.push_back({rng.lognormal_unit_mean(0.5) * rng.phase(),
                        tau_min + horizon / 16.0 * di, nu});
    }
    return {ChannelSpec(taps), GaussianProbe(bandwidth, horizon), plan};
}

// --- criteria -------------------------------------------------------------

bool criterion_1() {
    Timer timer;
    const ExperimentConfig cfg = load_fixture("noiseless_k4.json");
    const RunArtifacts run = run_identify(cfg);
    const double err = run.result["max_rel_tap_error"].get<double>();
    const int unmatched = run.result["matching"]["unmatched"].get<int>();
    const double elapsed = timer.seconds();
    const bool ok = run.pass && err <= 1e-6 && unmatched == 0 && elapsed < 1.0;
    std::printf("[%s] criterion 1: noiseless end-to-end recovery, K=4 B=1 T=8 M=64 "
                "(max_rel_err=%.2e, unmatched=%d, %.2fs)\n",
                ok ? "PASS" : "FAIL", err, unmatched, elapsed);
    return ok;
}

bool criterion_2() {
    Timer timer;
    Rng rng(20250214);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Scenario s = random_scenario(rng);
        const auto direct = apply_channel(s.spec, s.probe, s.plan.times());
        const auto closed = synthesize_samples(s.spec, s.probe.bandwidth, s.plan);
        worst = std::max(worst, vector_rel_err(closed, direct));
    }
    const double elapsed = timer.seconds();
    const bool ok = worst <= 1e-12 && elapsed < 5.0;
    std::printf("[%s] criterion 2: closed-form sample synthesis equals channel sampling "
                "on 50 random scenarios (max_rel_err=%.2e, %.2fs)\n",
                ok ? "PASS" : "FAIL", worst, elapsed);
    return ok;
}

bool criterion_3() {
    Timer timer;
    const ExperimentConfig cfg = load_fixture("verify_default.json");
    const RunArtifacts run = run_verify(cfg);
    const double max_ratio = run.result["max_ratio"].get<double>();
    const double elapsed = timer.seconds();
    const bool ok = run.result["ratio_pass"].get<bool>() && max_ratio <= 1.0 + 1e-3 &&
                    elapsed < 30.0;
    std::printf("[%s] criterion 3: operator-norm ratio bound over 100 random pairs "
                "(max_ratio=%.6f, %.2fs)\n",
                ok ? "PASS" : "FAIL", max_ratio, elapsed);
    return ok;
}

bool criterion_4() {
    Timer timer;
    const ExperimentConfig cfg = load_fixture("verify_default.json");
    const RunArtifacts run = run_verify(cfg);
    const double err = run.result["identity"]["max_abs_err"].get<double>();
    const double elapsed = timer.seconds();
    const bool ok = run.result["identity_pass"].get<bool>() && err <= 1e-6 && elapsed < 10.0;
    std::printf("[%s] criterion 4: STFT-Bargmann identity over 20 points, |tau|,|nu| <= 2 "
                "(max_abs_err=%.2e, %.2fs)\n",
                ok ? "PASS" : "FAIL", err, elapsed);
    return ok;
}

bool criterion_5() {
    double worst = 0.0;
    for (const double b : {0.5, 1.0, 2.0, 4.0}) {
        const GaussianProbe probe(b, 0.0);
        const SampledSignal g = sample_probe(probe, response_grid(probe, 0.0, 0.0, 2.0));
        worst = std::max(worst, std::abs(l2_norm_grid(g) - 1.0));
    }
    const bool ok = worst <= 1e-9;
    std::printf("[%s] criterion 5: probe normalization for B in {0.5, 1, 2, 4} "
                "(max_deviation=%.2e)\n",
                ok ? "PASS" : "FAIL", worst);
    return ok;
}

bool criterion_6() {
    Rng rng(6021023);
    bool patterns_ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        ResiduePattern p;
        p.modulus = 1 + static_cast<int>(rng.index(8));
        std::set<int> rs;
        const int want = 1 + static_cast<int>(rng.index(p.modulus));
        while (static_cast<int>(rs.size()) < want)
            rs.insert(static_cast<int>(rng.index(p.modulus)));
        p.residues.assign(rs.begin(), rs.end());
        if (rng.index(2) == 0) {
            p.outer_modulus = 1 + static_cast<int>(rng.index(4));
            std::set<int> os;
            const int wanto = 1 + static_cast<int>(rng.index(*p.outer_modulus));
            while (static_cast<int>(os.size()) < wanto)
                os.insert(static_cast<int>(rng.index(*p.outer_modulus)));
            p.outer_residues.assign(os.begin(), os.end());
        }
        const Lattice lattice = Lattice::diagonal(rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));

        // independent enumeration oracle over one period
        const int period = p.effective_modulus();
        const auto classes = p.combined_residues();
        long count = 0;
        for (int i = 0; i < period; ++i)
            for (int j = 0; j < period; ++j)
                for (const int c : classes)
                    if (i == c && j == c) {
                        ++count;
                        break;
                    }
        const double oracle = static_cast<double>(count) /
                              (static_cast<double>(period) * period) * lattice.density();
        if (exact_pattern_density(p, lattice) != oracle) patterns_ok = false;
    }

    double worst_rel = 0.0;
    const std::vector<Lattice> lattices{Lattice::identity(), Lattice::diagonal(2.0, 1.0),
                                        Lattice(1.0, 1.0, 0.0, 1.0)};
    for (const Lattice& lattice : lattices) {
        ExperimentConfig cfg = load_fixture("density_lattice.json");
        const double* a = lattice.data();
        cfg.lattice = {a[0], a[1], a[2], a[3]};
        const RunArtifacts run = run_density(cfg);
        const double upper = run.result["upper_estimate"].get<double>();
        worst_rel = std::max(worst_rel, std::abs(upper - lattice.density()) / lattice.density());
    }
    const bool lattice_ok = worst_rel <= 0.05;
    const bool ok = patterns_ok && lattice_ok;
    std::printf("[%s] criterion 6: density oracles (50 pattern enumerations exact=%s, "
                "full-lattice estimate at r=20 worst_rel_err=%.3f)\n",
                ok ? "PASS" : "FAIL", patterns_ok ? "yes" : "no", worst_rel);
    return ok;
}

bool criterion_7() {
    const bool ok = identifiability_verdict(0.4, Lattice::identity()) == Verdict::Identifiable &&
                    identifiability_verdict(0.6, Lattice::diagonal(0.5, 1.0)) ==
                        Verdict::NotIdentifiable &&
                    identifiability_verdict(0.5, Lattice::identity()) == Verdict::Boundary &&
                    identifiability_verdict(0.6, Lattice::identity()) ==
                        Verdict::HypothesisViolated;
    std::printf("[%s] criterion 7: density-threshold verdict table (4/4 exact)\n",
                ok ? "PASS" : "FAIL");
    return ok;
}

bool criterion_8() {
    const Complex z0 = 0.95 * std::polar(1.0, std::numbers::pi / 5.0);
    std::vector<Complex> y1(32);
    for (int m = 1; m <= 32; ++m) y1[m - 1] = std::pow(z0, double(m));
    const CisoidModel single = matrix_pencil(y1);
    double err = 1e9;
    if (single.order() == 1)
        err = std::max(std::abs(single.poles[0] - z0),
                       std::abs(single.amplitudes[0] - Complex(1, 0)));

    const Complex za(0.9, 0.0), zb = 0.8 * std::polar(1.0, std::numbers::pi / 3.0);
    std::vector<Complex> y2(64);
    for (int m = 1; m <= 64; ++m)
        y2[m - 1] = 2.0 * std::pow(za, double(m)) + std::pow(zb, double(m));
    const CisoidModel pair = matrix_pencil(y2);
    double err2 = 1e9;
    if (pair.order() == 2) {
        err2 = 0.0;
        for (const Complex truth : {za, zb}) {
            double best = 1e9;
            for (int k = 0; k < 2; ++k) best = std::min(best, std::abs(pair.poles[k] - truth));
            err2 = std::max(err2, best);
        }
    }

    const std::vector<Complex> one{Complex(0.9, 0.25)};
    const bool cond_ok = vandermonde_condition(one, 16) == 1.0;
    const bool ok = err <= 1e-8 && err2 <= 1e-8 && cond_ok;
    std::printf("[%s] criterion 8: matrix pencil unit oracles (single=%.2e, double=%.2e, "
                "K=1 cond==1: %s)\n",
                ok ? "PASS" : "FAIL", err, err2, cond_ok ? "yes" : "no");
    return ok;
}

bool criterion_9() {
    Timer timer;
    const ExperimentConfig cfg = load_fixture("sweep_k3.json");
    const RunArtifacts run = run_sweep(cfg);
    const double elapsed = timer.seconds();
    const auto medians = run.result["median_rmse_tau"].get<std::vector<double>>();
    const bool ok = run.pass && elapsed < 120.0;
    std::printf("[%s] criterion 9: median delay RMSE nonincreasing over SNR 20..50 dB, "
                "100 trials (medians=%.2e/%.2e/%.2e/%.2e, %.1fs)\n",
                ok ? "PASS" : "FAIL", medians[0], medians[1], medians[2], medians[3], elapsed);
    return ok;
}

bool criterion_10() {
    const ExperimentConfig identify_cfg = load_fixture("noiseless_k4.json");
    const RunArtifacts a = run_identify(identify_cfg);
    const RunArtifacts b = run_identify(identify_cfg);

    ExperimentConfig sweep_cfg = load_fixture("sweep_k3.json");
    sweep_cfg.noise.trials = 10;
    const RunArtifacts c = run_sweep(sweep_cfg);
    const RunArtifacts d = run_sweep(sweep_cfg);

    const ExperimentConfig verify_cfg = [&] {
        ExperimentConfig cfg = load_fixture("verify_default.json");
        cfg.verify.ratio_trials = 10;
        cfg.verify.identity_points = 5;
        return cfg;
    }();
    const RunArtifacts e = run_verify(verify_cfg);
    const RunArtifacts f = run_verify(verify_cfg);

    const bool ok = a.files == b.files && c.files == d.files && e.files == f.files;
    std::printf("[%s] criterion 10: byte-identical artifacts for repeated runs "
                "(identify/sweep/verify)\n",
                ok ? "PASS" : "FAIL");
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    using CriterionFn = bool (*)();
    const CriterionFn criteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,
                                    criterion_5, criterion_6, criterion_7, criterion_8,
                                    criterion_9, criterion_10};
    int failures = 0;
    if (argc > 1) {
        const int n = std::atoi(argv[1]);
        if (n < 1 || n > 10) {
            std::fprintf(stderr, "usage: %s [1..10]\n", argv[0]);
            return 64;
        }
        if (!criteria[n - 1]()) ++failures;
    } else {
        for (const CriterionFn fn : criteria)
            if (!fn()) ++failures;
    }
    return failures;
}
