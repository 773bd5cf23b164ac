#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ddident/ddident.hpp"

using namespace ddident;
using Catch::Approx;

namespace {

std::string fixture_path(const std::string& name) {
    return std::string(DDIDENT_FIXTURE_DIR) + "/" + name;
}

ExperimentConfig load_fixture(const std::string& name) {
    return parse_config(read_text_file(fixture_path(name)));
}

}  // namespace

TEST_CASE("config round trip is the identity") {
    for (const std::string name :
         {"noiseless_k4.json", "sweep_k3.json", "verify_default.json", "density_lattice.json"}) {
        const ExperimentConfig once = load_fixture(name);
        const std::string first = serialize_config(once);
        const ExperimentConfig twice = parse_config(first);
        CHECK(serialize_config(twice) == first);
    }
}

TEST_CASE("config validation is field-precise") {
    SECTION("sample budget against tap count") {
        ExperimentConfig cfg = load_fixture("noiseless_k4.json");
        cfg.plan.count = 8;  // 2K+1 = 9 for K = 4
        cfg.plan.nu_min = -0.4;
        cfg.plan.nu_max = 0.4;  // keep the window invariant satisfied at count 8
        for (std::size_t i = 0; i < cfg.scenario.taps.size(); ++i) cfg.scenario.taps[i].nu = 0.0;
        try {
            run_identify(cfg);
            FAIL("expected validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("plan.count") != std::string::npos);
        }
    }
    SECTION("probe center must sit at the horizon") {
        ExperimentConfig cfg = load_fixture("noiseless_k4.json");
        cfg.probe.center = 4.0;
        try {
            run_identify(cfg);
            FAIL("expected validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("probe.center") != std::string::npos);
        }
    }
    SECTION("doppler window width") {
        ExperimentConfig cfg = load_fixture("noiseless_k4.json");
        cfg.plan.nu_min = -4.0;
        cfg.plan.nu_max = 4.0;  // width equals count/horizon
        CHECK_THROWS_AS(run_identify(cfg), ValidationError);
    }
    SECTION("scenario mode") {
        ExperimentConfig cfg = load_fixture("noiseless_k4.json");
        cfg.scenario.mode = "surprise";
        CHECK_THROWS_AS(run_identify(cfg), ValidationError);
    }
    SECTION("tap outside the doppler window") {
        ExperimentConfig cfg = load_fixture("noiseless_k4.json");
        cfg.scenario.taps[0].nu = 3.9;
        CHECK_THROWS_AS(run_identify(cfg), ValidationError);
    }
    SECTION("singular lattice") {
        ExperimentConfig cfg = load_fixture("noiseless_k4.json");
        cfg.lattice = {1.0, 2.0, 2.0, 4.0};
        CHECK_THROWS_AS(run_identify(cfg), ValidationError);
    }
}

TEST_CASE("identify on the bundled noiseless fixture") {
    const ExperimentConfig cfg = load_fixture("noiseless_k4.json");
    const RunArtifacts run = run_identify(cfg);
    CHECK(run.pass);
    CHECK(run.result["max_rel_tap_error"].get<double>() <= 1e-6);
    CHECK(run.result["matching"]["unmatched"].get<int>() == 0);
    CHECK(run.result["taps"].size() == 4);
    CHECK(run.result["poles"].size() == 4);
    CHECK(run.result["cond"].get<double>() >= 1.0);
    CHECK(run.result["residual"].get<double>() < 1e-9);
    REQUIRE(run.files.size() == 3);
}

TEST_CASE("identify in random scenario mode") {
    ExperimentConfig cfg = load_fixture("noiseless_k4.json");
    cfg.scenario.mode = "random";
    cfg.scenario.tap_count = 4;
    cfg.lattice = {0.5, 0.0, 0.0, 0.5};
    cfg.scenario.index_box = {0, 3, -4, 4};
    cfg.scenario.seed = 99;
    const RunArtifacts run = run_identify(cfg);
    CHECK(run.pass);
    CHECK(run.result["max_rel_tap_error"].get<double>() <= 1e-6);

    // same seed reproduces, another seed gives a different scenario
    const RunArtifacts again = run_identify(cfg);
    CHECK(again.files == run.files);
    cfg.scenario.seed = 100;
    const RunArtifacts other = run_identify(cfg);
    CHECK(other.files != run.files);
}

TEST_CASE("identify in pattern scenario mode") {
    ExperimentConfig cfg = load_fixture("noiseless_k4.json");
    cfg.scenario.mode = "pattern";
    cfg.scenario.pattern.modulus = 2;
    cfg.scenario.pattern.residues = {0};
    cfg.scenario.pattern.box = 2;
    cfg.lattice = {0.25, 0.0, 0.0, 1.0};
    // feasible pattern points: tau in {0, 0.5}, nu in {-2, 0, 2} -> K = 6
    const RunArtifacts run = run_identify(cfg);
    CHECK(run.pass);
    CHECK(run.result["taps"].size() == 6);
    CHECK(run.result["max_rel_tap_error"].get<double>() <= 1e-6);
}

TEST_CASE("identify from measured samples on disk") {
    ExperimentConfig cfg = load_fixture("noiseless_k4.json");
    const GaussianProbe probe = cfg.make_probe();
    const SamplingPlan plan = cfg.make_plan();
    const ChannelSpec truth = build_scenario(cfg);
    const auto samples = apply_channel(truth, probe, plan.times());

    const auto tmp = std::filesystem::temp_directory_path() / "ddident_samples.csv";
    {
        std::ofstream out(tmp);
        write_signal_csv(out, SampledSignal(plan.tau_min, plan.horizon / plan.count, samples));
    }
    cfg.estimation.samples_csv = tmp.string();
    const RunArtifacts run = run_identify(cfg);
    CHECK(run.pass);
    CHECK(run.result["max_rel_tap_error"].get<double>() <= 1e-6);

    SECTION("grid mismatch is rejected") {
        ExperimentConfig bad = cfg;
        bad.plan.count = 32;  // CSV holds 64 samples
        CHECK_THROWS_AS(run_identify(bad), ValidationError);
    }
    std::filesystem::remove(tmp);
}

TEST_CASE("identify under a single noise draw") {
    ExperimentConfig cfg = load_fixture("sweep_k3.json");
    cfg.noise.snr_db = {50.0};
    cfg.noise.trials = 1;
    const RunArtifacts run = run_identify(cfg);
    CHECK(run.result["snr_db"].get<double>() == 50.0);
    // estimates are close but not exact under noise
    CHECK(run.result["max_rel_tap_error"].get<double>() > 1e-9);
    CHECK(run.result["matching"]["rmse_tau"].get<double>() < 0.05);
}

TEST_CASE("density run modes") {
    SECTION("full lattice") {
        const ExperimentConfig cfg = load_fixture("density_lattice.json");
        const RunArtifacts run = run_density(cfg);
        CHECK(run.pass);
        CHECK(run.result["upper_estimate"].get<double>() == Approx(1.0).margin(0.05));
        CHECK(run.result["exact_density"].get<double>() == Approx(1.0));
        CHECK(run.result["verdict"].get<std::string>() == "identifiable");
    }
    SECTION("pattern") {
        ExperimentConfig cfg = load_fixture("density_lattice.json");
        cfg.density.mode = "pattern";
        cfg.density.pattern.modulus = 2;
        cfg.density.pattern.residues = {0};
        cfg.density.pattern.box = 24;
        cfg.density.radii = {4.0, 8.0, 16.0};
        const RunArtifacts run = run_density(cfg);
        CHECK(run.result["exact_density"].get<double>() == Approx(0.25));
        CHECK(run.result["upper_estimate"].get<double>() == Approx(0.25).margin(0.05));
    }
    SECTION("csv input") {
        ExperimentConfig cfg = load_fixture("density_lattice.json");
        const auto tmp = std::filesystem::temp_directory_path() / "ddident_pts.csv";
        {
            std::ofstream out(tmp);
            std::vector<Point> pts{{0.0, 0.0}, {1.5, 1.0}, {3.0, 2.0}};
            write_points_csv(out, pts);
        }
        cfg.density.mode = "csv";
        cfg.density.points_csv = tmp.string();
        cfg.density.radii = {2.0};
        const RunArtifacts run = run_density(cfg);
        CHECK(run.result["point_count"].get<int>() == 3);
        CHECK_FALSE(run.result.contains("exact_density"));
        std::filesystem::remove(tmp);
    }
    SECTION("boundary alpha") {
        ExperimentConfig cfg = load_fixture("density_lattice.json");
        cfg.density.alpha = 0.5;
        CHECK(run_density(cfg).result["verdict"].get<std::string>() == "boundary");
    }
}

TEST_CASE("verify run") {
    ExperimentConfig cfg = load_fixture("verify_default.json");
    cfg.verify.ratio_trials = 15;
    cfg.verify.identity_points = 6;
    const RunArtifacts run = run_verify(cfg);
    CHECK(run.pass);
    CHECK(run.result["max_ratio"].get<double>() <= 1.001);
    CHECK(run.result["identity"]["max_abs_err"].get<double>() <= 1e-6);
    CHECK_FALSE(run.result["degenerate"].get<bool>());

    SECTION("zero signal is a vacuous pass flagged degenerate") {
        const auto tmp = std::filesystem::temp_directory_path() / "ddident_zero.csv";
        {
            std::ofstream out(tmp);
            SampledSignal zero(-1.0, 0.25, std::vector<Complex>(9, Complex(0, 0)));
            write_signal_csv(out, zero);
        }
        cfg.verify.signal_csv = tmp.string();
        cfg.verify.ratio_trials = 0;
        const RunArtifacts degenerate = run_verify(cfg);
        CHECK(degenerate.pass);
        CHECK(degenerate.result["degenerate"].get<bool>());
        std::filesystem::remove(tmp);
    }
}

TEST_CASE("sweep run is deterministic and structured") {
    ExperimentConfig cfg = load_fixture("sweep_k3.json");
    cfg.noise.trials = 10;
    const RunArtifacts run = run_sweep(cfg);
    REQUIRE(run.result["median_rmse_tau"].size() == 4);
    CHECK(run.result["trials"].get<int>() == 10);
    const RunArtifacts again = run_sweep(cfg);
    CHECK(again.files == run.files);

    // noise must lower the accuracy relative to the noiseless fixture
    for (const auto& v : run.result["median_rmse_tau"]) CHECK(v.get<double>() > 1e-9);
}

TEST_CASE("csv round trips") {
    SECTION("taps at 17 significant digits") {
        const std::vector<Tap> taps{{Complex(1.0 / 3.0, -2.0 / 7.0), 0.1 + 1e-14, -3.25},
                                    {Complex(-0.125, 0.625), 2.0 / 3.0, 1.0 / 9.0}};
        std::ostringstream out;
        write_taps_csv(out, taps);
        std::istringstream in(out.str());
        const auto back = read_taps_csv(in);
        REQUIRE(back.size() == taps.size());
        for (std::size_t i = 0; i < taps.size(); ++i) {
            CHECK(back[i].amplitude == taps[i].amplitude);
            CHECK(back[i].delay == taps[i].delay);
            CHECK(back[i].doppler == taps[i].doppler);
        }
    }
    SECTION("signals") {
        std::vector<Complex> v{{1.5, -0.25}, {0.0, 0.125}, {-2.0, 1.0 / 3.0}};
        const SampledSignal s(0.5, 0.25, v);
        std::ostringstream out;
        write_signal_csv(out, s);
        std::istringstream in(out.str());
        const SampledSignal back = read_signal_csv(in);
        CHECK(back.t0 == s.t0);
        CHECK(back.dt == Approx(s.dt).epsilon(1e-15));
        REQUIRE(back.values.size() == s.values.size());
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(back.values[i] == s.values[i]);
    }
    SECTION("malformed input is rejected") {
        std::istringstream bad("tau,nu\n1.0\n");
        CHECK_THROWS_AS(read_points_csv(bad), ValidationError);
        std::istringstream nan_field("tau,nu\n1.0,abc\n");
        CHECK_THROWS_AS(read_points_csv(nan_field), ValidationError);
    }
}

TEST_CASE("artifact writing produces a manifest") {
    const ExperimentConfig cfg = load_fixture("noiseless_k4.json");
    const RunArtifacts run = run_identify(cfg);
    const auto dir = std::filesystem::temp_directory_path() / "ddident_artifacts";
    std::filesystem::remove_all(dir);
    write_artifacts(dir.string(), "identify", cfg, run);
    const Json manifest = Json::parse(read_text_file((dir / "manifest.json").string()));
    CHECK(manifest["version"].get<std::string>() == std::string(kVersion));
    CHECK(manifest["command"].get<std::string>() == "identify");
    CHECK(manifest["seed"].get<std::uint64_t>() == cfg.scenario.seed);
    CHECK(manifest["config_hash"].get<std::string>().size() == 16);
    for (const auto& name : manifest["artifacts"])
        CHECK(std::filesystem::exists(dir / name.get<std::string>()));
    std::filesystem::remove_all(dir);
}

TEST_CASE("cli smoke test") {
    const auto dir1 = std::filesystem::temp_directory_path() / "ddident_cli_a";
    const auto dir2 = std::filesystem::temp_directory_path() / "ddident_cli_b";
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);

    const std::string base = std::string(DDIDENT_CLI_PATH) + " identify --config " +
                             fixture_path("noiseless_k4.json") + " --check --out ";
    CHECK(std::system((base + dir1.string() + " > /dev/null").c_str()) == 0);
    CHECK(std::system((base + dir2.string() + " > /dev/null").c_str()) == 0);

    // byte-identical artifacts across runs
    for (const auto& entry : std::filesystem::directory_iterator(dir1)) {
        const auto name = entry.path().filename();
        CHECK(read_text_file(entry.path().string()) ==
              read_text_file((dir2 / name).string()));
    }

    // validation failures exit with code 2
    ExperimentConfig broken = load_fixture("noiseless_k4.json");
    broken.plan.count = 5;
    const auto tmp_cfg = std::filesystem::temp_directory_path() / "ddident_broken.json";
    write_text_file(tmp_cfg.string(), serialize_config(broken));
    const int rc = std::system((std::string(DDIDENT_CLI_PATH) + " identify --config " +
                                tmp_cfg.string() + " --out " + dir1.string() + " 2> /dev/null")
                                   .c_str());
    CHECK(WEXITSTATUS(rc) == 2);

    // numerical failures (underflowing normalization weights) exit with code 3
    ExperimentConfig numeric = load_fixture("noiseless_k4.json");
    numeric.probe.center = 40.0;
    numeric.plan.horizon = 40.0;
    numeric.plan.count = 4;
    numeric.plan.nu_min = -0.04;
    numeric.plan.nu_max = 0.04;
    numeric.scenario.taps = {TapInit{1.0, 0.0, 0.0, 0.0}};
    write_text_file(tmp_cfg.string(), serialize_config(numeric));
    const int rc3 = std::system((std::string(DDIDENT_CLI_PATH) + " identify --config " +
                                 tmp_cfg.string() + " --out " + dir1.string() + " 2> /dev/null")
                                    .c_str());
    CHECK(WEXITSTATUS(rc3) == 3);

    std::filesystem::remove(tmp_cfg);
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);
}
