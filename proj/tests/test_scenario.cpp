#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "qkd/scenario.hpp"

using namespace qkd;

namespace {

struct TempConf {
    std::filesystem::path path;
    explicit TempConf(const std::string& content) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("qkd_conf_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++) + ".conf");
        std::ofstream out(path);
        out << content;
    }
    ~TempConf() { std::filesystem::remove(path); }
};

std::string source_dir() {
    const char* root = std::getenv("QKD_SOURCE_DIR");
    return root ? root : ".";
}

} // namespace

TEST_CASE("defaults survive an empty config") {
    TempConf f("");
    const ScenarioFile sf = load_scenario(f.path.string());
    CHECK(sf.scenario.mode == ScenarioMode::Poissonian);
    CHECK(sf.scenario.mu.mean == doctest::Approx(0.3));
    CHECK(sf.scenario.protocol.sift_len_x == doctest::Approx(1.36e6));
    CHECK(sf.scenario.protocol.eps_per_bound() == doctest::Approx(1e-12 / 14.0));
}

TEST_CASE("every section parses") {
    TempConf f(
        "mode = wang\n"
        "wang_z = 2.3\n"
        "[protocol]\n"
        "p_x = 0.8\np_y = 0.2\n"
        "sift_len_x = 2e6\n"
        "[channel]\n"
        "eta = 0.2\n"
        "p_dc = 2e-6\n"
        "[intensity]\n"
        "mu_mean = 0.4\nmu_sigma = 0.01\n"
        "[polarization]\n"
        "source = delta\n"
        "delta = 1e-6\n"
        "[fec]\n"
        "table = 0.01:1.5, 0.05:1.2\n");
    ScenarioFile sf = load_scenario(f.path.string());
    CHECK(sf.scenario.mode == ScenarioMode::Wang);
    CHECK(sf.scenario.wang_z == doctest::Approx(2.3));
    CHECK(sf.scenario.protocol.p_x == doctest::Approx(0.8));
    CHECK(sf.scenario.channel.eta == doctest::Approx(0.2));
    CHECK(sf.scenario.mu.mean == doctest::Approx(0.4));
    CHECK(sf.scenario.protocol.fec.at(0.03).f == doctest::Approx(1.35));
    resolve_polarization(sf);
    CHECK(sf.scenario.delta == doctest::Approx(1e-6));
}

TEST_CASE("unknown keys are named") {
    TempConf f("[channel]\ndark_rate = 1\n");
    try {
        load_scenario(f.path.string());
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("channel.dark_rate") != std::string::npos);
    }
}

TEST_CASE("malformed values are rejected") {
    TempConf bad_num("[channel]\neta = fast\n");
    CHECK_THROWS_AS(load_scenario(bad_num.path.string()), ConfigError);
    TempConf bad_mode("mode = classical\n");
    CHECK_THROWS_AS(load_scenario(bad_mode.path.string()), ConfigError);
    TempConf bad_probs("[protocol]\np_x = 0.7\n");
    CHECK_THROWS_AS(load_scenario(bad_probs.path.string()), ConfigError);
}

TEST_CASE("gaussian polarization source resolves to a coin imbalance") {
    TempConf f(
        "[polarization]\n"
        "source = gaussian\n"
        "phi_mean = 1.0472, 4.1988, 2.6180, 5.7516\n"
        "phi_sigma = 0.04, 0.04, 0.04, 0.04\n"
        "theta_mean = 1.6208\n"
        "theta_sigma = 0.018\n");
    ScenarioFile sf = load_scenario(f.path.string());
    resolve_polarization(sf);
    // phi2 offset from ideal by 1e-4: a small but nonzero imbalance
    CHECK(sf.scenario.delta > 0.0);
    CHECK(sf.scenario.delta < 1e-4);
}

TEST_CASE("committed synthetic config resolves the binned imbalance") {
    const std::string cfg = source_dir() + "/configs/synthetic.conf";
    if (!std::filesystem::exists(cfg)) return;
    ScenarioFile sf = load_scenario(cfg);
    CHECK(sf.scenario.mode == ScenarioMode::GaussianMixed);
    CHECK(sf.scenario.mu.mean == doctest::Approx(0.3).epsilon(0.01));
    CHECK(sf.scenario.nu2.sigma == doctest::Approx(0.0084).epsilon(0.05));
    resolve_polarization(sf);
    CHECK(sf.scenario.delta > 5e-6);
    CHECK(sf.scenario.delta < 9e-6);
    CHECK(sf.input_files.size() == 2);
}
