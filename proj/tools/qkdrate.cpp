// Command-line front end: key-rate sweeps, source-characterization fits,
// quantum-coin estimates and multi-mode comparison tables.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "qkd/finite_key.hpp"
#include "qkd/ingest.hpp"
#include "qkd/scenario.hpp"

using json = nlohmann::json;

namespace {

constexpr const char* kToolVersion = "qkdrate 1.0.0";

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kDataError = 3,
    kNumericalError = 4,
};

int log_level() {
    const char* env = std::getenv("QKDRATE_LOG");
    if (!env) return 1;
    const std::string v = env;
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[qkdrate] " << msg << "\n";
}

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qkd::ParseError("cannot open file for digest: " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 14];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << v;
    return os.str();
}

std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
    return buf;
}

// Every output file is accompanied by a manifest sufficient to re-run the
// command.
void write_manifest(const std::string& out_path, const std::string& command,
                    const std::map<std::string, std::string>& resolved_config,
                    const std::vector<std::string>& inputs) {
    json m;
    m["tool"] = kToolVersion;
    m["command"] = command;
    m["timestamp"] = timestamp_utc();
    m["config"] = resolved_config;
    json digests = json::object();
    for (const auto& f : inputs) {
        digests[f] = hex64(fnv1a64_file(f));
    }
    m["input_digests"] = digests;
    std::ofstream out(out_path + ".manifest.json");
    out << m.dump(2) << "\n";
}

std::vector<double> distance_grid(double from_km, double to_km, double step_km) {
    if (step_km <= 0.0 || to_km < from_km) {
        throw qkd::ConfigError("invalid distance range");
    }
    std::vector<double> grid;
    for (double d = from_km; d <= to_km + 1e-9; d += step_km) grid.push_back(d);
    return grid;
}


// --fec-table override: the same qber:f comma list the config accepts.
qkd::FecTable parse_fec_flag(const std::string& arg) {
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(arg);
    std::string entry;
    while (std::getline(ss, entry, ',')) {
        const auto colon = entry.find(':');
        if (colon == std::string::npos) {
            throw qkd::ConfigError("bad --fec-table entry '" + entry + "'");
        }
        knots.emplace_back(std::stod(entry.substr(0, colon)),
                           std::stod(entry.substr(colon + 1)));
    }
    return qkd::FecTable(knots);
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

// Structured-text mirror of the CSV rows, one section per distance point.
void write_keyrate_mirror(std::ostream& out, const std::vector<qkd::KeyLengthReport>& reports) {
    out << std::setprecision(12);
    for (const auto& r : reports) {
        out << "[point." << fmt(r.distance_km) << "]\n";
        out << "l_sec = " << fmt(r.l_sec) << "\n";
        out << "l_ver = " << fmt(r.l_ver) << "\n";
        out << "ratio = " << fmt(r.ratio()) << "\n";
        out << "q_mu = " << fmt(r.q_mu) << "\n";
        out << "e_mu = " << fmt(r.e_mu) << "\n";
        out << "y1l_x = " << fmt(r.x.y1_lower) << "\n";
        out << "y1l_y = " << fmt(r.y.y1_lower) << "\n";
        out << "e1_ph_u = " << fmt(r.e1_ph_upper) << "\n";
        out << "status = " << (r.valid ? "ok" : r.error) << "\n\n";
    }
}

void write_keyrate_csv(std::ostream& out, const std::vector<qkd::KeyLengthReport>& reports) {
    out << "distance_km,l_sec,l_ver,ratio,q_mu,e_mu,y0l_x,y1l_x,y0l_y,y1l_y,"
           "m1_x,m1_y,m0bar_y,e1_y_u,delta,delta_prime,theta_coin,theta_stat,"
           "e1_ph_u,leak,l_sec_raw,bounds_used,status\n";
    for (const auto& r : reports) {
        out << fmt(r.distance_km) << ',' << fmt(r.l_sec) << ',' << fmt(r.l_ver) << ','
            << fmt(r.ratio()) << ',' << fmt(r.q_mu) << ',' << fmt(r.e_mu) << ','
            << fmt(r.x.y0_lower) << ',' << fmt(r.x.y1_lower) << ',' << fmt(r.y.y0_lower)
            << ',' << fmt(r.y.y1_lower) << ',' << fmt(r.x.m1_lower) << ','
            << fmt(r.y.m1_lower) << ',' << fmt(r.m0_bar_lower) << ',' << fmt(r.e1_y_upper)
            << ',' << fmt(r.delta) << ',' << fmt(r.delta_prime) << ',' << fmt(r.theta_coin)
            << ',' << fmt(r.theta_stat) << ',' << fmt(r.e1_ph_upper) << ',' << fmt(r.leak)
            << ',' << fmt(r.l_sec_raw) << ',' << r.bounds_used << ','
            << (r.valid ? "ok" : ("error:" + r.error)) << "\n";
    }
}

int sweep_exit_code(const std::vector<qkd::KeyLengthReport>& reports) {
    for (const auto& r : reports) {
        if (r.valid) return kOk;
    }
    return kNumericalError;
}

int cmd_keyrate(const std::string& config_path, double from_km, double to_km,
                double step_km, const std::string& out_path,
                const std::string& fec_flag, const std::string& mirror_path) {
    qkd::ScenarioFile file = qkd::load_scenario(config_path);
    qkd::resolve_polarization(file);
    if (!fec_flag.empty()) file.scenario.protocol.fec = parse_fec_flag(fec_flag);
    log_info("scenario mode " + qkd::to_string(file.scenario.mode) + ", delta = " +
             fmt(file.scenario.delta));
    const auto grid = distance_grid(from_km, to_km, step_km);
    const auto reports = qkd::sweep_distances(file.scenario, grid);

    std::ofstream out(out_path);
    if (!out) throw qkd::ParseError("cannot write output: " + out_path);
    write_keyrate_csv(out, reports);
    if (!mirror_path.empty()) {
        std::ofstream mirror(mirror_path);
        if (!mirror) throw qkd::ParseError("cannot write output: " + mirror_path);
        write_keyrate_mirror(mirror, reports);
    }

    auto cfg = qkd::scenario_key_values(config_path);
    cfg["resolved.delta"] = fmt(file.scenario.delta);
    std::vector<std::string> inputs = file.input_files;
    inputs.push_back(config_path);
    write_manifest(out_path, "keyrate", cfg, inputs);
    return sweep_exit_code(reports);
}

int cmd_fit(const std::string& input, const std::string& schema, const std::string& out_path) {
    std::ofstream out(out_path);
    if (!out) throw qkd::ParseError("cannot write output: " + out_path);
    out << std::setprecision(12);
    if (schema == "intensity") {
        const auto sets = qkd::load_samples(input, qkd::SampleKind::Intensity);
        for (const auto& set : sets) {
            const qkd::FitResult fit = qkd::fit_gaussian(set, 50);
            out << "[intensity." << set.label << "]\n";
            out << "mean = " << fit.params.mean << "\n";
            out << "sigma = " << fit.params.sigma << "\n";
            out << "goodness = " << fit.goodness << "\n";
            out << "samples = " << set.size() << "\n\n";
        }
    } else if (schema == "stokes") {
        const auto sets = qkd::load_samples(input, qkd::SampleKind::Stokes);
        const qkd::AngularSamples angles = qkd::angles_from_stokes(sets);
        const qkd::AngularFit fit = qkd::fit_angular(angles);
        for (int i = 0; i < 4; ++i) {
            out << "[phi." << (i + 1) << "]\n";
            out << "mean = " << fit.phi[i].params.mean << "\n";
            out << "sigma = " << fit.phi[i].params.sigma << "\n";
            out << "goodness = " << fit.phi[i].goodness << "\n\n";
        }
        out << "[theta]\n";
        out << "mean = " << fit.theta.params.mean << "\n";
        out << "sigma = " << fit.theta.params.sigma << "\n";
        out << "goodness = " << fit.theta.goodness << "\n";
    } else {
        throw qkd::ConfigError("unknown schema '" + schema + "' (intensity|stokes)");
    }
    write_manifest(out_path, "fit", {{"input", input}, {"schema", schema}}, {input});
    return kOk;
}

qkd::AngularGaussian gaussian_from_fit_file(const std::string& path) {
    const auto kv = qkd::scenario_key_values(path);
    qkd::AngularGaussian g;
    const auto need = [&](const std::string& key) {
        const auto it = kv.find(key);
        if (it == kv.end()) throw qkd::ConfigError("fit file misses key '" + key + "'");
        return std::stod(it->second);
    };
    for (int i = 0; i < 4; ++i) {
        g.phi_mean[i] = need("phi." + std::to_string(i + 1) + ".mean");
        g.phi_sigma[i] = need("phi." + std::to_string(i + 1) + ".sigma");
    }
    g.theta_mean = need("theta.mean");
    g.theta_sigma = need("theta.sigma");
    return g;
}

bool looks_like_stokes_csv(const std::string& path) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    return first.rfind("state,", 0) == 0;
}

int cmd_coin(const std::string& input, const std::string& mode, double level,
             const std::string& interval_mode, int bins) {
    using qkd::DensityMatrix2;
    double f = 0.0;
    std::ostringstream extra;

    if (mode == "gaussian" && !looks_like_stokes_csv(input)) {
        const qkd::AngularGaussian g = gaussian_from_fit_file(input);
        const qkd::AngularDistribution dist{g};
        const DensityMatrix2 rx =
            qkd::basis_state(qkd::averaged_state(dist, 0), qkd::averaged_state(dist, 1));
        const DensityMatrix2 ry =
            qkd::basis_state(qkd::averaged_state(dist, 2), qkd::averaged_state(dist, 3));
        f = qkd::fidelity(rx, ry);
    } else {
        const auto sets = qkd::load_samples(input, qkd::SampleKind::Stokes);
        const qkd::AngularSamples angles = qkd::angles_from_stokes(sets);
        if (mode == "binned") {
            const qkd::AngularDistribution dist = qkd::binned_distribution(angles, bins);
            const DensityMatrix2 rx =
                qkd::basis_state(qkd::averaged_state(dist, 0), qkd::averaged_state(dist, 1));
            const DensityMatrix2 ry =
                qkd::basis_state(qkd::averaged_state(dist, 2), qkd::averaged_state(dist, 3));
            f = qkd::fidelity(rx, ry);
        } else if (mode == "gaussian") {
            const qkd::AngularDistribution dist{qkd::fit_angular(angles, bins).to_gaussian()};
            const DensityMatrix2 rx =
                qkd::basis_state(qkd::averaged_state(dist, 0), qkd::averaged_state(dist, 1));
            const DensityMatrix2 ry =
                qkd::basis_state(qkd::averaged_state(dist, 2), qkd::averaged_state(dist, 3));
            f = qkd::fidelity(rx, ry);
        } else if (mode == "minfid") {
            qkd::IntervalMode im;
            if (interval_mode == "quantile") im = qkd::IntervalMode::Quantile;
            else if (interval_mode == "gaussian") im = qkd::IntervalMode::GaussianFit;
            else {
                throw qkd::ConfigError(
                    "minfid mode requires --interval quantile|gaussian");
            }
            qkd::AngleRanges ranges;
            for (int i = 0; i < 4; ++i) {
                const qkd::Interval iv = qkd::confidence_interval(angles.phi[i], level, im);
                ranges.phi[i] = {iv.lo, iv.hi};
                extra << "phi" << (i + 1) << "_range = [" << iv.lo << ", " << iv.hi << "]\n";
            }
            const qkd::Interval tv = qkd::confidence_interval(angles.theta, level, im);
            ranges.theta = {tv.lo, tv.hi};
            extra << "theta_range = [" << tv.lo << ", " << tv.hi << "]\n";
            f = qkd::min_fidelity_pure(ranges);
        } else {
            throw qkd::ConfigError("unknown coin mode '" + mode +
                                   "' (binned|gaussian|minfid)");
        }
    }

    const double delta = 0.5 * (1.0 - std::sqrt(f));
    std::cout << std::setprecision(12);
    std::cout << "mode = " << mode << "\n";
    std::cout << extra.str();
    std::cout << "F = " << f << "\n";
    std::cout << "delta = " << delta << "\n";
    return kOk;
}

struct CompareMode {
    std::string token;
    qkd::ScenarioMode mode = qkd::ScenarioMode::Poissonian;
    double wang_z = 1.0;
    bool fixed_delta = false;
    double delta = 0.0;
};

CompareMode parse_compare_mode(const std::string& token) {
    CompareMode m;
    m.token = token;
    if (token == "poissonian") m.mode = qkd::ScenarioMode::Poissonian;
    else if (token == "gaussian-mixed") m.mode = qkd::ScenarioMode::GaussianMixed;
    else if (token == "vacuum-nu2") m.mode = qkd::ScenarioMode::VacuumNu2;
    else if (token.rfind("wang:", 0) == 0) {
        m.mode = qkd::ScenarioMode::Wang;
        m.wang_z = std::stod(token.substr(5));
    } else if (token.rfind("delta:", 0) == 0) {
        m.mode = qkd::ScenarioMode::Poissonian;
        m.fixed_delta = true;
        m.delta = std::stod(token.substr(6));
    } else {
        throw qkd::ConfigError("unknown compare mode '" + token + "'");
    }
    return m;
}

int cmd_compare(const std::string& config_path, const std::vector<std::string>& mode_tokens,
                double from_km, double to_km, double step_km, const std::string& out_path) {
    if (mode_tokens.empty()) throw qkd::ConfigError("compare: no modes given");
    qkd::ScenarioFile file = qkd::load_scenario(config_path);
    qkd::resolve_polarization(file);
    const auto grid = distance_grid(from_km, to_km, step_km);

    std::vector<std::vector<qkd::KeyLengthReport>> columns;
    for (const auto& token : mode_tokens) {
        const CompareMode m = parse_compare_mode(token);
        qkd::Scenario sc = file.scenario;
        sc.mode = m.mode;
        sc.wang_z = m.wang_z;
        if (m.fixed_delta) sc.delta = m.delta;
        columns.push_back(qkd::sweep_distances(sc, grid));
    }

    std::ofstream out(out_path);
    if (!out) throw qkd::ParseError("cannot write output: " + out_path);
    out << "distance_km";
    for (const auto& token : mode_tokens) out << ",ratio_" << token;
    out << "\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out << fmt(grid[i]);
        for (const auto& col : columns) out << ',' << fmt(col[i].ratio());
        out << "\n";
    }

    auto cfg = qkd::scenario_key_values(config_path);
    std::string modes_joined;
    for (const auto& t : mode_tokens) {
        if (!modes_joined.empty()) modes_joined += ",";
        modes_joined += t;
    }
    cfg["compare.modes"] = modes_joined;
    std::vector<std::string> inputs = file.input_files;
    inputs.push_back(config_path);
    write_manifest(out_path, "compare", cfg, inputs);

    for (const auto& col : columns) {
        if (sweep_exit_code(col) == kOk) return kOk;
    }
    return kNumericalError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-key secret-key-length bounds for decoy-state BB84 with "
                 "imperfect source preparation"};
    app.require_subcommand(1);

    std::string config_path, out_path, input_path, schema, mode, interval_mode;
    std::string fec_flag, mirror_path;
    double from_km = 0.0, to_km = 170.0, step_km = 5.0, level = 0.9;
    int bins = 36;
    std::vector<std::string> modes;

    auto* keyrate = app.add_subcommand("keyrate", "Key-length sweep over distance");
    keyrate->add_option("--config", config_path, "scenario config file")->required();
    keyrate->add_option("--from-km", from_km, "start distance");
    keyrate->add_option("--to-km", to_km, "end distance");
    keyrate->add_option("--step-km", step_km, "distance step");
    keyrate->add_option("--out", out_path, "output CSV path")->required();
    keyrate->add_option("--fec-table", fec_flag, "override qber:f_ec knots");
    keyrate->add_option("--mirror", mirror_path, "also write a structured-text mirror");

    auto* fit = app.add_subcommand("fit", "Fit source characterization data");
    fit->add_option("--input", input_path, "input CSV")->required();
    fit->add_option("--schema", schema, "intensity|stokes")->required();
    fit->add_option("--out", out_path, "output fit file")->required();

    auto* coin = app.add_subcommand("coin", "Quantum-coin fidelity and imbalance");
    coin->add_option("--input", input_path, "stokes CSV or fit file")->required();
    coin->add_option("--mode", mode, "binned|gaussian|minfid")->required();
    coin->add_option("--level", level, "confidence level for minfid");
    coin->add_option("--interval", interval_mode, "quantile|gaussian (minfid)");
    coin->add_option("--bins", bins, "bin count for binned mode");

    auto* compare = app.add_subcommand("compare", "Ratio columns for several modes");
    compare->add_option("--config", config_path, "scenario config file")->required();
    compare->add_option("--modes", modes, "mode tokens")->required()->delimiter(',');
    compare->add_option("--from-km", from_km, "start distance");
    compare->add_option("--to-km", to_km, "end distance");
    compare->add_option("--step-km", step_km, "distance step");
    compare->add_option("--out", out_path, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (keyrate->parsed()) {
            return cmd_keyrate(config_path, from_km, to_km, step_km, out_path, fec_flag,
                               mirror_path);
        }
        if (fit->parsed()) {
            return cmd_fit(input_path, schema, out_path);
        }
        if (coin->parsed()) {
            return cmd_coin(input_path, mode, level, interval_mode, bins);
        }
        if (compare->parsed()) {
            return cmd_compare(config_path, modes, from_km, to_km, step_km, out_path);
        }
    } catch (const qkd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const qkd::ParseError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const qkd::InsufficientDataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const qkd::DegenerateFitError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumericalError;
    }
    return kOk;
}
