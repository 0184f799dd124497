#include "qkd/scenario.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qkd {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::map<std::string, std::string> parse_ini(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::map<std::string, std::string> kv;
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError("malformed section at line " + std::to_string(line_no));
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("expected key = value at line " + std::to_string(line_no));
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("empty key at line " + std::to_string(line_no));
        }
        if (!section.empty()) key = section + "." + key;
        kv[key] = val;
    }
    return kv;
}

double to_double(const std::string& key, const std::string& val) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(val, &pos);
    } catch (const std::exception&) {
        throw ConfigError("bad numeric value for key '" + key + "': " + val);
    }
    if (pos != val.size() || !std::isfinite(v)) {
        throw ConfigError("bad numeric value for key '" + key + "': " + val);
    }
    return v;
}

int to_int(const std::string& key, const std::string& val) {
    const double v = to_double(key, val);
    if (v != std::floor(v)) throw ConfigError("expected integer for key '" + key + "'");
    return static_cast<int>(v);
}

std::array<double, 4> to_quad(const std::string& key, const std::string& val) {
    std::array<double, 4> out{};
    std::stringstream ss(val);
    std::string field;
    int i = 0;
    while (std::getline(ss, field, ',')) {
        if (i >= 4) throw ConfigError("expected 4 values for key '" + key + "'");
        out[i++] = to_double(key, trim(field));
    }
    if (i != 4) throw ConfigError("expected 4 values for key '" + key + "'");
    return out;
}

FecTable parse_fec_table(const std::string& key, const std::string& val) {
    std::vector<std::pair<double, double>> knots;
    std::stringstream ss(val);
    std::string entry;
    while (std::getline(ss, entry, ',')) {
        entry = trim(entry);
        const auto colon = entry.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("bad f_ec entry for key '" + key + "': " + entry);
        }
        knots.emplace_back(to_double(key, trim(entry.substr(0, colon))),
                           to_double(key, trim(entry.substr(colon + 1))));
    }
    try {
        return FecTable(knots);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("bad f_ec table: ") + e.what());
    }
}

} // namespace

std::map<std::string, std::string> scenario_key_values(const std::string& path) {
    return parse_ini(path);
}

ScenarioFile load_scenario(const std::string& path) {
    const auto kv = parse_ini(path);
    const auto dir = std::filesystem::path(path).parent_path();

    ScenarioFile out;
    Scenario& sc = out.scenario;
    PolarizationSpec& pol = out.polarization;

    for (const auto& [key, val] : kv) {
        if (key == "mode") {
            if (val == "poissonian") sc.mode = ScenarioMode::Poissonian;
            else if (val == "gaussian-mixed") sc.mode = ScenarioMode::GaussianMixed;
            else if (val == "vacuum-nu2") sc.mode = ScenarioMode::VacuumNu2;
            else if (val == "wang") sc.mode = ScenarioMode::Wang;
            else throw ConfigError("unknown mode '" + val + "'");
        } else if (key == "wang_z") {
            sc.wang_z = to_double(key, val);
        } else if (key == "protocol.p_x") {
            sc.protocol.p_x = to_double(key, val);
        } else if (key == "protocol.p_y") {
            sc.protocol.p_y = to_double(key, val);
        } else if (key == "protocol.p_mu") {
            sc.protocol.p_mu = to_double(key, val);
        } else if (key == "protocol.p_nu1") {
            sc.protocol.p_nu1 = to_double(key, val);
        } else if (key == "protocol.p_nu2") {
            sc.protocol.p_nu2 = to_double(key, val);
        } else if (key == "protocol.sift_len_x") {
            sc.protocol.sift_len_x = to_double(key, val);
        } else if (key == "protocol.hash_len") {
            sc.protocol.hash_len = to_double(key, val);
        } else if (key == "protocol.eps_decoy") {
            sc.protocol.eps_decoy = to_double(key, val);
        } else if (key == "protocol.eps_pa") {
            sc.protocol.eps_pa = to_double(key, val);
        } else if (key == "channel.eta") {
            sc.channel.eta = to_double(key, val);
        } else if (key == "channel.p_dc") {
            sc.channel.p_dc = to_double(key, val);
        } else if (key == "channel.beta_db_per_km") {
            sc.channel.beta_db_per_km = to_double(key, val);
        } else if (key == "channel.bob_loss_db") {
            sc.channel.bob_loss_db = to_double(key, val);
        } else if (key == "channel.p_opt") {
            sc.channel.p_opt = to_double(key, val);
        } else if (key == "intensity.mu_mean") {
            sc.mu.mean = to_double(key, val);
        } else if (key == "intensity.mu_sigma") {
            sc.mu.sigma = to_double(key, val);
        } else if (key == "intensity.nu1_mean") {
            sc.nu1.mean = to_double(key, val);
        } else if (key == "intensity.nu1_sigma") {
            sc.nu1.sigma = to_double(key, val);
        } else if (key == "intensity.nu2_mean") {
            sc.nu2.mean = to_double(key, val);
        } else if (key == "intensity.nu2_sigma") {
            sc.nu2.sigma = to_double(key, val);
        } else if (key == "intensity.fit_csv") {
            const std::string resolved = (dir / val).string();
            out.input_files.push_back(resolved);
            const auto sets = load_samples(resolved, SampleKind::Intensity);
            bool saw_mu = false, saw_nu1 = false, saw_nu2 = false;
            for (const auto& set : sets) {
                const FitResult fit = fit_gaussian(set);
                if (set.label == "mu") sc.mu = fit.params, saw_mu = true;
                if (set.label == "nu1") sc.nu1 = fit.params, saw_nu1 = true;
                if (set.label == "nu2") sc.nu2 = fit.params, saw_nu2 = true;
            }
            if (!saw_mu || !saw_nu1 || !saw_nu2) {
                throw ConfigError("intensity.fit_csv: file must contain mu, nu1 and nu2");
            }
        } else if (key == "polarization.source") {
            if (val == "delta") pol.kind = PolarizationSourceKind::FixedDelta;
            else if (val == "gaussian") pol.kind = PolarizationSourceKind::Gaussian;
            else if (val == "binned") pol.kind = PolarizationSourceKind::Binned;
            else throw ConfigError("unknown polarization.source '" + val + "'");
        } else if (key == "polarization.delta") {
            pol.delta = to_double(key, val);
        } else if (key == "polarization.phi_mean") {
            pol.gaussian.phi_mean = to_quad(key, val);
        } else if (key == "polarization.phi_sigma") {
            pol.gaussian.phi_sigma = to_quad(key, val);
        } else if (key == "polarization.theta_mean") {
            pol.gaussian.theta_mean = to_double(key, val);
        } else if (key == "polarization.theta_sigma") {
            pol.gaussian.theta_sigma = to_double(key, val);
        } else if (key == "polarization.stokes_csv") {
            pol.stokes_csv = (dir / val).string();
            out.input_files.push_back(pol.stokes_csv);
        } else if (key == "polarization.bins") {
            pol.bins = to_int(key, val);
        } else if (key == "fec.table") {
            sc.protocol.fec = parse_fec_table(key, val);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
    }
    sc.protocol.validate();
    return out;
}

void resolve_polarization(ScenarioFile& file) {
    Scenario& sc = file.scenario;
    switch (file.polarization.kind) {
        case PolarizationSourceKind::FixedDelta:
            sc.delta = file.polarization.delta;
            return;
        case PolarizationSourceKind::Gaussian: {
            const AngularDistribution dist{file.polarization.gaussian};
            const DensityMatrix2 rx =
                basis_state(averaged_state(dist, 0), averaged_state(dist, 1));
            const DensityMatrix2 ry =
                basis_state(averaged_state(dist, 2), averaged_state(dist, 3));
            sc.delta = 0.5 * (1.0 - std::sqrt(fidelity(rx, ry)));
            return;
        }
        case PolarizationSourceKind::Binned: {
            if (file.polarization.stokes_csv.empty()) {
                throw ConfigError("polarization.stokes_csv required for binned source");
            }
            const auto sets = load_samples(file.polarization.stokes_csv, SampleKind::Stokes);
            const AngularSamples angles = angles_from_stokes(sets);
            const AngularDistribution dist =
                binned_distribution(angles, file.polarization.bins);
            const DensityMatrix2 rx =
                basis_state(averaged_state(dist, 0), averaged_state(dist, 1));
            const DensityMatrix2 ry =
                basis_state(averaged_state(dist, 2), averaged_state(dist, 3));
            sc.delta = 0.5 * (1.0 - std::sqrt(fidelity(rx, ry)));
            return;
        }
    }
}

} // namespace qkd
