#ifndef QKD_SCENARIO_HPP
#define QKD_SCENARIO_HPP

#include <map>
#include <string>

#include "qkd/finite_key.hpp"
#include "qkd/ingest.hpp"

namespace qkd {

// Polarization source selection resolved from the config file.
enum class PolarizationSourceKind { FixedDelta, Gaussian, Binned };

struct PolarizationSpec {
    PolarizationSourceKind kind = PolarizationSourceKind::FixedDelta;
    double delta = 0.0;           // FixedDelta
    AngularGaussian gaussian{};   // Gaussian
    std::string stokes_csv;       // Binned
    int bins = 36;
};

struct ScenarioFile {
    Scenario scenario;
    PolarizationSpec polarization;
    // Paths referenced by the config, for the run manifest.
    std::vector<std::string> input_files;
};

// Parse the key/value scenario configuration. Unknown keys and malformed
// values raise ConfigError naming the key. Relative paths are resolved
// against the config file's directory.
ScenarioFile load_scenario(const std::string& path);

// Compute the coin imbalance Delta implied by the polarization source and
// store it in the scenario. For the Binned/Gaussian kinds this builds the
// averaged basis states and their fidelity.
void resolve_polarization(ScenarioFile& file);

// Flat key -> value view of the parsed config (section-qualified keys,
// e.g. "channel.eta"), used by the run manifest.
std::map<std::string, std::string> scenario_key_values(const std::string& path);

} // namespace qkd

#endif // QKD_SCENARIO_HPP
