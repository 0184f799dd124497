// Deterministic generator for the committed synthetic source-characterization
// fixtures (intensity samples and Stokes polarimetry samples).
//
// The generator is fully reproducible: a fixed mt19937_64 stream feeds a
// hand-rolled Box-Muller transform, so the committed CSVs can be regenerated
// bit-identically with the same seed on the same libm.
//
// Polarization model per state i: the azimuth is a two-component mixture of a
// dominant cluster N(m_i - comp_i, sigma_i) and a sparse polarimeter-artifact
// cluster N(m_i + d_i, sigma_art) of weight w_art, with comp_i chosen so the
// sample mean stays exactly at m_i. The artifact lobes give the empirical
// (binned) distribution a characteristic-function phase that a pure Gaussian
// fit cannot represent, which is what separates the binned and Gaussian coin
// estimates downstream. The polar angle is one shared Gaussian.

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

namespace {

constexpr std::uint64_t kDefaultSeed = 20250811ull;

struct Rng {
    std::mt19937_64 gen;
    bool has_spare = false;
    double spare = 0.0;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    double uniform() { // (0, 1]
        return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare) {
            has_spare = false;
            return spare;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * 3.141592653589793238462643383279502884 * u2;
        spare = r * std::sin(a);
        has_spare = true;
        return r * std::cos(a);
    }
};

// Intensity fluctuation model: means match the reference scenario, the
// weakest decoy is dominated by detector noise (sigma comparable to the mean,
// negative samples occur).
struct IntensitySpec {
    const char* label;
    double mean;
    double sigma;
    int count;
};

constexpr IntensitySpec kIntensity[] = {
    {"mu", 0.3, 0.009, 3000},
    {"nu1", 0.1, 0.004, 3000},
    {"nu2", 0.01, 0.0084, 3000},
};

// Azimuth model. phi0 is the common birefringence rotation; eps are the
// per-state mean misalignments; the artifact lobe sits 1 rad away with
// alternating side so the four artifact phases partially cancel in each basis.
constexpr double kPhi0 = 1.047197551196597746; // pi / 3
constexpr double kIdealOffset[4] = {0.0, 3.141592653589793239, 1.570796326794896619,
                                    4.712388980384689858};
constexpr double kEps[4] = {0.0, 9.2e-3, 5.1e-3, -5.1e-3};
constexpr double kPhiSigma[4] = {0.0345, 0.0358, 0.0349, 0.0363};
constexpr double kArtifactOffset[4] = {1.0, -1.0, -1.0, 1.0};
// The artifact lobe count is fixed per state so the fitted widths stay
// comparable across states instead of fluctuating with a ~20-sample Poisson
// draw.
constexpr int kArtifactCount = 40;
constexpr double kArtifactSigma = 0.02;
constexpr double kThetaMean = 1.620796326794896619; // pi / 2 + 0.05
constexpr double kThetaSigma = 0.018;
constexpr double kRadiusJitter = 0.01;
constexpr int kStokesPerState = 2500;

void write_intensity(const std::filesystem::path& path, Rng& rng) {
    std::ofstream out(path);
    out << "label,intensity\n";
    out << std::fixed << std::setprecision(9);
    for (const auto& spec : kIntensity) {
        for (int i = 0; i < spec.count; ++i) {
            out << spec.label << ',' << spec.mean + spec.sigma * rng.normal() << "\n";
        }
    }
}

void write_stokes(const std::filesystem::path& path, Rng& rng) {
    std::ofstream out(path);
    out << "state,s1,s2,s3\n";
    out << std::fixed << std::setprecision(9);
    const double w_art = static_cast<double>(kArtifactCount) / kStokesPerState;
    for (int state = 0; state < 4; ++state) {
        const double mean = kPhi0 + kIdealOffset[state] + kEps[state];
        // shift of the main cluster keeping the overall mean at `mean`
        const double comp = w_art * kArtifactOffset[state] / (1.0 - w_art);
        for (int i = 0; i < kStokesPerState; ++i) {
            double phi;
            if (i < kArtifactCount) {
                phi = mean + kArtifactOffset[state] + kArtifactSigma * rng.normal();
            } else {
                phi = mean - comp + kPhiSigma[state] * rng.normal();
            }
            const double theta = kThetaMean + kThetaSigma * rng.normal();
            const double r = 1.0 + kRadiusJitter * rng.normal();
            out << (state + 1) << ',' << r * std::cos(theta) << ','
                << r * std::sin(theta) * std::cos(phi) << ','
                << r * std::sin(theta) * std::sin(phi) << "\n";
        }
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate the synthetic source-characterization fixtures"};
    std::string out_dir = ".";
    std::uint64_t seed = kDefaultSeed;
    app.add_option("--out-dir", out_dir, "output directory");
    app.add_option("--seed", seed, "RNG seed (committed fixtures use the default)");
    CLI11_PARSE(app, argc, argv);

    std::filesystem::create_directories(out_dir);
    Rng rng(seed);
    const auto dir = std::filesystem::path(out_dir);
    write_intensity(dir / "intensity_synth.csv", rng);
    write_stokes(dir / "stokes_synth.csv", rng);
    std::cout << "wrote " << (dir / "intensity_synth.csv").string() << " and "
              << (dir / "stokes_synth.csv").string() << " (seed " << seed << ")\n";
    return 0;
}
