#ifndef QKD_POLARIZATION_HPP
#define QKD_POLARIZATION_HPP

#include <Eigen/Dense>
#include <array>
#include <utility>
#include <variant>
#include <vector>

#include "qkd/errors.hpp"

namespace qkd {

using DensityMatrix2 = Eigen::Matrix2cd;

struct BlochAngles {
    double phi = 0.0;   // azimuth in [0, 2 pi)
    double theta = 0.0; // polar in [0, pi]
};

struct StokesAngles {
    BlochAngles angles;
    bool azimuth_degenerate = false; // S2 = S3 = 0: phi set to 0 by convention
};

// Normalized binned PDF: edges.size() == weights.size() + 1 and
// sum_k weights[k] * (edges[k+1] - edges[k]) == 1.
struct BinnedPdf {
    std::vector<double> edges;
    std::vector<double> weights;

    void validate() const;
};

// Per-state azimuth Gaussians plus one shared polar Gaussian.
struct AngularGaussian {
    std::array<double, 4> phi_mean{};
    std::array<double, 4> phi_sigma{};
    double theta_mean = 0.0;
    double theta_sigma = 0.0;
};

struct AngularBinned {
    std::array<BinnedPdf, 4> phi;
    BinnedPdf theta;
};

struct AngularDistribution {
    std::variant<AngularGaussian, AngularBinned> data;

    bool is_gaussian() const { return std::holds_alternative<AngularGaussian>(data); }
    const AngularGaussian& gaussian() const { return std::get<AngularGaussian>(data); }
    const AngularBinned& binned() const { return std::get<AngularBinned>(data); }
};

// |psi(phi, theta)><psi| with |psi> = cos(theta/2)|H> + e^{i phi} sin(theta/2)|V>.
DensityMatrix2 bloch_projector(const BlochAngles& angles);

// Spherical angles of a Stokes vector; throws DomainError on the zero vector.
StokesAngles stokes_to_angles(double s1, double s2, double s3);

// Mixed state of the state_index-th prepared state (0..3) under the angular
// distribution: the analytic damped matrix for the Gaussian form, the
// bin-center double sum for the binned form.
DensityMatrix2 averaged_state(const AngularDistribution& dist, int state_index);

// Equal mixture of the two basis states.
DensityMatrix2 basis_state(const DensityMatrix2& rho_a, const DensityMatrix2& rho_b);

// Fidelity of two qubit density matrices: Tr(ab) + 2 sqrt(det a det b).
double fidelity(const DensityMatrix2& rho_a, const DensityMatrix2& rho_b);

struct CoinImbalance {
    double delta = 0.0;       // (1 - sqrt F) / 2
    double delta_prime = 0.0; // (1 - sqrt F) / (Y1X + Y1Y), clamped to <= 1/2
    bool clamped = false;
};

CoinImbalance coin_imbalance(double f, double y1x_lower, double y1y_lower);

struct AngleRanges {
    std::array<std::pair<double, double>, 4> phi;
    std::pair<double, double> theta;
};

// Worst-case pure-state fidelity over the given per-state azimuth intervals
// and the shared polar interval. Evaluates the analytic corner candidates and
// a dense grid (grid_points per dimension) and returns the smaller.
double min_fidelity_pure(const AngleRanges& ranges, int grid_points = 64);

// Hermiticity, unit trace and positive semidefiniteness at the given tolerance.
bool is_valid_density(const DensityMatrix2& rho, double tol = 1e-12);

} // namespace qkd

#endif // QKD_POLARIZATION_HPP
