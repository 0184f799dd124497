#include "qkd/polarization.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "qkd/math.hpp"

namespace qkd {

using std::complex;

namespace {

double wrap_two_pi(double phi) {
    double w = std::fmod(phi, kTwoPi);
    if (w < 0.0) w += kTwoPi;
    return w;
}

// Objective of the pure-state fidelity minimization, factored through
// A = (phi1 - phi2)/2, B = (phi3 - phi4)/2, C = (phi1 + phi2 - phi3 - phi4)/2:
// g = cos C cos A cos B + |sin A sin B|, F = (1 + cos^2 th + g sin^2 th) / 2.
double corner_objective(double phi1, double phi2, double phi3, double phi4) {
    const double a = 0.5 * (phi1 - phi2);
    const double b = 0.5 * (phi3 - phi4);
    const double c = 0.5 * (phi1 + phi2 - phi3 - phi4);
    return std::cos(c) * std::cos(a) * std::cos(b) + std::abs(std::sin(a) * std::sin(b));
}

double fidelity_from_g(double g, double theta) {
    const double st = std::sin(theta);
    const double ct = std::cos(theta);
    return 0.5 * (1.0 + ct * ct + g * st * st);
}

} // namespace

void BinnedPdf::validate() const {
    if (edges.size() != weights.size() + 1 || weights.empty()) {
        throw DomainError("BinnedPdf: edges must be weights.size() + 1");
    }
    double mass = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double w = edges[k + 1] - edges[k];
        if (!(w > 0.0)) throw DomainError("BinnedPdf: edges must be increasing");
        if (weights[k] < 0.0) throw DomainError("BinnedPdf: negative weight");
        mass += weights[k] * w;
    }
    if (std::abs(mass - 1.0) > 1e-9) {
        throw DomainError("BinnedPdf: weights*widths must sum to 1");
    }
}

DensityMatrix2 bloch_projector(const BlochAngles& angles) {
    const double half = 0.5 * angles.theta;
    const complex<double> c0(std::cos(half), 0.0);
    const complex<double> c1 = std::polar(std::sin(half), angles.phi);
    DensityMatrix2 rho;
    rho(0, 0) = c0 * std::conj(c0);
    rho(0, 1) = c0 * std::conj(c1);
    rho(1, 0) = c1 * std::conj(c0);
    rho(1, 1) = c1 * std::conj(c1);
    return rho;
}

StokesAngles stokes_to_angles(double s1, double s2, double s3) {
    const double r2 = s1 * s1 + s2 * s2 + s3 * s3;
    if (!(r2 > 0.0)) {
        throw DomainError("stokes_to_angles: zero Stokes vector");
    }
    StokesAngles out;
    out.angles.theta = std::acos(std::clamp(s1 / std::sqrt(r2), -1.0, 1.0));
    const double t = std::sqrt(s2 * s2 + s3 * s3);
    if (t == 0.0) {
        out.angles.phi = 0.0;
        out.azimuth_degenerate = true;
        return out;
    }
    const double phi = (s3 >= 0.0 ? 1.0 : -1.0) * std::acos(std::clamp(s2 / t, -1.0, 1.0));
    out.angles.phi = wrap_two_pi(phi);
    return out;
}

DensityMatrix2 averaged_state(const AngularDistribution& dist, int state_index) {
    if (state_index < 0 || state_index > 3) {
        throw DomainError("averaged_state: state index must be 0..3");
    }
    if (dist.is_gaussian()) {
        const auto& g = dist.gaussian();
        if (g.phi_sigma[state_index] < 0.0 || g.theta_sigma < 0.0) {
            throw DomainError("averaged_state: negative sigma");
        }
        const double sp = g.phi_sigma[state_index];
        const double st = g.theta_sigma;
        const double damp_z = std::exp(-0.5 * st * st);
        const double damp_xy = std::exp(-0.5 * (sp * sp + st * st));
        const double ct = std::cos(g.theta_mean);
        const double sn = std::sin(g.theta_mean);
        DensityMatrix2 rho;
        rho(0, 0) = 0.5 * (1.0 + damp_z * ct);
        rho(1, 1) = 0.5 * (1.0 - damp_z * ct);
        rho(1, 0) = 0.5 * damp_xy * sn * std::polar(1.0, g.phi_mean[state_index]);
        rho(0, 1) = std::conj(rho(1, 0));
        return rho;
    }
    const auto& b = dist.binned();
    b.theta.validate();
    b.phi[state_index].validate();
    const auto& pphi = b.phi[state_index];
    DensityMatrix2 rho = DensityMatrix2::Zero();
    for (std::size_t i = 0; i + 1 < pphi.edges.size(); ++i) {
        const double wphi = pphi.edges[i + 1] - pphi.edges[i];
        const double phic = 0.5 * (pphi.edges[i] + pphi.edges[i + 1]);
        const double mass_phi = pphi.weights[i] * wphi;
        if (mass_phi == 0.0) continue;
        for (std::size_t j = 0; j + 1 < b.theta.edges.size(); ++j) {
            const double wth = b.theta.edges[j + 1] - b.theta.edges[j];
            const double thc = 0.5 * (b.theta.edges[j] + b.theta.edges[j + 1]);
            const double mass = mass_phi * b.theta.weights[j] * wth;
            if (mass == 0.0) continue;
            rho += mass * bloch_projector({phic, thc});
        }
    }
    return rho;
}

DensityMatrix2 basis_state(const DensityMatrix2& rho_a, const DensityMatrix2& rho_b) {
    return 0.5 * (rho_a + rho_b);
}

double fidelity(const DensityMatrix2& rho_a, const DensityMatrix2& rho_b) {
    const double tr = (rho_a * rho_b).trace().real();
    double det_a = rho_a.determinant().real();
    double det_b = rho_b.determinant().real();
    if (det_a < -1e-12 || det_b < -1e-12) {
        throw DomainError("fidelity: negative determinant beyond tolerance");
    }
    det_a = std::max(det_a, 0.0);
    det_b = std::max(det_b, 0.0);
    const double f = tr + 2.0 * std::sqrt(det_a * det_b);
    return std::clamp(f, 0.0, 1.0);
}

CoinImbalance coin_imbalance(double f, double y1x_lower, double y1y_lower) {
    if (!(f >= 0.0 && f <= 1.0)) {
        throw DomainError("coin_imbalance: fidelity outside [0, 1]");
    }
    if (!(y1x_lower >= 0.0 && y1y_lower >= 0.0)) {
        throw DomainError("coin_imbalance: negative yield");
    }
    const double ysum = y1x_lower + y1y_lower;
    if (!(ysum > 0.0)) {
        throw DomainError("coin_imbalance: both yields are zero");
    }
    const double one_minus_sqrt_f = 1.0 - std::sqrt(f);
    CoinImbalance out;
    out.delta = 0.5 * one_minus_sqrt_f;
    out.delta_prime = one_minus_sqrt_f / ysum;
    if (out.delta_prime > 0.5) {
        out.delta_prime = 0.5;
        out.clamped = true;
    }
    return out;
}

double min_fidelity_pure(const AngleRanges& ranges, int grid_points) {
    for (const auto& [lo, hi] : ranges.phi) {
        if (!(hi >= lo)) throw DomainError("min_fidelity_pure: empty phi interval");
    }
    if (!(ranges.theta.second >= ranges.theta.first)) {
        throw DomainError("min_fidelity_pure: empty theta interval");
    }
    if (grid_points < 2) grid_points = 2;

    // theta closest to pi/2 maximizes sin^2 and minimizes F whenever g <= 1,
    // which always holds for this objective.
    const double theta_star =
        std::clamp(kPi / 2.0, ranges.theta.first, ranges.theta.second);

    double g_min = std::numeric_limits<double>::infinity();

    // Analytic candidates: the four corner combinations phi_{1,3} min/max with
    // phi_{2,4} opposite.
    const auto& [p1l, p1h] = ranges.phi[0];
    const auto& [p2l, p2h] = ranges.phi[1];
    const auto& [p3l, p3h] = ranges.phi[2];
    const auto& [p4l, p4h] = ranges.phi[3];
    const double corners[4][4] = {{p1l, p2h, p3l, p4h},
                                  {p1l, p2h, p3h, p4l},
                                  {p1h, p2l, p3l, p4h},
                                  {p1h, p2l, p3h, p4l}};
    for (const auto& c : corners) {
        g_min = std::min(g_min, corner_objective(c[0], c[1], c[2], c[3]));
    }

    // Dense grid. Hoist the per-pair trigonometry: for the (1,2) pair store
    // cos A, |sin A| and the half-sum u; likewise for (3,4).
    const int n = grid_points;
    struct PairEntry {
        double ccu, csu, absd; // cos A cos u, cos A sin u, |sin A|
    };
    std::vector<PairEntry> pair12(static_cast<std::size_t>(n) * n);
    std::vector<PairEntry> pair34(static_cast<std::size_t>(n) * n);
    const auto fill = [n](std::vector<PairEntry>& out, std::pair<double, double> ra,
                          std::pair<double, double> rb) {
        const double da = (ra.second - ra.first) / (n - 1);
        const double db = (rb.second - rb.first) / (n - 1);
        std::size_t idx = 0;
        for (int i = 0; i < n; ++i) {
            const double pa = ra.first + i * da;
            for (int j = 0; j < n; ++j, ++idx) {
                const double pb = rb.first + j * db;
                const double cosd = std::cos(0.5 * (pa - pb));
                const double absd = std::abs(std::sin(0.5 * (pa - pb)));
                const double u = 0.5 * (pa + pb);
                out[idx] = {cosd * std::cos(u), cosd * std::sin(u), absd};
            }
        }
    };
    fill(pair12, ranges.phi[0], ranges.phi[1]);
    fill(pair34, ranges.phi[2], ranges.phi[3]);

    // g = cos(u - v) cos A cos B + |sin A sin B| expands to a dot product of
    // the precomputed triples.
    for (const auto& p : pair12) {
        for (const auto& q : pair34) {
            const double g = p.ccu * q.ccu + p.csu * q.csu + p.absd * q.absd;
            if (g < g_min) g_min = g;
        }
    }

    // Theta grid cannot beat theta_star (F is monotone in sin^2 theta for
    // g <= 1), so the minimum over the full grid is attained there.
    return std::clamp(fidelity_from_g(g_min, theta_star), 0.0, 1.0);
}

bool is_valid_density(const DensityMatrix2& rho, double tol) {
    if (std::abs(rho(0, 0).imag()) > tol || std::abs(rho(1, 1).imag()) > tol) return false;
    if (std::abs(rho(0, 1) - std::conj(rho(1, 0))) > tol) return false;
    if (std::abs(rho.trace().real() - 1.0) > tol) return false;
    Eigen::SelfAdjointEigenSolver<DensityMatrix2> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff() >= -tol;
}

} // namespace qkd
