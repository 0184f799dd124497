#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "qkd/math.hpp"
#include "qkd/photon_stats.hpp"
#include "qkd/polarization.hpp"

using namespace qkd;
using std::complex;

namespace {

double uniform(std::mt19937_64& g, double lo, double hi) {
    return lo + (hi - lo) * ((g() >> 11) * 0x1.0p-53);
}

// Fidelity through the general eigendecomposition form
// [Tr sqrt(sqrt(a) b sqrt(a))]^2; the independent referee for the 2x2
// determinant shortcut.
double fidelity_eigen(const DensityMatrix2& a, const DensityMatrix2& b) {
    Eigen::SelfAdjointEigenSolver<DensityMatrix2> ea(a);
    const auto va = ea.eigenvalues();
    DensityMatrix2 sqrt_a = DensityMatrix2::Zero();
    for (int i = 0; i < 2; ++i) {
        const double lam = std::max(va(i), 0.0);
        sqrt_a += std::sqrt(lam) * ea.eigenvectors().col(i) *
                  ea.eigenvectors().col(i).adjoint();
    }
    const DensityMatrix2 inner = sqrt_a * b * sqrt_a;
    Eigen::SelfAdjointEigenSolver<DensityMatrix2> ei(inner);
    double tr = 0.0;
    for (int i = 0; i < 2; ++i) tr += std::sqrt(std::max(ei.eigenvalues()(i), 0.0));
    return tr * tr;
}

// Two-dimensional quadrature of the angle-averaged projector with truncated
// Gaussian weights; the accuracy referee for the analytic damped matrix.
// Tensor Gauss-Legendre on the +-8 sigma window (clipped to the angle
// domains), which is plenty for these smooth integrands.
std::vector<std::pair<double, double>> gauss_legendre(int n, double lo, double hi) {
    std::vector<std::pair<double, double>> nodes(n);
    for (int i = 0; i < n; ++i) {
        // Newton iteration from the Chebyshev-like initial guess
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            const double dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        const double dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = {0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w};
    }
    return nodes;
}

DensityMatrix2 averaged_state_quadrature(double phi_mean, double phi_sigma, double theta_mean,
                                         double theta_sigma) {
    const GaussianParams pp{phi_mean, phi_sigma};
    const GaussianParams pt{theta_mean, theta_sigma};
    const auto mass = [](const GaussianParams& p, double lo, double hi) {
        return 0.5 * (std::erf((hi - p.mean) / (kSqrt2 * p.sigma)) -
                      std::erf((lo - p.mean) / (kSqrt2 * p.sigma)));
    };
    const double norm = mass(pp, 0.0, kTwoPi) * mass(pt, 0.0, kPi);

    const auto phi_nodes = gauss_legendre(96, std::max(0.0, pp.mean - 8.0 * pp.sigma),
                                          std::min(kTwoPi, pp.mean + 8.0 * pp.sigma));
    const auto th_nodes = gauss_legendre(96, std::max(0.0, pt.mean - 8.0 * pt.sigma),
                                         std::min(kPi, pt.mean + 8.0 * pt.sigma));
    DensityMatrix2 rho = DensityMatrix2::Zero();
    for (const auto& [th, wt] : th_nodes) {
        const double gt = gaussian_pdf(th, pt) * wt;
        for (const auto& [ph, wp] : phi_nodes) {
            const double w = gt * gaussian_pdf(ph, pp) * wp;
            rho += w * bloch_projector({ph, th});
        }
    }
    return rho / norm;
}

AngularGaussian single_state_gaussian(double phi_mean, double phi_sigma, double theta_mean,
                                      double theta_sigma) {
    AngularGaussian g;
    g.phi_mean = {phi_mean, phi_mean, phi_mean, phi_mean};
    g.phi_sigma = {phi_sigma, phi_sigma, phi_sigma, phi_sigma};
    g.theta_mean = theta_mean;
    g.theta_sigma = theta_sigma;
    return g;
}

// Grid oracle for the pure-state fidelity minimum over the exact reduced
// parametrization: the pair (phi_i, phi_j) enters only through the
// half-difference a and half-sum u, with u constrained to an interval that
// depends on a. a is gridded densely; the coupling cos(u12 - u34) is bounded
// by the exact extrema of cos over the attainable interval, so the oracle
// lower-bounds the continuous minimum and upper-bounds it up to the a-grid
// resolution.
struct HalfDiffGrid {
    std::vector<double> a, u_lo, u_hi;
};

HalfDiffGrid build_half_diff_grid(std::pair<double, double> r1, std::pair<double, double> r2,
                                  int pts) {
    HalfDiffGrid g;
    const double a_lo = 0.5 * (r1.first - r2.second);
    const double a_hi = 0.5 * (r1.second - r2.first);
    for (int i = 0; i < pts; ++i) {
        const double a = pts == 1 ? a_lo : a_lo + (a_hi - a_lo) * i / (pts - 1);
        const double u_lo = std::max(r1.first - a, r2.first + a);
        const double u_hi = std::min(r1.second - a, r2.second + a);
        if (u_lo > u_hi + 1e-15) continue;
        g.a.push_back(a);
        g.u_lo.push_back(u_lo);
        g.u_hi.push_back(std::max(u_lo, u_hi));
    }
    return g;
}

double min_fidelity_oracle(const AngleRanges& r, int pts) {
    const double theta_star = std::clamp(kPi / 2.0, r.theta.first, r.theta.second);
    const HalfDiffGrid g12 = build_half_diff_grid(r.phi[0], r.phi[1], pts);
    const HalfDiffGrid g34 = build_half_diff_grid(r.phi[2], r.phi[3], pts);

    const auto cos_range = [](double lo, double hi, double& cmin, double& cmax) {
        cmin = std::min(std::cos(lo), std::cos(hi));
        cmax = std::max(std::cos(lo), std::cos(hi));
        for (double k = std::ceil(lo / kPi); k * kPi <= hi; k += 1.0) {
            const double c = std::cos(k * kPi);
            cmin = std::min(cmin, c);
            cmax = std::max(cmax, c);
        }
    };

    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g12.a.size(); ++i) {
        const double ca = std::cos(g12.a[i]);
        const double sa = std::abs(std::sin(g12.a[i]));
        for (std::size_t j = 0; j < g34.a.size(); ++j) {
            const double cb = std::cos(g34.a[j]);
            const double sb = std::abs(std::sin(g34.a[j]));
            const double prod = ca * cb;
            double cmin, cmax;
            cos_range(g12.u_lo[i] - g34.u_hi[j], g12.u_hi[i] - g34.u_lo[j], cmin, cmax);
            const double cosc = prod >= 0.0 ? cmin : cmax;
            g_min = std::min(g_min, cosc * prod + sa * sb);
        }
    }
    const double st = std::sin(theta_star);
    const double ct = std::cos(theta_star);
    return 0.5 * (1.0 + ct * ct + g_min * st * st);
}

} // namespace

TEST_CASE("bloch projector at the poles and equator") {
    const DensityMatrix2 h = bloch_projector({0.0, 0.0});
    CHECK(std::abs(h(0, 0) - 1.0) < 1e-15);
    CHECK(std::abs(h(1, 1)) < 1e-15);

    const DensityMatrix2 d = bloch_projector({0.0, kPi / 2});
    CHECK(std::abs(d(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(d(0, 1) - 0.5) < 1e-15);
    CHECK(std::abs(d(1, 0) - 0.5) < 1e-15);

    const DensityMatrix2 r = bloch_projector({kPi / 2, kPi / 2});
    CHECK(std::abs(r(0, 1) - complex<double>(0.0, -0.5)) < 1e-15);
    CHECK(std::abs(r(1, 0) - complex<double>(0.0, 0.5)) < 1e-15);
}

TEST_CASE("bloch projector is a valid rank-one density matrix") {
    std::mt19937_64 gen(11);
    for (int i = 0; i < 50; ++i) {
        const BlochAngles a{uniform(gen, 0.0, kTwoPi), uniform(gen, 0.0, kPi)};
        const DensityMatrix2 rho = bloch_projector(a);
        CHECK(is_valid_density(rho));
        CHECK((rho * rho - rho).norm() < 1e-14); // idempotent
    }
}

TEST_CASE("stokes to angles on the axes") {
    const StokesAngles y = stokes_to_angles(0.0, 1.0, 0.0);
    CHECK(y.angles.phi == doctest::Approx(0.0));
    CHECK(y.angles.theta == doctest::Approx(kPi / 2));
    CHECK_FALSE(y.azimuth_degenerate);

    const StokesAngles z = stokes_to_angles(0.0, 0.0, 1.0);
    CHECK(z.angles.phi == doctest::Approx(kPi / 2));
    CHECK(z.angles.theta == doctest::Approx(kPi / 2));

    const StokesAngles x = stokes_to_angles(1.0, 0.0, 0.0);
    CHECK(x.angles.theta == doctest::Approx(0.0));
    CHECK(x.azimuth_degenerate);
    CHECK(x.angles.phi == 0.0);

    CHECK_THROWS_AS(stokes_to_angles(0.0, 0.0, 0.0), DomainError);
}

TEST_CASE("stokes round trip through the angles") {
    std::mt19937_64 gen(12);
    for (int i = 0; i < 50; ++i) {
        const double phi = uniform(gen, 0.0, kTwoPi);
        const double theta = uniform(gen, 0.05, kPi - 0.05);
        const double s1 = std::cos(theta);
        const double s2 = std::sin(theta) * std::cos(phi);
        const double s3 = std::sin(theta) * std::sin(phi);
        const StokesAngles a = stokes_to_angles(2.3 * s1, 2.3 * s2, 2.3 * s3); // scale-free
        CHECK(a.angles.theta == doctest::Approx(theta).epsilon(1e-12));
        CHECK(std::abs(std::remainder(a.angles.phi - phi, kTwoPi)) < 1e-10);
    }
}

TEST_CASE("averaged state: pure limit and analytic off-diagonal damping") {
    const AngularDistribution pure{single_state_gaussian(0.0, 0.0, kPi / 2, 0.0)};
    const DensityMatrix2 d = averaged_state(pure, 0);
    CHECK(std::abs(d(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(d(1, 0) - 0.5) < 1e-15);

    const AngularDistribution g{single_state_gaussian(kPi / 3, 0.05, kPi / 2, 0.03)};
    const DensityMatrix2 rho = averaged_state(g, 0);
    CHECK(std::abs(rho(1, 0)) ==
          doctest::Approx(0.5 * std::exp(-0.5 * (0.05 * 0.05 + 0.03 * 0.03))).epsilon(1e-12));
    CHECK(std::abs(rho(1, 0)) == doctest::Approx(0.499151).epsilon(1e-5));
    CHECK(is_valid_density(rho));
}

TEST_CASE("averaged state matches 2d quadrature over the approximation regime") {
    for (double sp : {0.05, 0.3}) {
        for (double st : {0.05, 0.3}) {
            for (double pm : {kPi / 2, 4.0}) {
                const double tm = kPi / 2 + 0.1;
                const AngularDistribution g{single_state_gaussian(pm, sp, tm, st)};
                const DensityMatrix2 a = averaged_state(g, 0);
                const DensityMatrix2 q = averaged_state_quadrature(pm, sp, tm, st);
                for (int r = 0; r < 2; ++r) {
                    for (int c = 0; c < 2; ++c) {
                        CHECK(std::abs(a(r, c) - q(r, c)) < 1e-6);
                    }
                }
            }
        }
    }
}

TEST_CASE("binned single-bin distribution reproduces the projector") {
    AngularBinned b;
    const double phi = 1.1, theta = kPi / 2 - 0.07;
    for (int i = 0; i < 4; ++i) {
        b.phi[i].edges = {phi - 0.005, phi + 0.005};
        b.phi[i].weights = {100.0};
    }
    b.theta.edges = {theta - 0.005, theta + 0.005};
    b.theta.weights = {100.0};
    const AngularDistribution dist{b};
    const DensityMatrix2 rho = averaged_state(dist, 2);
    const DensityMatrix2 expect = bloch_projector({phi, theta});
    CHECK((rho - expect).norm() < 1e-12);
}

TEST_CASE("binned averaging approaches the gaussian closed form for fine bins") {
    const double pm = 2.0, sp = 0.04, tm = kPi / 2 + 0.05, st = 0.02;
    AngularBinned b;
    const int nb = 400;
    const auto fill = [&](BinnedPdf& pdf, double mean, double sigma) {
        pdf.edges.resize(nb + 1);
        pdf.weights.resize(nb);
        const double lo = mean - 6 * sigma, hi = mean + 6 * sigma;
        for (int k = 0; k <= nb; ++k) pdf.edges[k] = lo + (hi - lo) * k / nb;
        double mass = 0.0;
        for (int k = 0; k < nb; ++k) {
            const double c = 0.5 * (pdf.edges[k] + pdf.edges[k + 1]);
            pdf.weights[k] = gaussian_pdf(c, {mean, sigma});
            mass += pdf.weights[k] * (pdf.edges[k + 1] - pdf.edges[k]);
        }
        for (double& w : pdf.weights) w /= mass;
    };
    for (int i = 0; i < 4; ++i) fill(b.phi[i], pm, sp);
    fill(b.theta, tm, st);
    const DensityMatrix2 binned = averaged_state(AngularDistribution{b}, 1);
    const DensityMatrix2 analytic =
        averaged_state(AngularDistribution{single_state_gaussian(pm, sp, tm, st)}, 1);
    CHECK((binned - analytic).norm() < 1e-5);
}

TEST_CASE("basis state mixes with weight one half") {
    const DensityMatrix2 h = bloch_projector({0.0, 0.0});
    const DensityMatrix2 v = bloch_projector({0.0, kPi});
    const DensityMatrix2 mix = basis_state(h, v);
    CHECK((mix - 0.5 * DensityMatrix2::Identity()).norm() < 1e-14);
    const DensityMatrix2 d = bloch_projector({0.3, kPi / 2});
    CHECK((basis_state(d, d) - d).norm() < 1e-15);
    CHECK(is_valid_density(mix));
}

TEST_CASE("fidelity trivia") {
    const DensityMatrix2 h = bloch_projector({0.0, 0.0});
    const DensityMatrix2 v = bloch_projector({0.0, kPi});
    const DensityMatrix2 d = bloch_projector({0.0, kPi / 2});
    CHECK(fidelity(d, d) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(fidelity(h, v) == doctest::Approx(0.0));
    const DensityMatrix2 mixed = 0.5 * DensityMatrix2::Identity();
    CHECK(fidelity(mixed, d) == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("determinant form of fidelity agrees with the eigendecomposition form") {
    std::mt19937_64 gen(13);
    for (int i = 0; i < 100; ++i) {
        AngularGaussian ga = single_state_gaussian(
            uniform(gen, 1.0, 5.0), uniform(gen, 0.0, 0.3),
            uniform(gen, kPi / 2 - 0.3, kPi / 2 + 0.3), uniform(gen, 0.0, 0.3));
        AngularGaussian gb = single_state_gaussian(
            uniform(gen, 1.0, 5.0), uniform(gen, 0.0, 0.3),
            uniform(gen, kPi / 2 - 0.3, kPi / 2 + 0.3), uniform(gen, 0.0, 0.3));
        const DensityMatrix2 a = averaged_state(AngularDistribution{ga}, 0);
        const DensityMatrix2 b = averaged_state(AngularDistribution{gb}, 0);
        CHECK(fidelity(a, b) == doctest::Approx(fidelity_eigen(a, b)).epsilon(1e-10));
        CHECK(fidelity(a, b) == doctest::Approx(fidelity(b, a)).epsilon(1e-13));
    }
}

TEST_CASE("perfect preparation is basis independent for any common rotation") {
    for (double phi0 : {0.0, 0.7, kPi / 3, 2.5}) {
        const DensityMatrix2 rx = basis_state(bloch_projector({phi0, kPi / 2}),
                                              bloch_projector({phi0 + kPi, kPi / 2}));
        const DensityMatrix2 ry = basis_state(bloch_projector({phi0 + kPi / 2, kPi / 2}),
                                              bloch_projector({phi0 + 3 * kPi / 2, kPi / 2}));
        const double f = fidelity(rx, ry);
        CHECK(f == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(coin_imbalance(f, 0.5, 0.5).delta == doctest::Approx(0.0));
    }
}

TEST_CASE("coin imbalance values") {
    const CoinImbalance c1 = coin_imbalance(1.0, 0.4, 0.6);
    CHECK(c1.delta == 0.0);
    CHECK(c1.delta_prime == 0.0);

    const CoinImbalance c2 = coin_imbalance(0.9975, 0.5, 0.5);
    CHECK(c2.delta == doctest::Approx(6.2539111e-4).epsilon(1e-6));
    CHECK(c2.delta_prime == doctest::Approx(2.0 * c2.delta / 1.0).epsilon(1e-12));

    // yield rescaling and the 1/2 clamp
    const CoinImbalance c3 = coin_imbalance(0.9975, 1e-4, 1e-4);
    CHECK(c3.delta_prime == 0.5);
    CHECK(c3.clamped);

    CHECK_THROWS_AS(coin_imbalance(0.5, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(coin_imbalance(1.5, 0.5, 0.5), DomainError);
}

TEST_CASE("delta prime dominates delta whenever yields are proper probabilities") {
    std::mt19937_64 gen(14);
    for (int i = 0; i < 100; ++i) {
        const double f = uniform(gen, 0.9, 1.0);
        const double yx = uniform(gen, 0.01, 1.0);
        const double yy = uniform(gen, 0.01, 1.0);
        const CoinImbalance c = coin_imbalance(f, yx, yy);
        CHECK(c.delta_prime >= c.delta - 1e-15);
    }
}

TEST_CASE("min fidelity of the ideal degenerate configuration is one") {
    AngleRanges r;
    r.phi = {{{0.0, 0.0}, {kPi, kPi}, {kPi / 2, kPi / 2}, {3 * kPi / 2, 3 * kPi / 2}}};
    r.theta = {kPi / 2, kPi / 2};
    CHECK(min_fidelity_pure(r) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("min fidelity against the reduced-variable grid oracle") {
    AngleRanges r;
    const double w = 0.05, wt = 0.02;
    r.phi = {{{-w, w},
              {kPi - w, kPi + w},
              {kPi / 2 - w, kPi / 2 + w},
              {3 * kPi / 2 - w, 3 * kPi / 2 + w}}};
    r.theta = {kPi / 2 - wt, kPi / 2 + wt};
    const double f = min_fidelity_pure(r);
    const double oracle = min_fidelity_oracle(r, 512);
    CHECK(f == doctest::Approx(oracle).epsilon(1e-4));
    CHECK(oracle <= f + 1e-9);
    CHECK(f < 1.0);
    CHECK(f > 0.9);
}

TEST_CASE("min fidelity against the oracle for asymmetric ranges") {
    AngleRanges r;
    r.phi = {{{1.03, 1.11},
              {1.03 + kPi - 0.02, 1.03 + kPi + 0.05},
              {1.03 + kPi / 2 - 0.06, 1.03 + kPi / 2 + 0.03},
              {1.03 + 3 * kPi / 2 - 0.04, 1.03 + 3 * kPi / 2 + 0.04}}};
    r.theta = {kPi / 2 + 0.01, kPi / 2 + 0.09};
    const double f = min_fidelity_pure(r);
    const double oracle = min_fidelity_oracle(r, 512);
    CHECK(f == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("min fidelity lower-bounds every sampled pure configuration") {
    AngleRanges r;
    r.phi = {{{0.9, 1.2},
              {0.9 + kPi, 1.2 + kPi},
              {0.9 + kPi / 2, 1.2 + kPi / 2},
              {0.9 + 3 * kPi / 2, 1.2 + 3 * kPi / 2}}};
    r.theta = {kPi / 2 - 0.05, kPi / 2 + 0.02};
    const double fmin = min_fidelity_pure(r);
    std::mt19937_64 gen(15);
    for (int i = 0; i < 300; ++i) {
        const double th = uniform(gen, r.theta.first, r.theta.second);
        const double p1 = uniform(gen, r.phi[0].first, r.phi[0].second);
        const double p2 = uniform(gen, r.phi[1].first, r.phi[1].second);
        const double p3 = uniform(gen, r.phi[2].first, r.phi[2].second);
        const double p4 = uniform(gen, r.phi[3].first, r.phi[3].second);
        const DensityMatrix2 rx =
            basis_state(bloch_projector({p1, th}), bloch_projector({p2, th}));
        const DensityMatrix2 ry =
            basis_state(bloch_projector({p3, th}), bloch_projector({p4, th}));
        CHECK(fmin <= fidelity(rx, ry) + 1e-9);
    }
}

TEST_CASE("every construction in this suite passes the density checks") {
    std::mt19937_64 gen(16);
    for (int i = 0; i < 50; ++i) {
        const AngularGaussian g = single_state_gaussian(
            uniform(gen, 0.0, kTwoPi), uniform(gen, 0.0, 0.3),
            uniform(gen, 0.2, kPi - 0.2), uniform(gen, 0.0, 0.3));
        const DensityMatrix2 rho = averaged_state(AngularDistribution{g}, 0);
        CHECK(is_valid_density(rho, 1e-12));
    }
}
