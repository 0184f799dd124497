#include <doctest.h>

#include <cmath>

#include "qkd/math.hpp"
#include "qkd/photon_stats.hpp"

using namespace qkd;

TEST_CASE("gaussian pdf peak and one-sigma points") {
    const GaussianParams p{0.3, 0.1};
    const double peak = 1.0 / (std::sqrt(kTwoPi) * p.sigma);
    CHECK(gaussian_pdf(0.3, p) == doctest::Approx(peak).epsilon(1e-12));
    CHECK(gaussian_pdf(0.4, p) == doctest::Approx(peak * std::exp(-0.5)).epsilon(1e-12));
    CHECK(gaussian_pdf(0.2, p) == doctest::Approx(peak * std::exp(-0.5)).epsilon(1e-12));
    // direct evaluation at an off-center point
    const GaussianParams q{0.3, 0.05};
    const double expected =
        std::exp(-0.5 * (0.25 - 0.3) * (0.25 - 0.3) / (0.05 * 0.05)) /
        (std::sqrt(kTwoPi) * 0.05);
    CHECK(gaussian_pdf(0.25, q) == doctest::Approx(expected).epsilon(1e-14));
    CHECK_THROWS_AS(gaussian_pdf(0.1, GaussianParams{0.1, 0.0}), DomainError);
}

TEST_CASE("truncated mass stays in (1/2, 1] and hits known values") {
    CHECK(truncated_mass({0.0, 1.0}) == doctest::Approx(0.5));
    CHECK(truncated_mass({0.3, 1e-3}) == doctest::Approx(1.0));
    const double m = truncated_mass({0.001, 0.0006});
    CHECK(m > 0.5);
    CHECK(m <= 1.0);
    CHECK(m == doctest::Approx(0.5 * (1.0 + std::erf(0.001 / (kSqrt2 * 0.0006)))));
}

TEST_CASE("poissonian photon numbers") {
    const auto p = IntensityModel::poissonian(0.3);
    CHECK(photon_number_prob(0, p) == doctest::Approx(std::exp(-0.3)).epsilon(1e-14));
    CHECK(photon_number_prob(1, p) == doctest::Approx(0.3 * std::exp(-0.3)).epsilon(1e-14));
    CHECK_THROWS_AS(photon_number_prob(-1, p), DomainError);
}

TEST_CASE("vacuum-only model is a delta at n = 0") {
    const auto v = IntensityModel::vacuum();
    CHECK(photon_number_prob(0, v) == 1.0);
    for (int n = 1; n <= 10; ++n) CHECK(photon_number_prob(n, v) == 0.0);
}

TEST_CASE("narrow gaussian mixture recovers the poisson value") {
    const auto gm = IntensityModel::gaussian_mixed(0.3, 1e-6);
    CHECK(photon_number_prob(1, gm) == doctest::Approx(0.3 * std::exp(-0.3)).epsilon(1e-6));
    CHECK(std::abs(photon_number_prob(1, gm) - 0.222245) < 1e-6);
}

TEST_CASE("poisson limit holds for all n up to 20") {
    const double mean = 0.3;
    const auto gm = IntensityModel::gaussian_mixed(mean, mean * 1e-5);
    const auto po = IntensityModel::poissonian(mean);
    for (int n = 0; n <= 20; ++n) {
        CHECK(std::abs(photon_number_prob(n, gm) - photon_number_prob(n, po)) < 1e-6);
    }
}

TEST_CASE("closed form and quadrature agree to 1e-8 relative") {
    for (double mean : {0.001, 0.1, 0.3}) {
        for (double rel : {0.05, 0.2, 1.0}) {
            const auto gm = IntensityModel::gaussian_mixed(mean, mean * rel);
            for (int n = 0; n <= 10; ++n) {
                const double q = photon_number_prob_quadrature(n, gm);
                const double c = photon_number_prob_closed_form(n, gm);
                const double scale = std::max(q, 1e-300);
                CHECK(std::abs(q - c) / scale < 1e-8);
            }
        }
    }
}

TEST_CASE("quadrature example value for n = 2") {
    // the quadrature path is the independent oracle for the closed form used
    // by photon_number_prob
    const auto gm = IntensityModel::gaussian_mixed(0.1, 0.02);
    const double q = photon_number_prob_quadrature(2, gm);
    const double c = photon_number_prob(2, gm);
    CHECK(c == doctest::Approx(q).epsilon(1e-8));
    CHECK(q > 0.0);
    CHECK(q < 1.0);
}

TEST_CASE("normalization to the cutoff") {
    const IntensityModel models[] = {
        IntensityModel::poissonian(0.3),
        IntensityModel::vacuum(),
        IntensityModel::gaussian_mixed(0.3, 0.009),
        IntensityModel::gaussian_mixed(0.1, 0.02),
        IntensityModel::gaussian_mixed(0.001, 0.0006),
        IntensityModel::gaussian_mixed(0.001, 0.001),
    };
    for (const auto& m : models) {
        const auto pmf = photon_pmf(m);
        double sum = 0.0;
        for (double p : pmf) sum += p;
        CHECK(sum > 1.0 - 1e-9);
        CHECK(sum <= 1.0 + 1e-9);
    }
}

TEST_CASE("pmf tail is strictly decreasing past mean + 5 sigma") {
    const auto gm = IntensityModel::gaussian_mixed(0.3, 0.06);
    const auto pmf = photon_pmf(gm, 40);
    const int start = static_cast<int>(std::ceil(0.3 + 5 * 0.06)) + 1;
    for (int n = start; n + 1 <= 40; ++n) {
        if (pmf[n] == 0.0) break; // underflow floor
        CHECK(pmf[n + 1] < pmf[n]);
    }
}

TEST_CASE("condition one for poissonian and vacuum decoys") {
    const auto nu1 = IntensityModel::poissonian(0.1);
    const auto nu2 = IntensityModel::poissonian(0.001);
    CHECK(check_condition_one(2, nu1, nu2));
    CHECK(check_condition_one(2, nu1, IntensityModel::vacuum()));
    for (int n = 2; n <= 60; ++n) {
        CHECK(check_condition_one(n, nu1, nu2));
    }
    CHECK_THROWS_AS(check_condition_one(1, nu1, nu2), DomainError);
}

TEST_CASE("condition one breaks for n >= 12 when the weak-decoy width is inflated 5x") {
    const auto nu1 = IntensityModel::gaussian_mixed(0.1, 0.004);
    // the width the synthetic characterization aims at, and five times it
    const auto fitted = IntensityModel::gaussian_mixed(0.01, 0.0084);
    const auto inflated = IntensityModel::gaussian_mixed(0.01, 5.0 * 0.0084);
    for (int n = 2; n <= 11; ++n) {
        CHECK(check_condition_one(n, nu1, inflated));
    }
    for (int n = 12; n <= 30; ++n) {
        CHECK_FALSE(check_condition_one(n, nu1, inflated));
    }
    for (int n = 2; n <= 60; ++n) {
        CHECK(check_condition_one(n, nu1, fitted));
    }
}

TEST_CASE("condition two trivial and derived cases") {
    const auto mu = IntensityModel::poissonian(0.3);
    const auto nu1 = IntensityModel::poissonian(0.1);
    const auto nu2 = IntensityModel::poissonian(0.001);
    CHECK(check_condition_two(2, mu, nu1, nu2)); // identically zero
    CHECK(check_condition_two(3, mu, nu1, nu2));
    CHECK(check_condition_two(5, mu, nu1, IntensityModel::vacuum()));
    for (int n = 2; n <= 60; ++n) {
        CHECK(check_condition_two(n, mu, nu1, nu2));
    }
}
