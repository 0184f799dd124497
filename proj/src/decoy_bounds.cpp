#include "qkd/decoy_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "qkd/math.hpp"

namespace qkd {

namespace {

void verify_condition_one(const IntensityModel& nu1, const IntensityModel& nu2) {
    for (int n = 2; n <= kPhotonCutoff; ++n) {
        if (!check_condition_one(n, nu1, nu2)) {
            throw InvalidBoundError("yield0_lower: condition one violated at n = " +
                                    std::to_string(n));
        }
    }
}

void verify_condition_two(const IntensityModel& mu, const IntensityModel& nu1,
                          const IntensityModel& nu2) {
    for (int n = 2; n <= kPhotonCutoff; ++n) {
        if (!check_condition_two(n, mu, nu1, nu2)) {
            throw InvalidBoundError("yield1_lower: condition two violated at n = " +
                                    std::to_string(n));
        }
    }
}

} // namespace

GainBounds gain_bounds(const GainRecord& record) {
    if (!(record.transmitted > 0.0)) {
        throw DomainError("gain_bounds: transmitted count must be positive");
    }
    if (record.detected < 0.0 || record.detected > record.transmitted) {
        throw DomainError("gain_bounds: detected count outside [0, transmitted]");
    }
    if (!(record.epsilon > 0.0 && record.epsilon < 0.5)) {
        throw DomainError("gain_bounds: epsilon must be in (0, 1/2)");
    }
    const double qhat = record.detected / record.transmitted;
    const double z = normal_quantile(record.epsilon);
    const double half_width = z * std::sqrt(qhat * (1.0 - qhat) / record.transmitted);
    GainBounds b;
    b.lower = qhat - half_width;
    b.upper = qhat + half_width;
    if (b.lower < 0.0 || b.upper > 1.0) {
        b.clamped = true;
        b.lower = std::max(b.lower, 0.0);
        b.upper = std::min(b.upper, 1.0);
    }
    return b;
}

double yield0_lower(const GainBounds& qn1, const GainBounds& qn2, const IntensityModel& nu1,
                    const IntensityModel& nu2) {
    verify_condition_one(nu1, nu2);
    const double p0_nu1 = photon_number_prob(0, nu1);
    const double p0_nu2 = photon_number_prob(0, nu2);
    const double p1_nu1 = photon_number_prob(1, nu1);
    const double p1_nu2 = photon_number_prob(1, nu2);
    const double denom = p0_nu2 * p1_nu1 - p0_nu1 * p1_nu2;
    if (!(denom > 0.0)) {
        throw InvalidBoundError("yield0_lower: non-positive denominator");
    }
    const double num = qn2.lower * p1_nu1 - qn1.upper * p1_nu2;
    return std::clamp(std::max(num / denom, 0.0), 0.0, 1.0);
}

double yield1_lower(const GainBounds& qmu, const GainBounds& qn1, const GainBounds& qn2,
                    const IntensityModel& mu, const IntensityModel& nu1,
                    const IntensityModel& nu2, double y0_lower) {
    verify_condition_two(mu, nu1, nu2);
    const double p0_mu = photon_number_prob(0, mu);
    const double p1_mu = photon_number_prob(1, mu);
    const double p2_mu = photon_number_prob(2, mu);
    const double p0_nu1 = photon_number_prob(0, nu1);
    const double p0_nu2 = photon_number_prob(0, nu2);
    const double p1_nu1 = photon_number_prob(1, nu1);
    const double p1_nu2 = photon_number_prob(1, nu2);
    const double p2_nu1 = photon_number_prob(2, nu1);
    const double p2_nu2 = photon_number_prob(2, nu2);
    if (!(p2_mu > 0.0)) {
        throw InvalidBoundError("yield1_lower: signal two-photon probability is zero");
    }
    const double c2 = (p2_nu1 * p0_nu2 - p2_nu2 * p0_nu1) / p2_mu;
    const double denom = p0_nu2 * p1_nu1 - p0_nu1 * p1_nu2 - c2 * p1_mu;
    if (!(denom > 0.0)) {
        throw InvalidBoundError("yield1_lower: non-positive denominator");
    }
    const double num =
        qn1.lower * p0_nu2 - qn2.upper * p0_nu1 - c2 * (qmu.upper - p0_mu * y0_lower);
    return std::clamp(num / denom, 0.0, 1.0);
}

YieldBounds poisson_yield_bounds(const GainBounds& qmu, const GainBounds& qn1,
                                 const GainBounds& qn2, double mu_mean, double nu1_mean,
                                 double nu2_mean) {
    if (!(nu2_mean < nu1_mean)) {
        throw DomainError("poisson_yield_bounds: requires nu2 < nu1");
    }
    if (!(nu1_mean + nu2_mean < mu_mean)) {
        throw DomainError("poisson_yield_bounds: requires nu1 + nu2 < mu");
    }
    const double e_mu = std::exp(mu_mean);
    const double e_n1 = std::exp(nu1_mean);
    const double e_n2 = std::exp(nu2_mean);

    YieldBounds out;
    const double y0_num = nu1_mean * qn2.lower * e_n2 - nu2_mean * qn1.upper * e_n1;
    out.y0_lower = std::clamp(std::max(y0_num / (nu1_mean - nu2_mean), 0.0), 0.0, 1.0);

    const double pref =
        mu_mean / ((nu1_mean - nu2_mean) * (mu_mean - nu1_mean - nu2_mean));
    const double bracket =
        qn1.lower * e_n1 - qn2.upper * e_n2 -
        (nu1_mean * nu1_mean - nu2_mean * nu2_mean) / (mu_mean * mu_mean) *
            (qmu.upper * e_mu - out.y0_lower);
    out.y1_lower = std::clamp(pref * bracket, 0.0, 1.0);
    return out;
}

double wang_q1_lower(const GainBounds& qmu, const GainBounds& qn1, const GainBounds& qn2,
                     const GaussianParams& mu, const GaussianParams& nu1,
                     const GaussianParams& nu2, double epsilon) {
    if (!(mu.sigma > 0.0 && nu1.sigma > 0.0 && nu2.sigma > 0.0)) {
        throw DomainError("wang_q1_lower: all sigmas must be positive");
    }
    const double z = normal_quantile(epsilon);
    const auto interval = [&](const GaussianParams& p) {
        return std::pair<double, double>{p.mean - z * p.sigma, p.mean + z * p.sigma};
    };
    const auto [mu_l, mu_u] = interval(mu);
    const auto [n1_l, n1_u] = interval(nu1);
    const auto [n2_l, n2_u] = interval(nu2);
    if (!(mu_l > 0.0 && n1_l > 0.0 && n2_l > 0.0)) {
        throw InvalidBoundError("wang_q1_lower: intensity interval reaches zero");
    }

    // Bounded Poissonian probabilities for alpha < 1: P0 decreasing in alpha,
    // P1 and P2 increasing.
    const auto p0u = [](double a_l) { return std::exp(-a_l); };
    const auto p0l = [](double a_u) { return std::exp(-a_u); };
    const auto pnu = [](int n, double a_u) {
        return std::pow(a_u, n) / std::tgamma(n + 1.0) * std::exp(-a_u);
    };
    const auto pnl = [](int n, double a_l) {
        return std::pow(a_l, n) / std::tgamma(n + 1.0) * std::exp(-a_l);
    };

    const double p1mu_l = pnl(1, mu_l);
    const double p2mu_l = pnl(2, mu_l);
    const double p0mu_l = p0l(mu_u);
    const double p0n1_u = p0u(n1_l);
    const double p1n1_u = pnu(1, n1_u);
    const double p2n1_u = pnu(2, n1_u);
    const double p0n2_l = p0l(n2_u);

    const double denom = p2mu_l * p1n1_u - p2n1_u * p1mu_l;
    if (!(denom > 0.0)) {
        throw InvalidBoundError("wang_q1_lower: non-positive denominator");
    }
    const double num = qn1.lower * p2mu_l - qmu.upper * p2n1_u -
                       (p2mu_l * p0n1_u - p2n1_u * p0mu_l) * qn2.upper / p0n2_l;
    return std::max(num / denom * p1mu_l, 0.0);
}

} // namespace qkd
