#include "qkd/photon_stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qkd/math.hpp"

namespace qkd {

namespace {

double poisson_prob(int n, double mean) {
    if (mean < 0.0) throw DomainError("poisson: negative mean");
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-mean + n * std::log(mean) - std::lgamma(n + 1.0));
}

// log of the Poisson weight e^{-a} a^n / n!, safe for a = 0.
double log_poisson_weight(int n, double a) {
    if (a <= 0.0) return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    return -a + n * std::log(a) - std::lgamma(n + 1.0);
}

// The 1F1 argument grows as (mean/sigma)^2 / 2; past ~650 the series
// intermediates overflow and the quadrature path takes over.
constexpr double kClosedFormArgLimit = 650.0;

} // namespace

double gaussian_pdf(double x, const GaussianParams& params) {
    if (!(params.sigma > 0.0)) {
        throw DomainError("gaussian_pdf: sigma must be positive");
    }
    const double z = (x - params.mean) / params.sigma;
    return std::exp(-0.5 * z * z) / (std::sqrt(kTwoPi) * params.sigma);
}

double truncated_mass(const GaussianParams& params) {
    if (!(params.sigma > 0.0)) {
        throw DomainError("truncated_mass: sigma must be positive");
    }
    return 0.5 * (1.0 + std::erf(params.mean / (kSqrt2 * params.sigma)));
}

IntensityModel IntensityModel::poissonian(double mean) {
    if (mean < 0.0) throw DomainError("IntensityModel: mean must be >= 0");
    return IntensityModel(Kind::Poissonian, {mean, 0.0});
}

IntensityModel IntensityModel::gaussian_mixed(double mean, double sigma) {
    if (mean < 0.0) throw DomainError("IntensityModel: mean must be >= 0");
    if (!(sigma > 0.0)) {
        throw DomainError("IntensityModel: GaussianMixed requires sigma > 0");
    }
    return IntensityModel(Kind::GaussianMixed, {mean, sigma});
}

IntensityModel IntensityModel::gaussian_mixed(const GaussianParams& p) {
    return gaussian_mixed(p.mean, p.sigma);
}

IntensityModel IntensityModel::vacuum() {
    return IntensityModel(Kind::VacuumOnly, {0.0, 0.0});
}

double photon_number_prob_quadrature(int n, const IntensityModel& model) {
    if (n < 0) throw DomainError("photon_number_prob: n must be >= 0");
    if (model.kind() != IntensityModel::Kind::GaussianMixed) {
        throw DomainError("photon_number_prob_quadrature: GaussianMixed model required");
    }
    const double m = model.mean();
    const double s = model.sigma();
    // Integrate in the standardized variable u = (a - mean) / sigma so the
    // integrand stays O(1) regardless of how narrow the distribution is.
    const double u_lo = std::max(-m / s, -10.0);
    const double u_hi = 10.0;
    const auto integrand = [&](double u) {
        const double a = m + s * u;
        if (a <= 0.0) {
            return n == 0 ? std::exp(-0.5 * u * u) / std::sqrt(kTwoPi) : 0.0;
        }
        return std::exp(log_poisson_weight(n, a) - 0.5 * u * u) / std::sqrt(kTwoPi);
    };
    const double integral = integrate_adaptive_seeded(integrand, u_lo, u_hi, {-1.0, 0.0, 1.0});
    return integral / truncated_mass(model.params());
}

double photon_number_prob_closed_form(int n, const IntensityModel& model) {
    if (n < 0) throw DomainError("photon_number_prob: n must be >= 0");
    if (model.kind() != IntensityModel::Kind::GaussianMixed) {
        throw DomainError("photon_number_prob_closed_form: GaussianMixed model required");
    }
    const double m = model.mean();
    const double s = model.sigma();
    const double d = m - s * s;
    const double x = d * d / (2.0 * s * s);
    if (x > kClosedFormArgLimit) {
        throw NumericalError("photon_number_prob_closed_form: 1F1 argument too large");
    }
    const double f1 = hyp1f1_series(0.5 * (n + 1), 0.5, x);
    const double f2 = hyp1f1_series(0.5 * (n + 2), 1.5, x);
    const double log_pref = 0.5 * (n + 1) * std::log(2.0) - m * m / (2.0 * s * s) +
                            (n - 1) * std::log(s) - 0.5 * std::log(kTwoPi) -
                            std::lgamma(n + 1.0);
    const double denom = 1.0 + std::erf(m / (kSqrt2 * s));

    double p;
    if (d >= 0.0) {
        // Both brace terms are positive; combine in log space since the
        // prefactor underflows long before the product does.
        const double ln_a = std::log(s) + std::lgamma(0.5 * (n + 1)) + std::log(f1);
        const double ln_b = 0.5 * std::log(2.0) + std::log(d > 0.0 ? d : 1e-300) +
                            std::lgamma(0.5 * (n + 2)) + std::log(f2);
        const double hi = std::max(ln_a, ln_b);
        const double ln_braces = hi + std::log(std::exp(ln_a - hi) + std::exp(ln_b - hi));
        p = std::exp(log_pref + ln_braces) / denom;
    } else {
        // d < 0 implies a small 1F1 argument; direct evaluation is safe.
        const double braces = s * std::exp(std::lgamma(0.5 * (n + 1))) * f1 +
                              kSqrt2 * d * std::exp(std::lgamma(0.5 * (n + 2))) * f2;
        p = std::exp(log_pref) * braces / denom;
    }
    if (!std::isfinite(p)) {
        throw NumericalError("photon_number_prob_closed_form: non-finite result");
    }
    return std::clamp(p, 0.0, 1.0);
}

double photon_number_prob(int n, const IntensityModel& model) {
    if (n < 0) throw DomainError("photon_number_prob: n must be >= 0");
    switch (model.kind()) {
        case IntensityModel::Kind::Poissonian:
            return poisson_prob(n, model.mean());
        case IntensityModel::Kind::VacuumOnly:
            return n == 0 ? 1.0 : 0.0;
        case IntensityModel::Kind::GaussianMixed:
            break;
    }
    try {
        return photon_number_prob_closed_form(n, model);
    } catch (const NumericalError&) {
        return photon_number_prob_quadrature(n, model);
    }
}

std::vector<double> photon_pmf(const IntensityModel& model, int n_max) {
    std::vector<double> pmf(n_max + 1);
    for (int n = 0; n <= n_max; ++n) {
        pmf[n] = photon_number_prob(n, model);
    }
    return pmf;
}

bool check_condition_one(int n, const IntensityModel& nu1, const IntensityModel& nu2) {
    if (n < 2) throw DomainError("check_condition_one: n must be >= 2");
    const double p1_nu1 = photon_number_prob(1, nu1);
    const double p1_nu2 = photon_number_prob(1, nu2);
    const double pn_nu1 = photon_number_prob(n, nu1);
    const double pn_nu2 = photon_number_prob(n, nu2);
    return pn_nu2 * p1_nu1 - pn_nu1 * p1_nu2 <= 0.0;
}

bool check_condition_two(int n, const IntensityModel& mu, const IntensityModel& nu1,
                         const IntensityModel& nu2) {
    if (n < 2) throw DomainError("check_condition_two: n must be >= 2");
    const double p0_nu1 = photon_number_prob(0, nu1);
    const double p0_nu2 = photon_number_prob(0, nu2);
    const double p2_nu1 = photon_number_prob(2, nu1);
    const double p2_nu2 = photon_number_prob(2, nu2);
    const double p2_mu = photon_number_prob(2, mu);
    const double pn_mu = photon_number_prob(n, mu);
    const double pn_nu1 = photon_number_prob(n, nu1);
    const double pn_nu2 = photon_number_prob(n, nu2);
    const double c2 = p2_nu1 * p0_nu2 - p2_nu2 * p0_nu1;
    const double cn = pn_nu1 * p0_nu2 - pn_nu2 * p0_nu1;
    return pn_mu * c2 - p2_mu * cn >= 0.0;
}

} // namespace qkd
