#ifndef QKD_PHOTON_STATS_HPP
#define QKD_PHOTON_STATS_HPP

#include <vector>

#include "qkd/errors.hpp"

namespace qkd {

// Photon-number sums are truncated here; P(60 | alpha) < 1e-80 for alpha <= 1.
inline constexpr int kPhotonCutoff = 60;

struct GaussianParams {
    double mean = 0.0;
    double sigma = 0.0;
};

// Normal density in the intensity variable.
double gaussian_pdf(double x, const GaussianParams& params);

// Mass of the normal distribution on [0, inf): (1/2)[1 + erf(mean / (sqrt(2) sigma))].
double truncated_mass(const GaussianParams& params);

// Photon-number law of the source. Poissonian carries a constant mean;
// GaussianMixed is the positivity-truncated Gaussian mixture of Poissonians;
// VacuumOnly is the deliberately pessimistic delta_{n0} replacement for the
// weakest decoy.
class IntensityModel {
public:
    enum class Kind { Poissonian, GaussianMixed, VacuumOnly };

    static IntensityModel poissonian(double mean);
    static IntensityModel gaussian_mixed(double mean, double sigma);
    static IntensityModel gaussian_mixed(const GaussianParams& p);
    static IntensityModel vacuum();

    Kind kind() const { return kind_; }
    double mean() const { return params_.mean; }
    double sigma() const { return params_.sigma; }
    const GaussianParams& params() const { return params_; }

    bool operator==(const IntensityModel&) const = default;

private:
    IntensityModel(Kind k, GaussianParams p) : kind_(k), params_(p) {}
    Kind kind_;
    GaussianParams params_;
};

// P(n | model). For GaussianMixed the closed form (gamma / 1F1) is used where
// it is numerically safe and the adaptive quadrature of the defining integral
// otherwise; both paths agree to relative 1e-8 for n <= 10.
double photon_number_prob(int n, const IntensityModel& model);

// The two evaluation paths, exposed for cross-checking. Both require a
// GaussianMixed model with sigma > 0.
double photon_number_prob_quadrature(int n, const IntensityModel& model);
double photon_number_prob_closed_form(int n, const IntensityModel& model);

// P(0..n_max | model) in one call.
std::vector<double> photon_pmf(const IntensityModel& model, int n_max = kPhotonCutoff);

// Sign conditions licensing the generalized decoy bounds. Non-strict: an
// exactly-zero combination (the VacuumOnly degenerate case) keeps the bound
// valid.
bool check_condition_one(int n, const IntensityModel& nu1, const IntensityModel& nu2);
bool check_condition_two(int n, const IntensityModel& mu, const IntensityModel& nu1,
                         const IntensityModel& nu2);

} // namespace qkd

#endif // QKD_PHOTON_STATS_HPP
