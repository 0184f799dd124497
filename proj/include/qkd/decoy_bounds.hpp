#ifndef QKD_DECOY_BOUNDS_HPP
#define QKD_DECOY_BOUNDS_HPP

#include "qkd/photon_stats.hpp"

namespace qkd {

// Raw per-intensity counting statistics entering a Wald interval.
struct GainRecord {
    double transmitted = 0.0; // N_alpha
    double detected = 0.0;    // M_alpha
    double epsilon = 0.0;     // per-bound failure probability
};

struct GainBounds {
    double lower = 0.0;
    double upper = 0.0;
    bool clamped = false; // set when [lower, upper] hit the [0, 1] walls

    static GainBounds exact(double q) { return {q, q, false}; }
};

struct YieldBounds {
    double y0_lower = 0.0;
    double y1_lower = 0.0;
};

// Wald confidence interval Qhat +- z_{1-eps} sqrt(Qhat (1 - Qhat) / N).
GainBounds gain_bounds(const GainRecord& record);

// Generalized lower bound on the vacuum yield from the two decoy intensities.
// Re-verifies condition one for n in [2, 60] and throws InvalidBoundError on
// violation.
double yield0_lower(const GainBounds& qn1, const GainBounds& qn2, const IntensityModel& nu1,
                    const IntensityModel& nu2);

// Generalized lower bound on the single-photon yield. Re-verifies condition
// two for n in [2, 60]; throws InvalidBoundError on violation or when the
// denominator is not positive.
double yield1_lower(const GainBounds& qmu, const GainBounds& qn1, const GainBounds& qn2,
                    const IntensityModel& mu, const IntensityModel& nu1,
                    const IntensityModel& nu2, double y0_lower);

// Classic constant-intensity yield bounds.
YieldBounds poisson_yield_bounds(const GainBounds& qmu, const GainBounds& qn1,
                                 const GainBounds& qn2, double mu_mean, double nu1_mean,
                                 double nu2_mean);

// Model-independent single-photon gain bound built from +-z_{1-eps} sigma
// intensity intervals. Throws InvalidBoundError when the lower intensity
// interval endpoint is not positive.
double wang_q1_lower(const GainBounds& qmu, const GainBounds& qn1, const GainBounds& qn2,
                     const GaussianParams& mu, const GaussianParams& nu1,
                     const GaussianParams& nu2, double epsilon);

} // namespace qkd

#endif // QKD_DECOY_BOUNDS_HPP
