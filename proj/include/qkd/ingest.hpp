#ifndef QKD_INGEST_HPP
#define QKD_INGEST_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qkd/photon_stats.hpp"
#include "qkd/polarization.hpp"

namespace qkd {

enum class SampleKind { Intensity, Stokes };

// One labeled block of measurements: scalar intensities for the intensity
// schema, Stokes triples for the polarimetry schema.
struct SampleSet {
    SampleKind kind = SampleKind::Intensity;
    std::string label;
    std::vector<double> values;                 // intensity samples
    std::vector<std::array<double, 3>> triples; // stokes samples

    std::size_t size() const {
        return kind == SampleKind::Intensity ? values.size() : triples.size();
    }
};

// CSV loaders. Intensity schema: header "label,intensity", labels mu|nu1|nu2.
// Stokes schema: header "state,s1,s2,s3", states 1..4. Non-finite fields and
// unknown labels are rejected with their line number.
std::vector<SampleSet> load_samples(const std::string& path, SampleKind schema);

struct FitResult {
    GaussianParams params;
    double goodness = 0.0; // sum of squared residuals of the binned density
    int bins = 0;
    bool poor_fit = false;
};

// Maximum-likelihood Gaussian fit (sample mean, sample standard deviation)
// plus a binned-residual goodness figure. Requires >= 30 samples.
FitResult fit_gaussian(const std::vector<double>& samples, int bin_count = 50);
FitResult fit_gaussian(const SampleSet& samples, int bin_count = 50);

// Normalized histogram over [min, max] of the samples.
BinnedPdf build_binned_pdf(const std::vector<double>& samples, int bin_count);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

enum class IntervalMode { Quantile, GaussianFit };

// Two-sided confidence interval at the given level, either from empirical
// quantiles (needs >= 100 samples) or from the Gaussian fit.
Interval confidence_interval(const std::vector<double>& samples, double level,
                             IntervalMode mode);

// Map phases onto a continuous branch centered on the circular mean, in place.
void unwrap_phases(std::vector<double>& phases);

// Angular data derived from a full Stokes sample file: per-state unwrapped
// azimuth samples plus the polar samples, pooled across states (the default
// fit uses one polar law) and also kept per state.
struct AngularSamples {
    std::array<std::vector<double>, 4> phi;
    std::vector<double> theta;
    std::array<std::vector<double>, 4> theta_by_state;
};

AngularSamples angles_from_stokes(const std::vector<SampleSet>& stokes_sets);

// Full per-state Gaussian angular fit.
struct AngularFit {
    std::array<FitResult, 4> phi;
    FitResult theta;

    AngularGaussian to_gaussian() const;
};

AngularFit fit_angular(const AngularSamples& samples, int bin_count = 36);

// Binned angular distribution with the default 36 bins per axis.
AngularDistribution binned_distribution(const AngularSamples& samples, int bin_count = 36);

// Density-based outlier flag: points whose distance from their cluster's
// componentwise median deviates by more than n_mads median absolute
// deviations. Returns one flag per row, true = outlier.
std::vector<char> flag_outliers(const std::vector<std::array<double, 3>>& rows,
                                double n_mads = 4.0);

} // namespace qkd

#endif // QKD_INGEST_HPP
