#include "qkd/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qkd/math.hpp"

namespace qkd {

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim spaces
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
    }
    return out;
}

double parse_double(const std::string& s, long line) {
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + s + "'", line);
    }
    if (pos != s.size()) throw ParseError("trailing garbage in number: '" + s + "'", line);
    if (!std::isfinite(v)) throw ParseError("non-finite value: '" + s + "'", line);
    return v;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * (sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double frac = pos - i;
    return sorted[i] * (1.0 - frac) + sorted[i + 1] * frac;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

} // namespace

std::vector<SampleSet> load_samples(const std::string& path, SampleKind schema) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);

    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty file: " + path);
    ++line_no;
    const auto header = split_csv_row(line);

    std::map<std::string, std::size_t> index;
    std::vector<SampleSet> sets;

    if (schema == SampleKind::Intensity) {
        if (header.size() != 2 || header[0] != "label" || header[1] != "intensity") {
            throw ParseError("expected header 'label,intensity'", line_no);
        }
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto row = split_csv_row(line);
            if (row.size() != 2) throw ParseError("expected 2 fields", line_no);
            if (row[0] != "mu" && row[0] != "nu1" && row[0] != "nu2") {
                throw ParseError("unknown label '" + row[0] + "'", line_no);
            }
            const double v = parse_double(row[1], line_no);
            auto [it, fresh] = index.try_emplace(row[0], sets.size());
            if (fresh) {
                sets.push_back({SampleKind::Intensity, row[0], {}, {}});
            }
            sets[it->second].values.push_back(v);
        }
    } else {
        if (header.size() != 4 || header[0] != "state" || header[1] != "s1" ||
            header[2] != "s2" || header[3] != "s3") {
            throw ParseError("expected header 'state,s1,s2,s3'", line_no);
        }
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            const auto row = split_csv_row(line);
            if (row.size() != 4) throw ParseError("expected 4 fields", line_no);
            if (row[0] != "1" && row[0] != "2" && row[0] != "3" && row[0] != "4") {
                throw ParseError("unknown state '" + row[0] + "'", line_no);
            }
            std::array<double, 3> s{parse_double(row[1], line_no),
                                    parse_double(row[2], line_no),
                                    parse_double(row[3], line_no)};
            auto [it, fresh] = index.try_emplace(row[0], sets.size());
            if (fresh) {
                sets.push_back({SampleKind::Stokes, row[0], {}, {}});
            }
            sets[it->second].triples.push_back(s);
        }
    }
    if (sets.empty()) throw ParseError("no data rows in " + path);
    return sets;
}

BinnedPdf build_binned_pdf(const std::vector<double>& samples, int bin_count) {
    if (bin_count < 4) throw DomainError("build_binned_pdf: need at least 4 bins");
    if (samples.empty()) throw DomainError("build_binned_pdf: no samples");
    const auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
    double lo = *mn_it, hi = *mx_it;
    if (lo == hi) {
        // All samples identical: a single unit-mass bin padded with empties.
        lo -= 0.5;
        hi += 0.5;
    }
    BinnedPdf pdf;
    pdf.edges.resize(bin_count + 1);
    pdf.weights.assign(bin_count, 0.0);
    const double width = (hi - lo) / bin_count;
    for (int k = 0; k <= bin_count; ++k) pdf.edges[k] = lo + k * width;
    pdf.edges.back() = hi;
    for (double v : samples) {
        int k = static_cast<int>((v - lo) / width);
        k = std::clamp(k, 0, bin_count - 1);
        pdf.weights[k] += 1.0;
    }
    const double norm = 1.0 / (samples.size() * width);
    for (double& w : pdf.weights) w *= norm;
    return pdf;
}

FitResult fit_gaussian(const std::vector<double>& samples, int bin_count) {
    if (samples.size() < 30) {
        throw InsufficientDataError("fit_gaussian: need at least 30 samples");
    }
    const double n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    const double sigma = std::sqrt(ss / n);
    if (!(sigma > 0.0)) {
        throw DegenerateFitError("fit_gaussian: zero sample variance");
    }

    FitResult fit;
    fit.params = {mean, sigma};
    fit.bins = bin_count;
    const BinnedPdf pdf = build_binned_pdf(samples, bin_count);
    double ssr = 0.0;
    double ssd = 0.0;
    for (std::size_t k = 0; k + 1 < pdf.edges.size(); ++k) {
        const double c = 0.5 * (pdf.edges[k] + pdf.edges[k + 1]);
        const double model = gaussian_pdf(c, fit.params);
        const double r = pdf.weights[k] - model;
        ssr += r * r * (pdf.edges[k + 1] - pdf.edges[k]);
        ssd += pdf.weights[k] * pdf.weights[k] * (pdf.edges[k + 1] - pdf.edges[k]);
    }
    fit.goodness = ssr;
    // Relative residual mass; a unimodal Gaussian sample lands well below this.
    fit.poor_fit = ssd > 0.0 && ssr / ssd > 0.05;
    return fit;
}

FitResult fit_gaussian(const SampleSet& samples, int bin_count) {
    if (samples.kind != SampleKind::Intensity) {
        throw DomainError("fit_gaussian: intensity sample set required");
    }
    return fit_gaussian(samples.values, bin_count);
}

Interval confidence_interval(const std::vector<double>& samples, double level,
                             IntervalMode mode) {
    if (!(level > 0.5 && level < 1.0)) {
        throw DomainError("confidence_interval: level must be in (0.5, 1)");
    }
    if (mode == IntervalMode::Quantile) {
        if (samples.size() < 100) {
            throw InsufficientDataError(
                "confidence_interval: quantile mode needs >= 100 samples");
        }
        std::vector<double> sorted = samples;
        std::sort(sorted.begin(), sorted.end());
        return {quantile_sorted(sorted, 0.5 * (1.0 - level)),
                quantile_sorted(sorted, 0.5 * (1.0 + level))};
    }
    const FitResult fit = fit_gaussian(samples);
    const double z = normal_quantile(0.5 * (1.0 - level));
    return {fit.params.mean - z * fit.params.sigma, fit.params.mean + z * fit.params.sigma};
}

void unwrap_phases(std::vector<double>& phases) {
    if (phases.empty()) return;
    double s = 0.0, c = 0.0;
    for (double p : phases) {
        s += std::sin(p);
        c += std::cos(p);
    }
    const double center = std::atan2(s, c);
    for (double& p : phases) {
        double d = std::fmod(p - center, kTwoPi);
        if (d > kPi) d -= kTwoPi;
        if (d < -kPi) d += kTwoPi;
        p = center + d;
    }
}

AngularSamples angles_from_stokes(const std::vector<SampleSet>& stokes_sets) {
    AngularSamples out;
    bool any = false;
    for (const auto& set : stokes_sets) {
        if (set.kind != SampleKind::Stokes) {
            throw DomainError("angles_from_stokes: stokes sample sets required");
        }
        const int idx = std::stoi(set.label) - 1;
        if (idx < 0 || idx > 3) throw DomainError("angles_from_stokes: state outside 1..4");
        for (const auto& s : set.triples) {
            const StokesAngles a = stokes_to_angles(s[0], s[1], s[2]);
            out.phi[idx].push_back(a.angles.phi);
            out.theta.push_back(a.angles.theta);
            out.theta_by_state[idx].push_back(a.angles.theta);
            any = true;
        }
    }
    if (!any) throw DomainError("angles_from_stokes: empty input");
    for (auto& phis : out.phi) unwrap_phases(phis);
    return out;
}

AngularGaussian AngularFit::to_gaussian() const {
    AngularGaussian g;
    for (int i = 0; i < 4; ++i) {
        g.phi_mean[i] = phi[i].params.mean;
        g.phi_sigma[i] = phi[i].params.sigma;
    }
    g.theta_mean = theta.params.mean;
    g.theta_sigma = theta.params.sigma;
    return g;
}

AngularFit fit_angular(const AngularSamples& samples, int bin_count) {
    AngularFit fit;
    for (int i = 0; i < 4; ++i) {
        fit.phi[i] = fit_gaussian(samples.phi[i], bin_count);
    }
    fit.theta = fit_gaussian(samples.theta, bin_count);
    return fit;
}

AngularDistribution binned_distribution(const AngularSamples& samples, int bin_count) {
    AngularBinned binned;
    for (int i = 0; i < 4; ++i) {
        binned.phi[i] = build_binned_pdf(samples.phi[i], bin_count);
    }
    binned.theta = build_binned_pdf(samples.theta, bin_count);
    return AngularDistribution{binned};
}

std::vector<char> flag_outliers(const std::vector<std::array<double, 3>>& rows,
                                double n_mads) {
    std::vector<char> flags(rows.size(), 0);
    if (rows.size() < 3) return flags;
    std::array<double, 3> center{};
    for (int c = 0; c < 3; ++c) {
        std::vector<double> col(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) col[i] = rows[i][c];
        center[c] = median_of(std::move(col));
    }
    std::vector<double> dist(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double dx = rows[i][0] - center[0];
        const double dy = rows[i][1] - center[1];
        const double dz = rows[i][2] - center[2];
        dist[i] = std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    const double med = median_of(dist);
    std::vector<double> dev(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) dev[i] = std::abs(dist[i] - med);
    const double mad = median_of(dev);
    if (mad == 0.0) return flags;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (std::abs(dist[i] - med) > n_mads * mad) flags[i] = 1;
    }
    return flags;
}

} // namespace qkd
