#include "qkd/finite_key.hpp"

#include <algorithm>
#include <cmath>

#include "qkd/math.hpp"

namespace qkd {

namespace {

// Negligible sigma/mean below which a fitted law is treated as Poissonian in
// the bound computations (avoids quadrature on a delta-like spike).
constexpr double kSigmaNegligible = 1e-9;

IntensityModel model_from_params(const GaussianParams& p) {
    if (p.sigma > kSigmaNegligible * std::max(p.mean, 1e-300)) {
        return IntensityModel::gaussian_mixed(p);
    }
    return IntensityModel::poissonian(p.mean);
}

struct BoundBudget {
    int used = 0;
    void consume(int n) { used += n; }
};

} // namespace

FecTable::FecTable(std::vector<std::pair<double, double>> knots) : knots_(std::move(knots)) {
    if (knots_.empty()) throw DomainError("FecTable: empty table");
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (knots_[i].second < 1.0) throw DomainError("FecTable: f_ec must be >= 1");
        if (i > 0 && knots_[i].first <= knots_[i - 1].first) {
            throw DomainError("FecTable: QBER knots must be increasing");
        }
    }
}

std::vector<std::pair<double, double>> FecTable::default_knots() {
    return {{0.005, 1.60}, {0.01, 1.45}, {0.02, 1.35}, {0.04, 1.25}, {0.08, 1.18}};
}

FecTable::Value FecTable::at(double qber) const {
    Value v;
    v.f = lerp_table(knots_, qber, &v.clamped);
    return v;
}

void ProtocolConfig::validate() const {
    if (std::abs(p_x + p_y - 1.0) > 1e-12) {
        throw ConfigError("protocol: p_x + p_y must equal 1");
    }
    if (std::abs(p_mu + p_nu1 + p_nu2 - 1.0) > 1e-12) {
        throw ConfigError("protocol: p_mu + p_nu1 + p_nu2 must equal 1");
    }
    if (!(p_x > 0.0 && p_y > 0.0 && p_mu > 0.0 && p_nu1 > 0.0 && p_nu2 > 0.0)) {
        throw ConfigError("protocol: probabilities must be positive");
    }
    if (!(sift_len_x > 0.0)) throw ConfigError("protocol: sift_len_x must be positive");
    if (!(eps_decoy > 0.0 && eps_pa > 0.0)) {
        throw ConfigError("protocol: epsilon budget must be positive");
    }
    if (bound_count <= 0) throw ConfigError("protocol: bound_count must be positive");
}

GainQber channel_gain_qber(double alpha_mean, double distance_km, const ChannelModel& ch) {
    if (distance_km < 0.0) throw DomainError("channel_gain_qber: negative distance");
    const double t =
        std::pow(10.0, -(ch.beta_db_per_km * distance_km + ch.bob_loss_db) / 10.0);
    const double signal = -std::expm1(-t * ch.eta * alpha_mean);
    GainQber out;
    out.gain = 2.0 * ch.p_dc + signal;
    out.qber = out.gain > 0.0 ? (ch.p_dc + ch.p_opt * signal) / out.gain : 0.5;
    out.qber = std::min(out.qber, 0.5);
    return out;
}

PulseCounts pulse_counts(const ProtocolConfig& cfg, double q_mu_x) {
    if (!(q_mu_x > 0.0)) throw DomainError("pulse_counts: gain must be positive");
    PulseCounts c;
    c.n_mu_x = cfg.sift_len_x / (cfg.p_x * q_mu_x);
    c.n_nu1_x = c.n_mu_x * cfg.p_nu1 / cfg.p_mu;
    c.n_nu2_x = c.n_mu_x * cfg.p_nu2 / cfg.p_mu;
    const double y_over_x = cfg.p_y / cfg.p_x;
    c.n_mu_y = c.n_mu_x * y_over_x;
    c.n_nu1_y = c.n_nu1_x * y_over_x;
    c.n_nu2_y = c.n_nu2_x * y_over_x;
    c.sift_len_y = cfg.sift_len_x * y_over_x * y_over_x;
    c.ver_len_x = cfg.sift_len_x;
    return c;
}

double single_photon_bits_lower(double l_ver, double q1_lower, double q_mu_upper,
                                double epsilon) {
    if (!(q1_lower > 0.0) || !(q_mu_upper > 0.0)) {
        throw DomainError("single_photon_bits_lower: gains must be positive");
    }
    const double ratio = q1_lower / q_mu_upper;
    if (ratio > 1.0) {
        throw DomainError("single_photon_bits_lower: gain ratio exceeds 1");
    }
    const double z = normal_quantile(epsilon);
    const double mean = l_ver * ratio;
    const double m1 = mean - z * std::sqrt(mean * (1.0 - ratio));
    return std::max(m1, 0.0);
}

double vacuum_error_bits_lower(double n_mu_y, const ProtocolConfig& cfg, double p0_mu,
                               double y0_lower, double epsilon) {
    if (n_mu_y < 0.0 || p0_mu < 0.0 || y0_lower < 0.0) {
        throw DomainError("vacuum_error_bits_lower: negative input");
    }
    const double p = cfg.p_y * p0_mu * y0_lower / 2.0;
    const double mean = n_mu_y * p;
    if (mean == 0.0) return 0.0;
    const double z = normal_quantile(epsilon);
    return std::max(mean - z * std::sqrt(mean * (1.0 - p)), 0.0);
}

double single_photon_bit_error_upper(double sift_len_y, double qber_y, double m0_lower,
                                     double m1_y_lower) {
    if (!(m1_y_lower > 0.0)) {
        throw InvalidBoundError("single_photon_bit_error_upper: m1_y lower bound is zero");
    }
    const double e1 = (sift_len_y * qber_y - m0_lower) / m1_y_lower;
    return std::clamp(e1, 0.0, 0.5);
}

double coin_correction(double e1_y_upper, double delta_prime) {
    if (!(delta_prime >= 0.0 && delta_prime <= 0.5)) {
        throw DomainError("coin_correction: delta_prime outside [0, 1/2]");
    }
    if (!(e1_y_upper >= 0.0 && e1_y_upper <= 0.5)) {
        throw DomainError("coin_correction: error rate outside [0, 1/2]");
    }
    const double d = delta_prime;
    const double e = e1_y_upper;
    return 4.0 * d * (1.0 - d) * (1.0 - 2.0 * e) +
           4.0 * (1.0 - 2.0 * d) * std::sqrt(d * (1.0 - d) * e * (1.0 - e));
}

double leak_estimate(double sift_len, double qber, const ProtocolConfig& cfg,
                     bool* fec_clamped) {
    if (!(qber >= 0.0 && qber <= 0.5)) {
        throw DomainError("leak_estimate: qber outside [0, 1/2]");
    }
    const FecTable::Value fec = cfg.fec.at(qber);
    if (fec_clamped) *fec_clamped = fec.clamped;
    return sift_len * fec.f * binary_entropy(qber) + cfg.hash_len;
}

double statistical_correction(double e1_tilde, double m1_y_lower, double m1_x_lower,
                              double epsilon) {
    if (!(m1_y_lower > 0.0 && m1_x_lower > 0.0)) {
        throw DomainError("statistical_correction: m1 counts must be positive");
    }
    if (!(epsilon > 0.0 && epsilon < 1.0)) {
        throw DomainError("statistical_correction: epsilon outside (0, 1)");
    }
    // Degenerate zero error rate: floor at half an error in the worst position.
    if (e1_tilde <= 0.0) {
        e1_tilde = 0.5 / m1_y_lower;
    }
    if (!(e1_tilde < 0.5)) {
        return 0.5; // phase error already saturated downstream
    }
    const double m_sum = m1_y_lower + m1_x_lower;
    const double lam = m1_x_lower / m_sum;
    const double e = e1_tilde;
    const double pref = std::sqrt(m_sum / (e * (1.0 - e) * m1_y_lower * m1_x_lower));
    // pref * 2^{-m_sum xi(theta)} = eps  <=>  m_sum * xi * ln 2 = ln(pref/eps).
    // xi is evaluated as h(e + lam th) - (1-lam) h(e) - lam h(e + th) recast
    // into log1p differences; the naive entropy differences cancel to nothing
    // once m_sum xi ~ 1e-11 needs full relative accuracy.
    const auto xi_nats = [&](double th) {
        const double oml = 1.0 - lam;
        const double t1 = -lam * th *
                          (std::log1p(-oml * th / (e + th)) -
                           std::log1p(oml * th / (1.0 - e - th)));
        const double t2 = -e * (std::log1p(lam * th / e) - lam * std::log1p(th / e));
        const double t3 = -(1.0 - e) * (std::log1p(-lam * th / (1.0 - e)) -
                                        lam * std::log1p(-th / (1.0 - e)));
        return t1 + t2 + t3;
    };
    const double target = (std::log(pref) - std::log(epsilon)) / m_sum;
    const double lo = 1e-12;
    const double hi = 1.0 - e - 1e-12;
    if (!(hi > lo)) return 0.5;
    if (xi_nats(hi) < target) {
        // No root inside the bracket: the tail bound cannot be met, the phase
        // error saturates.
        return hi;
    }
    const auto f = [&](double th) { return xi_nats(th) - target; };
    // Bisect essentially to the floating-point floor; a looser theta
    // tolerance leaves a visible residual once the m counts reach ~1e10.
    const double root = bisect(f, lo, hi, 1e-15, 200);
    // Residual check of the original equation at the root.
    const double lhs = pref * std::exp(-m_sum * xi_nats(root));
    if (!(std::abs(lhs - epsilon) <= 1e-6 * epsilon)) {
        throw NumericalError("statistical_correction: residual check failed");
    }
    return root;
}

std::string to_string(ScenarioMode mode) {
    switch (mode) {
        case ScenarioMode::Poissonian: return "poissonian";
        case ScenarioMode::GaussianMixed: return "gaussian-mixed";
        case ScenarioMode::VacuumNu2: return "vacuum-nu2";
        case ScenarioMode::Wang: return "wang";
    }
    return "?";
}

IntensityModel Scenario::model_mu() const {
    return mode == ScenarioMode::Poissonian || mode == ScenarioMode::Wang
               ? IntensityModel::poissonian(mu.mean)
               : model_from_params(mu);
}

IntensityModel Scenario::model_nu1() const {
    return mode == ScenarioMode::Poissonian || mode == ScenarioMode::Wang
               ? IntensityModel::poissonian(nu1.mean)
               : model_from_params(nu1);
}

IntensityModel Scenario::model_nu2() const {
    switch (mode) {
        case ScenarioMode::VacuumNu2: return IntensityModel::vacuum();
        case ScenarioMode::Poissonian:
        case ScenarioMode::Wang: return IntensityModel::poissonian(nu2.mean);
        case ScenarioMode::GaussianMixed: return model_from_params(nu2);
    }
    return IntensityModel::poissonian(nu2.mean);
}

namespace {

struct BasisInput {
    double n_mu, n_nu1, n_nu2; // transmitted counts
    double l_key;              // l_ver^X or l_sift^Y
};

// Yield and m1 bounds for one basis. Consumes 6 one-sided bounds: upper and
// lower for both decoys, upper for the signal, and the m1 Wald bound.
BasisIntermediates basis_bounds(const Scenario& sc, const BasisInput& in, double q_mu,
                                double q_nu1, double q_nu2, double eps, BoundBudget& budget) {
    BasisIntermediates out;
    out.q_mu = gain_bounds({in.n_mu, in.n_mu * q_mu, eps});
    out.q_nu1 = gain_bounds({in.n_nu1, in.n_nu1 * q_nu1, eps});
    out.q_nu2 = gain_bounds({in.n_nu2, in.n_nu2 * q_nu2, eps});
    budget.consume(5); // nu1 u+l, nu2 u+l, mu upper

    const IntensityModel mu_m = sc.model_mu();
    const IntensityModel nu1_m = sc.model_nu1();
    const IntensityModel nu2_m = sc.model_nu2();
    const double p1_mu = photon_number_prob(1, mu_m);

    switch (sc.mode) {
        case ScenarioMode::Poissonian: {
            const YieldBounds yb = poisson_yield_bounds(out.q_mu, out.q_nu1, out.q_nu2,
                                                        sc.mu.mean, sc.nu1.mean, sc.nu2.mean);
            out.y0_lower = yb.y0_lower;
            out.y1_lower = yb.y1_lower;
            out.q1_lower = p1_mu * out.y1_lower;
            break;
        }
        case ScenarioMode::GaussianMixed:
        case ScenarioMode::VacuumNu2: {
            out.y0_lower = yield0_lower(out.q_nu1, out.q_nu2, nu1_m, nu2_m);
            out.y1_lower = yield1_lower(out.q_mu, out.q_nu1, out.q_nu2, mu_m, nu1_m, nu2_m,
                                        out.y0_lower);
            out.q1_lower = p1_mu * out.y1_lower;
            break;
        }
        case ScenarioMode::Wang: {
            // Vacuum yield from the classic expressions; the single-photon
            // gain from the model-independent bound.
            const YieldBounds yb = poisson_yield_bounds(out.q_mu, out.q_nu1, out.q_nu2,
                                                        sc.mu.mean, sc.nu1.mean, sc.nu2.mean);
            out.y0_lower = yb.y0_lower;
            const double z_eps =
                0.5 * std::erfc(sc.wang_z / kSqrt2); // epsilon matching the configured z
            out.q1_lower =
                wang_q1_lower(out.q_mu, out.q_nu1, out.q_nu2, sc.mu, sc.nu1, sc.nu2, z_eps);
            const double p1_l = sc.mu.mean > 0.0
                                    ? (sc.mu.mean - sc.wang_z * sc.mu.sigma) *
                                          std::exp(-(sc.mu.mean - sc.wang_z * sc.mu.sigma))
                                    : 0.0;
            out.y1_lower = p1_l > 0.0 ? std::min(out.q1_lower / p1_l, 1.0) : 0.0;
            break;
        }
    }

    out.m1_lower = single_photon_bits_lower(in.l_key, out.q1_lower, out.q_mu.upper, eps);
    budget.consume(1);
    return out;
}

} // namespace

KeyLengthReport secret_key_length(const Scenario& scenario, double distance_km) {
    scenario.protocol.validate();
    KeyLengthReport rep;
    rep.distance_km = distance_km;
    rep.delta = scenario.delta;
    rep.l_ver = scenario.protocol.sift_len_x;

    const GainQber mu_ch = channel_gain_qber(scenario.mu.mean, distance_km, scenario.channel);
    const GainQber nu1_ch =
        channel_gain_qber(scenario.nu1.mean, distance_km, scenario.channel);
    const GainQber nu2_ch =
        channel_gain_qber(scenario.nu2.mean, distance_km, scenario.channel);
    rep.q_mu = mu_ch.gain;
    rep.q_nu1 = nu1_ch.gain;
    rep.q_nu2 = nu2_ch.gain;
    rep.e_mu = mu_ch.qber;

    try {
        const ProtocolConfig& cfg = scenario.protocol;
        const double eps = cfg.eps_per_bound();
        const PulseCounts counts = pulse_counts(cfg, mu_ch.gain);
        BoundBudget budget;

        const BasisInput x_in{counts.n_mu_x, counts.n_nu1_x, counts.n_nu2_x,
                              counts.ver_len_x};
        const BasisInput y_in{counts.n_mu_y, counts.n_nu1_y, counts.n_nu2_y,
                              counts.sift_len_y};
        rep.x = basis_bounds(scenario, x_in, mu_ch.gain, nu1_ch.gain, nu2_ch.gain, eps,
                             budget);
        rep.y = basis_bounds(scenario, y_in, mu_ch.gain, nu1_ch.gain, nu2_ch.gain, eps,
                             budget);

        const double p0_mu = photon_number_prob(0, scenario.model_mu());
        rep.m0_bar_lower =
            vacuum_error_bits_lower(counts.n_mu_y, cfg, p0_mu, rep.y.y0_lower, eps);
        budget.consume(1);

        rep.e1_y_upper = single_photon_bit_error_upper(counts.sift_len_y, mu_ch.qber,
                                                       rep.m0_bar_lower, rep.y.m1_lower);

        if (scenario.delta > 0.0) {
            const double f_equiv = (1.0 - 2.0 * scenario.delta) * (1.0 - 2.0 * scenario.delta);
            const CoinImbalance coin =
                coin_imbalance(f_equiv, rep.x.y1_lower, rep.y.y1_lower);
            rep.delta_prime = coin.delta_prime;
            rep.theta_coin = coin_correction(rep.e1_y_upper, rep.delta_prime);
        }
        rep.e1_tilde = std::min(rep.e1_y_upper + rep.theta_coin, 0.5);

        rep.theta_stat =
            statistical_correction(rep.e1_tilde, rep.y.m1_lower, rep.x.m1_lower, eps);
        budget.consume(1);
        rep.e1_ph_upper = std::min(rep.e1_tilde + rep.theta_stat, 0.5);

        rep.leak = leak_estimate(cfg.sift_len_x, mu_ch.qber, cfg, &rep.fec_clamped);

        rep.l_sec_raw = rep.x.m1_lower * (1.0 - binary_entropy(rep.e1_ph_upper)) - rep.leak -
                        5.0 * std::log2(1.0 / cfg.eps_pa);
        rep.l_sec = std::max(rep.l_sec_raw, 0.0);
        rep.bounds_used = budget.used;
        if (rep.bounds_used != scenario.protocol.bound_count) {
            throw NumericalError("secret_key_length: bound budget mismatch: used " +
                                 std::to_string(rep.bounds_used));
        }
        rep.valid = true;
    } catch (const std::exception& ex) {
        rep.valid = false;
        rep.error = ex.what();
        rep.l_sec_raw = 0.0;
        rep.l_sec = 0.0;
    }
    return rep;
}

std::vector<KeyLengthReport> sweep_distances(const Scenario& scenario,
                                             const std::vector<double>& distances_km) {
    if (distances_km.empty()) {
        throw DomainError("sweep_distances: empty distance list");
    }
    std::vector<KeyLengthReport> out;
    out.reserve(distances_km.size());
    for (double d : distances_km) {
        out.push_back(secret_key_length(scenario, d));
    }
    return out;
}

} // namespace qkd
