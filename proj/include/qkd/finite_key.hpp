#ifndef QKD_FINITE_KEY_HPP
#define QKD_FINITE_KEY_HPP

#include <string>
#include <vector>

#include "qkd/decoy_bounds.hpp"
#include "qkd/photon_stats.hpp"
#include "qkd/polarization.hpp"

namespace qkd {

// Error-correction inefficiency versus QBER, piecewise linear, clamped to the
// nearest endpoint outside the table.
class FecTable {
public:
    struct Value {
        double f = 1.0;
        bool clamped = false;
    };

    FecTable() : knots_(default_knots()) {}
    explicit FecTable(std::vector<std::pair<double, double>> knots);

    Value at(double qber) const;
    const std::vector<std::pair<double, double>>& knots() const { return knots_; }

    static std::vector<std::pair<double, double>> default_knots();

private:
    std::vector<std::pair<double, double>> knots_;
};

struct ProtocolConfig {
    double p_x = 0.9;
    double p_y = 0.1;
    double p_mu = 0.5;
    double p_nu1 = 0.25;
    double p_nu2 = 0.25;
    double sift_len_x = 1.36e6;
    double hash_len = 50.0;
    double eps_decoy = 1e-12;
    double eps_pa = 1e-12;
    int bound_count = 14;
    FecTable fec;

    double eps_per_bound() const { return eps_decoy / bound_count; }
    void validate() const;
};

struct ChannelModel {
    double eta = 0.10;            // detector efficiency
    double p_dc = 1e-6;           // per-detector dark-count probability
    double beta_db_per_km = 0.2;  // fiber loss
    double bob_loss_db = 3.0;     // receiver internal loss
    double p_opt = 0.01;          // optical misalignment error
};

struct GainQber {
    double gain = 0.0;
    double qber = 0.0;
};

// Expected gain and QBER of a mean-intensity pulse at the given distance.
GainQber channel_gain_qber(double alpha_mean, double distance_km, const ChannelModel& ch);

struct PulseCounts {
    double n_mu_x = 0.0;
    double n_nu1_x = 0.0;
    double n_nu2_x = 0.0;
    double n_mu_y = 0.0;
    double n_nu1_y = 0.0;
    double n_nu2_y = 0.0;
    double sift_len_y = 0.0;
    double ver_len_x = 0.0;
};

// Deterministic count bookkeeping from the fixed X-basis sifted block length.
PulseCounts pulse_counts(const ProtocolConfig& cfg, double q_mu_x);

// Wald lower bound on the verified single-photon bits given the gain ratio.
double single_photon_bits_lower(double l_ver, double q1_lower, double q_mu_upper,
                                double epsilon);

// Wald lower bound on bit errors of vacuum origin in the Y basis.
double vacuum_error_bits_lower(double n_mu_y, const ProtocolConfig& cfg, double p0_mu,
                               double y0_lower, double epsilon);

// Upper bound on the single-photon bit error rate in the Y basis.
double single_photon_bit_error_upper(double sift_len_y, double qber_y, double m0_lower,
                                     double m1_y_lower);

// Basis-dependence correction to the phase error rate.
double coin_correction(double e1_y_upper, double delta_prime);

// Error-correction leakage: sift_len * f_ec(qber) * h2(qber) + hash tag. A
// QBER outside the f_ec table is clamped to the nearest knot and flagged.
double leak_estimate(double sift_len, double qber, const ProtocolConfig& cfg,
                     bool* fec_clamped = nullptr);

// Statistical correction Theta_stat: the root of the implicit tail equation,
// found by bracketed bisection to 1e-10.
double statistical_correction(double e1_tilde, double m1_y_lower, double m1_x_lower,
                              double epsilon);

enum class ScenarioMode { Poissonian, GaussianMixed, VacuumNu2, Wang };

std::string to_string(ScenarioMode mode);

struct Scenario {
    ScenarioMode mode = ScenarioMode::Poissonian;
    // Fitted or assumed intensity laws; means also drive the channel model.
    GaussianParams mu{0.3, 0.0};
    GaussianParams nu1{0.1, 0.0};
    GaussianParams nu2{1e-3, 0.0};
    double wang_z = 1.0;
    // Basis dependence of the source, as the resolved coin imbalance Delta.
    double delta = 0.0;
    ProtocolConfig protocol;
    ChannelModel channel;

    // Intensity models used by the bound computations for this mode.
    IntensityModel model_mu() const;
    IntensityModel model_nu1() const;
    IntensityModel model_nu2() const;
};

struct BasisIntermediates {
    GainBounds q_mu, q_nu1, q_nu2;
    double y0_lower = 0.0;
    double y1_lower = 0.0;
    double q1_lower = 0.0;
    double m1_lower = 0.0;
};

struct KeyLengthReport {
    double distance_km = 0.0;
    bool valid = false;        // false: a bound failed; l_sec forced to 0
    std::string error;         // originating failure when !valid

    double q_mu = 0.0, q_nu1 = 0.0, q_nu2 = 0.0; // simulated gains
    double e_mu = 0.0;                           // simulated QBER
    BasisIntermediates x, y;
    double m0_bar_lower = 0.0;
    double e1_y_upper = 0.0;
    double delta = 0.0;
    double delta_prime = 0.0;
    double theta_coin = 0.0;
    double e1_tilde = 0.0;
    double theta_stat = 0.0;
    double e1_ph_upper = 0.0;
    double leak = 0.0;
    bool fec_clamped = false;
    double l_sec_raw = 0.0; // before clamping at zero
    double l_sec = 0.0;
    double l_ver = 0.0;
    int bounds_used = 0;

    double ratio() const { return l_ver > 0.0 ? l_sec / l_ver : 0.0; }
};

KeyLengthReport secret_key_length(const Scenario& scenario, double distance_km);

std::vector<KeyLengthReport> sweep_distances(const Scenario& scenario,
                                             const std::vector<double>& distances_km);

} // namespace qkd

#endif // QKD_FINITE_KEY_HPP
