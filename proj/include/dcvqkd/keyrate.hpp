#pragma once

// Asymptotic secret key rate of Gaussian-modulated coherent-state CVQKD
// (collective attacks, reverse reconciliation, Devetak-Winter bound with
// the Holevo quantity from symplectic eigenvalues).

#include "dcvqkd/channel.hpp"
#include "dcvqkd/receiver.hpp"

#include <string>
#include <vector>

namespace dcvqkd {

enum class Detection { homodyne, heterodyne };

/// Whether the temporal-mode mismatch eta_tm is charged to the (trusted)
/// receiver together with eta_det, or to the channel as loss Eve controls.
enum class ModeLossModel { trusted, untrusted };

struct KeyRateParams {
    double V_A = 4.0;           ///< modulation variance, SNU
    double T_ch = 1.0;          ///< channel power transmittance
    double eta_tm = 1.0;        ///< temporal-mode matching efficiency
    double eta_det = 0.6;       ///< detector quantum efficiency
    double epsilon = 0.01;      ///< excess noise at the fiber output, SNU (epsilon / T_ch at the input)
    double beta_rec = 0.95;     ///< reconciliation efficiency
    double v_el = 0.05;         ///< electronic noise, SNU
    Detection detection = Detection::homodyne;
    ModeLossModel mode_loss = ModeLossModel::trusted;

    /// T_ch eta_tm eta_det.
    double total_transmittance() const { return T_ch * eta_tm * eta_det; }
    /// Transmittance Eve is credited with.
    double channel_transmittance() const;
    /// Efficiency of the trusted receiver.
    double receiver_efficiency() const;
    void validate() const;
    bool operator==(const KeyRateParams&) const = default;
};

struct KeyRateResult {
    double rate;           ///< bits per symbol, clamped at 0
    double raw_rate;       ///< beta I_AB - chi_BE before clamping
    double mutual_info;    ///< I_AB, bits
    double holevo;         ///< chi_BE, bits
    bool below_threshold;  ///< raw_rate <= 0
};

KeyRateResult key_rate(const KeyRateParams& params);

/// g(x) = (x + 1) log2(x + 1) - x log2 x, the entropy of a thermal state with
/// mean photon number x. Written in terms of nu = 2x + 1 by callers.
double thermal_entropy(double mean_photons);
/// Entropy of a mode with symplectic eigenvalue nu >= 1 (SNU).
double symplectic_entropy(double nu);

struct SymplecticSpectrum {
    double nu1, nu2;  ///< of Alice-Bob before detection
    double nu3, nu4;  ///< of Alice conditioned on Bob's outcome (plus detector ancillas)
};
SymplecticSpectrum holevo_spectrum(const KeyRateParams& params);

struct RatePoint {
    double z_km;
    double transmittance;
    double eta_tm;
    KeyRateResult result;
};

/// Propagates `shape` to each distance, takes eta_tm against the fixed
/// receiver mode at t_j and evaluates the key rate with T_ch from the loss.
std::vector<RatePoint> rate_vs_distance(const PulseShape& shape, double center, const ReceiverChain& chain,
                                        double t_j, const ChannelSpec& channel, const KeyRateParams& params,
                                        const std::vector<double>& z_km, unsigned threads = 1);

struct OffsetPoint {
    double offset;
    double eta;
    KeyRateResult result;
};

/// eta and key rate when sampling at t_opt + offset for the pulse after `channel`.
std::vector<OffsetPoint> sampling_offset_sensitivity(const ReceiverChain& chain, double t_opt,
                                                     const PulseShape& shape, double center,
                                                     const ChannelSpec& channel, const KeyRateParams& params,
                                                     const std::vector<double>& offsets, unsigned threads = 1);

/// |eta(+h) - 2 eta(0) + eta(-h)| / h^2 around t_opt.
double eta_peak_curvature(const ReceiverChain& chain, double t_opt, const Wavepacket& signal_tm, double h);

/// Distance where the rate of a z-ordered curve first drops to zero, found by
/// linear interpolation of the unclamped rate between the bracketing points.
/// NaN if the rate is never positive, +inf if it is still positive at the end.
double cutoff_distance(const std::vector<RatePoint>& curve);

const char* to_string(Detection d);
const char* to_string(ModeLossModel m);

} // namespace dcvqkd
