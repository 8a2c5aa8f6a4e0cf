#pragma once

// Stochastic check of the receiver model: white vacuum quadrature noise is
// filtered by the detector, integrated by the sampler and combined by the
// DSP exactly as a measured trace would be.

#include "dcvqkd/receiver.hpp"
#include "dcvqkd/transmitter.hpp"

#include <cstdint>
#include <vector>

namespace dcvqkd {

struct NoiseTrace {
    TimeGrid grid;
    std::vector<double> samples;  ///< photocurrent, sqrt(mu_LO) (X * g)
    std::uint64_t seed;
};

enum class CalibrationMode {
    same_dsp,     ///< vacuum data go through the same DSP as the signal
    raw_samples,  ///< variance of an unprocessed sample (a miscalibration)
};

struct CalibrationReport {
    double sigma_empirical;
    double sigma_analytic;
    std::size_t n_shots;
    /// (sigma_emp^2 - sigma_ana^2) / (sigma_emp^2 sqrt(2 / (n - 1)))
    double z_score;
    std::uint64_t seed;
    CalibrationMode mode;
    /// Mean of the vacuum data in SNU and its z-score against 0.
    double mean_snu;
    double mean_z_score;
    bool passed() const noexcept;
};

struct ShotStatistics {
    double mean;
    double variance;  ///< unbiased
    std::size_t n;
    double mean_stderr() const;
    double variance_stderr() const;  ///< Gaussian sqrt(2 / (n - 1)) sigma^2
};

/// Seed of the shot with the given index, derived from the run seed so that
/// each shot's stream is independent of scheduling.
std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t shot_index);

/// Throws ResolutionError if the grid cannot resolve the filter or the
/// sampling window.
void check_monte_carlo_resolution(const ReceiverChain& chain);

/// Full-grid photocurrent trace for vacuum input.
NoiseTrace simulate_vacuum_trace(const ReceiverChain& chain, std::uint64_t seed);

/// Integral samples (1/dts) integral_{s}^{s+dts} f(t) dt of a trace, one per start time.
std::vector<double> sample_trace(const ReceiverChain& chain, const NoiseTrace& trace,
                                 const std::vector<double>& starts);

/// Linear DSP combination of raw samples.
double apply_dsp(const DspKernel& dsp, const std::vector<double>& samples);

/// One normalized DSP output (SNU) for a coherent state |gamma> on
/// `signal_tm`, using the analytic sigma_SNU for normalization.
double simulate_signal_shot(const ReceiverChain& chain, double t_j, complex gamma, const Wavepacket& signal_tm,
                            std::uint64_t seed);

ShotStatistics simulate_signal_ensemble(const ReceiverChain& chain, double t_j, complex gamma,
                                        const Wavepacket& signal_tm, std::size_t n_shots, std::uint64_t seed,
                                        unsigned threads = 0);

/// Empirical sigma_SNU from n_shots vacuum shots versus the analytic value.
CalibrationReport calibrate_snu_empirical(const ReceiverChain& chain, double t_j, std::size_t n_shots,
                                          std::uint64_t seed, CalibrationMode mode = CalibrationMode::same_dsp,
                                          unsigned threads = 0);

/// Excess noise from a simulated prepare-and-measure run: each symbol of
/// `train`, attenuated by the channel amplitude sqrt(T), is measured once.
struct ExcessNoiseEstimate {
    double t;               ///< fitted slope of y on x = 2 Re(gamma e^{-i theta})
    double transmittance;   ///< t^2, total (channel times mode matching)
    double noise_variance;  ///< residual variance in SNU
    double epsilon;         ///< (noise_variance - 1) / transmittance, referred to the input
    double epsilon_stderr;
    std::size_t n;
};

ExcessNoiseEstimate estimate_excess_noise(const ReceiverChain& chain, double t_j, const Wavepacket& signal_tm,
                                          const SymbolTrain& train, double channel_transmittance, std::uint64_t seed,
                                          unsigned threads = 0);

const char* to_string(CalibrationMode mode);

} // namespace dcvqkd
