#pragma once

// Band-limited homodyne receiver: detector impulse response, integral
// sampling, linear DSP, and the temporal mode these jointly select.

#include "dcvqkd/signal.hpp"
#include "dcvqkd/transmitter.hpp"

#include <Eigen/Dense>

#include <string>
#include <variant>
#include <vector>

namespace dcvqkd {

// ---------------------------------------------------------------------------
// Detector filter

/// Impulse of one grid cell; the detector is effectively unlimited in bandwidth.
struct DeltaLikeIrf {
    bool operator==(const DeltaLikeIrf&) const = default;
};

/// g(t) = exp(-t / tau) / tau for t >= 0, tau = 1 / (2 pi bandwidth).
struct OnePoleIrf {
    double bandwidth_hz;
    double tau() const;
    bool operator==(const OnePoleIrf&) const = default;
};

/// Gaussian g(t) of the given FWHM, delayed by 6 sigma so that it is causal
/// to within ~1e-9 of its area, truncated at 12 sigma and renormalized.
struct GaussianIrf {
    double fwhm;
    double sigma() const;
    double delay() const { return 6.0 * sigma(); }
    bool operator==(const GaussianIrf&) const = default;
};

using IrfKind = std::variant<DeltaLikeIrf, OnePoleIrf, GaussianIrf>;

std::string describe(const IrfKind& kind);

/// Causal, real, unit-area impulse response sampled on cells of width dt
/// starting at t = 0. Samples are cell averages of the analytic g, so the
/// running sum reproduces the analytic step response exactly at cell edges.
class DetectorFilter {
public:
    DetectorFilter(IrfKind kind, double dt);

    const IrfKind& kind() const noexcept { return kind_; }
    const Wavepacket& irf() const noexcept { return irf_; }
    double dt() const noexcept { return irf_.grid().dt(); }
    /// Length of the stored support, n_cells * dt.
    double support() const noexcept { return dt() * static_cast<double>(cumulative_.size() - 1); }
    /// Narrowest time feature of the response (dt for the delta-like filter).
    double characteristic_width() const;

    /// Step response C(u) = integral of g over (-inf, u], linear between cell
    /// edges, 0 for u <= 0 and constant past the support.
    double cumulative(double u) const noexcept;

    /// Real samples of g as a plain vector (length = number of cells).
    std::vector<double> taps() const;

    bool operator==(const DetectorFilter& other) const { return kind_ == other.kind_ && irf_.grid() == other.irf_.grid(); }

private:
    IrfKind kind_;
    Wavepacket irf_;
    std::vector<double> cumulative_;
};

// ---------------------------------------------------------------------------
// Sampling and DSP

/// Integral sampling on a regular comb: samples_per_period windows of length
/// delta_t_s per period, spaced period / samples_per_period apart.
struct SamplingSchedule {
    double delta_t_s;
    double period;
    int samples_per_period = 1;

    double spacing() const { return period / samples_per_period; }
    void validate() const;
    bool operator==(const SamplingSchedule&) const = default;
};

/// Linear DSP: D_out(t_j) = sum_{i=1..N} f_i D(t_{j-k+i}).
struct DspKernel {
    std::vector<double> coefficients;
    int offset = 1;  ///< k; the i == k coefficient acts on the sample at t_j

    std::size_t size() const noexcept { return coefficients.size(); }
    /// Throws DegenerateKernel for an empty or all-zero kernel.
    void validate() const;
    bool operator==(const DspKernel&) const = default;

    static DspKernel single_point();
    static DspKernel uniform_average(int taps);
    /// Centre-aligned (k = (N + 1) / 2) arbitrary weights.
    static DspKernel weighted(std::vector<double> weights);
    /// RRC matched filter sampled at `samples_per_symbol` taps per symbol
    /// over `span` symbols on each side of the centre tap.
    static DspKernel rrc_matched(double rolloff, int samples_per_symbol, int span);
};

/// Start times t_{j-k+i}, i = 1..N, of the sampling windows feeding output t_j.
std::vector<double> window_starts(const SamplingSchedule& sampling, const DspKernel& dsp, double t_j);

/// Weighted-average kernel whose weights follow the signal envelope: each
/// weight is the mean of the (phase-aligned, real part of the) signal over
/// its sampling window.
DspKernel matched_average_kernel(const Wavepacket& signal_tm, const SamplingSchedule& sampling, double t_j,
                                 int taps);

// ---------------------------------------------------------------------------
// Local oscillator and chain

struct LocalOscillator {
    double mu_lo;          ///< mean photon number in the envelope (or window for CW)
    Wavepacket xi_lo;      ///< normalized envelope; its grid is the chain's grid
    double omega_lo = 0.0; ///< detuning of the LO from the signal carrier, rad/s
    double theta = 0.0;    ///< measurement phase, rad

    /// Continuous-wave LO: flat envelope normalized over the whole grid.
    static LocalOscillator cw(const TimeGrid& grid, double mu_lo, double theta = 0.0, double omega_lo = 0.0);
    static LocalOscillator pulsed(const PulseShape& shape, const TimeGrid& grid, double center, double mu_lo,
                                  double theta = 0.0, double omega_lo = 0.0);
    void validate() const;
};

struct ReceiverChain {
    LocalOscillator lo;
    DetectorFilter filter;
    SamplingSchedule sampling;
    DspKernel dsp;

    const TimeGrid& grid() const noexcept { return lo.xi_lo.grid(); }
    /// Checks every component and that the filter shares the LO grid spacing.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Operations

/// G(tau) = sum_i f_i integral_{t_i}^{t_i + dts} g(t - tau) dt on the chain
/// grid. Throws TruncationError if a sampling window leaves the grid.
Wavepacket gdsp_kernel(const ReceiverChain& chain, double t_j);

/// sigma_SNU^2 = mu_LO / dts^2 * integral |xi_LO|^2 G^2 dtau.
double snu_variance(const ReceiverChain& chain, double t_j);
/// Square root of snu_variance; throws DegenerateKernel if it vanishes.
double snu_sigma(const ReceiverChain& chain, double t_j);

/// Xi_DSP(tau) = sqrt(mu_LO) / dts * xi_LO G exp(-i omega_LO tau) / sigma_SNU.
Wavepacket dsp_temporal_mode(const ReceiverChain& chain, double t_j);

/// <Xi_DSP, signal_tm>.
complex mode_overlap(const ReceiverChain& chain, double t_j, const Wavepacket& signal_tm);
/// |<Xi_DSP, signal_tm>|^2.
double mode_match_eta(const ReceiverChain& chain, double t_j, const Wavepacket& signal_tm);

/// M(i, j) = <Xi(t_i), Xi(t_j)>.
Eigen::MatrixXcd crosstalk_matrix(const ReceiverChain& chain, const std::vector<double>& t_list);
double max_offdiagonal(const Eigen::MatrixXcd& m);

struct Measurement {
    double mean;      ///< SNU
    double variance;  ///< SNU
};

/// Statistics of the normalized DSP output for a coherent state |gamma> on
/// `signal_tm`: mean 2 Re(gamma c e^{-i theta}) with c = <Xi, signal_tm>,
/// variance 1. For a real positive overlap this is 2 sqrt(eta) Re(gamma e^{-i theta}).
Measurement effective_measurement(const ReceiverChain& chain, double t_j, complex gamma,
                                  const Wavepacket& signal_tm);
/// Beamsplitter form: mean 2 sqrt(eta) Re(gamma e^{-i theta}), variance 1.
Measurement effective_measurement(double eta, complex gamma, double theta);

struct SampleTimeOptimum {
    double t_j;
    double eta;
};

/// Maximizes mode_match_eta over t_j in [t_lo, t_hi]: coarse scan with
/// `coarse_steps` points, then golden-section refinement.
SampleTimeOptimum optimal_sample_time(const ReceiverChain& chain, const Wavepacket& signal_tm, double t_lo,
                                      double t_hi, int coarse_steps = 64);

} // namespace dcvqkd
