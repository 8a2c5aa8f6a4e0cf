#pragma once

#include "dcvqkd/signal.hpp"
#include "dcvqkd/transmitter.hpp"

#include <vector>

namespace dcvqkd {

/// Fiber link. beta2 is the second-order dispersion coefficient in the
/// customary ps^2/km; k1 the inverse group velocity in s/km.
struct ChannelSpec {
    double loss_db_per_km = 0.2;
    double k1_s_per_km = 0.0;
    double beta2_ps2_per_km = 0.0;
    double z_km = 0.0;

    /// Power transmittance 10^(-loss z / 10).
    double transmittance() const;
    /// Group delay k1 z in seconds.
    double group_delay() const { return k1_s_per_km * z_km; }
    ChannelSpec at_distance(double z) const {
        ChannelSpec c = *this;
        c.z_km = z;
        return c;
    }
    void validate() const;
    bool operator==(const ChannelSpec&) const = default;
};

struct Propagated {
    /// Normalized output envelope. Its grid is the input grid delayed by
    /// k1 z, so the bulk group delay is exact and never wraps.
    Wavepacket output;
    /// Power transmittance of the link; the TM shape itself is kept normalized.
    double transmittance;
    double amplitude_transmittance() const;
    /// Fraction of the dispersed energy that fell outside the window.
    double leakage;
};

/// Applies exp(i (beta2 / 2) Omega^2 z) to the spectrum of `input` and the
/// group delay as a grid shift. Throws TruncationError if more than 1e-3 of
/// the dispersed energy leaves the input window.
Propagated propagate(const Wavepacket& input, const ChannelSpec& channel);

/// Same, with ideal timing recovery: the output is re-centred on the input grid.
Propagated propagate_compensated(const Wavepacket& input, const ChannelSpec& channel);

struct EtaPoint {
    double z_km;
    double eta;
};

/// |<receiver_tm, xi_out(z)>|^2 for a fixed receiver mode, with the group
/// delay compensated. The pulse is rendered on the receiver's grid at `center`.
std::vector<EtaPoint> dispersion_eta_vs_distance(const PulseShape& shape, double center,
                                                 const Wavepacket& receiver_tm, const ChannelSpec& channel,
                                                 const std::vector<double>& z_km, unsigned threads = 1);

/// FWHM of |x(t)|^2 by linear interpolation of the half-maximum crossings.
double intensity_fwhm(const Wavepacket& w);

} // namespace dcvqkd
