#pragma once

#include "dcvqkd/signal.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace dcvqkd {

/// Gaussian pulse; `fwhm` is the full width at half maximum of |xi(t)|^2.
struct GaussianPulse {
    double fwhm;
    /// Amplitude 1/e half-width T0 of exp(-t^2 / 2 T0^2): fwhm / (2 sqrt(ln 2)).
    double t0() const;
    bool operator==(const GaussianPulse&) const = default;
};

struct RectangularPulse {
    double width;
    bool operator==(const RectangularPulse&) const = default;
};

/// Root-raised-cosine pulse truncated to `span` symbol periods on each side of
/// its peak and renormalized.
struct RrcPulse {
    double rolloff;
    double symbol_period;
    int span = 16;
    bool operator==(const RrcPulse&) const = default;
};

using PulseShape = std::variant<GaussianPulse, RectangularPulse, RrcPulse>;

void validate(const PulseShape& shape);
std::string describe(const PulseShape& shape);

/// Half-extent of the time interval that holds the pulse's energy (the RRC
/// and rectangular supports, or 12 T0 for a Gaussian).
double pulse_half_extent(const PulseShape& shape);

/// Unnormalized RRC impulse response at time t, with removable singularities
/// at t = 0 and |t| = T / (4 rolloff) filled in analytically.
double rrc_impulse(double t, double rolloff, double symbol_period);

/// Raised-cosine (RRC autocorrelation) in units where rc(0) = 1.
double raised_cosine(double t, double rolloff, double symbol_period);

/// Normalized envelope of `shape` centred at `center`. Throws TruncationError
/// if the grid captures less than 99.99% of the pulse energy.
Wavepacket render_pulse(const PulseShape& shape, const TimeGrid& grid, double center);

/// Fraction of the pulse's energy that lies inside the grid window.
double captured_energy(const PulseShape& shape, const TimeGrid& grid, double center);

struct SymbolTrain {
    /// gamma_i = x_i + i p_i.
    std::vector<complex> displacements;
    double period;
    PulseShape shape;
    double modulation_variance;
    std::uint64_t seed;
};

/// Gaussian-modulated symbol train: x_i, p_i i.i.d. N(0, V_A / 2). The stream
/// is a fixed function of `seed` (std::mt19937_64 + std::normal_distribution).
SymbolTrain make_symbol_train(std::uint64_t seed, std::size_t n_symbols, double modulation_variance,
                              const PulseShape& shape, double period);

} // namespace dcvqkd
