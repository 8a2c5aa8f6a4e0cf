#include "dcvqkd/channel.hpp"

#include "dcvqkd/errors.hpp"
#include "dcvqkd/fft.hpp"
#include "dcvqkd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcvqkd {

namespace {

constexpr double kPs2ToS2 = 1e-24;
constexpr double kMaxLeakage = 1e-3;

} // namespace

double ChannelSpec::transmittance() const { return std::pow(10.0, -loss_db_per_km * z_km / 10.0); }

void ChannelSpec::validate() const {
    if (!(loss_db_per_km >= 0.0) || !std::isfinite(loss_db_per_km))
        throw InvalidParameter("channel loss must be a finite non-negative dB/km value");
    if (!(z_km >= 0.0) || !std::isfinite(z_km)) throw InvalidParameter("channel length must be non-negative");
    if (!std::isfinite(k1_s_per_km) || !std::isfinite(beta2_ps2_per_km))
        throw InvalidParameter("dispersion coefficients must be finite");
}

double Propagated::amplitude_transmittance() const { return std::sqrt(transmittance); }

Propagated propagate(const Wavepacket& input, const ChannelSpec& channel) {
    channel.validate();
    if (!input.is_normalized()) throw InvalidParameter("propagate expects a normalized input wavepacket");

    const TimeGrid out_grid = input.grid().shifted(channel.group_delay());
    const double phase_coeff = 0.5 * channel.beta2_ps2_per_km * kPs2ToS2 * channel.z_km;
    if (phase_coeff == 0.0) return {input.on_grid(out_grid), channel.transmittance(), 0.0};

    const std::size_t n = input.size();
    const std::size_t m = fft::good_size(4 * n);
    const std::size_t offset = (m - n) / 2;
    std::vector<complex> buf(m);
    std::copy(input.samples().begin(), input.samples().end(), buf.begin() + static_cast<std::ptrdiff_t>(offset));

    auto spectrum = fft::forward(buf);
    const auto omega = fft::angular_frequencies(m, input.grid().dt());
    for (std::size_t k = 0; k < m; ++k) {
        const double phi = phase_coeff * omega[k] * omega[k];
        spectrum[k] *= complex(std::cos(phi), std::sin(phi));
    }
    const auto dispersed = fft::inverse(spectrum);

    double total = 0.0, inside = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double e = std::norm(dispersed[k]);
        total += e;
        if (k >= offset && k < offset + n) inside += e;
    }
    const double leakage = 1.0 - inside / total;
    if (leakage > kMaxLeakage) {
        std::ostringstream os;
        os << "dispersed pulse leaks " << leakage << " of its energy outside the " << input.grid().duration()
           << " s window at z = " << channel.z_km << " km";
        throw TruncationError(os.str());
    }
    std::vector<complex> out(dispersed.begin() + static_cast<std::ptrdiff_t>(offset),
                             dispersed.begin() + static_cast<std::ptrdiff_t>(offset + n));
    return {normalize(Wavepacket(out_grid, std::move(out))), channel.transmittance(), leakage};
}

Propagated propagate_compensated(const Wavepacket& input, const ChannelSpec& channel) {
    Propagated p = propagate(input, channel);
    p.output = p.output.on_grid(input.grid());
    return p;
}

std::vector<EtaPoint> dispersion_eta_vs_distance(const PulseShape& shape, double center,
                                                 const Wavepacket& receiver_tm, const ChannelSpec& channel,
                                                 const std::vector<double>& z_km, unsigned threads) {
    if (!receiver_tm.is_normalized()) throw InvalidParameter("receiver temporal mode must be normalized");
    const Wavepacket input = render_pulse(shape, receiver_tm.grid(), center);
    std::vector<EtaPoint> out(z_km.size());
    parallel_for(z_km.size(), threads, [&](std::size_t i) {
        const auto p = propagate_compensated(input, channel.at_distance(z_km[i]));
        out[i] = {z_km[i], std::min(1.0, std::norm(inner_product(receiver_tm, p.output)))};
    });
    return out;
}

double intensity_fwhm(const Wavepacket& w) {
    const auto s = w.samples();
    std::size_t peak = 0;
    double peak_val = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k)
        if (std::norm(s[k]) > peak_val) peak_val = std::norm(s[k]), peak = k;
    if (!(peak_val > 0.0)) throw DegenerateWavepacket("fwhm of an all-zero wavepacket");
    const double half = 0.5 * peak_val;

    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double a = std::norm(s[inside]);
        const double b = std::norm(s[outside]);
        const double frac = (a - half) / (a - b);
        const double ti = w.grid().time(inside);
        const double to = w.grid().time(outside);
        return ti + frac * (to - ti);
    };
    std::size_t l = peak;
    while (l > 0 && std::norm(s[l - 1]) >= half) --l;
    std::size_t r = peak;
    while (r + 1 < s.size() && std::norm(s[r + 1]) >= half) ++r;
    if (l == 0 || r + 1 == s.size()) throw TruncationError("half-maximum crossing lies outside the grid");
    return crossing(r, r + 1) - crossing(l, l - 1);
}

} // namespace dcvqkd
