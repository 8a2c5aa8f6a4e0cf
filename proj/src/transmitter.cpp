#include "dcvqkd/transmitter.hpp"

#include "dcvqkd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace dcvqkd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

constexpr double kMinCapturedEnergy = 0.9999;

// Composite Simpson rule on [a, b] with an even number of panels.
template <typename F>
double simpson(F&& f, double a, double b, std::size_t panels) {
    if (panels % 2) ++panels;
    const double h = (b - a) / static_cast<double>(panels);
    double s = f(a) + f(b);
    for (std::size_t i = 1; i < panels; ++i) s += f(a + h * static_cast<double>(i)) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

} // namespace

double GaussianPulse::t0() const { return fwhm / (2.0 * std::sqrt(std::numbers::ln2)); }

void validate(const PulseShape& shape) {
    std::visit(overloaded{
                   [](const GaussianPulse& g) {
                       if (!(g.fwhm > 0.0)) throw InvalidParameter("gaussian pulse fwhm must be positive");
                   },
                   [](const RectangularPulse& r) {
                       if (!(r.width > 0.0)) throw InvalidParameter("rectangular pulse width must be positive");
                   },
                   [](const RrcPulse& r) {
                       if (!(r.rolloff > 0.0 && r.rolloff <= 1.0))
                           throw InvalidParameter("rrc rolloff must lie in (0, 1]");
                       if (!(r.symbol_period > 0.0)) throw InvalidParameter("rrc symbol period must be positive");
                       if (r.span < 1) throw InvalidParameter("rrc span must be at least 1 symbol");
                   },
               },
               shape);
}

std::string describe(const PulseShape& shape) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const GaussianPulse& g) { os << "gaussian(fwhm=" << g.fwhm << " s)"; },
                   [&](const RectangularPulse& r) { os << "rectangular(width=" << r.width << " s)"; },
                   [&](const RrcPulse& r) {
                       os << "rrc(rolloff=" << r.rolloff << ", T=" << r.symbol_period << " s, span=" << r.span
                          << ")";
                   },
               },
               shape);
    return os.str();
}

double pulse_half_extent(const PulseShape& shape) {
    return std::visit(overloaded{
                          [](const GaussianPulse& g) { return 12.0 * g.t0(); },
                          [](const RectangularPulse& r) { return 0.5 * r.width; },
                          [](const RrcPulse& r) { return r.span * r.symbol_period; },
                      },
                      shape);
}

double rrc_impulse(double t, double rolloff, double symbol_period) {
    const double x = t / symbol_period;
    const double b = rolloff;
    const double pi = std::numbers::pi;
    if (std::abs(x) < 1e-10) return 1.0 - b + 4.0 * b / pi;
    if (std::abs(std::abs(x) - 1.0 / (4.0 * b)) < 1e-9) {
        return b / std::numbers::sqrt2 *
               ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * b)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * b)));
    }
    const double num = std::sin(pi * x * (1.0 - b)) + 4.0 * b * x * std::cos(pi * x * (1.0 + b));
    const double den = pi * x * (1.0 - (4.0 * b * x) * (4.0 * b * x));
    return num / den;
}

double raised_cosine(double t, double rolloff, double symbol_period) {
    const double x = t / symbol_period;
    const double pi = std::numbers::pi;
    auto sinc = [pi](double u) { return std::abs(u) < 1e-12 ? 1.0 : std::sin(pi * u) / (pi * u); };
    const double d = 2.0 * rolloff * x;
    if (std::abs(std::abs(d) - 1.0) < 1e-9) return pi / 4.0 * sinc(1.0 / (2.0 * rolloff));
    return sinc(x) * std::cos(pi * rolloff * x) / (1.0 - d * d);
}

double captured_energy(const PulseShape& shape, const TimeGrid& grid, double center) {
    validate(shape);
    const double lo = grid.t_start();
    const double hi = grid.t_end() + grid.dt();
    return std::visit(
        overloaded{
            [&](const GaussianPulse& g) {
                const double t0 = g.t0();
                return 0.5 * (std::erf((hi - center) / t0) - std::erf((lo - center) / t0));
            },
            [&](const RectangularPulse& r) {
                const double a = std::max(lo, center - 0.5 * r.width);
                const double b = std::min(hi, center + 0.5 * r.width);
                return std::max(0.0, b - a) / r.width;
            },
            [&](const RrcPulse& r) {
                const double half = r.span * r.symbol_period;
                auto energy = [&](double t) {
                    const double v = rrc_impulse(t - center, r.rolloff, r.symbol_period);
                    return v * v;
                };
                const auto panels = static_cast<std::size_t>(512 * r.span);
                const double total = simpson(energy, center - half, center + half, panels);
                const double a = std::max(lo, center - half);
                const double b = std::min(hi, center + half);
                if (b <= a) return 0.0;
                const auto inner_panels =
                    std::max<std::size_t>(64, static_cast<std::size_t>(panels * (b - a) / (2.0 * half)));
                return simpson(energy, a, b, inner_panels) / total;
            },
        },
        shape);
}

Wavepacket render_pulse(const PulseShape& shape, const TimeGrid& grid, double center) {
    validate(shape);
    const double captured = captured_energy(shape, grid, center);
    if (captured < kMinCapturedEnergy) {
        std::ostringstream os;
        os << describe(shape) << " centred at " << center << " s keeps only " << captured
           << " of its energy inside the grid window";
        throw TruncationError(os.str());
    }
    const double eps = 1e-9 * grid.dt();
    Wavepacket w = std::visit(
        overloaded{
            [&](const GaussianPulse& g) {
                const double t0 = g.t0();
                return Wavepacket::sample(grid, [&](double t) {
                    const double u = (t - center) / t0;
                    return std::exp(-0.5 * u * u);
                });
            },
            [&](const RectangularPulse& r) {
                const double a = center - 0.5 * r.width - eps;
                const double b = center + 0.5 * r.width - eps;
                return Wavepacket::sample(grid, [&](double t) { return (t >= a && t < b) ? 1.0 : 0.0; });
            },
            [&](const RrcPulse& r) {
                const double half = r.span * r.symbol_period + eps;
                return Wavepacket::sample(grid, [&](double t) {
                    const double u = t - center;
                    return std::abs(u) <= half ? rrc_impulse(u, r.rolloff, r.symbol_period) : 0.0;
                });
            },
        },
        shape);
    return normalize(w);
}

SymbolTrain make_symbol_train(std::uint64_t seed, std::size_t n_symbols, double modulation_variance,
                              const PulseShape& shape, double period) {
    if (n_symbols < 1) throw InvalidParameter("symbol train needs at least one symbol");
    if (!(modulation_variance > 0.0) || !std::isfinite(modulation_variance))
        throw InvalidParameter("modulation variance V_A must be positive");
    if (!(period > 0.0)) throw InvalidParameter("symbol period must be positive");
    validate(shape);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> quad(0.0, std::sqrt(modulation_variance / 2.0));
    SymbolTrain train{{}, period, shape, modulation_variance, seed};
    train.displacements.reserve(n_symbols);
    for (std::size_t i = 0; i < n_symbols; ++i) {
        const double x = quad(rng);
        const double p = quad(rng);
        train.displacements.emplace_back(x, p);
    }
    return train;
}

} // namespace dcvqkd
