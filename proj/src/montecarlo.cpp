#include "dcvqkd/montecarlo.hpp"

#include "dcvqkd/errors.hpp"
#include "dcvqkd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

namespace dcvqkd {

bool CalibrationReport::passed() const noexcept { return std::abs(z_score) < 3.0; }

double ShotStatistics::mean_stderr() const { return std::sqrt(variance / static_cast<double>(n)); }

double ShotStatistics::variance_stderr() const {
    return variance * std::sqrt(2.0 / static_cast<double>(n - 1));
}

const char* to_string(CalibrationMode mode) {
    return mode == CalibrationMode::same_dsp ? "same_dsp" : "raw_samples";
}

std::uint64_t shot_seed(std::uint64_t seed, std::uint64_t shot_index) {
    // splitmix64 finalizer over (seed, index).
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (shot_index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

void check_monte_carlo_resolution(const ReceiverChain& chain) {
    const double dt = chain.grid().dt();
    if (chain.sampling.delta_t_s < dt * (1.0 - 1e-9)) {
        std::ostringstream os;
        os << "sampling window " << chain.sampling.delta_t_s << " s is shorter than the grid spacing " << dt << " s";
        throw ResolutionError(os.str());
    }
    if (!std::holds_alternative<DeltaLikeIrf>(chain.filter.kind()) && chain.filter.characteristic_width() < 2.0 * dt) {
        std::ostringstream os;
        os << describe(chain.filter.kind()) << " is not resolved by a " << dt << " s grid";
        throw ResolutionError(os.str());
    }
}

namespace {

/// Precomputed pieces of the trace -> sample -> DSP path for one output time.
class ShotEngine {
public:
    ShotEngine(const ReceiverChain& chain, double t_j, const Wavepacket* signal_tm)
        : chain_(chain), starts_(window_starts(chain.sampling, chain.dsp, t_j)), taps_(chain.filter.taps()) {
        chain.validate();
        check_monte_carlo_resolution(chain);
        sigma_ = snu_sigma(chain, t_j);  // also rejects windows off the grid

        const TimeGrid& grid = chain.grid();
        const auto n = static_cast<long long>(grid.size());
        const double first = *std::min_element(starts_.begin(), starts_.end());
        const double last = *std::max_element(starts_.begin(), starts_.end()) + chain.sampling.delta_t_s;
        m_lo_ = std::clamp(static_cast<long long>(std::floor(grid.position(first))), 0LL, n - 1);
        m_hi_ = std::clamp(static_cast<long long>(std::floor(grid.position(last))), 0LL, n - 1);
        k_lo_ = std::max(0LL, m_lo_ - static_cast<long long>(taps_.size()) + 1);

        const auto nx = static_cast<std::size_t>(m_hi_ - k_lo_ + 1);
        noise_scale_.resize(nx);
        mean_field_.assign(nx, complex(0.0));
        const double inv_sqrt_dt = 1.0 / std::sqrt(grid.dt());
        const auto lo = chain.lo.xi_lo.samples();
        for (std::size_t i = 0; i < nx; ++i) {
            const auto k = static_cast<std::size_t>(k_lo_) + i;
            noise_scale_[i] = std::abs(lo[k]) * inv_sqrt_dt;
            if (signal_tm) {
                const double phase = chain.lo.omega_lo * grid.time(k) - chain.lo.theta;
                mean_field_[i] = 2.0 * std::conj(lo[k]) * complex(std::cos(phase), std::sin(phase)) * (*signal_tm)[k];
            }
        }
        prefactor_ = std::sqrt(chain.lo.mu_lo) * grid.dt();
    }

    double sigma() const noexcept { return sigma_; }

    /// Raw integral samples for one realization with displacement gamma.
    std::vector<double> raw_samples(std::uint64_t seed, complex gamma = 0.0) const {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> x(noise_scale_.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = noise_scale_[i] * normal(rng) + (gamma * mean_field_[i]).real();

        const auto conv = convolve_real(x, taps_);
        const TimeGrid& grid = chain_.grid();
        const double dt = grid.dt();
        const auto count = static_cast<std::size_t>(m_hi_ - m_lo_ + 1);
        // cumulative[j] = integral of the trace from t_{m_lo} to t_{m_lo + j}.
        std::vector<double> trace(count), cumulative(count + 1, 0.0);
        for (std::size_t j = 0; j < count; ++j) {
            trace[j] = prefactor_ * conv[static_cast<std::size_t>(m_lo_ - k_lo_) + j];
            cumulative[j + 1] = cumulative[j] + trace[j] * dt;
        }
        auto integral_to = [&](double t) {
            const double x = grid.position(t) - static_cast<double>(m_lo_);
            const double fl = std::floor(x + 1e-12);
            const auto j = static_cast<std::size_t>(std::max(0.0, fl));
            if (j >= count) return cumulative[count];
            const double frac = std::max(0.0, x - fl);
            return cumulative[j] + frac * trace[j] * dt;
        };
        std::vector<double> out(starts_.size());
        const double window = chain_.sampling.delta_t_s;
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = (integral_to(starts_[i] + window) - integral_to(starts_[i])) / window;
        return out;
    }

    double normalized_output(std::uint64_t seed, complex gamma = 0.0) const {
        return apply_dsp(chain_.dsp, raw_samples(seed, gamma)) / sigma_;
    }

    /// Unprocessed sample at t_j (the i == k window), not normalized.
    double raw_center_sample(std::uint64_t seed) const {
        return raw_samples(seed)[static_cast<std::size_t>(std::clamp(chain_.dsp.offset, 1, (int)starts_.size()) - 1)];
    }

private:
    const ReceiverChain& chain_;
    std::vector<double> starts_;
    std::vector<double> taps_;
    double sigma_ = 0.0;
    long long m_lo_ = 0, m_hi_ = 0, k_lo_ = 0;
    std::vector<double> noise_scale_;
    std::vector<complex> mean_field_;  ///< signal field per unit displacement
    double prefactor_ = 0.0;
};

ShotStatistics summarize(const std::vector<double>& values) {
    // Sequential two-pass reduction over index order: independent of threads.
    const auto n = values.size();
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, n > 1 ? ss / static_cast<double>(n - 1) : 0.0, n};
}

} // namespace

NoiseTrace simulate_vacuum_trace(const ReceiverChain& chain, std::uint64_t seed) {
    chain.validate();
    check_monte_carlo_resolution(chain);
    const TimeGrid& grid = chain.grid();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double inv_sqrt_dt = 1.0 / std::sqrt(grid.dt());
    std::vector<double> x(grid.size());
    const auto lo = chain.lo.xi_lo.samples();
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::abs(lo[k]) * inv_sqrt_dt * normal(rng);
    auto conv = convolve_real(x, chain.filter.taps());
    conv.resize(grid.size());
    const double pre = std::sqrt(chain.lo.mu_lo) * grid.dt();
    for (auto& v : conv) v *= pre;
    return {grid, std::move(conv), seed};
}

std::vector<double> sample_trace(const ReceiverChain& chain, const NoiseTrace& trace,
                                 const std::vector<double>& starts) {
    const TimeGrid& grid = trace.grid;
    const double dt = grid.dt();
    std::vector<double> cumulative(trace.samples.size() + 1, 0.0);
    for (std::size_t m = 0; m < trace.samples.size(); ++m) cumulative[m + 1] = cumulative[m] + trace.samples[m] * dt;
    auto integral_to = [&](double t) {
        const double x = grid.position(t);
        if (x < -1e-9 || x > static_cast<double>(trace.samples.size()) + 1e-9)
            throw TruncationError("sampling window leaves the trace");
        const double fl = std::floor(x + 1e-12);
        const auto j = static_cast<std::size_t>(std::max(0.0, fl));
        if (j >= trace.samples.size()) return cumulative.back();
        return cumulative[j] + std::max(0.0, x - fl) * trace.samples[j] * dt;
    };
    const double window = chain.sampling.delta_t_s;
    std::vector<double> out(starts.size());
    for (std::size_t i = 0; i < starts.size(); ++i)
        out[i] = (integral_to(starts[i] + window) - integral_to(starts[i])) / window;
    return out;
}

double apply_dsp(const DspKernel& dsp, const std::vector<double>& samples) {
    if (samples.size() != dsp.size()) throw InvalidParameter("sample count does not match the DSP kernel");
    double out = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) out += dsp.coefficients[i] * samples[i];
    return out;
}

double simulate_signal_shot(const ReceiverChain& chain, double t_j, complex gamma, const Wavepacket& signal_tm,
                            std::uint64_t seed) {
    if (!signal_tm.is_normalized()) throw InvalidParameter("signal temporal mode must be normalized");
    if (!(signal_tm.grid() == chain.grid())) throw GridMismatch("signal mode is not on the receiver grid");
    return ShotEngine(chain, t_j, &signal_tm).normalized_output(seed, gamma);
}

ShotStatistics simulate_signal_ensemble(const ReceiverChain& chain, double t_j, complex gamma,
                                        const Wavepacket& signal_tm, std::size_t n_shots, std::uint64_t seed,
                                        unsigned threads) {
    if (n_shots < 2) throw InvalidParameter("an ensemble needs at least two shots");
    if (!signal_tm.is_normalized()) throw InvalidParameter("signal temporal mode must be normalized");
    if (!(signal_tm.grid() == chain.grid())) throw GridMismatch("signal mode is not on the receiver grid");
    const ShotEngine engine(chain, t_j, &signal_tm);
    std::vector<double> values(n_shots);
    parallel_for(n_shots, threads,
                 [&](std::size_t i) { values[i] = engine.normalized_output(shot_seed(seed, i), gamma); });
    return summarize(values);
}

CalibrationReport calibrate_snu_empirical(const ReceiverChain& chain, double t_j, std::size_t n_shots,
                                          std::uint64_t seed, CalibrationMode mode, unsigned threads) {
    if (n_shots < 1000) throw InvalidParameter("calibration needs at least 1000 shots");
    const ShotEngine engine(chain, t_j, nullptr);
    const double sigma_analytic = engine.sigma();

    std::vector<double> values(n_shots);
    parallel_for(n_shots, threads, [&](std::size_t i) {
        const auto s = shot_seed(seed, i);
        values[i] = mode == CalibrationMode::same_dsp ? apply_dsp(chain.dsp, engine.raw_samples(s))
                                                      : engine.raw_center_sample(s);
    });
    const ShotStatistics stats = summarize(values);

    CalibrationReport r{};
    r.sigma_empirical = std::sqrt(stats.variance);
    r.sigma_analytic = sigma_analytic;
    r.n_shots = n_shots;
    r.z_score = (stats.variance - sigma_analytic * sigma_analytic) / stats.variance_stderr();
    r.seed = seed;
    r.mode = mode;
    r.mean_snu = stats.mean / sigma_analytic;
    r.mean_z_score = stats.mean / stats.mean_stderr();
    return r;
}

ExcessNoiseEstimate estimate_excess_noise(const ReceiverChain& chain, double t_j, const Wavepacket& signal_tm,
                                          const SymbolTrain& train, double channel_transmittance, std::uint64_t seed,
                                          unsigned threads) {
    if (!signal_tm.is_normalized()) throw InvalidParameter("signal temporal mode must be normalized");
    if (!(signal_tm.grid() == chain.grid())) throw GridMismatch("signal mode is not on the receiver grid");
    if (!(channel_transmittance > 0.0 && channel_transmittance <= 1.0))
        throw InvalidParameter("channel transmittance must lie in (0, 1]");
    const std::size_t n = train.displacements.size();
    if (n < 3) throw InvalidParameter("excess-noise estimation needs at least three symbols");

    const ShotEngine engine(chain, t_j, &signal_tm);
    const double amplitude = std::sqrt(channel_transmittance);
    const complex rot = std::polar(1.0, -chain.lo.theta);
    std::vector<double> x(n), y(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const complex g = train.displacements[i];
        x[i] = 2.0 * (g * rot).real();
        y[i] = engine.normalized_output(shot_seed(seed, i), amplitude * g);
    });

    // Least-squares fit y = t x + noise, then var(noise) = 1 + t^2 eps.
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    const double t = sxy / sxx;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - my - t * (x[i] - mx);
        ss += r * r;
    }
    ExcessNoiseEstimate e{};
    e.n = n;
    e.t = t;
    e.transmittance = t * t;
    e.noise_variance = ss / static_cast<double>(n - 2);
    e.epsilon = (e.noise_variance - 1.0) / e.transmittance;
    e.epsilon_stderr = e.noise_variance * std::sqrt(2.0 / static_cast<double>(n - 2)) / e.transmittance;
    return e;
}

} // namespace dcvqkd
