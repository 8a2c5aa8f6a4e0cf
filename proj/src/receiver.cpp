#include "dcvqkd/receiver.hpp"

#include "dcvqkd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace dcvqkd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::size_t cells_for(double extent, double dt) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(extent / dt - 1e-9)));
}

} // namespace

double OnePoleIrf::tau() const { return 1.0 / (2.0 * std::numbers::pi * bandwidth_hz); }

double GaussianIrf::sigma() const { return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2)); }

std::string describe(const IrfKind& kind) {
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const DeltaLikeIrf&) { os << "delta_like"; },
                   [&](const OnePoleIrf& p) { os << "one_pole_lowpass(bandwidth=" << p.bandwidth_hz << " Hz)"; },
                   [&](const GaussianIrf& g) { os << "gaussian_irf(fwhm=" << g.fwhm << " s)"; },
               },
               kind);
    return os.str();
}

// ---------------------------------------------------------------------------

DetectorFilter::DetectorFilter(IrfKind kind, double dt) : kind_(std::move(kind)), irf_(TimeGrid(0.0, dt, 2)) {
    if (!(dt > 0.0)) throw InvalidParameter("detector filter needs a positive sample spacing");

    // Analytic step response (unnormalized) and support length for each kind.
    std::size_t cells = 1;
    std::function<double(double)> step;
    std::visit(overloaded{
                   [&](const DeltaLikeIrf&) {
                       cells = 1;
                       step = [dt](double u) { return std::clamp(u / dt, 0.0, 1.0); };
                   },
                   [&](const OnePoleIrf& p) {
                       if (!(p.bandwidth_hz > 0.0)) throw InvalidParameter("one-pole bandwidth must be positive");
                       const double tau = p.tau();
                       cells = cells_for(36.0 * tau, dt);
                       step = [tau](double u) { return u <= 0.0 ? 0.0 : -std::expm1(-u / tau); };
                   },
                   [&](const GaussianIrf& g) {
                       if (!(g.fwhm > 0.0)) throw InvalidParameter("gaussian IRF fwhm must be positive");
                       const double s = g.sigma();
                       const double d = g.delay();
                       cells = cells_for(12.0 * s, dt);
                       const double base = std_normal_cdf(-d / s);
                       step = [s, d, base](double u) {
                           return u <= 0.0 ? 0.0 : std_normal_cdf((u - d) / s) - base;
                       };
                   },
               },
               kind_);

    cumulative_.resize(cells + 1);
    for (std::size_t m = 0; m <= cells; ++m) cumulative_[m] = step(dt * static_cast<double>(m));
    const double total = cumulative_.back();
    for (auto& c : cumulative_) c /= total;

    std::vector<complex> g(std::max<std::size_t>(cells, 2));
    for (std::size_t m = 0; m < cells; ++m) g[m] = (cumulative_[m + 1] - cumulative_[m]) / dt;
    const TimeGrid irf_grid(0.0, dt, g.size());
    irf_ = Wavepacket(irf_grid, std::move(g));
}

double DetectorFilter::characteristic_width() const {
    return std::visit(overloaded{
                          [&](const DeltaLikeIrf&) { return dt(); },
                          [](const OnePoleIrf& p) { return p.tau(); },
                          [](const GaussianIrf& g) { return g.fwhm; },
                      },
                      kind_);
}

double DetectorFilter::cumulative(double u) const noexcept {
    if (u <= 0.0) return 0.0;
    const double x = u / dt();
    const double cells = static_cast<double>(cumulative_.size() - 1);
    if (x >= cells) return cumulative_.back();
    const auto m = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(m);
    return cumulative_[m] + frac * (cumulative_[m + 1] - cumulative_[m]);
}

std::vector<double> DetectorFilter::taps() const {
    std::vector<double> out(cumulative_.size() - 1);
    for (std::size_t m = 0; m < out.size(); ++m) out[m] = irf_[m].real();
    return out;
}

// ---------------------------------------------------------------------------

void SamplingSchedule::validate() const {
    if (!(delta_t_s > 0.0) || !std::isfinite(delta_t_s))
        throw InvalidParameter("sampling integration window must be positive");
    if (!(period > 0.0) || !std::isfinite(period)) throw InvalidParameter("sampling period must be positive");
    if (samples_per_period < 1) throw InvalidParameter("samples_per_period must be at least 1");
}

void DspKernel::validate() const {
    if (coefficients.empty()) throw DegenerateKernel("DSP kernel has no coefficients");
    bool any = false;
    for (double c : coefficients) {
        if (!std::isfinite(c)) throw InvalidParameter("DSP coefficient is not finite");
        any = any || c != 0.0;
    }
    if (!any) throw DegenerateKernel("all DSP coefficients are zero");
}

DspKernel DspKernel::single_point() { return {{1.0}, 1}; }

DspKernel DspKernel::uniform_average(int taps) {
    if (taps < 1) throw InvalidParameter("uniform average needs at least one tap");
    return weighted(std::vector<double>(static_cast<std::size_t>(taps), 1.0 / taps));
}

DspKernel DspKernel::weighted(std::vector<double> weights) {
    const int n = static_cast<int>(weights.size());
    return {std::move(weights), (n + 1) / 2};
}

DspKernel DspKernel::rrc_matched(double rolloff, int samples_per_symbol, int span) {
    if (!(rolloff > 0.0 && rolloff <= 1.0)) throw InvalidParameter("rrc rolloff must lie in (0, 1]");
    if (samples_per_symbol < 1 || span < 1) throw InvalidParameter("rrc kernel needs sps >= 1 and span >= 1");
    const int half = span * samples_per_symbol;
    std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
    for (int i = -half; i <= half; ++i)
        taps[static_cast<std::size_t>(i + half)] =
            rrc_impulse(static_cast<double>(i) / samples_per_symbol, rolloff, 1.0);
    return {std::move(taps), half + 1};
}

std::vector<double> window_starts(const SamplingSchedule& sampling, const DspKernel& dsp, double t_j) {
    std::vector<double> starts(dsp.size());
    const double spacing = sampling.spacing();
    for (std::size_t i = 0; i < starts.size(); ++i)
        starts[i] = t_j + static_cast<double>(static_cast<int>(i) + 1 - dsp.offset) * spacing;
    return starts;
}

DspKernel matched_average_kernel(const Wavepacket& signal_tm, const SamplingSchedule& sampling, double t_j,
                                 int taps) {
    sampling.validate();
    if (taps < 1) throw InvalidParameter("matched average needs at least one tap");
    DspKernel kernel{std::vector<double>(static_cast<std::size_t>(taps)), (taps + 1) / 2};

    const auto s = signal_tm.samples();
    std::size_t peak = 0;
    for (std::size_t k = 1; k < s.size(); ++k)
        if (std::abs(s[k]) > std::abs(s[peak])) peak = k;
    if (std::abs(s[peak]) == 0.0) throw DegenerateWavepacket("matched kernel for an all-zero signal");
    const complex align = std::conj(s[peak]) / std::abs(s[peak]);

    const TimeGrid& grid = signal_tm.grid();
    const auto starts = window_starts(sampling, kernel, t_j);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const double a = grid.position(starts[i]);
        const double b = grid.position(starts[i] + sampling.delta_t_s);
        const auto first = static_cast<long long>(std::ceil(a - 1e-9));
        const auto last = static_cast<long long>(std::ceil(b - 1e-9)) - 1;
        double sum = 0.0;
        long long count = 0;
        for (long long k = std::max(0LL, first); k <= std::min<long long>(last, (long long)s.size() - 1); ++k) {
            sum += (align * s[static_cast<std::size_t>(k)]).real();
            ++count;
        }
        kernel.coefficients[i] = count > 0 ? sum / static_cast<double>(count) : 0.0;
    }
    return kernel;
}

// ---------------------------------------------------------------------------

LocalOscillator LocalOscillator::cw(const TimeGrid& grid, double mu_lo, double theta, double omega_lo) {
    Wavepacket flat(grid, std::vector<complex>(grid.size(), complex(1.0 / std::sqrt(grid.duration()), 0.0)));
    return {mu_lo, std::move(flat), omega_lo, theta};
}

LocalOscillator LocalOscillator::pulsed(const PulseShape& shape, const TimeGrid& grid, double center,
                                        double mu_lo, double theta, double omega_lo) {
    return {mu_lo, render_pulse(shape, grid, center), omega_lo, theta};
}

void LocalOscillator::validate() const {
    if (!(mu_lo > 0.0) || !std::isfinite(mu_lo)) throw InvalidParameter("LO photon number must be positive");
    if (!xi_lo.is_normalized()) throw InvalidParameter("LO envelope must be normalized");
    if (!std::isfinite(omega_lo) || !std::isfinite(theta)) throw InvalidParameter("LO phase parameters must be finite");
}

void ReceiverChain::validate() const {
    lo.validate();
    sampling.validate();
    dsp.validate();
    if (!filter.irf().grid().same_spacing(grid()))
        throw GridMismatch("detector filter and LO envelope use different sample spacings");
}

// ---------------------------------------------------------------------------

Wavepacket gdsp_kernel(const ReceiverChain& chain, double t_j) {
    chain.validate();
    const TimeGrid& grid = chain.grid();
    const double dt = grid.dt();
    const double window = chain.sampling.delta_t_s;
    const double support = chain.filter.support();
    const auto starts = window_starts(chain.sampling, chain.dsp, t_j);
    const double tol = 1e-9 * dt;
    for (double s : starts) {
        if (s < grid.t_start() - tol || s + window > grid.t_end() + tol) {
            std::ostringstream os;
            os << "sampling window [" << s << ", " << s + window << "] s leaves the grid [" << grid.t_start()
               << ", " << grid.t_end() << "] s";
            throw TruncationError(os.str());
        }
    }

    const auto n = static_cast<long long>(grid.size());
    std::vector<double> g(grid.size(), 0.0);
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const double f = chain.dsp.coefficients[i];
        if (f == 0.0) continue;
        const double s = starts[i];
        // C(s + dts - tau) - C(s - tau) vanishes unless s - L < tau < s + dts.
        const auto lo = std::max(0LL, static_cast<long long>(std::floor(grid.position(s - support))));
        const auto hi = std::min(n - 1, static_cast<long long>(std::ceil(grid.position(s + window))));
        for (long long k = lo; k <= hi; ++k) {
            const double tau = grid.time(static_cast<std::size_t>(k));
            g[static_cast<std::size_t>(k)] +=
                f * (chain.filter.cumulative(s + window - tau) - chain.filter.cumulative(s - tau));
        }
    }
    std::vector<complex> samples(g.begin(), g.end());
    return {grid, std::move(samples)};
}

namespace {

double snu_variance_of(const ReceiverChain& chain, const Wavepacket& g) {
    const auto lo = chain.lo.xi_lo.samples();
    const auto gs = g.samples();
    double s = 0.0;
    for (std::size_t k = 0; k < gs.size(); ++k) s += std::norm(lo[k]) * gs[k].real() * gs[k].real();
    const double dts = chain.sampling.delta_t_s;
    return chain.lo.mu_lo / (dts * dts) * s * g.grid().dt();
}

double checked_sigma(double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance))
        throw DegenerateKernel("shot-noise variance vanishes: the DSP output carries no LO-weighted signal");
    return std::sqrt(variance);
}

} // namespace

double snu_variance(const ReceiverChain& chain, double t_j) { return snu_variance_of(chain, gdsp_kernel(chain, t_j)); }

double snu_sigma(const ReceiverChain& chain, double t_j) { return checked_sigma(snu_variance(chain, t_j)); }

Wavepacket dsp_temporal_mode(const ReceiverChain& chain, double t_j) {
    const Wavepacket g = gdsp_kernel(chain, t_j);
    const double sigma = checked_sigma(snu_variance_of(chain, g));
    const double scale = std::sqrt(chain.lo.mu_lo) / (chain.sampling.delta_t_s * sigma);
    const TimeGrid& grid = chain.grid();
    const auto lo = chain.lo.xi_lo.samples();
    std::vector<complex> xi(grid.size());
    for (std::size_t k = 0; k < xi.size(); ++k) {
        const double gk = g[k].real();
        if (gk == 0.0) continue;
        const double phase = -chain.lo.omega_lo * grid.time(k);
        xi[k] = lo[k] * gk * scale * complex(std::cos(phase), std::sin(phase));
    }
    return {grid, std::move(xi)};
}

complex mode_overlap(const ReceiverChain& chain, double t_j, const Wavepacket& signal_tm) {
    if (!signal_tm.is_normalized()) throw InvalidParameter("signal temporal mode must be normalized");
    return inner_product(dsp_temporal_mode(chain, t_j), signal_tm);
}

double mode_match_eta(const ReceiverChain& chain, double t_j, const Wavepacket& signal_tm) {
    return std::min(1.0, std::norm(mode_overlap(chain, t_j, signal_tm)));
}

Eigen::MatrixXcd crosstalk_matrix(const ReceiverChain& chain, const std::vector<double>& t_list) {
    std::vector<Wavepacket> modes;
    modes.reserve(t_list.size());
    for (double t : t_list) modes.push_back(dsp_temporal_mode(chain, t));
    const auto n = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = inner_product(modes[i], modes[i]);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            m(i, j) = inner_product(modes[i], modes[j]);
            m(j, i) = std::conj(m(i, j));
        }
    }
    return m;
}

double max_offdiagonal(const Eigen::MatrixXcd& m) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j) worst = std::max(worst, std::abs(m(i, j)));
    return worst;
}

Measurement effective_measurement(const ReceiverChain& chain, double t_j, complex gamma,
                                  const Wavepacket& signal_tm) {
    const complex c = mode_overlap(chain, t_j, signal_tm);
    const double theta = chain.lo.theta;
    return {2.0 * (gamma * c * complex(std::cos(theta), -std::sin(theta))).real(), 1.0};
}

Measurement effective_measurement(double eta, complex gamma, double theta) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw InvalidParameter("mode-matching efficiency must lie in [0, 1]");
    return {2.0 * std::sqrt(eta) * (gamma * complex(std::cos(theta), -std::sin(theta))).real(), 1.0};
}

SampleTimeOptimum optimal_sample_time(const ReceiverChain& chain, const Wavepacket& signal_tm, double t_lo,
                                      double t_hi, int coarse_steps) {
    if (!(t_hi > t_lo) || coarse_steps < 3) throw InvalidParameter("invalid sample-time search interval");
    auto eta_at = [&](double t) {
        try {
            return mode_match_eta(chain, t, signal_tm);
        } catch (const TruncationError&) {
            return -1.0;
        }
    };
    const double step = (t_hi - t_lo) / (coarse_steps - 1);
    int best = -1;
    double best_eta = -1.0;
    for (int i = 0; i < coarse_steps; ++i) {
        const double e = eta_at(t_lo + i * step);
        if (e > best_eta) best_eta = e, best = i;
    }
    if (best_eta < 0.0) throw TruncationError("no sample time in the search interval keeps the windows on the grid");

    double a = t_lo + std::max(0, best - 1) * step;
    double b = t_lo + std::min(coarse_steps - 1, best + 1) * step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = eta_at(c), fd = eta_at(d);
    const double tol = 1e-4 * chain.grid().dt();
    while (b - a > tol) {
        if (fc >= fd) {
            b = d, d = c, fd = fc;
            c = b - inv_phi * (b - a);
            fc = eta_at(c);
        } else {
            a = c, c = d, fc = fd;
            d = a + inv_phi * (b - a);
            fd = eta_at(d);
        }
    }
    const double t = 0.5 * (a + b);
    const double e = eta_at(t);
    if (e >= best_eta) return {t, e};
    return {t_lo + best * step, best_eta};
}

} // namespace dcvqkd
