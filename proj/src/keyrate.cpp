#include "dcvqkd/keyrate.hpp"

#include "dcvqkd/errors.hpp"
#include "dcvqkd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcvqkd {

const char* to_string(Detection d) { return d == Detection::homodyne ? "homodyne" : "heterodyne"; }
const char* to_string(ModeLossModel m) { return m == ModeLossModel::trusted ? "trusted" : "untrusted"; }

double KeyRateParams::channel_transmittance() const {
    return mode_loss == ModeLossModel::untrusted ? T_ch * eta_tm : T_ch;
}

double KeyRateParams::receiver_efficiency() const {
    return mode_loss == ModeLossModel::trusted ? eta_det * eta_tm : eta_det;
}

void KeyRateParams::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!(V_A > 0.0) || !finite(V_A)) throw InvalidParameter("V_A must be positive");
    if (!(T_ch > 0.0 && T_ch <= 1.0)) throw InvalidParameter("T_ch must lie in (0, 1]");
    if (!(eta_tm >= 0.0 && eta_tm <= 1.0)) throw InvalidParameter("eta_tm must lie in [0, 1]");
    if (!(eta_det > 0.0 && eta_det <= 1.0)) throw InvalidParameter("eta_det must lie in (0, 1]");
    if (!(epsilon >= 0.0) || !finite(epsilon)) throw InvalidParameter("excess noise must be non-negative");
    if (!(beta_rec > 0.0 && beta_rec <= 1.0)) throw InvalidParameter("reconciliation efficiency must lie in (0, 1]");
    if (!(v_el >= 0.0) || !finite(v_el)) throw InvalidParameter("electronic noise must be non-negative");
}

double thermal_entropy(double x) {
    if (x <= 0.0) return 0.0;
    return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

double symplectic_entropy(double nu) { return thermal_entropy(std::max(0.0, (nu - 1.0) / 2.0)); }

namespace {

struct NoiseBudget {
    double V;          // Alice's EPR variance V_A + 1
    double T;          // channel transmittance
    double chi_line;   // channel noise referred to the input: 1/T - 1 + epsilon / T_ch
    double chi_det;    // detection-added noise referred to the detector input
    double chi_tot;
};

NoiseBudget budget(const KeyRateParams& p) {
    NoiseBudget b{};
    b.V = p.V_A + 1.0;
    b.T = p.channel_transmittance();
    const double eta = p.receiver_efficiency();
    b.chi_line = 1.0 / b.T - 1.0 + p.epsilon / p.T_ch;
    b.chi_det = p.detection == Detection::homodyne ? (1.0 - eta + p.v_el) / eta
                                                   : (1.0 + (1.0 - eta) + 2.0 * p.v_el) / eta;
    b.chi_tot = b.chi_line + b.chi_det / b.T;
    return b;
}

std::pair<double, double> roots(double sum, double product) {
    // Eigenvalues nu^2 of x^2 - sum x + product = 0.
    const double disc = std::sqrt(std::max(0.0, sum * sum - 4.0 * product));
    const double hi = 0.5 * (sum + disc);
    const double lo = hi > 0.0 ? product / hi : 0.0;
    return {std::sqrt(std::max(hi, 0.0)), std::sqrt(std::max(lo, 0.0))};
}

} // namespace

SymplecticSpectrum holevo_spectrum(const KeyRateParams& params) {
    params.validate();
    if (params.channel_transmittance() <= 0.0 || params.receiver_efficiency() <= 0.0)
        throw InvalidParameter("total transmittance must be positive");
    const NoiseBudget b = budget(params);
    const double V = b.V, T = b.T;

    const double A = V * V * (1.0 - 2.0 * T) + 2.0 * T + T * T * (V + b.chi_line) * (V + b.chi_line);
    const double B = std::pow(T * (V * b.chi_line + 1.0), 2);
    const double sqrtB = std::sqrt(B);
    const auto [nu1, nu2] = roots(A, B);

    double C, D;
    const double denom = T * (V + b.chi_tot);
    if (params.detection == Detection::homodyne) {
        C = (V * sqrtB + T * (V + b.chi_line) + A * b.chi_det) / denom;
        D = sqrtB * (V + sqrtB * b.chi_det) / denom;
    } else {
        const double c = b.chi_det;
        C = (A * c * c + B + 1.0 + 2.0 * c * (V * sqrtB + T * (V + b.chi_line)) + 2.0 * T * (V * V - 1.0)) /
            (denom * denom);
        D = std::pow((V + sqrtB * c) / denom, 2);
    }
    const auto [nu3, nu4] = roots(C, D);
    return {nu1, nu2, nu3, nu4};
}

KeyRateResult key_rate(const KeyRateParams& params) {
    params.validate();
    KeyRateResult r{};
    if (params.total_transmittance() <= 0.0) {
        r.below_threshold = true;
        return r;
    }
    const NoiseBudget b = budget(params);
    const double ratio = (b.V + b.chi_tot) / (1.0 + b.chi_tot);
    r.mutual_info = (params.detection == Detection::homodyne ? 0.5 : 1.0) * std::log2(ratio);

    const auto s = holevo_spectrum(params);
    r.holevo = std::max(0.0, symplectic_entropy(s.nu1) + symplectic_entropy(s.nu2) - symplectic_entropy(s.nu3) -
                                 symplectic_entropy(s.nu4));
    r.raw_rate = params.beta_rec * r.mutual_info - r.holevo;
    r.below_threshold = !(r.raw_rate > 0.0);
    r.rate = r.below_threshold ? 0.0 : r.raw_rate;
    return r;
}

std::vector<RatePoint> rate_vs_distance(const PulseShape& shape, double center, const ReceiverChain& chain,
                                        double t_j, const ChannelSpec& channel, const KeyRateParams& params,
                                        const std::vector<double>& z_km, unsigned threads) {
    params.validate();
    const Wavepacket receiver_tm = dsp_temporal_mode(chain, t_j);
    const Wavepacket input = render_pulse(shape, chain.grid(), center);
    std::vector<RatePoint> out(z_km.size());
    parallel_for(z_km.size(), threads, [&](std::size_t i) {
        const ChannelSpec ch = channel.at_distance(z_km[i]);
        const auto p = propagate_compensated(input, ch);
        KeyRateParams kp = params;
        kp.T_ch = p.transmittance;
        kp.eta_tm = std::min(1.0, std::norm(inner_product(receiver_tm, p.output)));
        out[i] = {z_km[i], p.transmittance, kp.eta_tm, key_rate(kp)};
    });
    return out;
}

std::vector<OffsetPoint> sampling_offset_sensitivity(const ReceiverChain& chain, double t_opt,
                                                     const PulseShape& shape, double center,
                                                     const ChannelSpec& channel, const KeyRateParams& params,
                                                     const std::vector<double>& offsets, unsigned threads) {
    params.validate();
    const auto p = propagate_compensated(render_pulse(shape, chain.grid(), center), channel);
    std::vector<OffsetPoint> out(offsets.size());
    parallel_for(offsets.size(), threads, [&](std::size_t i) {
        KeyRateParams kp = params;
        kp.T_ch = p.transmittance;
        kp.eta_tm = mode_match_eta(chain, t_opt + offsets[i], p.output);
        out[i] = {offsets[i], kp.eta_tm, key_rate(kp)};
    });
    return out;
}

double eta_peak_curvature(const ReceiverChain& chain, double t_opt, const Wavepacket& signal_tm, double h) {
    if (!(h > 0.0)) throw InvalidParameter("curvature step must be positive");
    const double e0 = mode_match_eta(chain, t_opt, signal_tm);
    const double ep = mode_match_eta(chain, t_opt + h, signal_tm);
    const double em = mode_match_eta(chain, t_opt - h, signal_tm);
    return std::abs(ep - 2.0 * e0 + em) / (h * h);
}

double cutoff_distance(const std::vector<RatePoint>& curve) {
    bool seen_positive = false;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (curve[i].result.rate > 0.0) {
            seen_positive = true;
            continue;
        }
        if (!seen_positive) continue;
        const RatePoint& a = curve[i - 1];
        const RatePoint& b = curve[i];
        const double ra = a.result.raw_rate, rb = b.result.raw_rate;
        if (!(ra > rb)) return b.z_km;
        return a.z_km + (b.z_km - a.z_km) * ra / (ra - rb);
    }
    return seen_positive ? std::numeric_limits<double>::infinity() : std::numeric_limits<double>::quiet_NaN();
}

} // namespace dcvqkd
