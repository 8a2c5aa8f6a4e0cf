#pragma once

// Scenario files: one JSON document per run (comments allowed), versioned by
// a top-level "schema": 1. Values are stored in the file's units (ps, GHz,
// km, ...) so that dump -> parse round-trips exactly; `build()` converts them
// to SI objects.

#include "dcvqkd/channel.hpp"
#include "dcvqkd/keyrate.hpp"
#include "dcvqkd/receiver.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dcvqkd {

inline constexpr int kScenarioSchema = 1;

struct GridConfig {
    double center_ps = 0.0;
    double dt_ps = 0.1;
    std::size_t n = 0;
    bool operator==(const GridConfig&) const = default;
};

struct PulseConfig {
    std::string kind;  ///< gaussian | rectangular | rrc
    double fwhm_ps = 0.0;
    double width_ps = 0.0;
    double rolloff = 0.0;
    double symbol_period_ps = 0.0;
    int span = 16;
    bool operator==(const PulseConfig&) const = default;
};

struct TransmitterConfig {
    PulseConfig pulse;
    double center_ps = 0.0;
    bool operator==(const TransmitterConfig&) const = default;
};

struct ChannelConfig {
    double loss_db_per_km = 0.2;
    double k1_s_per_km = 0.0;
    std::vector<double> beta2_ps2_per_km{0.0};
    double z_km = 0.0;  ///< distance used by non-distance sweeps
    bool operator==(const ChannelConfig&) const = default;
};

struct LoConfig {
    std::string kind = "cw";  ///< cw | pulsed
    double mu_lo = 1e8;
    double theta_rad = 0.0;
    double omega_rad_per_s = 0.0;
    std::optional<PulseConfig> pulse;  ///< pulsed only
    double center_ps = 0.0;
    bool operator==(const LoConfig&) const = default;
};

struct IrfConfig {
    std::string kind;  ///< delta_like | one_pole_lowpass | gaussian_irf
    double bandwidth_ghz = 0.0;
    double fwhm_ps = 0.0;
    bool operator==(const IrfConfig&) const = default;
};

struct SamplingConfig {
    double delta_t_s_ps = 1.0;
    double period_ps = 100.0;
    int samples_per_period = 1;
    bool operator==(const SamplingConfig&) const = default;
};

struct DspConfig {
    /// single_point | uniform_average | matched_weighted_average | weights | rrc_matched
    std::string kind;
    int taps = 1;
    std::vector<double> coefficients;
    std::optional<int> offset;
    double rolloff = 0.3;
    int span = 16;
    bool operator==(const DspConfig&) const = default;
};

struct ReceiverConfig {
    LoConfig lo;
    IrfConfig irf;
    SamplingConfig sampling;
    DspConfig dsp;
    std::optional<double> t_j_ps;  ///< absent: optimize against the transmitted pulse
    bool operator==(const ReceiverConfig&) const = default;
};

struct KeyRateConfig {
    double V_A = 4.0;
    double epsilon = 0.01;
    double beta = 0.95;
    double eta_det = 0.6;
    double v_el = 0.05;
    std::string detection = "homodyne";
    std::string mode_loss = "trusted";
    bool operator==(const KeyRateConfig&) const = default;
};

struct SweepConfig {
    std::string variable = "z_km";  ///< z_km | offset_ps | irf_fwhm_ps
    double start = 0.0;
    double stop = 100.0;
    int steps = 101;
    std::vector<double> values() const;
    bool operator==(const SweepConfig&) const = default;
};

struct MonteCarloConfig {
    std::size_t n_shots = 100000;
    std::uint64_t seed = 1;
    std::string mode = "same_dsp";
    bool operator==(const MonteCarloConfig&) const = default;
};

struct KernelEntry {
    std::string name;
    DspConfig dsp;
    bool operator==(const KernelEntry&) const = default;
};

struct Scenario {
    int schema = kScenarioSchema;
    std::string name;
    GridConfig grid;
    TransmitterConfig transmitter;
    std::optional<ChannelConfig> channel;
    ReceiverConfig receiver;
    KeyRateConfig keyrate;
    std::optional<SweepConfig> sweep;
    std::optional<MonteCarloConfig> montecarlo;
    std::vector<KernelEntry> kernels;
    bool operator==(const Scenario&) const = default;
};

/// Parses and checks field presence/types. Throws ConfigError with messages
/// such as "missing field: receiver.irf.kind" or a line/column parse error.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& s);
std::string dump_scenario(const Scenario& s);

/// SI objects assembled from a scenario.
struct BuiltScenario {
    TimeGrid grid;
    PulseShape pulse;
    double pulse_center;
    Wavepacket signal_tm;
    ReceiverChain chain;
    ChannelSpec channel;  ///< beta2 = first configured value
    KeyRateParams keyrate;
};

PulseShape build_pulse(const PulseConfig& c, const std::string& where);
IrfKind build_irf(const IrfConfig& c);
/// `signal_tm` and `t_ref` are used by the matched_weighted_average kernel.
DspKernel build_dsp(const DspConfig& c, const SamplingSchedule& sampling, const Wavepacket& signal_tm,
                    double t_ref, const std::string& where);
KeyRateParams build_keyrate(const KeyRateConfig& c);

/// Builds and validates every block. Module errors are rethrown unchanged.
BuiltScenario build(const Scenario& s);

} // namespace dcvqkd
