#include "dcvqkd/scenario.hpp"

#include "dcvqkd/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace dcvqkd {

using nlohmann::json;

namespace {

constexpr double kPs = 1e-12;

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError("missing field: " + join(path, key));
    return obj.at(key);
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError("field " + where + ": expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError("field " + where + ": expected an integer");
    return v.get<int>();
}

std::uint64_t as_u64(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        throw ConfigError("field " + where + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError("field " + where + ": expected a string");
    return v.get<std::string>();
}

std::vector<double> as_numbers(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) throw ConfigError("field " + where + ": expected a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

double req_number(const json& obj, const std::string& key, const std::string& path) {
    return as_number(require(obj, key, path), join(path, key));
}

double opt_number(const json& obj, const std::string& key, const std::string& path, double fallback) {
    return obj.contains(key) ? as_number(obj.at(key), join(path, key)) : fallback;
}

int opt_int(const json& obj, const std::string& key, const std::string& path, int fallback) {
    return obj.contains(key) ? as_int(obj.at(key), join(path, key)) : fallback;
}

std::string opt_string(const json& obj, const std::string& key, const std::string& path, std::string fallback) {
    return obj.contains(key) ? as_string(obj.at(key), join(path, key)) : fallback;
}

const json& require_object(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_object()) throw ConfigError("field " + join(path, key) + ": expected an object");
    return v;
}

void check_choice(const std::string& value, std::initializer_list<const char*> allowed, const std::string& where) {
    for (const char* a : allowed)
        if (value == a) return;
    std::string msg = "field " + where + ": unknown value \"" + value + "\" (expected one of";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw ConfigError(msg + ")");
}

PulseConfig parse_pulse(const json& j, const std::string& path) {
    PulseConfig c;
    c.kind = as_string(require(j, "kind", path), join(path, "kind"));
    check_choice(c.kind, {"gaussian", "rectangular", "rrc"}, join(path, "kind"));
    if (c.kind == "gaussian") c.fwhm_ps = req_number(j, "fwhm_ps", path);
    if (c.kind == "rectangular") c.width_ps = req_number(j, "width_ps", path);
    if (c.kind == "rrc") {
        c.rolloff = req_number(j, "rolloff", path);
        c.symbol_period_ps = req_number(j, "symbol_period_ps", path);
        c.span = opt_int(j, "span", path, 16);
    }
    return c;
}

json pulse_json(const PulseConfig& c) {
    json j{{"kind", c.kind}};
    if (c.kind == "gaussian") j["fwhm_ps"] = c.fwhm_ps;
    if (c.kind == "rectangular") j["width_ps"] = c.width_ps;
    if (c.kind == "rrc") {
        j["rolloff"] = c.rolloff;
        j["symbol_period_ps"] = c.symbol_period_ps;
        j["span"] = c.span;
    }
    return j;
}

DspConfig parse_dsp(const json& j, const std::string& path) {
    DspConfig c;
    c.kind = as_string(require(j, "kind", path), join(path, "kind"));
    check_choice(c.kind, {"single_point", "uniform_average", "matched_weighted_average", "weights", "rrc_matched"},
                 join(path, "kind"));
    if (c.kind == "uniform_average" || c.kind == "matched_weighted_average")
        c.taps = as_int(require(j, "taps", path), join(path, "taps"));
    if (c.kind == "weights") c.coefficients = as_numbers(require(j, "coefficients", path), join(path, "coefficients"));
    if (c.kind == "rrc_matched") {
        c.rolloff = req_number(j, "rolloff", path);
        c.span = opt_int(j, "span", path, 16);
    }
    if (j.contains("offset")) c.offset = as_int(j.at("offset"), join(path, "offset"));
    return c;
}

json dsp_json(const DspConfig& c) {
    json j{{"kind", c.kind}};
    if (c.kind == "uniform_average" || c.kind == "matched_weighted_average") j["taps"] = c.taps;
    if (c.kind == "weights") j["coefficients"] = c.coefficients;
    if (c.kind == "rrc_matched") {
        j["rolloff"] = c.rolloff;
        j["span"] = c.span;
    }
    if (c.offset) j["offset"] = *c.offset;
    return j;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') ++line, col = 1;
        else ++col;
    }
    return {line, col};
}

} // namespace

std::vector<double> SweepConfig::values() const {
    std::vector<double> v(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i)
        v[static_cast<std::size_t>(i)] = steps == 1 ? start : start + (stop - start) * i / (steps - 1);
    return v;
}

Scenario parse_scenario(const std::string& text) {
    json root;
    try {
        root = json::parse(text, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
        std::ostringstream os;
        os << "config parse error at line " << line << ", column " << col << ": " << e.what();
        throw ConfigError(os.str());
    }
    if (!root.is_object()) throw ConfigError("config root must be an object");

    Scenario s;
    s.schema = as_int(require(root, "schema", ""), "schema");
    if (s.schema != kScenarioSchema)
        throw ConfigError("field schema: unsupported version " + std::to_string(s.schema) + " (expected 1)");
    s.name = as_string(require(root, "name", ""), "name");
    if (s.name.empty() || s.name.find_first_of("/\\") != std::string::npos)
        throw ConfigError("field name: must be a non-empty file-name-safe string");

    const json& g = require_object(root, "grid", "");
    s.grid.center_ps = opt_number(g, "center_ps", "grid", 0.0);
    s.grid.dt_ps = req_number(g, "dt_ps", "grid");
    s.grid.n = static_cast<std::size_t>(as_u64(require(g, "n", "grid"), "grid.n"));

    const json& tx = require_object(root, "transmitter", "");
    s.transmitter.pulse = parse_pulse(require_object(tx, "pulse", "transmitter"), "transmitter.pulse");
    s.transmitter.center_ps = opt_number(tx, "center_ps", "transmitter", 0.0);

    if (root.contains("channel")) {
        const json& ch = require_object(root, "channel", "");
        ChannelConfig c;
        c.loss_db_per_km = opt_number(ch, "loss_db_per_km", "channel", 0.2);
        c.k1_s_per_km = opt_number(ch, "k1_s_per_km", "channel", 0.0);
        if (ch.contains("beta2_ps2_per_km"))
            c.beta2_ps2_per_km = as_numbers(ch.at("beta2_ps2_per_km"), "channel.beta2_ps2_per_km");
        if (c.beta2_ps2_per_km.empty()) throw ConfigError("field channel.beta2_ps2_per_km: needs at least one value");
        c.z_km = opt_number(ch, "z_km", "channel", 0.0);
        s.channel = c;
    }

    const json& rx = require_object(root, "receiver", "");
    {
        const json& lo = require_object(rx, "lo", "receiver");
        LoConfig& c = s.receiver.lo;
        c.kind = as_string(require(lo, "kind", "receiver.lo"), "receiver.lo.kind");
        check_choice(c.kind, {"cw", "pulsed"}, "receiver.lo.kind");
        c.mu_lo = opt_number(lo, "mu_lo", "receiver.lo", 1e8);
        c.theta_rad = opt_number(lo, "theta_rad", "receiver.lo", 0.0);
        c.omega_rad_per_s = opt_number(lo, "omega_rad_per_s", "receiver.lo", 0.0);
        if (c.kind == "pulsed") {
            c.pulse = parse_pulse(require_object(lo, "pulse", "receiver.lo"), "receiver.lo.pulse");
            c.center_ps = opt_number(lo, "center_ps", "receiver.lo", 0.0);
        }
    }
    {
        const json& irf = require_object(rx, "irf", "receiver");
        IrfConfig& c = s.receiver.irf;
        c.kind = as_string(require(irf, "kind", "receiver.irf"), "receiver.irf.kind");
        check_choice(c.kind, {"delta_like", "one_pole_lowpass", "gaussian_irf"}, "receiver.irf.kind");
        if (c.kind == "one_pole_lowpass") c.bandwidth_ghz = req_number(irf, "bandwidth_ghz", "receiver.irf");
        if (c.kind == "gaussian_irf") c.fwhm_ps = req_number(irf, "fwhm_ps", "receiver.irf");
    }
    {
        const json& sm = require_object(rx, "sampling", "receiver");
        SamplingConfig& c = s.receiver.sampling;
        c.delta_t_s_ps = req_number(sm, "delta_t_s_ps", "receiver.sampling");
        c.period_ps = req_number(sm, "period_ps", "receiver.sampling");
        c.samples_per_period = opt_int(sm, "samples_per_period", "receiver.sampling", 1);
    }
    s.receiver.dsp = parse_dsp(require_object(rx, "dsp", "receiver"), "receiver.dsp");
    if (rx.contains("t_j_ps")) {
        const json& t = rx.at("t_j_ps");
        if (!(t.is_string() && t.get<std::string>() == "auto")) s.receiver.t_j_ps = as_number(t, "receiver.t_j_ps");
    }

    if (root.contains("keyrate")) {
        const json& k = require_object(root, "keyrate", "");
        KeyRateConfig& c = s.keyrate;
        c.V_A = opt_number(k, "V_A", "keyrate", c.V_A);
        c.epsilon = opt_number(k, "epsilon", "keyrate", c.epsilon);
        c.beta = opt_number(k, "beta", "keyrate", c.beta);
        c.eta_det = opt_number(k, "eta_det", "keyrate", c.eta_det);
        c.v_el = opt_number(k, "v_el", "keyrate", c.v_el);
        c.detection = opt_string(k, "detection", "keyrate", c.detection);
        check_choice(c.detection, {"homodyne", "heterodyne"}, "keyrate.detection");
        c.mode_loss = opt_string(k, "mode_loss", "keyrate", c.mode_loss);
        check_choice(c.mode_loss, {"trusted", "untrusted"}, "keyrate.mode_loss");
    }

    if (root.contains("sweep")) {
        const json& sw = require_object(root, "sweep", "");
        SweepConfig c;
        c.variable = as_string(require(sw, "variable", "sweep"), "sweep.variable");
        check_choice(c.variable, {"z_km", "offset_ps", "irf_fwhm_ps"}, "sweep.variable");
        c.start = req_number(sw, "start", "sweep");
        c.stop = req_number(sw, "stop", "sweep");
        c.steps = as_int(require(sw, "steps", "sweep"), "sweep.steps");
        if (c.steps < 1) throw ConfigError("field sweep.steps: must be at least 1");
        s.sweep = c;
    }

    if (root.contains("montecarlo")) {
        const json& mc = require_object(root, "montecarlo", "");
        MonteCarloConfig c;
        c.n_shots = static_cast<std::size_t>(as_u64(require(mc, "n_shots", "montecarlo"), "montecarlo.n_shots"));
        c.seed = as_u64(require(mc, "seed", "montecarlo"), "montecarlo.seed");
        c.mode = opt_string(mc, "mode", "montecarlo", c.mode);
        check_choice(c.mode, {"same_dsp", "raw_samples"}, "montecarlo.mode");
        s.montecarlo = c;
    }

    if (root.contains("kernels")) {
        const json& ks = root.at("kernels");
        if (!ks.is_array()) throw ConfigError("field kernels: expected an array");
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const std::string path = "kernels[" + std::to_string(i) + "]";
            KernelEntry e;
            e.name = as_string(require(ks[i], "name", path), join(path, "name"));
            e.dsp = parse_dsp(require_object(ks[i], "dsp", path), join(path, "dsp"));
            s.kernels.push_back(std::move(e));
        }
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

json to_json(const Scenario& s) {
    json j;
    j["schema"] = s.schema;
    j["name"] = s.name;
    j["grid"] = {{"center_ps", s.grid.center_ps}, {"dt_ps", s.grid.dt_ps}, {"n", s.grid.n}};
    j["transmitter"] = {{"pulse", pulse_json(s.transmitter.pulse)}, {"center_ps", s.transmitter.center_ps}};
    if (s.channel)
        j["channel"] = {{"loss_db_per_km", s.channel->loss_db_per_km},
                        {"k1_s_per_km", s.channel->k1_s_per_km},
                        {"beta2_ps2_per_km", s.channel->beta2_ps2_per_km},
                        {"z_km", s.channel->z_km}};
    const auto& r = s.receiver;
    json lo{{"kind", r.lo.kind},
            {"mu_lo", r.lo.mu_lo},
            {"theta_rad", r.lo.theta_rad},
            {"omega_rad_per_s", r.lo.omega_rad_per_s}};
    if (r.lo.kind == "pulsed" && r.lo.pulse) {
        lo["pulse"] = pulse_json(*r.lo.pulse);
        lo["center_ps"] = r.lo.center_ps;
    }
    json irf{{"kind", r.irf.kind}};
    if (r.irf.kind == "one_pole_lowpass") irf["bandwidth_ghz"] = r.irf.bandwidth_ghz;
    if (r.irf.kind == "gaussian_irf") irf["fwhm_ps"] = r.irf.fwhm_ps;
    j["receiver"] = {{"lo", lo},
                     {"irf", irf},
                     {"sampling",
                      {{"delta_t_s_ps", r.sampling.delta_t_s_ps},
                       {"period_ps", r.sampling.period_ps},
                       {"samples_per_period", r.sampling.samples_per_period}}},
                     {"dsp", dsp_json(r.dsp)}};
    if (r.t_j_ps) j["receiver"]["t_j_ps"] = *r.t_j_ps;
    else j["receiver"]["t_j_ps"] = "auto";
    j["keyrate"] = {{"V_A", s.keyrate.V_A},         {"epsilon", s.keyrate.epsilon},
                    {"beta", s.keyrate.beta},       {"eta_det", s.keyrate.eta_det},
                    {"v_el", s.keyrate.v_el},       {"detection", s.keyrate.detection},
                    {"mode_loss", s.keyrate.mode_loss}};
    if (s.sweep)
        j["sweep"] = {{"variable", s.sweep->variable},
                      {"start", s.sweep->start},
                      {"stop", s.sweep->stop},
                      {"steps", s.sweep->steps}};
    if (s.montecarlo)
        j["montecarlo"] = {{"n_shots", s.montecarlo->n_shots}, {"seed", s.montecarlo->seed}, {"mode", s.montecarlo->mode}};
    if (!s.kernels.empty()) {
        json ks = json::array();
        for (const auto& k : s.kernels) ks.push_back({{"name", k.name}, {"dsp", dsp_json(k.dsp)}});
        j["kernels"] = ks;
    }
    return j;
}

std::string dump_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

// ---------------------------------------------------------------------------

PulseShape build_pulse(const PulseConfig& c, const std::string& where) {
    PulseShape shape;
    if (c.kind == "gaussian") shape = GaussianPulse{c.fwhm_ps * kPs};
    else if (c.kind == "rectangular") shape = RectangularPulse{c.width_ps * kPs};
    else if (c.kind == "rrc") shape = RrcPulse{c.rolloff, c.symbol_period_ps * kPs, c.span};
    else throw ConfigError("field " + where + ".kind: unknown pulse kind \"" + c.kind + "\"");
    validate(shape);
    return shape;
}

IrfKind build_irf(const IrfConfig& c) {
    if (c.kind == "delta_like") return DeltaLikeIrf{};
    if (c.kind == "one_pole_lowpass") return OnePoleIrf{c.bandwidth_ghz * 1e9};
    if (c.kind == "gaussian_irf") return GaussianIrf{c.fwhm_ps * kPs};
    throw ConfigError("field receiver.irf.kind: unknown IRF kind \"" + c.kind + "\"");
}

DspKernel build_dsp(const DspConfig& c, const SamplingSchedule& sampling, const Wavepacket& signal_tm, double t_ref,
                    const std::string& where) {
    DspKernel k;
    if (c.kind == "single_point") k = DspKernel::single_point();
    else if (c.kind == "uniform_average") k = DspKernel::uniform_average(c.taps);
    else if (c.kind == "matched_weighted_average") k = matched_average_kernel(signal_tm, sampling, t_ref, c.taps);
    else if (c.kind == "weights") k = DspKernel::weighted(c.coefficients);
    else if (c.kind == "rrc_matched") {
        // One symbol period per transmitted symbol; the comb density sets the taps per symbol.
        k = DspKernel::rrc_matched(c.rolloff, sampling.samples_per_period, c.span);
    } else
        throw ConfigError("field " + where + ".kind: unknown DSP kind \"" + c.kind + "\"");
    if (c.offset) k.offset = *c.offset;
    k.validate();
    return k;
}

KeyRateParams build_keyrate(const KeyRateConfig& c) {
    KeyRateParams p;
    p.V_A = c.V_A;
    p.epsilon = c.epsilon;
    p.beta_rec = c.beta;
    p.eta_det = c.eta_det;
    p.v_el = c.v_el;
    p.detection = c.detection == "heterodyne" ? Detection::heterodyne : Detection::homodyne;
    p.mode_loss = c.mode_loss == "untrusted" ? ModeLossModel::untrusted : ModeLossModel::trusted;
    p.validate();
    return p;
}

BuiltScenario build(const Scenario& s) {
    if (s.grid.n < 2) throw InvalidParameter("grid.n must be at least 2");
    const TimeGrid grid = TimeGrid::centered(s.grid.center_ps * kPs, s.grid.dt_ps * kPs, s.grid.n);
    const PulseShape pulse = build_pulse(s.transmitter.pulse, "transmitter.pulse");
    const double center = s.transmitter.center_ps * kPs;
    Wavepacket signal = render_pulse(pulse, grid, center);

    const auto& r = s.receiver;
    LocalOscillator lo = r.lo.kind == "pulsed"
                             ? LocalOscillator::pulsed(build_pulse(*r.lo.pulse, "receiver.lo.pulse"), grid,
                                                       r.lo.center_ps * kPs, r.lo.mu_lo, r.lo.theta_rad,
                                                       r.lo.omega_rad_per_s)
                             : LocalOscillator::cw(grid, r.lo.mu_lo, r.lo.theta_rad, r.lo.omega_rad_per_s);
    const SamplingSchedule sampling{r.sampling.delta_t_s_ps * kPs, r.sampling.period_ps * kPs,
                                    r.sampling.samples_per_period};
    sampling.validate();
    // Matched weights are taken with the reference window centred on the pulse.
    const double t_ref = r.t_j_ps ? *r.t_j_ps * kPs : center - 0.5 * sampling.delta_t_s;
    DspKernel dsp = build_dsp(r.dsp, sampling, signal, t_ref, "receiver.dsp");
    ReceiverChain chain{std::move(lo), DetectorFilter(build_irf(r.irf), grid.dt()), sampling, std::move(dsp)};
    chain.validate();

    ChannelSpec channel;
    if (s.channel) {
        channel = {s.channel->loss_db_per_km, s.channel->k1_s_per_km, s.channel->beta2_ps2_per_km.front(),
                   s.channel->z_km};
        channel.validate();
    }
    for (const auto& k : s.kernels) build_dsp(k.dsp, sampling, signal, t_ref, "kernels." + k.name);
    if (s.montecarlo && s.montecarlo->n_shots < 1000)
        throw InvalidParameter("montecarlo.n_shots must be at least 1000");
    return {grid, pulse, center, std::move(signal), std::move(chain), channel, build_keyrate(s.keyrate)};
}

} // namespace dcvqkd
