#include "dcvqkd/runner.hpp"

#include "dcvqkd/errors.hpp"
#include "dcvqkd/montecarlo.hpp"
#include "dcvqkd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace dcvqkd {

namespace {

constexpr double kPs = 1e-12;

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

    void write(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        write_row(out, header_);
        for (const auto& r : rows_) write_row(out, r);
    }

private:
    static std::string quote(const std::string& field) {
        if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
        std::string q = "\"";
        for (char c : field) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    }

    static void write_row(std::ofstream& out, const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << quote(row[i]);
        out << "\r\n";
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

RunOutcome finish(const Scenario& s, const RunOptions& opt, const CsvTable& table, const std::string& report,
                  int exit_code) {
    std::filesystem::create_directories(opt.out_dir);
    RunOutcome o;
    o.exit_code = exit_code;
    o.csv = opt.out_dir / (s.name + "_results.csv");
    o.report = opt.out_dir / (s.name + "_report.txt");
    table.write(o.csv);
    std::ofstream(o.report) << report;
    o.summary = report;
    return o;
}

std::string header_block(const Scenario& s, const BuiltScenario& b, const char* command) {
    std::ostringstream os;
    os << "scenario: " << s.name << " (" << command << ")\n"
       << "grid: " << b.grid.size() << " samples, dt = " << format_number(b.grid.dt() / kPs) << " ps\n"
       << "signal: " << describe(b.pulse) << " at " << format_number(b.pulse_center / kPs) << " ps\n"
       << "receiver: irf " << describe(b.chain.filter.kind()) << ", window "
       << format_number(b.chain.sampling.delta_t_s / kPs) << " ps, " << b.chain.dsp.size() << " DSP taps\n";
    if (auto w = resolution_warning(b.grid, std::min(b.chain.filter.characteristic_width(),
                                                     2.0 * pulse_half_extent(b.pulse))))
        if (!std::holds_alternative<DeltaLikeIrf>(b.chain.filter.kind())) os << "warning: " << *w << "\n";
    return os.str();
}

std::vector<double> distance_points(const Scenario& s) {
    if (s.sweep && s.sweep->variable == "z_km") return s.sweep->values();
    return SweepConfig{}.values();
}

ChannelSpec channel_for(const BuiltScenario& b, double beta2) {
    ChannelSpec c = b.channel;
    c.beta2_ps2_per_km = beta2;
    return c;
}

} // namespace

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double resolve_sample_time(const Scenario& s, const BuiltScenario& b) {
    if (s.receiver.t_j_ps) return *s.receiver.t_j_ps * kPs;
    const double reach = 2.0 * pulse_half_extent(b.pulse);
    const double t_lo = std::max(b.grid.t_start(), b.pulse_center - reach);
    const double t_hi = std::min(b.grid.t_end(), b.pulse_center + reach + b.chain.filter.support());
    return optimal_sample_time(b.chain, b.signal_tm, t_lo, t_hi).t_j;
}

RunOutcome run_simulate(const Scenario& s, const RunOptions& opt) {
    if (!s.channel) throw ConfigError("missing field: channel");
    const BuiltScenario b = build(s);
    const double t_j = resolve_sample_time(s, b);
    const auto z = distance_points(s);

    CsvTable table({"beta2_ps2_per_km", "z_km", "transmittance", "eta_tm", "rate_bits_per_symbol",
                    "mutual_info_bits", "holevo_bits", "below_threshold"});
    std::ostringstream rep;
    rep << header_block(s, b, "simulate") << "sample time t_j: " << format_number(t_j / kPs) << " ps\n"
        << "key rate: V_A=" << b.keyrate.V_A << " SNU, epsilon=" << b.keyrate.epsilon << " SNU, beta="
        << b.keyrate.beta_rec << ", eta_det=" << b.keyrate.eta_det << ", v_el=" << b.keyrate.v_el << ", "
        << to_string(b.keyrate.detection) << ", mode loss " << to_string(b.keyrate.mode_loss) << "\n";
    for (double beta2 : s.channel->beta2_ps2_per_km) {
        const auto curve =
            rate_vs_distance(b.pulse, b.pulse_center, b.chain, t_j, channel_for(b, beta2), b.keyrate, z, opt.threads);
        for (const auto& p : curve)
            table.add_row({format_number(beta2), format_number(p.z_km), format_number(p.transmittance),
                           format_number(p.eta_tm), format_number(p.result.rate), format_number(p.result.mutual_info),
                           format_number(p.result.holevo), p.result.below_threshold ? "1" : "0"});
        const double cutoff = cutoff_distance(curve);
        rep << "beta2 = " << format_number(beta2) << " ps^2/km: eta_tm(z_max) = " << format_number(curve.back().eta_tm)
            << ", cutoff distance = "
            << (std::isnan(cutoff)   ? std::string("none")
                : std::isinf(cutoff) ? "beyond " + format_number(curve.back().z_km) + " km"
                                     : format_number(cutoff) + " km")
            << "\n";
    }
    return finish(s, opt, table, rep.str(), kExitOk);
}

RunOutcome run_calibrate(const Scenario& s, const RunOptions& opt) {
    if (!s.montecarlo) throw ConfigError("missing field: montecarlo");
    const BuiltScenario b = build(s);
    const double t_j = resolve_sample_time(s, b);
    const auto& mc = *s.montecarlo;
    const std::uint64_t seed = opt.seed.value_or(mc.seed);
    const auto mode = mc.mode == "raw_samples" ? CalibrationMode::raw_samples : CalibrationMode::same_dsp;
    const CalibrationReport r = calibrate_snu_empirical(b.chain, t_j, mc.n_shots, seed, mode, opt.threads);

    CsvTable table({"mode", "n_shots", "seed", "t_j_ps", "sigma_empirical", "sigma_analytic", "variance_ratio",
                    "z_score", "mean_snu", "mean_z_score", "passed"});
    table.add_row({to_string(mode), std::to_string(r.n_shots), std::to_string(r.seed), format_number(t_j / kPs),
                   format_number(r.sigma_empirical), format_number(r.sigma_analytic),
                   format_number(std::pow(r.sigma_empirical / r.sigma_analytic, 2)), format_number(r.z_score),
                   format_number(r.mean_snu), format_number(r.mean_z_score), r.passed() ? "1" : "0"});
    std::ostringstream rep;
    rep << header_block(s, b, "calibrate") << "CalibrationReport\n"
        << "  mode            " << to_string(mode) << "\n"
        << "  n_shots         " << r.n_shots << "\n"
        << "  seed            " << r.seed << "\n"
        << "  sigma_empirical " << format_number(r.sigma_empirical) << "\n"
        << "  sigma_analytic  " << format_number(r.sigma_analytic) << "\n"
        << "  z_score         " << format_number(r.z_score) << "\n"
        << "  mean (SNU)      " << format_number(r.mean_snu) << " (z = " << format_number(r.mean_z_score) << ")\n"
        << "  result          " << (r.passed() ? "PASS (|z| < 3)" : "FAIL (|z| >= 3)") << "\n";
    return finish(s, opt, table, rep.str(), r.passed() ? kExitOk : kExitRuntime);
}

RunOutcome run_compare_kernels(const Scenario& s, const RunOptions& opt) {
    if (s.kernels.size() < 2)
        throw ConfigError("field kernels: compare-kernels needs at least 2 kernels (got " +
                          std::to_string(s.kernels.size()) + ")");
    const BuiltScenario b = build(s);
    const double t_ref = s.receiver.t_j_ps ? *s.receiver.t_j_ps * kPs : b.pulse_center - 0.5 * b.chain.sampling.delta_t_s;

    struct Row {
        std::string name;
        double t_j;
        double eta;
    };
    std::vector<Row> rows(s.kernels.size());
    parallel_for(rows.size(), opt.threads, [&](std::size_t i) {
        const auto& k = s.kernels[i];
        ReceiverChain chain = b.chain;
        chain.dsp = build_dsp(k.dsp, chain.sampling, b.signal_tm, t_ref, "kernels." + k.name);
        double t_j = t_ref;
        double eta;
        if (s.receiver.t_j_ps) {
            eta = mode_match_eta(chain, t_j, b.signal_tm);
        } else {
            const double reach = chain.sampling.spacing() * static_cast<double>(chain.dsp.size()) + pulse_half_extent(b.pulse);
            const auto best = optimal_sample_time(chain, b.signal_tm, std::max(b.grid.t_start(), t_ref - reach),
                                                  std::min(b.grid.t_end(), t_ref + reach + chain.filter.support()));
            t_j = best.t_j;
            eta = best.eta;
        }
        rows[i] = {k.name, t_j, eta};
    });
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.eta != b.eta) return a.eta > b.eta;
        return a.name < b.name;
    });

    CsvTable table({"rank", "kernel", "t_j_ps", "eta_tm"});
    std::ostringstream rep;
    rep << header_block(s, b, "compare-kernels") << "ranking by mode-matching efficiency:\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        table.add_row({std::to_string(i + 1), rows[i].name, format_number(rows[i].t_j / kPs), format_number(rows[i].eta)});
        rep << "  " << i + 1 << ". " << rows[i].name << "  eta = " << format_number(rows[i].eta) << "\n";
    }
    return finish(s, opt, table, rep.str(), kExitOk);
}

RunOutcome run_sweep(const Scenario& s, const RunOptions& opt) {
    if (!s.sweep) throw ConfigError("missing field: sweep");
    const auto& sw = *s.sweep;
    if (sw.variable == "z_km") return run_simulate(s, opt);

    const BuiltScenario b = build(s);
    const auto values = sw.values();
    std::ostringstream rep;
    rep << header_block(s, b, "sweep");

    if (sw.variable == "offset_ps") {
        if (!s.channel) throw ConfigError("missing field: channel");
        const double t_opt = resolve_sample_time(s, b);
        std::vector<double> offsets;
        for (double v : values) offsets.push_back(v * kPs);
        CsvTable table({"beta2_ps2_per_km", "z_km", "offset_ps", "eta_tm", "rate_bits_per_symbol"});
        rep << "optimal sample time: " << format_number(t_opt / kPs) << " ps\n";
        for (double beta2 : s.channel->beta2_ps2_per_km) {
            const ChannelSpec ch = channel_for(b, beta2);
            const auto pts = sampling_offset_sensitivity(b.chain, t_opt, b.pulse, b.pulse_center, ch, b.keyrate,
                                                         offsets, opt.threads);
            for (const auto& p : pts)
                table.add_row({format_number(beta2), format_number(ch.z_km), format_number(p.offset / kPs),
                               format_number(p.eta), format_number(p.result.rate)});
            const auto out = propagate_compensated(b.signal_tm, ch).output;
            const double h = std::max(b.grid.dt(), 1.0 * kPs);
            rep << "beta2 = " << format_number(beta2) << " ps^2/km, z = " << format_number(ch.z_km)
                << " km: peak curvature " << format_number(eta_peak_curvature(b.chain, t_opt, out, h) * kPs * kPs)
                << " /ps^2\n";
        }
        return finish(s, opt, table, rep.str(), kExitOk);
    }

    // irf_fwhm_ps: Gaussian detector response of varying width, single output
    // time re-optimized per point.
    CsvTable table({"irf_fwhm_ps", "t_j_ps", "eta_tm"});
    std::vector<std::pair<double, double>> res(values.size());
    parallel_for(values.size(), opt.threads, [&](std::size_t i) {
        ReceiverChain chain = b.chain;
        chain.filter = DetectorFilter(GaussianIrf{values[i] * kPs}, b.grid.dt());
        const double reach = 2.0 * pulse_half_extent(b.pulse);
        const auto best = optimal_sample_time(chain, b.signal_tm, std::max(b.grid.t_start(), b.pulse_center - reach),
                                              std::min(b.grid.t_end(), b.pulse_center + reach + chain.filter.support()));
        res[i] = {best.t_j, best.eta};
    });
    for (std::size_t i = 0; i < values.size(); ++i)
        table.add_row({format_number(values[i]), format_number(res[i].first / kPs), format_number(res[i].second)});
    const auto best = std::max_element(res.begin(), res.end(), [](auto& a, auto& c) { return a.second < c.second; });
    rep << "best eta " << format_number(best->second) << " at irf_fwhm_ps = "
        << format_number(values[static_cast<std::size_t>(best - res.begin())]) << "\n";
    return finish(s, opt, table, rep.str(), kExitOk);
}

} // namespace dcvqkd
