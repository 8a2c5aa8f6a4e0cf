#include "dcvqkd/channel.hpp"
#include "dcvqkd/errors.hpp"
#include "dcvqkd/keyrate.hpp"
#include "dcvqkd/receiver.hpp"
#include "dcvqkd/runner.hpp"
#include "dcvqkd/scenario.hpp"
#include "dcvqkd/transmitter.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace dcvqkd;

namespace {

py::array_t<std::complex<double>> samples_of(const Wavepacket& w) {
    const auto s = w.samples();
    py::array_t<std::complex<double>> out(static_cast<py::ssize_t>(s.size()));
    std::copy(s.begin(), s.end(), out.mutable_data());
    return out;
}

py::array_t<double> times_of(const TimeGrid& g) {
    py::array_t<double> t(static_cast<py::ssize_t>(g.size()));
    auto v = t.mutable_unchecked<1>();
    for (std::size_t k = 0; k < g.size(); ++k) v(static_cast<py::ssize_t>(k)) = g.time(k);
    return t;
}

RunOutcome run(const std::string& command, const Scenario& s, const std::filesystem::path& out_dir,
               unsigned threads, std::optional<std::uint64_t> seed) {
    const RunOptions opt{out_dir, threads, seed};
    py::gil_scoped_release release;
    if (command == "simulate") return run_simulate(s, opt);
    if (command == "calibrate") return run_calibrate(s, opt);
    if (command == "compare-kernels") return run_compare_kernels(s, opt);
    if (command == "sweep") return run_sweep(s, opt);
    throw InvalidParameter("unknown command: " + command);
}

} // namespace

PYBIND11_MODULE(_dcvqkd, m) {
    m.doc() = "Temporal-mode effects in discrete-time CVQKD receivers";

    // Translators run newest first, so the base class is registered first.
    const auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", error);
    py::register_exception<GridMismatch>(m, "GridMismatch", error);
    py::register_exception<DegenerateWavepacket>(m, "DegenerateWavepacket", error);
    py::register_exception<TruncationError>(m, "TruncationError", error);
    py::register_exception<InvalidParameter>(m, "InvalidParameter", error);
    py::register_exception<DegenerateKernel>(m, "DegenerateKernel", error);
    py::register_exception<ResolutionError>(m, "ResolutionError", error);

    // signal and transmitter
    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, double, std::size_t>(), "t_start"_a, "dt"_a, "n"_a)
        .def_static("centered", &TimeGrid::centered, "center"_a, "dt"_a, "n"_a)
        .def_property_readonly("t_start", &TimeGrid::t_start)
        .def_property_readonly("dt", &TimeGrid::dt)
        .def_property_readonly("t_end", &TimeGrid::t_end)
        .def("__len__", &TimeGrid::size)
        .def("times", &times_of);

    py::class_<Wavepacket>(m, "Wavepacket")
        .def_property_readonly("grid", &Wavepacket::grid)
        .def_property_readonly("samples", &samples_of)
        .def("norm2", &Wavepacket::norm2)
        .def("__len__", &Wavepacket::size);

    py::class_<GaussianPulse>(m, "GaussianPulse")
        .def(py::init<double>(), "fwhm"_a)
        .def_readwrite("fwhm", &GaussianPulse::fwhm)
        .def("t0", &GaussianPulse::t0);
    py::class_<RectangularPulse>(m, "RectangularPulse")
        .def(py::init<double>(), "width"_a)
        .def_readwrite("width", &RectangularPulse::width);
    py::class_<RrcPulse>(m, "RrcPulse")
        .def(py::init<double, double, int>(), "rolloff"_a, "symbol_period"_a, "span"_a = 16)
        .def_readwrite("rolloff", &RrcPulse::rolloff)
        .def_readwrite("symbol_period", &RrcPulse::symbol_period)
        .def_readwrite("span", &RrcPulse::span);

    m.def("render_pulse", &render_pulse, "shape"_a, "grid"_a, "center"_a = 0.0);
    m.def("raised_cosine", &raised_cosine, "t"_a, "rolloff"_a, "symbol_period"_a);
    m.def("inner_product", &inner_product, "a"_a, "b"_a);

    // channel
    py::class_<ChannelSpec>(m, "ChannelSpec")
        .def(py::init([](double loss, double k1, double beta2, double z) { return ChannelSpec{loss, k1, beta2, z}; }),
             "loss_db_per_km"_a = 0.2, "k1_s_per_km"_a = 0.0, "beta2_ps2_per_km"_a = 0.0, "z_km"_a = 0.0)
        .def_readwrite("loss_db_per_km", &ChannelSpec::loss_db_per_km)
        .def_readwrite("k1_s_per_km", &ChannelSpec::k1_s_per_km)
        .def_readwrite("beta2_ps2_per_km", &ChannelSpec::beta2_ps2_per_km)
        .def_readwrite("z_km", &ChannelSpec::z_km)
        .def("transmittance", &ChannelSpec::transmittance);

    py::class_<Propagated>(m, "Propagated")
        .def_readonly("output", &Propagated::output)
        .def_readonly("transmittance", &Propagated::transmittance)
        .def_readonly("leakage", &Propagated::leakage);

    m.def("propagate", &propagate, "input"_a, "channel"_a);
    m.def("propagate_compensated", &propagate_compensated, "input"_a, "channel"_a);
    m.def("intensity_fwhm", &intensity_fwhm, "wavepacket"_a);

    // key rate
    py::enum_<Detection>(m, "Detection")
        .value("homodyne", Detection::homodyne)
        .value("heterodyne", Detection::heterodyne);
    py::enum_<ModeLossModel>(m, "ModeLossModel")
        .value("trusted", ModeLossModel::trusted)
        .value("untrusted", ModeLossModel::untrusted);

    py::class_<KeyRateParams>(m, "KeyRateParams")
        .def(py::init<>())
        .def_readwrite("V_A", &KeyRateParams::V_A)
        .def_readwrite("T_ch", &KeyRateParams::T_ch)
        .def_readwrite("eta_tm", &KeyRateParams::eta_tm)
        .def_readwrite("eta_det", &KeyRateParams::eta_det)
        .def_readwrite("epsilon", &KeyRateParams::epsilon)
        .def_readwrite("beta_rec", &KeyRateParams::beta_rec)
        .def_readwrite("v_el", &KeyRateParams::v_el)
        .def_readwrite("detection", &KeyRateParams::detection)
        .def_readwrite("mode_loss", &KeyRateParams::mode_loss)
        .def("total_transmittance", &KeyRateParams::total_transmittance)
        .def("channel_transmittance", &KeyRateParams::channel_transmittance)
        .def("receiver_efficiency", &KeyRateParams::receiver_efficiency)
        .def("validate", &KeyRateParams::validate);

    py::class_<KeyRateResult>(m, "KeyRateResult")
        .def_readonly("rate", &KeyRateResult::rate)
        .def_readonly("raw_rate", &KeyRateResult::raw_rate)
        .def_readonly("mutual_info", &KeyRateResult::mutual_info)
        .def_readonly("holevo", &KeyRateResult::holevo)
        .def_readonly("below_threshold", &KeyRateResult::below_threshold);

    py::class_<SymplecticSpectrum>(m, "SymplecticSpectrum")
        .def_readonly("nu1", &SymplecticSpectrum::nu1)
        .def_readonly("nu2", &SymplecticSpectrum::nu2)
        .def_readonly("nu3", &SymplecticSpectrum::nu3)
        .def_readonly("nu4", &SymplecticSpectrum::nu4);

    m.def("key_rate", &key_rate, "params"_a);
    m.def("holevo_spectrum", &holevo_spectrum, "params"_a);
    m.def("thermal_entropy", &thermal_entropy, "mean_photons"_a);
    m.def("symplectic_entropy", &symplectic_entropy, "nu"_a);

    // scenarios and batch runs
    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def("dump", &dump_scenario)
        .def("__eq__", [](const Scenario& a, const Scenario& b) { return a == b; });

    m.def("parse_scenario", &parse_scenario, "text"_a);
    m.def("load_scenario", &load_scenario, "path"_a);

    m.def(
        "mode_match",
        [](const Scenario& s) {
            const BuiltScenario b = build(s);
            const double t_j = resolve_sample_time(s, b);
            return py::make_tuple(t_j, mode_match_eta(b.chain, t_j, b.signal_tm));
        },
        "scenario"_a, "(t_j, eta) of the scenario's receiver at its sample time, back to back.");

    py::class_<RunOutcome>(m, "RunOutcome")
        .def_readonly("exit_code", &RunOutcome::exit_code)
        .def_readonly("csv", &RunOutcome::csv)
        .def_readonly("report", &RunOutcome::report)
        .def_readonly("summary", &RunOutcome::summary);

    m.def("run", &run, "command"_a, "scenario"_a, "out_dir"_a = std::filesystem::path("."), "threads"_a = 1u,
          "seed"_a = py::none());
}
