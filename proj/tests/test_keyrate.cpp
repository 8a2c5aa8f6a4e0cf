#include "oracles.hpp"

#include "dcvqkd/errors.hpp"
#include "dcvqkd/keyrate.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace dcvqkd;

namespace {

constexpr double ps = 1e-12;

/// The same parameters through the covariance-matrix oracle.
oracle::CmResult via_oracle(const KeyRateParams& p) {
    const bool het = p.detection == Detection::heterodyne;
    const double T = p.channel_transmittance();
    const double eta = p.receiver_efficiency();
    const double chi_line = 1.0 / T - 1.0 + p.epsilon / p.T_ch;
    return oracle::gg02(p.V_A, T, chi_line, {{eta, oracle::detector_thermal(eta, p.v_el, het)}}, het);
}

double oracle_rate(const KeyRateParams& p) {
    const auto r = via_oracle(p);
    return p.beta_rec * r.mutual_info - r.holevo;
}

struct Fig3Setup {
    TimeGrid grid = TimeGrid::centered(0.0, 0.5 * ps, 3000);
    GaussianPulse pulse{20 * ps};
    ReceiverChain chain{LocalOscillator::cw(grid, 1e8), DetectorFilter(GaussianIrf{28.2842712475 * ps}, 0.5 * ps),
                        {0.5 * ps, 1000 * ps}, DspKernel::single_point()};
    double t_j = 0.0;

    Fig3Setup() {
        const auto sig = render_pulse(pulse, grid, 0.0);
        t_j = optimal_sample_time(chain, sig, 0.0, 150 * ps).t_j;
    }
};

} // namespace

TEST_SUITE("keyrate") {

TEST_CASE("lossless noiseless homodyne gives half log2(1 + V_A)") {
    KeyRateParams p;
    p.T_ch = 1, p.eta_tm = 1, p.eta_det = 1, p.epsilon = 0, p.v_el = 0, p.beta_rec = 1, p.V_A = 4;
    const auto r = key_rate(p);
    CHECK(r.holevo == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(r.rate - 0.5 * std::log2(5.0)) < 1e-9);
    CHECK(r.mutual_info == doctest::Approx(1.160964047443681).epsilon(1e-12));
    CHECK_FALSE(r.below_threshold);
    const auto o = via_oracle(p);
    CHECK(std::abs(o.mutual_info - 0.5 * std::log2(5.0)) < 1e-9);
    CHECK(std::abs(o.holevo) < 1e-9);
}

TEST_CASE("entropy helpers") {
    CHECK(thermal_entropy(0.0) == 0.0);
    CHECK(thermal_entropy(1.0) == doctest::Approx(2.0));
    CHECK(symplectic_entropy(1.0) == 0.0);
    CHECK(symplectic_entropy(3.0) == doctest::Approx(2.0));
    // Against the oracle's entropy of a single thermal mode.
    for (double nu : {1.5, 4.0, 37.0}) {
        const Eigen::MatrixXd g = nu * Eigen::MatrixXd::Identity(2, 2);
        CHECK(symplectic_entropy(nu) == doctest::Approx(oracle::entropy(g)).epsilon(1e-12));
    }
}

TEST_CASE("agreement with the covariance-matrix oracle") {
    int checked = 0;
    for (Detection det : {Detection::homodyne, Detection::heterodyne}) {
        for (ModeLossModel ml : {ModeLossModel::trusted, ModeLossModel::untrusted}) {
            for (double T_ch : {1.0, 0.5, 0.1, 0.01}) {
                for (double eta_tm : {1.0, 0.7, 0.3}) {
                    for (double eps : {0.0, 0.01, 0.05}) {
                        KeyRateParams p;
                        p.T_ch = T_ch, p.eta_tm = eta_tm, p.epsilon = eps, p.detection = det, p.mode_loss = ml;
                        CAPTURE(to_string(det));
                        CAPTURE(to_string(ml));
                        CAPTURE(T_ch);
                        CAPTURE(eta_tm);
                        CAPTURE(eps);
                        const auto r = key_rate(p);
                        const auto o = via_oracle(p);
                        CHECK(std::abs(r.mutual_info - o.mutual_info) < 1e-9);
                        CHECK(std::abs(r.holevo - o.holevo) < 1e-9);
                        CHECK(std::abs(r.raw_rate - (p.beta_rec * o.mutual_info - o.holevo)) < 1e-9);
                        CHECK(r.rate == std::max(0.0, r.raw_rate));
                        CHECK(r.below_threshold == (r.raw_rate <= 0.0));

                        const auto s = holevo_spectrum(p);
                        CHECK(std::min(s.nu1, s.nu2) == doctest::Approx(o.nu_ab[0]).epsilon(1e-9));
                        CHECK(std::max(s.nu1, s.nu2) == doctest::Approx(o.nu_ab[1]).epsilon(1e-9));
                        // The conditional state has one extra pure mode from the detector purification.
                        const auto& c = o.nu_conditional;
                        CHECK(c[0] == doctest::Approx(1.0).epsilon(1e-7));
                        CHECK(std::min(s.nu3, s.nu4) == doctest::Approx(c[1]).epsilon(1e-7));
                        CHECK(std::max(s.nu3, s.nu4) == doctest::Approx(c[2]).epsilon(1e-7));
                        ++checked;
                    }
                }
            }
        }
    }
    CHECK(checked == 2 * 2 * 4 * 3 * 3);
}

TEST_CASE("mode-matching efficiency composes like cascaded beamsplitters") {
    // Two trusted stages in the oracle: eta_tm with a vacuum port, then the detector.
    for (Detection det : {Detection::homodyne, Detection::heterodyne}) {
        const bool het = det == Detection::heterodyne;
        KeyRateParams p;
        p.T_ch = 0.3, p.eta_tm = 0.8, p.detection = det;
        const double chi_line = 1.0 / p.T_ch - 1.0 + p.epsilon / p.T_ch;
        const auto o = oracle::gg02(p.V_A, p.T_ch, chi_line,
                                    {{p.eta_tm, 1.0}, {p.eta_det, oracle::detector_thermal(p.eta_det, p.v_el, het)}}, het);
        const auto r = key_rate(p);
        CHECK(std::abs(r.mutual_info - o.mutual_info) < 1e-9);
        CHECK(std::abs(r.holevo - o.holevo) < 1e-9);
    }
    // Without electronic noise only the product matters.
    oracle::Gen gen(8);
    for (int i = 0; i < 30; ++i) {
        KeyRateParams p;
        p.v_el = 0.0;
        p.T_ch = gen.uniform(0.05, 1.0);
        const double a = gen.uniform(0.1, 1.0), b = gen.uniform(0.1, 1.0);
        p.eta_tm = a, p.eta_det = b;
        KeyRateParams q = p;
        q.eta_tm = a * b, q.eta_det = 1.0;
        CHECK(key_rate(p).raw_rate == doctest::Approx(key_rate(q).raw_rate).epsilon(1e-9));
    }
}

TEST_CASE("homodyne mutual information is half log2(1 + SNR)") {
    oracle::Gen gen(77);
    for (int i = 0; i < 40; ++i) {
        KeyRateParams p;
        p.v_el = 0.0;
        p.V_A = gen.uniform(0.5, 40);
        p.T_ch = gen.uniform(0.01, 1);
        p.eta_tm = gen.uniform(0.05, 1);
        p.eta_det = gen.uniform(0.05, 1);
        p.epsilon = gen.uniform(0, 0.2);
        p.mode_loss = i % 2 ? ModeLossModel::trusted : ModeLossModel::untrusted;
        const double T = p.total_transmittance();
        const double snr = T * p.V_A / (1.0 + T * p.epsilon / p.T_ch);
        CHECK(std::abs(key_rate(p).mutual_info - 0.5 * std::log2(1.0 + snr)) < 1e-9);
    }
}

TEST_CASE("physical bounds hold on random parameters") {
    oracle::Gen gen(5);
    for (int i = 0; i < 300; ++i) {
        KeyRateParams p;
        p.V_A = gen.uniform(0.1, 60);
        p.T_ch = gen.uniform(1e-4, 1);
        p.eta_tm = gen.uniform(1e-3, 1);
        p.eta_det = gen.uniform(0.05, 1);
        p.epsilon = gen.uniform(0, 0.3);
        p.v_el = gen.uniform(0, 0.3);
        p.beta_rec = gen.uniform(0.8, 1);
        p.detection = gen.integer(0, 1) ? Detection::homodyne : Detection::heterodyne;
        p.mode_loss = gen.integer(0, 1) ? ModeLossModel::trusted : ModeLossModel::untrusted;
        const auto r = key_rate(p);
        const auto s = holevo_spectrum(p);
        CHECK(r.holevo >= 0.0);
        CHECK(r.mutual_info >= 0.0);
        CHECK(r.rate <= p.beta_rec * r.mutual_info + 1e-12);
        for (double nu : {s.nu1, s.nu2, s.nu3, s.nu4}) CHECK(nu >= 1.0 - 1e-9);
    }
}

TEST_CASE("rate falls with loss and with mode mismatch") {
    KeyRateParams p;
    double last = std::numeric_limits<double>::infinity();
    for (double z = 0; z <= 60; z += 2) {
        p.T_ch = std::pow(10.0, -0.02 * z);
        const double r = key_rate(p).raw_rate;
        CHECK(r < last);
        last = r;
    }
    for (ModeLossModel ml : {ModeLossModel::trusted, ModeLossModel::untrusted}) {
        KeyRateParams a;
        a.T_ch = 0.3, a.mode_loss = ml;
        KeyRateParams b = a;
        b.eta_tm = 0.5;
        CHECK(key_rate(b).rate < key_rate(a).rate);
        CHECK(key_rate(b).raw_rate == doctest::Approx(oracle_rate(b)).epsilon(1e-9));
    }
    // Vanishing channel.
    KeyRateParams dark;
    dark.T_ch = 1e-12;
    CHECK(key_rate(dark).rate == 0.0);
    CHECK(key_rate(dark).below_threshold);
    dark.T_ch = 0.5;
    dark.eta_tm = 0.0;
    CHECK(key_rate(dark).rate == 0.0);
    CHECK(key_rate(dark).below_threshold);
}

TEST_CASE("parameters are validated") {
    auto bad = [](auto mutate) {
        KeyRateParams p;
        mutate(p);
        return p;
    };
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.V_A = 0; })), InvalidParameter);
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.T_ch = 1.2; })), InvalidParameter);
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.T_ch = 0; })), InvalidParameter);
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.eta_tm = -0.1; })), InvalidParameter);
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.eta_det = 0; })), InvalidParameter);
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.epsilon = -1e-3; })), InvalidParameter);
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.beta_rec = 1.01; })), InvalidParameter);
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.v_el = -0.1; })), InvalidParameter);
    CHECK_THROWS_AS(key_rate(bad([](KeyRateParams& p) { p.V_A = std::nan(""); })), InvalidParameter);
}

TEST_CASE("cutoff distance interpolates the unclamped rate") {
    auto pt = [](double z, double raw) {
        return RatePoint{z, 1.0, 1.0, KeyRateResult{std::max(0.0, raw), raw, 1.0, 1.0, raw <= 0.0}};
    };
    CHECK(cutoff_distance({pt(0, 1.0), pt(10, 0.5), pt(20, -0.5)}) == doctest::Approx(15.0));
    CHECK(cutoff_distance({pt(0, 1.0), pt(10, 0.0)}) == doctest::Approx(10.0));
    CHECK(std::isinf(cutoff_distance({pt(0, 1.0), pt(10, 0.5)})));
    CHECK(std::isnan(cutoff_distance({pt(0, -1.0), pt(10, -2.0)})));
    CHECK(std::isnan(cutoff_distance({})));
}

TEST_CASE("rate against distance with a fixed receiver mode") {
    const Fig3Setup s;
    std::vector<double> zs;
    for (int i = 0; i <= 100; ++i) zs.push_back(i);
    KeyRateParams p;
    p.mode_loss = ModeLossModel::untrusted;
    const ChannelSpec flat{0.2, 4.9e-6, 0.0, 0.0}, disp{0.2, 4.9e-6, -20.4, 0.0};
    const auto a = rate_vs_distance(s.pulse, 0.0, s.chain, s.t_j, flat, p, zs);
    const auto b = rate_vs_distance(s.pulse, 0.0, s.chain, s.t_j, disp, p, zs, 2);
    REQUIRE(a.size() == zs.size());
    CHECK(a[0].result.rate == doctest::Approx(b[0].result.rate).epsilon(1e-12));
    CHECK(a[0].eta_tm > 0.999);
    for (std::size_t i = 0; i < zs.size(); ++i) {
        CHECK(a[i].transmittance == doctest::Approx(std::pow(10.0, -0.02 * zs[i])));
        CHECK(b[i].eta_tm <= a[i].eta_tm + 1e-12);
        CHECK(b[i].result.rate <= a[i].result.rate + 1e-12);
        // Strict while the reference still yields key; past both cutoffs the clamped rates are both 0.
        if (zs[i] >= 5 && a[i].result.rate > 0.0) CHECK(b[i].result.rate < a[i].result.rate);
        if (i > 0) {
            CHECK(a[i].result.rate <= a[i - 1].result.rate);
            CHECK(b[i].result.rate <= b[i - 1].result.rate);
        }
        // Each point is key_rate at the reported transmittance and eta.
        KeyRateParams q = p;
        q.T_ch = b[i].transmittance, q.eta_tm = b[i].eta_tm;
        CHECK(b[i].result.raw_rate == doctest::Approx(key_rate(q).raw_rate).epsilon(1e-12));
    }
    const double ca = cutoff_distance(a), cb = cutoff_distance(b);
    CHECK(std::isfinite(ca));
    CHECK(std::isfinite(cb));
    CHECK(cb < ca);
}

TEST_CASE("sampling-time sensitivity flattens with dispersion") {
    const Fig3Setup s;
    const ChannelSpec c0{0.2, 0.0, -20.4, 0.0};
    const ChannelSpec c50 = c0.at_distance(50.0);
    const KeyRateParams p;
    const auto sig0 = render_pulse(s.pulse, s.grid, 0.0);
    const auto sig50 = propagate_compensated(sig0, c50).output;
    const double t50 = optimal_sample_time(s.chain, sig50, s.t_j - 50 * ps, s.t_j + 50 * ps).t_j;
    const double k0 = eta_peak_curvature(s.chain, s.t_j, sig0, 1 * ps);
    const double k50 = eta_peak_curvature(s.chain, t50, sig50, 1 * ps);
    CHECK(k50 < k0);
    CHECK(k50 > 0.0);

    const std::vector<double> offsets{-5 * ps, 0.0, 5 * ps, 400 * ps};
    const auto u = sampling_offset_sensitivity(s.chain, s.t_j, s.pulse, 0.0, c0, p, offsets);
    const auto d = sampling_offset_sensitivity(s.chain, t50, s.pulse, 0.0, c50, p, offsets);
    CHECK(u[1].eta >= u[0].eta);
    CHECK(u[1].eta >= u[2].eta);
    CHECK(u[0].eta == doctest::Approx(u[2].eta).epsilon(1e-4));  // symmetric up to sub-grid interpolation
    const double drop_u = 1.0 - 0.5 * (u[0].eta + u[2].eta) / u[1].eta;
    const double drop_d = 1.0 - 0.5 * (d[0].eta + d[2].eta) / d[1].eta;
    CHECK(drop_d < drop_u);
    CHECK(u[3].eta < 1e-10);
    CHECK(u[1].result.rate >= u[0].result.rate);
    CHECK(u[3].result.rate == 0.0);
}

} // TEST_SUITE
