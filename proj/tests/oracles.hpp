#pragma once

// Reference computations used only by the tests. None of these call into the
// library's numerics; they are the second route every checked value is
// compared against.

#include "dcvqkd/signal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using complex = std::complex<double>;

inline double trapezoid(const std::function<double(double)>& f, double a, double b, int n) {
    const double h = (b - a) / n;
    double s = 0.5 * (f(a) + f(b));
    for (int i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

namespace detail {
inline double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm,
                           double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}
} // namespace detail

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol = 1e-13,
                               int depth = 40) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, depth);
}

/// Plain O(n m) linear convolution weighted by dt.
inline std::vector<complex> convolve(const std::vector<complex>& a, const std::vector<complex>& b, double dt) {
    std::vector<complex> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j] * dt;
    return out;
}

/// Unit-energy amplitude Gaussian exp(-(t - c)^2 / (2 s^2)) / (pi s^2)^(1/4).
inline double gaussian_amplitude(double t, double c, double s) {
    return std::exp(-(t - c) * (t - c) / (2.0 * s * s)) / std::pow(std::numbers::pi * s * s, 0.25);
}

/// Amplitude of a transform-limited Gaussian (amplitude 1/e half-width t0)
/// after group-velocity dispersion phi = beta2 z, in closed form.
inline complex dispersed_gaussian(double t, double t0, double phi) {
    const complex q = complex(t0 * t0, -phi);
    return std::pow(std::numbers::pi * t0 * t0, -0.25) * std::sqrt(complex(t0 * t0) / q) *
           std::exp(-t * t / (2.0 * q));
}

// ---------------------------------------------------------------------------
// Gaussian covariance-matrix oracle for the GG02 key rate. Modes are (x, p)
// pairs in shot-noise units. Bob's receiver is a chain of beamsplitter stages
// whose other inputs are thermal modes purified by ancillas the receiver
// trusts; Eve purifies the Alice-Bob state after the channel.

using Eigen::MatrixXd;

inline MatrixXd omega(int modes) {
    MatrixXd w = MatrixXd::Zero(2 * modes, 2 * modes);
    for (int i = 0; i < modes; ++i) {
        w(2 * i, 2 * i + 1) = 1.0;
        w(2 * i + 1, 2 * i) = -1.0;
    }
    return w;
}

inline std::vector<double> symplectic_eigenvalues(const MatrixXd& g) {
    const int modes = static_cast<int>(g.rows() / 2);
    Eigen::EigenSolver<MatrixXd> es(omega(modes) * g);
    std::vector<double> nu;
    for (int i = 0; i < es.eigenvalues().size(); ++i) nu.push_back(std::abs(es.eigenvalues()[i].imag()));
    std::sort(nu.begin(), nu.end());
    std::vector<double> out;
    for (std::size_t i = 0; i < nu.size(); i += 2) out.push_back(0.5 * (nu[i] + nu[i + 1]));
    return out;
}

inline double entropy(const MatrixXd& g) {
    double s = 0.0;
    for (double nu : symplectic_eigenvalues(g)) {
        if (nu - 1.0 < 1e-13) continue;
        const double a = 0.5 * (nu + 1.0), b = 0.5 * (nu - 1.0);
        s += a * std::log2(a) - b * std::log2(b);
    }
    return s;
}

struct Stage {
    double eta;        ///< beamsplitter transmittance
    double v_thermal;  ///< variance of the mode entering the other port
};

struct CmResult {
    double mutual_info;
    double holevo;
    std::vector<double> nu_ab;
    std::vector<double> nu_conditional;
};

inline MatrixXd select(const MatrixXd& g, const std::vector<int>& rows, const std::vector<int>& cols) {
    MatrixXd out(rows.size(), cols.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j) out(i, j) = g(rows[i], cols[j]);
    return out;
}

/// Entanglement-based GG02 with Alice's EPR variance V = V_A + 1, a channel
/// of transmittance T with input-referred noise chi_line, and trusted stages.
inline CmResult gg02(double V_A, double T, double chi_line, const std::vector<Stage>& stages, bool heterodyne) {
    const double V = V_A + 1.0;
    const int modes = 2 + 2 * static_cast<int>(stages.size());
    MatrixXd g = MatrixXd::Zero(2 * modes, 2 * modes);
    const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
    Eigen::Matrix2d Z;
    Z << 1, 0, 0, -1;
    g.block<2, 2>(0, 0) = V * I;
    g.block<2, 2>(0, 2) = std::sqrt(T * (V * V - 1.0)) * Z;
    g.block<2, 2>(2, 0) = g.block<2, 2>(0, 2);
    g.block<2, 2>(2, 2) = T * (V + chi_line) * I;
    const MatrixXd g_ab = g.topLeftCorner(4, 4);

    for (std::size_t s = 0; s < stages.size(); ++s) {
        const int f = 4 + 4 * static_cast<int>(s), a = f + 2;
        const double v = stages[s].v_thermal;
        g.block<2, 2>(f, f) = v * I;
        g.block<2, 2>(a, a) = v * I;
        g.block<2, 2>(f, a) = std::sqrt(std::max(0.0, v * v - 1.0)) * Z;
        g.block<2, 2>(a, f) = g.block<2, 2>(f, a);
        MatrixXd bs = MatrixXd::Identity(2 * modes, 2 * modes);
        const double t = std::sqrt(stages[s].eta), r = std::sqrt(1.0 - stages[s].eta);
        bs.block<2, 2>(2, 2) = t * I;
        bs.block<2, 2>(2, f) = r * I;
        bs.block<2, 2>(f, 2) = -r * I;
        bs.block<2, 2>(f, f) = t * I;
        g = bs * g * bs.transpose();
    }

    std::vector<int> rest, bob{2, 3}, alice{0, 1};
    for (int i = 0; i < 2 * modes; ++i)
        if (i != 2 && i != 3) rest.push_back(i);
    const MatrixXd gr = select(g, rest, rest);
    const MatrixXd c = select(g, rest, bob);
    const MatrixXd gb = select(g, bob, bob);
    MatrixXd cond;
    if (heterodyne) {
        cond = gr - c * (gb + MatrixXd::Identity(2, 2)).inverse() * c.transpose();
    } else {
        cond = gr - c.col(0) * c.col(0).transpose() / gb(0, 0);
    }

    // Bob's variance given Alice's prepared amplitude (her heterodyne in the EB picture).
    const MatrixXd ga = select(g, alice, alice);
    const MatrixXd cab = select(g, bob, alice);
    const MatrixXd gb_a = gb - cab * (ga + MatrixXd::Identity(2, 2)).inverse() * cab.transpose();

    CmResult r;
    r.mutual_info = heterodyne ? std::log2((gb(0, 0) + 1.0) / (gb_a(0, 0) + 1.0)) : 0.5 * std::log2(gb(0, 0) / gb_a(0, 0));
    r.holevo = entropy(g_ab) - entropy(cond);
    r.nu_ab = symplectic_eigenvalues(g_ab);
    r.nu_conditional = symplectic_eigenvalues(cond);
    return r;
}

/// Thermal variance that makes a detector of efficiency eta with electronic
/// noise v_el look like a beamsplitter with a thermal port.
inline double detector_thermal(double eta, double v_el, bool heterodyne) {
    if (eta >= 1.0) return 1.0;
    return 1.0 + (heterodyne ? 2.0 : 1.0) * v_el / (1.0 - eta);
}

// ---------------------------------------------------------------------------
// Random generators for property tests.

class Gen {
public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
    int integer(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }
    complex cnormal() { return {normal(), normal()}; }

    std::vector<complex> complex_vector(std::size_t n) {
        std::vector<complex> v(n);
        for (auto& x : v) x = cnormal();
        return v;
    }
    dcvqkd::Wavepacket wavepacket(const dcvqkd::TimeGrid& grid) { return {grid, complex_vector(grid.size())}; }
    dcvqkd::Wavepacket unit_wavepacket(const dcvqkd::TimeGrid& grid) { return dcvqkd::normalize(wavepacket(grid)); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

} // namespace oracle
