#pragma once

// Discrete-time complex envelope algebra. Every integral in the library is a
// Riemann sum with weight dt over a uniform TimeGrid.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dcvqkd {

using complex = std::complex<double>;

/// Uniform time axis: points t_start + k*dt for k in [0, n).
class TimeGrid {
public:
    TimeGrid(double t_start, double dt, std::size_t n);

    /// Grid of `n` points centred on `center` (the middle sample sits on it
    /// for odd n).
    static TimeGrid centered(double center, double dt, std::size_t n);

    double t_start() const noexcept { return t_start_; }
    double dt() const noexcept { return dt_; }
    std::size_t size() const noexcept { return n_; }
    double duration() const noexcept { return static_cast<double>(n_) * dt_; }
    double t_end() const noexcept { return t_start_ + static_cast<double>(n_ - 1) * dt_; }
    double time(std::size_t k) const noexcept { return t_start_ + static_cast<double>(k) * dt_; }

    /// Fractional sample index of time t (may be outside [0, n)).
    double position(double t) const noexcept { return (t - t_start_) / dt_; }

    TimeGrid shifted(double offset) const { return {t_start_ + offset, dt_, n_}; }

    /// Identical within 1e-9 of a sample spacing on both t_start and dt.
    bool operator==(const TimeGrid& other) const noexcept;
    bool same_spacing(const TimeGrid& other) const noexcept;

private:
    double t_start_;
    double dt_;
    std::size_t n_;
};

/// Complex envelope samples on a grid. Units are s^-1/2 so that
/// sum |x_k|^2 dt is dimensionless.
class Wavepacket {
public:
    explicit Wavepacket(TimeGrid grid);
    Wavepacket(TimeGrid grid, std::vector<complex> samples);

    /// Samples a real-valued function of time on the grid.
    template <typename F>
    static Wavepacket sample(const TimeGrid& grid, F&& fn) {
        std::vector<complex> s(grid.size());
        for (std::size_t k = 0; k < s.size(); ++k) s[k] = fn(grid.time(k));
        return Wavepacket(grid, std::move(s));
    }

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return samples_.size(); }
    std::span<const complex> samples() const noexcept { return samples_; }
    std::span<complex> samples() noexcept { return samples_; }
    const complex& operator[](std::size_t k) const { return samples_[k]; }
    complex& operator[](std::size_t k) { return samples_[k]; }

    double norm2() const noexcept;
    double norm() const noexcept;
    bool is_normalized(double tol = 1e-9) const noexcept { return std::abs(norm2() - 1.0) <= tol; }

    /// Same envelope on a grid whose t_start is moved by `offset`.
    Wavepacket retimed(double offset) const { return {grid_.shifted(offset), samples_}; }
    /// Same samples relabelled onto `grid` (sizes and spacing must agree).
    Wavepacket on_grid(const TimeGrid& grid) const;

    Wavepacket& operator+=(const Wavepacket& other);
    Wavepacket& operator-=(const Wavepacket& other);
    Wavepacket& operator*=(complex c);
    friend Wavepacket operator+(Wavepacket a, const Wavepacket& b) { return a += b; }
    friend Wavepacket operator-(Wavepacket a, const Wavepacket& b) { return a -= b; }
    friend Wavepacket operator*(complex c, Wavepacket a) { return a *= c; }
    friend Wavepacket operator-(Wavepacket a) { return a *= -1.0; }

private:
    TimeGrid grid_;
    std::vector<complex> samples_;
};

/// <a, b> = sum conj(a_k) b_k dt. Throws GridMismatch unless the grids agree.
complex inner_product(const Wavepacket& a, const Wavepacket& b);

/// Scales to unit norm. Throws DegenerateWavepacket on zero norm.
Wavepacket normalize(const Wavepacket& a);

/// Linear (zero-padded) convolution scaled by dt. The output starts at
/// a.t_start + kernel.t_start and has n_a + n_k - 1 samples. Picks the FFT
/// route for large inputs.
Wavepacket convolve(const Wavepacket& a, const Wavepacket& kernel);
Wavepacket convolve_direct(const Wavepacket& a, const Wavepacket& kernel);
Wavepacket convolve_fft(const Wavepacket& a, const Wavepacket& kernel);

/// Real-valued linear convolution without the dt weight, FFT or direct
/// depending on size. Shared by the Monte Carlo trace generator.
std::vector<double> convolve_real(std::span<const double> a, std::span<const double> b);

/// Decomposition of `target` against `reference`:
///   target = sqrt(eta) e^{i phi} reference + sqrt(1 - eta) e^{i psi} perp.
/// `perp` is empty (the ZeroResidual marker) when the inputs are parallel.
struct GramSchmidtResult {
    double eta;
    complex overlap;                  ///< <reference, target>
    std::optional<Wavepacket> perp;
    bool zero_residual() const noexcept { return !perp.has_value(); }
};

GramSchmidtResult gram_schmidt_residual(const Wavepacket& target, const Wavepacket& reference);

/// Warning text if dt is coarser than min_feature_width / 20, else nullopt.
std::optional<std::string> resolution_warning(const TimeGrid& grid, double min_feature_width);

} // namespace dcvqkd
