#include "dcvqkd/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <numbers>

namespace dcvqkd::fft {

namespace {

// fftw planning is not thread-safe; execution on a private plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

std::vector<std::complex<double>> transform(std::span<const std::complex<double>> x, int sign) {
    const int n = static_cast<int>(x.size());
    std::vector<std::complex<double>> in(x.begin(), x.end());
    std::vector<std::complex<double>> out(x.size());
    if (n == 0) return out;
    auto* pin = reinterpret_cast<fftw_complex*>(in.data());
    auto* pout = reinterpret_cast<fftw_complex*>(out.data());
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, pin, pout, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

} // namespace

std::vector<std::complex<double>> forward(std::span<const std::complex<double>> x) {
    return transform(x, FFTW_FORWARD);
}

std::vector<std::complex<double>> inverse(std::span<const std::complex<double>> x) {
    auto out = transform(x, FFTW_BACKWARD);
    const double scale = 1.0 / static_cast<double>(x.size());
    for (auto& v : out) v *= scale;
    return out;
}

std::vector<double> angular_frequencies(std::size_t n, double dt) {
    std::vector<double> w(n);
    const double base = 2.0 * std::numbers::pi / (static_cast<double>(n) * dt);
    const auto half = static_cast<long long>((n + 1) / 2);
    for (std::size_t k = 0; k < n; ++k) {
        auto kk = static_cast<long long>(k);
        if (kk >= half) kk -= static_cast<long long>(n);
        w[k] = base * static_cast<double>(kk);
    }
    return w;
}

std::size_t good_size(std::size_t n) {
    if (n <= 1) return 1;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t p : {2u, 3u, 5u})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

} // namespace dcvqkd::fft
