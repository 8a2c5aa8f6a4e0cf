#include "dcvqkd/signal.hpp"

#include "dcvqkd/errors.hpp"
#include "dcvqkd/fft.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dcvqkd {

TimeGrid::TimeGrid(double t_start, double dt, std::size_t n) : t_start_(t_start), dt_(dt), n_(n) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw InvalidParameter("time grid spacing must be positive and finite");
    if (n < 2) throw InvalidParameter("time grid needs at least 2 samples");
    if (!std::isfinite(t_start)) throw InvalidParameter("time grid start must be finite");
}

TimeGrid TimeGrid::centered(double center, double dt, std::size_t n) {
    return {center - dt * static_cast<double>(n - 1) / 2.0, dt, n};
}

bool TimeGrid::same_spacing(const TimeGrid& other) const noexcept {
    return std::abs(dt_ - other.dt_) <= 1e-9 * dt_;
}

bool TimeGrid::operator==(const TimeGrid& other) const noexcept {
    return n_ == other.n_ && same_spacing(other) && std::abs(t_start_ - other.t_start_) <= 1e-9 * dt_;
}

Wavepacket::Wavepacket(TimeGrid grid) : grid_(grid), samples_(grid.size()) {}

Wavepacket::Wavepacket(TimeGrid grid, std::vector<complex> samples)
    : grid_(grid), samples_(std::move(samples)) {
    if (samples_.size() != grid_.size())
        throw InvalidParameter("sample count does not match grid size");
}

double Wavepacket::norm2() const noexcept {
    double s = 0.0;
    for (const auto& v : samples_) s += std::norm(v);
    return s * grid_.dt();
}

double Wavepacket::norm() const noexcept { return std::sqrt(norm2()); }

Wavepacket Wavepacket::on_grid(const TimeGrid& grid) const {
    if (grid.size() != grid_.size() || !grid.same_spacing(grid_))
        throw GridMismatch("cannot relabel samples onto a grid of different size or spacing");
    return {grid, samples_};
}

namespace {

void require_same_grid(const Wavepacket& a, const Wavepacket& b, const char* what) {
    if (!(a.grid() == b.grid())) {
        std::ostringstream os;
        os << what << ": grids differ (t_start " << a.grid().t_start() << " vs " << b.grid().t_start()
           << ", dt " << a.grid().dt() << " vs " << b.grid().dt() << ", n " << a.size() << " vs "
           << b.size() << ")";
        throw GridMismatch(os.str());
    }
}

} // namespace

Wavepacket& Wavepacket::operator+=(const Wavepacket& other) {
    require_same_grid(*this, other, "addition");
    for (std::size_t k = 0; k < samples_.size(); ++k) samples_[k] += other.samples_[k];
    return *this;
}

Wavepacket& Wavepacket::operator-=(const Wavepacket& other) {
    require_same_grid(*this, other, "subtraction");
    for (std::size_t k = 0; k < samples_.size(); ++k) samples_[k] -= other.samples_[k];
    return *this;
}

Wavepacket& Wavepacket::operator*=(complex c) {
    for (auto& v : samples_) v *= c;
    return *this;
}

complex inner_product(const Wavepacket& a, const Wavepacket& b) {
    require_same_grid(a, b, "inner_product");
    complex s{0.0, 0.0};
    const auto sa = a.samples();
    const auto sb = b.samples();
    for (std::size_t k = 0; k < sa.size(); ++k) s += std::conj(sa[k]) * sb[k];
    return s * a.grid().dt();
}

Wavepacket normalize(const Wavepacket& a) {
    const double n = a.norm();
    if (!(n > 0.0) || !std::isfinite(n))
        throw DegenerateWavepacket("cannot normalize a wavepacket with zero or non-finite norm");
    Wavepacket out = a;
    out *= 1.0 / n;
    return out;
}

namespace {

TimeGrid convolution_grid(const Wavepacket& a, const Wavepacket& kernel) {
    if (!a.grid().same_spacing(kernel.grid()))
        throw GridMismatch("convolve: sample spacings differ");
    return {a.grid().t_start() + kernel.grid().t_start(), a.grid().dt(), a.size() + kernel.size() - 1};
}

} // namespace

Wavepacket convolve_direct(const Wavepacket& a, const Wavepacket& kernel) {
    const TimeGrid grid = convolution_grid(a, kernel);
    std::vector<complex> out(grid.size());
    const auto sa = a.samples();
    const auto sk = kernel.samples();
    for (std::size_t i = 0; i < sa.size(); ++i)
        for (std::size_t j = 0; j < sk.size(); ++j) out[i + j] += sa[i] * sk[j];
    for (auto& v : out) v *= grid.dt();
    return {grid, std::move(out)};
}

Wavepacket convolve_fft(const Wavepacket& a, const Wavepacket& kernel) {
    const TimeGrid grid = convolution_grid(a, kernel);
    const std::size_t m = fft::good_size(grid.size());
    std::vector<complex> pa(m), pk(m);
    std::copy(a.samples().begin(), a.samples().end(), pa.begin());
    std::copy(kernel.samples().begin(), kernel.samples().end(), pk.begin());
    auto fa = fft::forward(pa);
    const auto fk = fft::forward(pk);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fk[i];
    auto full = fft::inverse(fa);
    full.resize(grid.size());
    for (auto& v : full) v *= grid.dt();
    return {grid, std::move(full)};
}

Wavepacket convolve(const Wavepacket& a, const Wavepacket& kernel) {
    if (std::min(a.size(), kernel.size()) <= 32) return convolve_direct(a, kernel);
    return convolve_fft(a, kernel);
}

std::vector<double> convolve_real(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) return {};
    const std::size_t n = a.size() + b.size() - 1;
    std::vector<double> out(n, 0.0);
    if (static_cast<double>(a.size()) * static_cast<double>(b.size()) < 2.0e5 ||
        std::min(a.size(), b.size()) <= 32) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double ai = a[i];
            double* o = out.data() + i;
            for (std::size_t j = 0; j < b.size(); ++j) o[j] += ai * b[j];
        }
        return out;
    }
    // Pack both real inputs into one complex transform: z = a + i b.
    const std::size_t m = fft::good_size(n);
    std::vector<complex> z(m);
    for (std::size_t i = 0; i < a.size(); ++i) z[i].real(a[i]);
    for (std::size_t i = 0; i < b.size(); ++i) z[i].imag(b[i]);
    const auto fz = fft::forward(z);
    std::vector<complex> prod(m);
    for (std::size_t k = 0; k < m; ++k) {
        const complex zk = fz[k];
        const complex zc = std::conj(fz[(m - k) % m]);
        const complex fa = 0.5 * (zk + zc);
        const complex fb = complex(0.0, -0.5) * (zk - zc);
        prod[k] = fa * fb;
    }
    const auto r = fft::inverse(prod);
    for (std::size_t i = 0; i < n; ++i) out[i] = r[i].real();
    return out;
}

GramSchmidtResult gram_schmidt_residual(const Wavepacket& target, const Wavepacket& reference) {
    if (!target.is_normalized() || !reference.is_normalized())
        throw InvalidParameter("gram_schmidt_residual expects normalized inputs");
    const complex c = inner_product(reference, target);
    const double eta = std::norm(c);
    if (eta > 1.0 - 1e-12) return {1.0, c, std::nullopt};

    Wavepacket residual = target;
    residual -= c * reference;
    Wavepacket perp = normalize(residual);
    // One re-orthogonalisation pass keeps <perp, reference> at rounding level
    // even when eta is close to 1.
    perp -= inner_product(reference, perp) * reference;
    perp = normalize(perp);
    return {std::min(eta, 1.0), c, std::move(perp)};
}

std::optional<std::string> resolution_warning(const TimeGrid& grid, double min_feature_width) {
    if (grid.dt() <= min_feature_width / 20.0) return std::nullopt;
    std::ostringstream os;
    os << "grid spacing " << grid.dt() << " s exceeds 1/20 of the narrowest feature (" << min_feature_width
       << " s); overlap integrals may carry >1e-3 discretization error";
    return os.str();
}

} // namespace dcvqkd
