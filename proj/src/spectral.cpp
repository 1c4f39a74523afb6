#include "pelastic/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace pelastic::spectral {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
public:
    ~PlanCache() {
        for (auto& [n, p] : plans_) {
            fftw_destroy_plan(p.fwd);
            fftw_destroy_plan(p.bwd);
        }
    }

    PlanPair get(std::size_t n) {
        std::lock_guard lock(mutex_);
        if (auto it = plans_.find(n); it != plans_.end()) return it->second;
        std::vector<cplx> a(n), b(n);
        auto* in = reinterpret_cast<fftw_complex*>(a.data());
        auto* out = reinterpret_cast<fftw_complex*>(b.data());
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        PlanPair p;
        p.fwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, flags);
        p.bwd = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, flags);
        plans_.emplace(n, p);
        return p;
    }

private:
    std::mutex mutex_;
    std::map<std::size_t, PlanPair> plans_;
};

PlanCache& plan_cache() {
    static PlanCache cache;
    return cache;
}

void execute(fftw_plan plan, std::span<const cplx> in, std::vector<cplx>& out) {
    // The plan reads from `in` but FFTW's signature is non-const.
    std::vector<cplx> scratch(in.begin(), in.end());
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(scratch.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
}

/// Fourier symbol of d^order/dx^order at slot m.
cplx derivative_symbol(std::size_t m, std::size_t n, int order) {
    const int k = wavenumber(m, n);
    const bool nyquist = (n % 2 == 0) && (m == n / 2);
    if (nyquist && order % 2 != 0) return 0.0;
    const cplx ik(0.0, kTwoPi * k);
    cplx s = 1.0;
    for (int i = 0; i < order; ++i) s *= ik;
    return s;
}

}  // namespace

std::vector<cplx> forward(std::span<const cplx> values) {
    std::vector<cplx> out(values.size());
    if (values.empty()) return out;
    execute(plan_cache().get(values.size()).fwd, values, out);
    return out;
}

std::vector<cplx> inverse(std::span<const cplx> coeffs) {
    std::vector<cplx> out(coeffs.size());
    if (coeffs.empty()) return out;
    execute(plan_cache().get(coeffs.size()).bwd, coeffs, out);
    const double scale = 1.0 / static_cast<double>(coeffs.size());
    for (auto& v : out) v *= scale;
    return out;
}

int wavenumber(std::size_t m, std::size_t n) {
    return (2 * m <= n) ? static_cast<int>(m) : static_cast<int>(m) - static_cast<int>(n);
}

std::vector<cplx> derivative(std::span<const cplx> values, int order) {
    const std::size_t n = values.size();
    auto c = forward(values);
    for (std::size_t m = 0; m < n; ++m) c[m] *= derivative_symbol(m, n, order);
    return inverse(c);
}

std::vector<double> derivative(std::span<const double> values, int order) {
    auto z = derivative(to_complex(values), order);
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
    return out;
}

std::vector<Vec2> derivative(std::span<const Vec2> values, int order) {
    return to_vec2(derivative(to_complex(values), order));
}

namespace {
std::vector<cplx> antiderivative_complex(std::vector<cplx> z) {
    const std::size_t n = z.size();
    auto c = forward(z);
    for (std::size_t m = 0; m < n; ++m) {
        const int k = wavenumber(m, n);
        const bool nyquist = (n % 2 == 0) && (m == n / 2);
        c[m] = (k == 0 || nyquist) ? cplx(0.0) : c[m] / cplx(0.0, kTwoPi * k);
    }
    return inverse(c);
}
}  // namespace

std::vector<double> antiderivative(std::span<const double> values) {
    auto z = antiderivative_complex(to_complex(values));
    std::vector<double> out(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i].real();
    return out;
}

std::vector<Vec2> antiderivative(std::span<const Vec2> values) {
    return to_vec2(antiderivative_complex(to_complex(values)));
}

std::vector<cplx> to_complex(std::span<const Vec2> values) {
    std::vector<cplx> z(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) z[i] = {values[i].x, values[i].y};
    return z;
}

std::vector<cplx> to_complex(std::span<const double> values) {
    return {values.begin(), values.end()};
}

std::vector<Vec2> to_vec2(std::span<const cplx> values) {
    std::vector<Vec2> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = {values[i].real(), values[i].imag()};
    return v;
}

// --- TrigInterpolant --------------------------------------------------------

TrigInterpolant::TrigInterpolant(std::span<const cplx> values) {
    init({values.begin(), values.end()});
}

TrigInterpolant::TrigInterpolant(std::span<const double> values) {
    init(to_complex(values));
}

void TrigInterpolant::init(std::vector<cplx> values) {
    n_ = values.size();
    auto c = forward(values);
    const double inv_n = 1.0 / static_cast<double>(n_);
    kmax_ = static_cast<int>((n_ - 1) / 2);
    coef_.assign(2 * kmax_ + 1, 0.0);
    for (std::size_t m = 0; m < n_; ++m) {
        const int k = wavenumber(m, n_);
        if (n_ % 2 == 0 && m == n_ / 2) {
            nyquist_ = c[m] * inv_n;
        } else {
            coef_[k + kmax_] = c[m] * inv_n;
        }
    }
}

cplx TrigInterpolant::operator()(double x) const {
    cplx v, s;
    evaluate(x, v, s);
    return v;
}

void TrigInterpolant::evaluate(double x, cplx& value, cplx& slope) const {
    // Horner in w = exp(2 pi i x) on the shifted polynomial sum c_k w^(k+kmax),
    // then multiply by w^(-kmax). Slope uses sum (2 pi i k) c_k w^k.
    const cplx w = std::polar(1.0, kTwoPi * x);
    cplx p = 0.0, q = 0.0;
    for (int idx = 2 * kmax_; idx >= 0; --idx) {
        const int k = idx - kmax_;
        p = p * w + coef_[idx];
        q = q * w + coef_[idx] * static_cast<double>(k);
    }
    const cplx shift = std::polar(1.0, -kTwoPi * kmax_ * x);
    value = p * shift;
    slope = q * shift * cplx(0.0, kTwoPi);
    if (n_ % 2 == 0) {
        const double arg = std::numbers::pi * static_cast<double>(n_) * x;
        value += nyquist_ * std::cos(arg);
        slope -= nyquist_ * (std::numbers::pi * static_cast<double>(n_)) * std::sin(arg);
    }
}

}  // namespace pelastic::spectral
