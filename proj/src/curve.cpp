#include "pelastic/curve.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pelastic/spectral.hpp"

namespace pelastic {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::DegenerateCurve: return "DegenerateCurve";
        case ErrorKind::NonMonotoneProfile: return "NonMonotoneProfile";
        case ErrorKind::GridMismatch: return "GridMismatch";
        case ErrorKind::NotConstantSpeed: return "NotConstantSpeed";
        case ErrorKind::InvalidParameter: return "InvalidParameter";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

void require_same_grid(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw Error(ErrorKind::GridMismatch,
                    std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b) + " samples");
    }
}

namespace {

std::vector<double> speeds_of(std::span<const Vec2> derivative) {
    std::vector<double> s(derivative.size());
    std::transform(derivative.begin(), derivative.end(), s.begin(), [](const Vec2& v) { return norm(v); });
    return s;
}

// Returns speeds and length; throws when the speed falls below the floor.
std::pair<std::vector<double>, double> checked_speeds(std::span<const Vec2> samples) {
    auto s = speeds_of(spectral::derivative(samples, 1));
    const double len = integrate(s);
    const double smin = *std::min_element(s.begin(), s.end());
    if (!(len > 0.0) || smin < kDegeneracyFloor * len) {
        throw Error(ErrorKind::DegenerateCurve,
                    "minimum speed " + std::to_string(smin) + " against length " + std::to_string(len));
    }
    return {std::move(s), len};
}

}  // namespace

// --- ClosedCurve ------------------------------------------------------------

ClosedCurve::ClosedCurve(std::vector<Vec2> samples) : samples_(std::move(samples)) {
    if (samples_.size() < kMinGridSize) {
        throw Error(ErrorKind::InvalidParameter,
                    "closed curve needs at least " + std::to_string(kMinGridSize) + " samples, got " +
                        std::to_string(samples_.size()));
    }
    for (const auto& p : samples_) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw Error(ErrorKind::InvalidParameter, "non-finite curve sample");
        }
    }
    checked_speeds(samples_);
}

ClosedCurve ClosedCurve::translated(const Vec2& c) const {
    auto s = samples_;
    for (auto& p : s) p += c;
    return ClosedCurve(std::move(s));
}

ClosedCurve ClosedCurve::scaled(double f) const {
    auto s = samples_;
    for (auto& p : s) p *= f;
    return ClosedCurve(std::move(s));
}

ClosedCurve ClosedCurve::reversed() const {
    std::vector<Vec2> s(samples_.size());
    const std::size_t n = samples_.size();
    for (std::size_t j = 0; j < n; ++j) s[j] = samples_[(n - j) % n];
    return ClosedCurve(std::move(s));
}

// --- calculus ---------------------------------------------------------------

VectorField d1(const VectorField& f) { return {spectral::derivative(std::span<const Vec2>(f.values), 1)}; }
VectorField d2(const VectorField& f) { return {spectral::derivative(std::span<const Vec2>(f.values), 2)}; }
VectorField d1(const ClosedCurve& c) { return {spectral::derivative(c.samples(), 1)}; }
VectorField d2(const ClosedCurve& c) { return {spectral::derivative(c.samples(), 2)}; }
ScalarField d1(const ScalarField& f) { return {spectral::derivative(std::span<const double>(f.values), 1)}; }

double integrate(std::span<const double> f) {
    double sum = 0.0;
    for (double v : f) sum += v;
    return f.empty() ? 0.0 : sum / static_cast<double>(f.size());
}

double integrate(const ScalarField& f) { return integrate(std::span<const double>(f.values)); }

double pairing(const VectorField& a, const VectorField& b) {
    require_same_grid(a.size(), b.size(), "pairing");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) sum += dot(a[j], b[j]);
    return sum / static_cast<double>(a.size());
}

double l2_norm(const VectorField& a) { return std::sqrt(pairing(a, a)); }

ScalarField speed(const ClosedCurve& c) { return {speeds_of(d1(c).values)}; }

double length(const ClosedCurve& c) { return checked_speeds(c.samples()).second; }

ScalarField curvature(const ClosedCurve& c) {
    checked_speeds(c.samples());
    const auto v = d1(c);
    const auto a = d2(c);
    ScalarField k{std::vector<double>(c.size())};
    for (std::size_t j = 0; j < c.size(); ++j) {
        const double s = norm(v[j]);
        k[j] = dot(a[j], rotate90(v[j])) / (s * s * s);
    }
    return k;
}

double constant_speed_deviation(const ClosedCurve& c) {
    const auto [s, len] = checked_speeds(c.samples());
    double dev = 0.0;
    for (double v : s) dev = std::max(dev, std::abs(v - len));
    return dev / len;
}

// --- reparametrization ------------------------------------------------------

ClosedCurve reparametrize_constant_speed(const ClosedCurve& c) {
    const std::size_t n = c.size();
    const auto [s, len] = checked_speeds(c.samples());

    // Psi(x) = x + (A(x) - A(0)) / L with A' = s - L.
    std::vector<double> excess(n);
    for (std::size_t j = 0; j < n; ++j) excess[j] = s[j] - len;
    const auto cum = spectral::antiderivative(excess);
    const spectral::TrigInterpolant excess_integral{std::span<const double>(cum)};

    std::vector<double> psi(n + 1);
    for (std::size_t j = 0; j < n; ++j) psi[j] = c.node(j) + (cum[j] - cum[0]) / len;
    psi[n] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!(psi[j + 1] > psi[j])) {
            throw Error(ErrorKind::NonMonotoneProfile, "cumulative arclength not increasing at node " +
                                                           std::to_string(j));
        }
    }

    std::vector<double> phi(n, 0.0);
    std::size_t seg = 0;
    for (std::size_t j = 1; j < n; ++j) {
        const double target = c.node(j);
        while (psi[seg + 1] < target) ++seg;
        double lo = c.node(seg);
        double hi = c.node(seg + 1);
        double x = lo + (target - psi[seg]) / (psi[seg + 1] - psi[seg]) * (hi - lo);
        double last_step = 1.0;
        for (int it = 0; it < 60; ++it) {
            spectral::cplx a, slope;
            excess_integral.evaluate(x, a, slope);
            const double f = x + (a.real() - cum[0]) / len - target;
            const double df = 1.0 + slope.real() / len;
            if (f == 0.0) break;
            if (f > 0.0) hi = std::min(hi, x); else lo = std::max(lo, x);
            double next = (df > 0.0) ? x - f / df : 0.5 * (lo + hi);
            if (next < lo || next > hi) next = 0.5 * (lo + hi);
            const double step = std::abs(next - x);
            x = next;
            // Stop at rounding level: tiny step, or no further contraction.
            if (step < 1e-14 || (step < 1e-12 && step >= 0.5 * last_step)) break;
            last_step = step;
        }
        phi[j] = x;
    }

    const spectral::TrigInterpolant gamma(spectral::to_complex(c.samples()));
    std::vector<Vec2> out(n);
    out[0] = c[0];
    for (std::size_t j = 1; j < n; ++j) {
        const auto z = gamma(phi[j]);
        out[j] = {z.real(), z.imag()};
    }
    return ClosedCurve(std::move(out));
}

// --- variation helpers ------------------------------------------------------

ScalarField phi1_field(const ClosedCurve& gamma, const VectorField& eta) {
    require_same_grid(gamma.size(), eta.size(), "phi1_field");
    const auto gx = d1(gamma);
    const auto ex = d1(eta);
    const double len = length(gamma);
    std::vector<double> f(gamma.size());
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = dot(gx[j], ex[j]);
    auto a = spectral::antiderivative(f);
    const double a0 = a[0];
    for (auto& v : a) v = -(v - a0) / (len * len);
    return {std::move(a)};
}

TestFnPair build_testfn_pair(const VectorField& psi) {
    const std::size_t n = psi.size();
    Vec2 mean{};
    for (const auto& v : psi.values) mean += v;
    mean = mean / static_cast<double>(n);

    const auto a1 = spectral::antiderivative(std::span<const Vec2>(psi.values));
    const auto a2 = spectral::antiderivative(std::span<const Vec2>(a1));

    TestFnPair out;
    out.beta = -0.5 * mean;
    out.alpha = a1[0];
    out.phi1.values.resize(n);
    out.phi2.values.resize(n);
    out.phi1_prime.values.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        out.phi1[j] = a2[j] - a2[0];
        out.phi2[j] = a1[j] - a1[0];
        out.phi1_prime[j] = out.phi2[j] + out.alpha;
    }
    // int_0^1 int_0^xi psi = mean/2 + avg(A1) - A1(0)
    Vec2 a1_mean{};
    for (const auto& v : a1) a1_mean += v;
    a1_mean = a1_mean / static_cast<double>(n);
    const Vec2 double_integral = 0.5 * mean + a1_mean - a1[0];
    out.closure_error = norm(double_integral + out.alpha + out.beta) + norm(mean + 2.0 * out.beta);
    return out;
}

}  // namespace pelastic
