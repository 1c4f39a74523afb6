#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "pelastic/spectral.hpp"

using namespace pelastic;
namespace sp = pelastic::spectral;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::vector<double> sample(std::size_t n, auto&& f) {
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = f(static_cast<double>(j) / static_cast<double>(n));
    return out;
}

}  // namespace

TEST(Spectral, ForwardInverseRoundTrip) {
    std::vector<sp::cplx> v;
    for (int j = 0; j < 37; ++j) v.emplace_back(std::sin(j * 1.3), std::cos(j * 0.7) + j);
    const auto back = sp::inverse(sp::forward(v));
    for (std::size_t j = 0; j < v.size(); ++j) EXPECT_LT(std::abs(back[j] - v[j]), 1e-12);
}

TEST(Spectral, ForwardMatchesDirectSum) {
    const std::size_t n = 12;
    std::vector<sp::cplx> v;
    for (std::size_t j = 0; j < n; ++j) v.emplace_back(std::exp(-double(j)), double(j * j) / 10.0);
    const auto c = sp::forward(v);
    for (std::size_t k = 0; k < n; ++k) {
        sp::cplx sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) sum += v[j] * std::exp(sp::cplx(0.0, -kTwoPi * double(j * k) / n));
        EXPECT_LT(std::abs(c[k] - sum), 1e-12);
    }
}

TEST(Spectral, Wavenumbers) {
    EXPECT_EQ(sp::wavenumber(0, 8), 0);
    EXPECT_EQ(sp::wavenumber(3, 8), 3);
    EXPECT_EQ(sp::wavenumber(4, 8), 4);
    EXPECT_EQ(sp::wavenumber(5, 8), -3);
    EXPECT_EQ(sp::wavenumber(4, 9), 4);
    EXPECT_EQ(sp::wavenumber(5, 9), -4);
}

TEST(Spectral, DerivativesOfTrigPolynomialAreExact) {
    for (std::size_t n : {16u, 17u, 64u}) {
        const auto f = sample(n, [](double x) { return std::sin(kTwoPi * 3 * x) + 0.5 * std::cos(kTwoPi * 5 * x); });
        const auto d1 = sp::derivative(f, 1);
        const auto d2 = sp::derivative(f, 2);
        const auto d4 = sp::derivative(f, 4);
        for (std::size_t j = 0; j < n; ++j) {
            const double x = double(j) / n;
            const double w3 = kTwoPi * 3, w5 = kTwoPi * 5;
            EXPECT_NEAR(d1[j], w3 * std::cos(w3 * x) - 0.5 * w5 * std::sin(w5 * x), 1e-10);
            EXPECT_NEAR(d2[j], -w3 * w3 * std::sin(w3 * x) - 0.5 * w5 * w5 * std::cos(w5 * x), 1e-8);
            EXPECT_NEAR(d4[j], std::pow(w3, 4) * std::sin(w3 * x) + 0.5 * std::pow(w5, 4) * std::cos(w5 * x), 1e-5);
        }
    }
}

TEST(Spectral, NyquistModeDroppedByOddKeptByEvenDerivatives) {
    const std::size_t n = 16;
    // cos(pi N x) alternates +-1 on the grid.
    const auto f = sample(n, [](double x) { return std::cos(std::numbers::pi * 16 * x); });
    const auto d1 = sp::derivative(f, 1);
    const auto d2 = sp::derivative(f, 2);
    const double w = std::numbers::pi * 16;
    for (std::size_t j = 0; j < n; ++j) {
        EXPECT_NEAR(d1[j], 0.0, 1e-9);
        EXPECT_NEAR(d2[j], -w * w * f[j], 1e-8);
    }
    const auto a = sp::antiderivative(f);
    for (double v : a) EXPECT_NEAR(v, 0.0, 1e-14);
}

TEST(Spectral, AntiderivativeIsMeanFreeInverseOfDerivative) {
    const std::size_t n = 32;
    const auto f = sample(n, [](double x) { return 2.0 + std::cos(kTwoPi * x) + std::sin(kTwoPi * 4 * x); });
    const auto a = sp::antiderivative(f);
    double mean = 0.0;
    for (double v : a) mean += v;
    EXPECT_NEAR(mean / n, 0.0, 1e-15);
    const auto back = sp::derivative(a, 1);
    for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(back[j], f[j] - 2.0, 1e-13);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = double(j) / n;
        EXPECT_NEAR(a[j], std::sin(kTwoPi * x) / kTwoPi - std::cos(kTwoPi * 4 * x) / (kTwoPi * 4), 1e-15);
    }
}

TEST(Spectral, VectorOverloadsActComponentwise) {
    const std::size_t n = 24;
    std::vector<Vec2> v(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = double(j) / n;
        v[j] = {std::cos(kTwoPi * x), std::sin(kTwoPi * 2 * x)};
    }
    const auto d = sp::derivative(std::span<const Vec2>(v), 1);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = double(j) / n;
        EXPECT_NEAR(d[j].x, -kTwoPi * std::sin(kTwoPi * x), 1e-12);
        EXPECT_NEAR(d[j].y, 2 * kTwoPi * std::cos(kTwoPi * 2 * x), 1e-12);
    }
}

TEST(Spectral, MultiplierIdentityAndSmoothing) {
    const std::size_t n = 16;
    std::vector<Vec2> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = {double(j % 3), std::sin(double(j))};
    const auto same = sp::apply_multiplier(std::span<const Vec2>(v), [](int) { return 1.0; });
    for (std::size_t j = 0; j < n; ++j) {
        EXPECT_NEAR(same[j].x, v[j].x, 1e-14);
        EXPECT_NEAR(same[j].y, v[j].y, 1e-14);
    }
    const auto mean = sp::apply_multiplier(std::span<const Vec2>(v), [](int k) { return k == 0 ? 1.0 : 0.0; });
    Vec2 avg;
    for (const auto& p : v) avg += p;
    avg = avg / double(n);
    for (const auto& p : mean) {
        EXPECT_NEAR(p.x, avg.x, 1e-14);
        EXPECT_NEAR(p.y, avg.y, 1e-14);
    }
}

TEST(Spectral, InterpolantReproducesSamplesAndMatchesDirectDft) {
    for (int n : {15, 16}) {
        std::vector<Vec2> s(n);
        for (int j = 0; j < n; ++j) s[j] = {std::cos(0.3 * j * j), std::sin(1.1 * j) + 0.1 * j};
        const auto z = sp::to_complex(std::span<const Vec2>(s));
        const sp::TrigInterpolant interp{std::span<const sp::cplx>(z)};
        for (int j = 0; j < n; ++j) EXPECT_LT(std::abs(interp(double(j) / n) - z[j]), 1e-12);
        const oracle::Trig ref(s);
        for (double x : {0.013, 0.37, 0.5, 0.911}) {
            sp::cplx value, slope;
            interp.evaluate(x, value, slope);
            EXPECT_LT(std::abs(value - ref.eval(x)), 1e-12);
            EXPECT_LT(std::abs(slope - ref.eval(x, 1)), 1e-10);
            EXPECT_LT(std::abs(interp(x) - value), 1e-14);
        }
    }
}

TEST(Spectral, RealInterpolantIsReal) {
    const auto f = sample(20, [](double x) { return std::exp(std::sin(kTwoPi * x)); });
    const sp::TrigInterpolant interp{std::span<const double>(f)};
    const double x = 0.123;
    EXPECT_NEAR(interp(x).imag(), 0.0, 1e-14);
    EXPECT_NEAR(interp(x).real(), std::exp(std::sin(kTwoPi * x)), 1e-6);
}
