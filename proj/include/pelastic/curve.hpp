#pragma once

// Closed planar curves sampled on the uniform grid x_j = j/N of the unit
// parameter circle, with Fourier-spectral periodic calculus.

#include <cstddef>
#include <span>
#include <vector>

#include "pelastic/error.hpp"
#include "pelastic/vec2.hpp"

namespace pelastic {

inline constexpr std::size_t kMinGridSize = 8;
/// A curve is rejected as degenerate when its minimum speed drops below
/// this fraction of its length.
inline constexpr double kDegeneracyFloor = 1e-8;

struct ScalarField {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t j) const { return values[j]; }
    double& operator[](std::size_t j) { return values[j]; }
};

struct VectorField {
    std::vector<Vec2> values;

    std::size_t size() const { return values.size(); }
    const Vec2& operator[](std::size_t j) const { return values[j]; }
    Vec2& operator[](std::size_t j) { return values[j]; }
};

/// N >= 8 finite samples of an immersed closed curve. Construction checks
/// all invariants and throws `Error` on violation.
class ClosedCurve {
public:
    explicit ClosedCurve(std::vector<Vec2> samples);

    std::size_t size() const { return samples_.size(); }
    const Vec2& operator[](std::size_t j) const { return samples_[j]; }
    std::span<const Vec2> samples() const { return samples_; }
    VectorField as_field() const { return {samples_}; }

    /// Grid node x_j = j/N.
    double node(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(size()); }

    ClosedCurve translated(const Vec2& c) const;
    ClosedCurve scaled(double s) const;
    /// Same image traversed backwards, keeping sample 0 fixed.
    ClosedCurve reversed() const;

private:
    std::vector<Vec2> samples_;
};

/// Samples f(j/N) for j = 0..N-1.
template <class F>
std::vector<Vec2> sample_grid(std::size_t n, F&& f) {
    std::vector<Vec2> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = f(static_cast<double>(j) / static_cast<double>(n));
    return out;
}

// Differentiation. The VectorField overloads accept degenerate data.
VectorField d1(const VectorField& f);
VectorField d2(const VectorField& f);
VectorField d1(const ClosedCurve& c);
VectorField d2(const ClosedCurve& c);
ScalarField d1(const ScalarField& f);

/// Rectangle-rule mean (1/N) sum f_j, i.e. the integral over the unit circle.
double integrate(const ScalarField& f);
double integrate(std::span<const double> f);
/// L^2(dx) pairing of two vector fields on the grid.
double pairing(const VectorField& a, const VectorField& b);
double l2_norm(const VectorField& a);

ScalarField speed(const ClosedCurve& c);
double length(const ClosedCurve& c);
/// Signed curvature (gamma_xx . R gamma_x) / |gamma_x|^3.
ScalarField curvature(const ClosedCurve& c);
/// max_j | |gamma_x(x_j)| - L | / L.
double constant_speed_deviation(const ClosedCurve& c);

/// Constant-speed reparametrization gamma o Phi with Phi(0) = 0, where Phi
/// inverts the normalized cumulative arclength.
ClosedCurve reparametrize_constant_speed(const ClosedCurve& c);

/// Parameter rate of the constant-speed correction for the variation
/// direction eta: (x int_0^1 g_x.eta_x - int_0^x g_x.eta_x) / L^2.
ScalarField phi1_field(const ClosedCurve& gamma, const VectorField& eta);

struct TestFnPair {
    VectorField phi1;
    VectorField phi1_prime;
    VectorField phi2;
    Vec2 alpha;
    Vec2 beta;
    /// |phi1(1) - phi1(0)| + |phi2(1) - phi2(0)| evaluated through the
    /// explicit quadrature formulas.
    double closure_error = 0.0;
};

/// Periodic primitives of psi: phi1'' = psi + 2 beta and phi2' = psi + 2 beta,
/// with phi1(0) = phi2(0) = 0.
TestFnPair build_testfn_pair(const VectorField& psi);

void require_same_grid(std::size_t a, std::size_t b, const char* what);

}  // namespace pelastic
