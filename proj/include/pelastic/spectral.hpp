#pragma once

// Fourier machinery on the uniform periodic grid x_j = j/N.
//
// Samples are treated as values of their trigonometric interpolant. For
// even N the Nyquist mode is read as cos(pi N x): it is dropped by odd
// derivatives and by the antiderivative.

#include <complex>
#include <span>
#include <vector>

#include "pelastic/vec2.hpp"

namespace pelastic::spectral {

using cplx = std::complex<double>;

/// Unnormalized forward DFT, X_k = sum_j x_j exp(-2 pi i jk/N).
std::vector<cplx> forward(std::span<const cplx> values);
/// Inverse of forward(), including the 1/N factor.
std::vector<cplx> inverse(std::span<const cplx> coeffs);

/// Signed wavenumber of DFT slot m (Nyquist slot returns N/2).
int wavenumber(std::size_t m, std::size_t n);

/// Derivative of the given order of the interpolant, sampled on the grid.
std::vector<cplx> derivative(std::span<const cplx> values, int order);
std::vector<double> derivative(std::span<const double> values, int order);
std::vector<Vec2> derivative(std::span<const Vec2> values, int order);

/// Mean-free periodic antiderivative of the mean-free part of `values`.
/// The returned samples have zero mean.
std::vector<double> antiderivative(std::span<const double> values);
std::vector<Vec2> antiderivative(std::span<const Vec2> values);

/// Apply a real, even Fourier multiplier m(|k|) to a vector field.
template <class Multiplier>
std::vector<Vec2> apply_multiplier(std::span<const Vec2> values, Multiplier&& m);

std::vector<cplx> to_complex(std::span<const Vec2> values);
std::vector<cplx> to_complex(std::span<const double> values);
std::vector<Vec2> to_vec2(std::span<const cplx> values);

/// Continuous evaluation of the trigonometric interpolant of grid samples.
class TrigInterpolant {
public:
    explicit TrigInterpolant(std::span<const cplx> values);
    explicit TrigInterpolant(std::span<const double> values);

    cplx operator()(double x) const;
    /// Value and first derivative at x.
    void evaluate(double x, cplx& value, cplx& slope) const;

    std::size_t size() const { return n_; }

private:
    void init(std::vector<cplx> values);

    std::size_t n_ = 0;
    int kmax_ = 0;                // modes -kmax..kmax are stored in `coef_`
    std::vector<cplx> coef_;      // coef_[k + kmax] = c_k
    cplx nyquist_ = 0.0;          // coefficient of cos(pi N x), even N only
};

// ---------------------------------------------------------------------------

template <class Multiplier>
std::vector<Vec2> apply_multiplier(std::span<const Vec2> values, Multiplier&& m) {
    const std::size_t n = values.size();
    auto coeffs = forward(to_complex(values));
    for (std::size_t i = 0; i < n; ++i) {
        const int k = wavenumber(i, n);
        coeffs[i] *= m(k < 0 ? -k : k);
    }
    return to_vec2(inverse(coeffs));
}

}  // namespace pelastic::spectral
