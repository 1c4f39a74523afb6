#include "pelastic/energy.hpp"

#include <cmath>
#include <string>

#include "pelastic/spectral.hpp"

namespace pelastic {

EnergyParams::EnergyParams(double p, double lambda) : p_(p), lambda_(lambda) {
    if (!(p >= 2.0) || !std::isfinite(p)) {
        throw Error(ErrorKind::InvalidParameter, "exponent p must satisfy p >= 2, got " + std::to_string(p));
    }
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw Error(ErrorKind::InvalidParameter, "length weight must be positive, got " + std::to_string(lambda));
    }
}

Vec2 signed_power(const Vec2& v, double p) {
    const double r = norm(v);
    if (r == 0.0) return {};
    return std::pow(r, p - 2.0) * v;
}

double stationary_radius(const EnergyParams& params) {
    const double p = params.p();
    return std::pow((p - 1.0) / (p * params.lambda()), 1.0 / p);
}

void require_constant_speed(const ClosedCurve& gamma, double tol_ac, const char* what) {
    const double dev = constant_speed_deviation(gamma);
    if (dev > tol_ac) {
        throw Error(ErrorKind::NotConstantSpeed, std::string(what) + ": speed deviation " + std::to_string(dev) +
                                                     " exceeds " + std::to_string(tol_ac));
    }
}

namespace {

// Pointwise coefficients of the spatial weak form on a constant-speed curve:
// variation = <a, eta_xx> + <b, eta_x>.
struct SpatialCoefficients {
    VectorField gx;
    VectorField gxx;
    double len = 0.0;
    VectorField a;       // |gamma_xx|^(p-2) gamma_xx / L^(2p-1)
    VectorField b_bend;  // -((2p-1)/p) |gamma_xx|^p gamma_x / L^(2p+1)
};

SpatialCoefficients spatial_coefficients(const ClosedCurve& gamma, double p) {
    SpatialCoefficients c;
    c.gx = d1(gamma);
    c.gxx = d2(gamma);
    c.len = length(gamma);
    const std::size_t n = gamma.size();
    c.a.values.resize(n);
    c.b_bend.values.resize(n);
    const double la = std::pow(c.len, 2.0 * p - 1.0);
    const double lb = std::pow(c.len, 2.0 * p + 1.0);
    const double kb = (2.0 * p - 1.0) / p;
    for (std::size_t j = 0; j < n; ++j) {
        c.a[j] = signed_power(c.gxx[j], p) / la;
        c.b_bend[j] = (-kb * std::pow(norm(c.gxx[j]), p) / lb) * c.gx[j];
    }
    return c;
}

VectorField difference_over_tau(const ClosedCurve& gamma, const ClosedCurve& prev, double tau) {
    VectorField v{std::vector<Vec2>(gamma.size())};
    for (std::size_t j = 0; j < gamma.size(); ++j) v[j] = (gamma[j] - prev[j]) / tau;
    return v;
}

void require_tau(double tau) {
    if (!(tau > 0.0)) throw Error(ErrorKind::InvalidParameter, "time step must be positive");
}

// Spatial representative D2 a - D1 (b_bend + lambda gamma_x / L).
VectorField spatial_representative(const SpatialCoefficients& c, double lambda) {
    VectorField b = c.b_bend;
    for (std::size_t j = 0; j < b.size(); ++j) b[j] += (lambda / c.len) * c.gx[j];
    auto g = d2(c.a);
    const auto db = d1(b);
    for (std::size_t j = 0; j < g.size(); ++j) g[j] -= db[j];
    return g;
}

}  // namespace

double second_derivative_p_norm(const ClosedCurve& curve, double p) {
    const auto gxx = d2(curve);
    double sum = 0.0;
    for (const auto& v : gxx.values) sum += std::pow(norm(v), p);
    return sum / static_cast<double>(curve.size());
}

double bending_energy(const ClosedCurve& curve, const EnergyParams& params) {
    const auto k = curvature(curve);
    const auto s = speed(curve);
    double sum = 0.0;
    for (std::size_t j = 0; j < curve.size(); ++j) sum += std::pow(std::abs(k[j]), params.p()) * s[j];
    return sum / (params.p() * static_cast<double>(curve.size()));
}

double bending_energy_constant_speed(const ClosedCurve& curve, const EnergyParams& params) {
    const double p = params.p();
    return second_derivative_p_norm(curve, p) / (p * std::pow(length(curve), 2.0 * p - 1.0));
}

EnergyBreakdown total_energy(const ClosedCurve& curve, const EnergyParams& params) {
    EnergyBreakdown e;
    e.bending = bending_energy(curve, params);
    e.len = length(curve);
    e.total = e.bending + params.lambda() * e.len;
    return e;
}

double penalty(const ClosedCurve& gamma, const ClosedCurve& prev, double tau) {
    require_same_grid(gamma.size(), prev.size(), "penalty");
    require_tau(tau);
    double sum = 0.0;
    for (std::size_t j = 0; j < gamma.size(); ++j) sum += norm2(gamma[j] - prev[j]);
    return length(prev) / (2.0 * tau) * sum / static_cast<double>(gamma.size());
}

double step_functional(const ClosedCurve& gamma, const ClosedCurve& prev, double tau,
                       const EnergyParams& params) {
    return total_energy(gamma, params).total + penalty(gamma, prev, tau);
}

double first_variation_bending(const ClosedCurve& gamma, const VectorField& eta, const EnergyParams& params,
                               double tol_ac) {
    require_same_grid(gamma.size(), eta.size(), "first_variation_bending");
    require_constant_speed(gamma, tol_ac, "first_variation_bending");
    const auto c = spatial_coefficients(gamma, params.p());
    return pairing(c.a, d2(eta)) + pairing(c.b_bend, d1(eta));
}

double first_variation_bending_kappa_form(const ClosedCurve& gamma, const VectorField& eta,
                                          const EnergyParams& params, double tol_ac) {
    require_same_grid(gamma.size(), eta.size(), "first_variation_bending_kappa_form");
    require_constant_speed(gamma, tol_ac, "first_variation_bending_kappa_form");
    const double p = params.p();
    const auto k = curvature(gamma);
    const auto gx = d1(gamma);
    const auto gxx = d2(gamma);
    const auto ex = d1(eta);
    const auto exx = d2(eta);
    const double len = length(gamma);
    double sum = 0.0;
    for (std::size_t j = 0; j < gamma.size(); ++j) {
        const double ak = std::abs(k[j]);
        const double w2 = (ak == 0.0 && p > 2.0) ? 0.0 : std::pow(ak, p - 2.0);
        sum += w2 / (len * len * len) * dot(gxx[j], exx[j]) -
               (2.0 * p - 1.0) / p * std::pow(ak, p) / len * dot(gx[j], ex[j]);
    }
    return sum / static_cast<double>(gamma.size());
}

double first_variation_length(const ClosedCurve& gamma, const VectorField& eta, double tol_ac) {
    require_same_grid(gamma.size(), eta.size(), "first_variation_length");
    require_constant_speed(gamma, tol_ac, "first_variation_length");
    const auto gx = d1(gamma);
    return pairing(gx, d1(eta)) / length(gamma);
}

double first_variation_penalty(const ClosedCurve& gamma, const ClosedCurve& prev, const VectorField& eta,
                               double tau, double tol_ac) {
    require_same_grid(gamma.size(), prev.size(), "first_variation_penalty");
    require_same_grid(gamma.size(), eta.size(), "first_variation_penalty");
    require_tau(tau);
    require_constant_speed(gamma, tol_ac, "first_variation_penalty");
    const auto v = difference_over_tau(gamma, prev, tau);
    const auto phi1 = phi1_field(gamma, eta);
    const auto gx = d1(gamma);
    VectorField corrected = eta;
    for (std::size_t j = 0; j < eta.size(); ++j) corrected[j] += phi1[j] * gx[j];
    return length(prev) * pairing(v, corrected);
}

VectorField gradient_energy(const ClosedCurve& gamma, const EnergyParams& params, double tol_ac) {
    require_constant_speed(gamma, tol_ac, "gradient_energy");
    return spatial_representative(spatial_coefficients(gamma, params.p()), params.lambda());
}

VectorField gradient_step_functional(const ClosedCurve& gamma, const ClosedCurve& prev, double tau,
                                     const EnergyParams& params, double tol_ac) {
    require_same_grid(gamma.size(), prev.size(), "gradient_step_functional");
    require_tau(tau);
    require_constant_speed(gamma, tol_ac, "gradient_step_functional");
    const std::size_t n = gamma.size();
    const auto c = spatial_coefficients(gamma, params.p());
    auto g = spatial_representative(c, params.lambda());

    const double lprev = length(prev);
    const auto v = difference_over_tau(gamma, prev, tau);

    // Tangential correction: <w, Phi1(eta)> with w = L(prev) v . gamma_x equals
    // <omega gamma_x, eta_x>, omega = A(w - mean(w) N e_0) / L^2, where A is the
    // mean-free antiderivative and N e_0 represents evaluation at x = 0.
    std::vector<double> w(n);
    double wmean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        w[j] = lprev * dot(v[j], c.gx[j]);
        wmean += w[j];
    }
    wmean /= static_cast<double>(n);
    w[0] -= wmean * static_cast<double>(n);
    const auto omega = spectral::antiderivative(w);
    VectorField flux{std::vector<Vec2>(n)};
    for (std::size_t j = 0; j < n; ++j) flux[j] = (omega[j] / (c.len * c.len)) * c.gx[j];
    const auto dflux = d1(flux);
    for (std::size_t j = 0; j < n; ++j) g[j] += lprev * v[j] - dflux[j];
    return g;
}

}  // namespace pelastic
