#pragma once

// p-elastic energy, length-penalized total energy, the proximity penalty of
// one minimizing-movements step, and their first variations along the
// constant-speed-preserving perturbation (gamma + delta eta) o Phi(delta, .).

#include "pelastic/curve.hpp"

namespace pelastic {

/// Default relative speed deviation above which a curve is not treated as
/// constant-speed by the variation formulas.
inline constexpr double kDefaultTolAc = 1e-4;

class EnergyParams {
public:
    /// Throws InvalidParameter unless p >= 2 and lambda > 0.
    EnergyParams(double p, double lambda);

    double p() const { return p_; }
    double lambda() const { return lambda_; }

    friend bool operator==(const EnergyParams&, const EnergyParams&) = default;

private:
    double p_;
    double lambda_;
};

struct EnergyBreakdown {
    double bending = 0.0;
    double len = 0.0;
    double total = 0.0;
};

/// (1/p) int |kappa|^p |gamma_x| dx, valid for any immersed parametrization.
double bending_energy(const ClosedCurve& curve, const EnergyParams& params);
/// (1 / (p L^(2p-1))) int |gamma_xx|^p dx; equals bending_energy on
/// constant-speed curves.
double bending_energy_constant_speed(const ClosedCurve& curve, const EnergyParams& params);
/// int |gamma_xx|^p dx.
double second_derivative_p_norm(const ClosedCurve& curve, double p);

EnergyBreakdown total_energy(const ClosedCurve& curve, const EnergyParams& params);

/// (L(prev) / (2 tau)) int |gamma - prev|^2 dx.
double penalty(const ClosedCurve& gamma, const ClosedCurve& prev, double tau);

double step_functional(const ClosedCurve& gamma, const ClosedCurve& prev, double tau,
                       const EnergyParams& params);

// First variations. All require gamma to be constant-speed within `tol_ac`
// and throw NotConstantSpeed otherwise.

double first_variation_bending(const ClosedCurve& gamma, const VectorField& eta,
                               const EnergyParams& params, double tol_ac = kDefaultTolAc);
double first_variation_length(const ClosedCurve& gamma, const VectorField& eta,
                              double tol_ac = kDefaultTolAc);
double first_variation_penalty(const ClosedCurve& gamma, const ClosedCurve& prev, const VectorField& eta,
                               double tau, double tol_ac = kDefaultTolAc);

/// Variation of bending energy in the curvature-weighted form
/// int |kappa|^(p-2) gamma_xx.eta_xx / L^3 - ((2p-1)/p) |kappa|^p gamma_x.eta_x / L.
/// Agrees with first_variation_bending on constant-speed curves.
double first_variation_bending_kappa_form(const ClosedCurve& gamma, const VectorField& eta,
                                          const EnergyParams& params, double tol_ac = kDefaultTolAc);

/// L^2(dx) representative g of eta -> dE_p + lambda dL + dP, so that
/// pairing(g, eta) equals the sum of the three variations for every grid eta.
VectorField gradient_step_functional(const ClosedCurve& gamma, const ClosedCurve& prev, double tau,
                                     const EnergyParams& params, double tol_ac = kDefaultTolAc);

/// Representative of the spatial part eta -> dE_p + lambda dL alone.
VectorField gradient_energy(const ClosedCurve& gamma, const EnergyParams& params,
                            double tol_ac = kDefaultTolAc);

/// |v|^(p-2) v, continuous with value 0 at v = 0.
Vec2 signed_power(const Vec2& v, double p);

/// Radius of the circle minimizing the total energy, ((p-1)/(p lambda))^(1/p).
double stationary_radius(const EnergyParams& params);

void require_constant_speed(const ClosedCurve& gamma, double tol_ac, const char* what);

}  // namespace pelastic
