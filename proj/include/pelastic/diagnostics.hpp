#pragma once
// Runtime certificates for trajectories of the flow: energy dissipation,
// a-priori length and curvature bounds, weak-form residuals, the elastica
// test for terminal curves, flat-core detection and tau-refinement probes.

#include <string>
#include <vector>

#include "pelastic/flow.hpp"

namespace pelastic {

enum class CertificateKind {
    ProvedBound,     // proved bound; must hold on every trajectory
    Heuristic,      // expected behaviour without a proof behind it
    Informational,  // measurement only, never fails
};

const char* to_string(CertificateKind kind);

struct CertificateReport {
    std::string name;
    bool pass = true;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    std::string context;
    CertificateKind kind = CertificateKind::ProvedBound;
};

/// pass = measured <= bound + tolerance, except for Informational reports.
CertificateReport make_report(std::string name, double measured, double bound, double tolerance,
                              std::string context, CertificateKind kind);

/// True when every ProvedBound report passes.
bool all_proved_bounds_pass(const std::vector<CertificateReport>& reports);

inline constexpr double kStepDissipationTol = 1e-10;
inline constexpr double kWindowDissipationTol = 1e-8;
inline constexpr double kBoundRelTol = 1e-9;

/// Per-step energy decrease E(g_i) + P_i <= E(g_{i-1}), the time-integrated
/// inequality on every dyadic window of step indices, cumulative dissipation
/// sum P_i <= E(g_0), and the space-time L^2 bound on the velocity. Each
/// report carries the worst case over steps or windows.
std::vector<CertificateReport> check_dissipation(const Trajectory& traj);

/// Lower length bound from the bending energy of each curve, the two-sided
/// length bound in terms of E(g_0), E_p(g_i) <= E(g_0) and the bound on
/// int |g_xx|^p.
std::vector<CertificateReport> check_length_bounds(const Trajectory& traj, const EnergyParams& params);

/// Every stored curve has constant_speed_deviation below tol_ac.
CertificateReport check_constraint(const Trajectory& traj);

/// check_dissipation, check_length_bounds and check_constraint together.
std::vector<CertificateReport> certify(const Trajectory& traj);

/// Space-time weak-form residual against eta(x, t) = e(x) h(t), where e runs
/// over Fourier modes 0..K in each component and h over the hat functions of
/// the time grid. Spatial terms use the right-constant interpolant, the time
/// term the piecewise-constant velocity. Each value is divided by
/// ||e||_{W^{2,p}} and by int h dt; the maximum modulus is returned.
double weak_residual(const Trajectory& traj, const EnergyParams& params, int K = 8);

/// The same residual tested against the constant-speed-preserving
/// variations, i.e. with the parameter correction phi1(gamma, e) gamma_x
/// added to e in the time term. This is the optimality condition each step
/// actually solves.
double weak_residual_constrained(const Trajectory& traj, const EnergyParams& params, int K = 8);

/// max over rho in the Fourier modes 0..K of
/// |sum_i tau_i int L_i V_i . rho gamma_{i,x}| / (sum_i tau_i L_i^2 ||V_i|| ||rho|| + eps).
/// The value lies in [0, 1]; 1 means purely tangential motion.
double tangential_residual(const Trajectory& traj, int rho_basis_size = 8);

/// The rho = 1 term of tangential_residual: normalized mean tangential
/// velocity.
double tangential_residual_constant_mode(const Trajectory& traj);

/// p = 2: L^2(ds) norm of -kappa_ss - kappa^3/2 + lambda kappa.
/// p > 2: L^2(ds) norm of the arclength representative of the spatial
/// first variation.
double elastica_residual(const ClosedCurve& curve, const EnergyParams& params);

struct ParamInterval {
    double begin = 0.0;  // node parameter of the first flat node
    double end = 0.0;    // begin + measure, may exceed 1 when wrapping
    double measure = 0.0;
};

struct FlatCoreReport {
    double threshold = 0.0;
    std::vector<ParamInterval> intervals;
    double total_measure = 0.0;
};

/// Maximal cyclic runs of grid nodes with |kappa| < threshold; each node
/// accounts for parameter measure 1/N.
FlatCoreReport flat_core_report(const ClosedCurve& curve, double kappa_threshold);

/// L^2(dx) distance after translating both curves to zero mean.
double recentered_distance(const ClosedCurve& a, const ClosedCurve& b);

struct RefinementStudy {
    std::vector<double> taus;        // tau, tau/2, ..., tau/2^levels
    std::vector<double> distances;   // d(taus[k], taus[k+1]) at the horizon
    std::vector<std::string> errors; // run errors, empty when all runs completed
    std::vector<CertificateReport> reports;
};

/// Runs cfg with tau / 2^k for k = 0..levels and compares terminal curves of
/// consecutive runs. For p = 2 the distances must decrease; for p > 2 they
/// are reported only. Runs execute on up to `threads` threads.
RefinementStudy refinement_study(const ClosedCurve& init, const FlowConfig& cfg, int levels, int threads = 1);

struct GradientCheck {
    double p = 2.0;
    int pair = 0;
    std::string term;      // bending, length or penalty
    double analytic = 0.0;
    double rel_err_coarse = 0.0;  // delta = 1e-3
    double rel_err_fine = 0.0;    // delta = 1e-4
    bool pass = false;
};

/// Compares the first variations with central differences of the energies
/// along (gamma + delta eta) o Phi(delta), realized by reparametrization, on
/// `pairs` seeded random (gamma, eta) pairs per exponent.
std::vector<GradientCheck> gradient_check(const std::vector<double>& exponents, std::size_t n, int pairs,
                                          std::uint64_t seed);

}  // namespace pelastic
