#pragma once

// Minimizing-movements time stepping: each step minimizes
// G(gamma) = total_energy(gamma) + penalty(gamma, prev, tau) over
// constant-speed curves, starting from prev.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pelastic/curve.hpp"
#include "pelastic/energy.hpp"

namespace pelastic {

struct FlowConfig {
    EnergyParams params{2.0, 0.5};
    std::size_t grid_size = 256;
    double tau = 0.01;
    double horizon = 1.0;
    /// Stopping threshold on the preconditioned gradient norm, relative to
    /// max(1, total energy of the initial datum).
    double inner_tol = 1e-6;
    int inner_max_iters = 500;
    double armijo_c = 1e-4;
    double backtrack_factor = 0.5;
    double tol_reparam = 1e-6;
    double tol_ac = kDefaultTolAc;
    std::uint64_t seed = 0;

    /// Throws InvalidParameter when an invariant fails.
    void validate() const;
    /// ceil(horizon / tau), robust to rounding in the ratio.
    std::size_t step_count() const;

    friend bool operator==(const FlowConfig&, const FlowConfig&) = default;
};

enum class StepStatus { Converged, MaxIterations, LineSearchStall };
const char* to_string(StepStatus s);

struct StepRecord {
    std::size_t index = 0;
    double energy_before = 0.0;
    double energy_after = 0.0;
    double penalty_value = 0.0;
    int inner_iters = 0;
    double grad_norm_final = 0.0;
    /// energy_before - energy_after - penalty_value; nonnegative for an
    /// accepted step.
    double dissipation_slack = 0.0;
    StepStatus status = StepStatus::Converged;
};

struct StepResult {
    ClosedCurve curve;
    StepRecord record;
};

struct Trajectory {
    FlowConfig config;
    std::vector<double> times;
    std::vector<ClosedCurve> curves;
    std::vector<StepRecord> records;  // records[i-1] describes step i
    /// True when the supplied initial datum had to be reparametrized.
    bool initial_reparametrized = false;
    /// Set when the run aborted; the trajectory holds the steps completed.
    std::optional<std::string> error;

    std::size_t steps() const { return curves.empty() ? 0 : curves.size() - 1; }
    double step_length(std::size_t i) const { return times.at(i) - times.at(i - 1); }
};

/// One minimizing-movements step. `energy_scale` sets the absolute gradient
/// tolerance inner_tol * max(1, energy_scale); 0 uses the energy of prev.
StepResult minimize_step(const ClosedCurve& prev, const FlowConfig& cfg, double energy_scale = 0.0);

Trajectory run_flow(const ClosedCurve& init, const FlowConfig& cfg);

/// (gamma_i - gamma_{i-1}) / (t_i - t_{i-1}) for 1 <= i <= steps.
VectorField velocity(std::size_t i, const Trajectory& traj);

/// Piecewise linear interpolation in time.
ClosedCurve interp_linear(double t, const Trajectory& traj);

struct ConstantInterpolants {
    ClosedCurve right;  // gamma_i on ((i-1) tau, i tau]
    ClosedCurve left;   // gamma_{i-1} on the same interval
    std::size_t step = 0;
};
/// Right-closed piecewise constant interpolants; t = 0 maps to step 1.
ConstantInterpolants interp_constant(double t, const Trajectory& traj);

/// Index i >= 1 with t in (t_{i-1}, t_i]; throws IndexOutOfRange outside [0, T].
std::size_t step_containing(double t, const Trajectory& traj);

}  // namespace pelastic
