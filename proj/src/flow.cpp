#include "pelastic/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pelastic/spectral.hpp"

namespace pelastic {

const char* to_string(StepStatus s) {
    switch (s) {
        case StepStatus::Converged: return "converged";
        case StepStatus::MaxIterations: return "max_iterations";
        case StepStatus::LineSearchStall: return "line_search_stall";
    }
    return "unknown";
}

void FlowConfig::validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidParameter, msg); };
    if (grid_size < kMinGridSize) fail("grid_size must be at least 8");
    if (!(tau > 0.0)) fail("tau must be positive");
    if (!(horizon >= tau)) fail("horizon must be at least tau");
    if (!(inner_tol > 0.0)) fail("inner_tol must be positive");
    if (inner_max_iters < 1) fail("inner_max_iters must be at least 1");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("armijo_c must lie in (0, 1)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) fail("backtrack_factor must lie in (0, 1)");
    if (!(tol_reparam > 0.0)) fail("tol_reparam must be positive");
    if (!(tol_ac > 0.0)) fail("tol_ac must be positive");
}

std::size_t FlowConfig::step_count() const {
    return static_cast<std::size_t>(std::ceil(horizon / tau - 1e-9));
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinStep = 1e-12;

// Diagonal Fourier model of the Hessian of G: penalty mass plus the
// leading second and fourth order terms of the energy.
VectorField precondition(const VectorField& g, const ClosedCurve& gamma, double mass, const EnergyParams& params) {
    const double p = params.p();
    const double len = length(gamma);
    const auto gxx = d2(gamma);
    double weight = 0.0;
    for (const auto& v : gxx.values) weight += std::pow(norm(v), p - 2.0);
    weight /= static_cast<double>(gxx.size());
    const double c4 = (p - 1.0) * weight / std::pow(len, 2.0 * p - 1.0);
    const double c2 = params.lambda() / len;
    return {spectral::apply_multiplier(std::span<const Vec2>(g.values), [&](int k) {
        const double w2 = (kTwoPi * k) * (kTwoPi * k);
        return 1.0 / (mass + c2 * w2 + c4 * w2 * w2);
    })};
}

}  // namespace

StepResult minimize_step(const ClosedCurve& prev, const FlowConfig& cfg, double energy_scale) {
    cfg.validate();
    require_constant_speed(prev, cfg.tol_ac, "minimize_step");
    const auto& params = cfg.params;
    const double tau = cfg.tau;
    const double mass = length(prev) / tau;

    StepRecord rec;
    rec.energy_before = total_energy(prev, params).total;
    const double scale = energy_scale > 0.0 ? energy_scale : rec.energy_before;
    const double tol = cfg.inner_tol * std::max(1.0, scale);

    ClosedCurve current = prev;
    double g_current = rec.energy_before;
    rec.status = StepStatus::MaxIterations;

    int it = 0;
    double grad_norm = 0.0;
    bool have_norm = false;
    for (; it < cfg.inner_max_iters; ++it) {
        const auto g = gradient_step_functional(current, prev, tau, params, cfg.tol_ac);
        auto dir = precondition(g, current, mass, params);
        grad_norm = mass * l2_norm(dir);
        have_norm = true;
        if (grad_norm <= tol) {
            rec.status = StepStatus::Converged;
            break;
        }
        for (auto& v : dir.values) v = -v;
        const double slope = pairing(g, dir);

        bool accepted = false;
        for (double alpha = 1.0; alpha >= kMinStep; alpha *= cfg.backtrack_factor) {
            std::vector<Vec2> moved(current.size());
            for (std::size_t j = 0; j < moved.size(); ++j) moved[j] = current[j] + alpha * dir[j];
            try {
                ClosedCurve trial = reparametrize_constant_speed(ClosedCurve(std::move(moved)));
                const double g_trial = step_functional(trial, prev, tau, params);
                if (g_trial <= g_current + cfg.armijo_c * alpha * slope) {
                    current = std::move(trial);
                    g_current = g_trial;
                    accepted = true;
                    break;
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::DegenerateCurve && e.kind() != ErrorKind::NonMonotoneProfile) throw;
            }
        }
        if (!accepted) {
            rec.status = StepStatus::LineSearchStall;
            break;
        }
        have_norm = false;
    }
    if (!have_norm) {
        const auto g = gradient_step_functional(current, prev, tau, params, cfg.tol_ac);
        grad_norm = mass * l2_norm(precondition(g, current, mass, params));
        if (grad_norm <= tol) rec.status = StepStatus::Converged;
    }

    rec.inner_iters = it;
    rec.grad_norm_final = grad_norm;
    rec.energy_after = total_energy(current, params).total;
    rec.penalty_value = penalty(current, prev, tau);
    rec.dissipation_slack = rec.energy_before - rec.energy_after - rec.penalty_value;
    return {std::move(current), rec};
}

Trajectory run_flow(const ClosedCurve& init, const FlowConfig& cfg) {
    cfg.validate();
    require_same_grid(init.size(), cfg.grid_size, "run_flow");
    Trajectory traj;
    traj.config = cfg;
    if (constant_speed_deviation(init) > cfg.tol_reparam) {
        traj.curves.push_back(reparametrize_constant_speed(init));
        traj.initial_reparametrized = true;
    } else {
        traj.curves.push_back(init);
    }
    traj.times.push_back(0.0);

    const double e0 = total_energy(traj.curves.front(), cfg.params).total;
    const std::size_t n = cfg.step_count();
    traj.curves.reserve(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        try {
            auto step = minimize_step(traj.curves.back(), cfg, e0);
            step.record.index = i;
            traj.curves.push_back(std::move(step.curve));
            traj.records.push_back(step.record);
            traj.times.push_back(static_cast<double>(i) * cfg.tau);
        } catch (const Error& e) {
            traj.error = "step " + std::to_string(i) + ": " + e.what();
            break;
        }
    }
    return traj;
}

VectorField velocity(std::size_t i, const Trajectory& traj) {
    if (i < 1 || i > traj.steps()) {
        throw Error(ErrorKind::IndexOutOfRange, "velocity index " + std::to_string(i) + " outside [1, " +
                                                    std::to_string(traj.steps()) + "]");
    }
    const auto& a = traj.curves[i - 1];
    const auto& b = traj.curves[i];
    const double dt = traj.step_length(i);
    VectorField v{std::vector<Vec2>(a.size())};
    for (std::size_t j = 0; j < a.size(); ++j) v[j] = (b[j] - a[j]) / dt;
    return v;
}

std::size_t step_containing(double t, const Trajectory& traj) {
    if (traj.steps() == 0 || !(t >= 0.0) || t > traj.times.back()) {
        throw Error(ErrorKind::IndexOutOfRange, "time " + std::to_string(t) + " outside trajectory range");
    }
    if (t == 0.0) return 1;
    const auto it = std::lower_bound(traj.times.begin(), traj.times.end(), t);
    return static_cast<std::size_t>(it - traj.times.begin());
}

ClosedCurve interp_linear(double t, const Trajectory& traj) {
    const std::size_t i = step_containing(t, traj);
    if (t == traj.times[i]) return traj.curves[i];
    const auto& a = traj.curves[i - 1];
    const auto& b = traj.curves[i];
    const double s = t - traj.times[i - 1];
    const double dt = traj.step_length(i);
    std::vector<Vec2> out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + s * ((b[j] - a[j]) / dt);
    return ClosedCurve(std::move(out));
}

ConstantInterpolants interp_constant(double t, const Trajectory& traj) {
    const std::size_t i = step_containing(t, traj);
    return {traj.curves[i], traj.curves[i - 1], i};
}

}  // namespace pelastic
