// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances are pinned below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pelastic/diagnostics.hpp"
#include "pelastic/io.hpp"

using namespace pelastic;

namespace {

constexpr double kTwoPi = oracle::kTwoPi;

// Criterion 1
constexpr std::size_t kGradGrid = 64;
constexpr int kGradPairs = 20;
constexpr double kGradRelTol = 1e-5;
constexpr double kDeltaCoarse = 1e-3;
constexpr double kDeltaFine = 1e-4;
constexpr double kQuadraticDecay = 0.05;  // err(1e-4) <= 0.05 err(1e-3); exact O(d^2) gives 0.01
constexpr double kDecayFloor = 1e-9;
// Criterion 2
constexpr double kScalingRelTol = 1e-6;
// Criteria 3 to 5
constexpr double kStepTol = 1e-10;
constexpr double kWindowTol = 1e-8;
constexpr double kPoincareEqualityTol = 1e-4;
// Criterion 6
constexpr int kStationarySteps = 100;
constexpr double kStationaryMove = 1e-4;
constexpr double kStationaryEnergyDrop = 1e-6;
// Criterion 7
constexpr double kElasticaTol = 1e-3;
constexpr double kLengthRelTol = 0.01;
// Criterion 8
constexpr double kResidualDecrease = 1.5;
// Criterion 10
constexpr double kIdempotenceTol = 1e-10;
constexpr double kDeviationTol = 1e-6;
constexpr double kWarpedRecoveryTol = 1e-4;

struct Outcome {
    bool pass;
    std::string detail;
};

FlowConfig benchmark_config() {
    FlowConfig cfg;
    cfg.params = EnergyParams(2.0, 0.5);
    cfg.grid_size = 256;
    cfg.tau = 0.01;
    cfg.horizon = 10.0;
    return cfg;
}

ClosedCurve ellipse_initial(std::size_t n) { return generate_initial(EllipseSpec{1.2, 0.8}, n); }

// Trajectories shared between criteria.
struct Runs {
    Trajectory ellipse;     // the p = 2 benchmark
    Trajectory stationary;  // circle at the stationary radius
    Trajectory smoke;       // p = 3 from a perturbed circle
    bool have_smoke = false;
};

Runs& runs() {
    static Runs r;
    return r;
}

const Trajectory& ellipse_run() {
    auto& r = runs();
    if (r.ellipse.curves.empty()) r.ellipse = run_flow(ellipse_initial(256), benchmark_config());
    return r.ellipse;
}

const Trajectory& stationary_run() {
    auto& r = runs();
    if (r.stationary.curves.empty()) {
        FlowConfig cfg = benchmark_config();
        cfg.horizon = kStationarySteps * cfg.tau;
        r.stationary = run_flow(ClosedCurve(oracle::circle(256, stationary_radius(cfg.params))), cfg);
    }
    return r.stationary;
}

FlowConfig smoke_config() {
    FlowConfig cfg;
    cfg.params = EnergyParams(3.0, 0.5);
    cfg.grid_size = 128;
    cfg.tau = 0.01;
    cfg.horizon = 2.0;
    cfg.seed = 7;
    return cfg;
}

const Trajectory& smoke_run() {
    auto& r = runs();
    if (!r.have_smoke) {
        const auto cfg = smoke_config();
        r.smoke = run_flow(generate_initial(PerturbedCircleSpec{1.0, 3, 0.1, cfg.seed}, cfg.grid_size), cfg);
        r.have_smoke = true;
    }
    return r.smoke;
}

std::vector<const Trajectory*> benchmark_runs() { return {&ellipse_run(), &stationary_run(), &smoke_run()}; }

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Random constant-speed curve from a turning angle with even modes; no
// library reparametrization involved.
oracle::TurningCurve random_turning_curve(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<oracle::AngleMode> modes;
    for (int k : {2, 4, 6}) modes.push_back({k, 0.15 * u(rng) / (k / 2), kTwoPi * u(rng)});
    return oracle::fourier_turning_curve(modes, 4.0 + 2.0 * u(rng));
}

std::vector<Vec2> random_field(std::size_t n, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec2> c(5), s(5);
    for (int k = 0; k < 5; ++k) {
        c[k] = Vec2{u(rng), u(rng)} * (amplitude / (1.0 + k));
        s[k] = Vec2{u(rng), u(rng)} * (amplitude / (1.0 + k));
    }
    return sample_grid(n, [&](double x) {
        Vec2 v;
        for (int k = 0; k < 5; ++k) v += std::cos(kTwoPi * k * x) * c[k] + std::sin(kTwoPi * k * x) * s[k];
        return v;
    });
}

Outcome gradient_correctness() {
    std::mt19937_64 rng(20240601);
    const double tau = 0.1;
    const EnergyParams unit_lambda(2.0, 1.0);
    int failures = 0, checks = 0;
    double worst_err = 0.0, worst_ratio = 0.0;
    for (double p : {2.0, 3.0}) {
        const EnergyParams prm(p, 1.0);
        for (int pair = 0; pair < kGradPairs; ++pair) {
            const auto gpts = random_turning_curve(rng).samples(int(kGradGrid));
            const ClosedCurve g(gpts);
            const auto eta_pts = random_field(kGradGrid, rng, 1.0);
            const VectorField eta{eta_pts};
            const auto prev_pts = oracle::reparametrize(oracle::axpy(gpts, 1.0, random_field(kGradGrid, rng, 0.05)));
            const ClosedCurve prev(prev_pts);

            // Perturbed curves pushed back onto the constraint set by the
            // independent reparametrization: (gamma + d eta) o Phi(d).
            std::vector<ClosedCurve> moved;
            for (double d : {kDeltaCoarse, -kDeltaCoarse, kDeltaFine, -kDeltaFine}) {
                moved.emplace_back(oracle::reparametrize(oracle::axpy(gpts, d, eta_pts)));
            }
            struct Term {
                double analytic;
                std::function<double(const ClosedCurve&)> f;
            };
            const Term terms[] = {
                {first_variation_bending(g, eta, prm), [&](const ClosedCurve& c) { return bending_energy(c, prm); }},
                {first_variation_length(g, eta), [](const ClosedCurve& c) { return length(c); }},
                {first_variation_penalty(g, prev, eta, tau),
                 [&](const ClosedCurve& c) { return penalty(c, prev, tau); }},
            };
            (void)unit_lambda;
            for (const auto& t : terms) {
                const double fd3 = (t.f(moved[0]) - t.f(moved[1])) / (2 * kDeltaCoarse);
                const double fd4 = (t.f(moved[2]) - t.f(moved[3])) / (2 * kDeltaFine);
                const double e3 = std::abs(t.analytic - fd3) / std::max(1.0, std::abs(fd3));
                const double e4 = std::abs(t.analytic - fd4) / std::max(1.0, std::abs(fd4));
                const bool decay = e4 <= kQuadraticDecay * e3 || e4 < kDecayFloor;
                ++checks;
                if (!(e4 < kGradRelTol) || !decay) ++failures;
                worst_err = std::max(worst_err, e4);
                if (e4 >= kDecayFloor) worst_ratio = std::max(worst_ratio, e4 / e3);
            }
        }
    }
    return {failures == 0, fmt("%d/%d checks ok, max rel err(1e-4) = %.2e (tol %.0e), max err ratio = %.3f (<= %.2f)",
                               checks - failures, checks, worst_err, kGradRelTol, worst_ratio, kQuadraticDecay)};
}

Outcome scaling_identity() {
    std::mt19937_64 rng(77);
    double worst = 0.0;
    for (int c = 0; c < 3; ++c) {
        const ClosedCurve g(random_turning_curve(rng).samples(256));
        for (double p : {2.0, 3.0, 4.0}) {
            const EnergyParams prm(p, 1.0);
            const double lhs = first_variation_bending(g, g.as_field(), prm);
            const double rhs = (1.0 - p) * bending_energy(g, prm);
            worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
        }
    }
    return {worst < kScalingRelTol, fmt("max rel err = %.2e over 3 curves x p in {2,3,4} (tol %.0e)", worst,
                                        kScalingRelTol)};
}

const CertificateReport* find(const std::vector<CertificateReport>& rs, const std::string& name) {
    for (const auto& r : rs) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

Outcome per_step_dissipation() {
    bool ok = true;
    double worst_step = -INFINITY, worst_cum = -INFINITY;
    for (const auto* t : benchmark_runs()) {
        if (t->error) return {false, "run aborted: " + *t->error};
        const auto rs = check_dissipation(*t);
        const auto* step = find(rs, "step_dissipation");
        const auto* cum = find(rs, "cumulative_dissipation");
        ok = ok && step && cum && step->measured <= kStepTol && cum->measured <= cum->bound + kWindowTol;
        worst_step = std::max(worst_step, step->measured);
        worst_cum = std::max(worst_cum, cum->measured - cum->bound);
    }
    return {ok, fmt("3 runs, max E_i + P_i - E_{i-1} = %.2e (tol %.0e), max sum P - E_0 = %.3e", worst_step, kStepTol,
                    worst_cum)};
}

Outcome energy_inequality() {
    const auto& t = ellipse_run();
    if (t.error) return {false, "run aborted: " + *t.error};
    const auto rs = check_dissipation(t);
    const auto* w = find(rs, "energy_inequality_windows");
    const bool ok = w && w->measured <= kWindowTol;
    return {ok, fmt("ellipse benchmark, worst window excess = %.2e at %s (slack tol %.0e)", w->measured,
                    w->context.c_str(), kWindowTol)};
}

Outcome length_bounds() {
    bool ok = true;
    std::string failed;
    for (const auto* t : benchmark_runs()) {
        const auto rs = check_length_bounds(*t, t->config.params);
        for (const auto& r : rs) {
            if (!r.pass) {
                ok = false;
                failed += " " + r.name;
            }
        }
    }
    double worst_eq = 0.0;
    for (double r : {0.5, 1.0, 2.0}) {
        const ClosedCurve c(oracle::circle(256, r));
        const double ep = bending_energy(c, EnergyParams(2.0, 1.0));
        const double bound = std::pow(kTwoPi, 2) / (2.0 * ep);
        worst_eq = std::max(worst_eq, std::abs(bound / length(c) - 1.0));
    }
    ok = ok && worst_eq < kPoincareEqualityTol;
    return {ok, fmt("all curves of 3 runs within bounds%s; circle equality rel err = %.2e (tol %.0e)",
                    failed.empty() ? "" : (": failed" + failed).c_str(), worst_eq, kPoincareEqualityTol)};
}

Outcome stationary_circle() {
    const auto& t = stationary_run();
    if (t.error) return {false, "run aborted: " + *t.error};
    const auto& c0 = t.curves.front();
    double move = 0.0;
    for (const auto& c : t.curves) {
        double s = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) s += norm2(c[j] - c0[j]);
        move = std::max(move, std::sqrt(s / double(c.size())));
    }
    const auto& prm = t.config.params;
    const double drop = total_energy(c0, prm).total - total_energy(t.curves.back(), prm).total;
    const bool ok = t.steps() == std::size_t(kStationarySteps) && move < kStationaryMove && drop < kStationaryEnergyDrop;
    return {ok, fmt("r* = %.6g, %zu steps, max L2 move = %.2e (tol %.0e), energy drop = %.2e (tol %.0e)",
                    stationary_radius(prm), t.steps(), move, kStationaryMove, drop, kStationaryEnergyDrop)};
}

Outcome elastica_limit() {
    const auto& t = ellipse_run();
    if (t.error) return {false, "run aborted: " + *t.error};
    const auto& prm = t.config.params;
    const double res = elastica_residual(t.curves.back(), prm);
    const double target = kTwoPi * stationary_radius(prm);
    const double len_err = std::abs(length(t.curves.back()) - target) / target;
    return {res < kElasticaTol && len_err < kLengthRelTol,
            fmt("terminal residual = %.2e (tol %.0e), |L - 2 pi r*| / 2 pi r* = %.2e (tol %.0e)", res, kElasticaTol,
                len_err, kLengthRelTol)};
}

Outcome residual_refinement() {
    // (tau, N), (tau/2, 2N), (tau/4, 4N). The middle level is the benchmark.
    const std::pair<double, std::size_t> levels[] = {{0.02, 128}, {0.01, 256}, {0.005, 512}};
    std::vector<double> weak, tang, weak_c, tang_c;
    for (const auto& [tau, n] : levels) {
        Trajectory local;
        const Trajectory* t = nullptr;
        if (n == 256) {
            t = &ellipse_run();
        } else {
            FlowConfig cfg = benchmark_config();
            cfg.tau = tau;
            cfg.grid_size = n;
            local = run_flow(ellipse_initial(n), cfg);
            t = &local;
        }
        if (t->error) return {false, "run aborted: " + *t->error};
        weak.push_back(weak_residual(*t, t->config.params));
        tang.push_back(tangential_residual(*t));
        weak_c.push_back(weak_residual_constrained(*t, t->config.params));
        tang_c.push_back(tangential_residual_constant_mode(*t));
    }
    bool ok = true;
    for (std::size_t k = 0; k + 1 < weak.size(); ++k) {
        ok = ok && weak[k] >= kResidualDecrease * weak[k + 1] && tang[k] >= kResidualDecrease * tang[k + 1];
    }
    return {ok, fmt("weak %.3e %.3e %.3e, tangential %.3e %.3e %.3e (need factor %.1f per level); "
                    "constrained weak %.2e %.2e %.2e, mean tangential %.2e %.2e %.2e",
                    weak[0], weak[1], weak[2], tang[0], tang[1], tang[2], kResidualDecrease, weak_c[0], weak_c[1],
                    weak_c[2], tang_c[0], tang_c[1], tang_c[2])};
}

Outcome uniqueness_probe() {
    FlowConfig cfg = benchmark_config();
    cfg.tau = 0.02;
    cfg.horizon = 1.0;
    const auto study = refinement_study(ellipse_initial(cfg.grid_size), cfg, 3);
    if (!study.errors.empty()) return {false, "run aborted: " + study.errors.front()};
    bool ok = study.distances.size() == 3;
    for (std::size_t k = 0; ok && k + 1 < study.distances.size(); ++k) {
        ok = study.distances[k + 1] < study.distances[k];
    }
    return {ok, fmt("T = 1, N = 256: d(0.02,0.01) = %.3e, d(0.01,0.005) = %.3e, d(0.005,0.0025) = %.3e",
                    study.distances[0], study.distances[1], study.distances[2])};
}

Outcome reparametrization() {
    const std::size_t n = 256;
    std::vector<ClosedCurve> inputs;
    inputs.emplace_back(oracle::ellipse(n, 1.2, 0.8));
    inputs.emplace_back(oracle::ellipse(n, 2.0, 0.7));
    inputs.emplace_back(sample_grid(n, [](double x) {
        const double th = kTwoPi * x;
        const double r = 1.0 + 0.2 * std::cos(2 * th) + 0.1 * std::sin(3 * th);
        return Vec2{r * std::cos(th), r * std::sin(th)};
    }));
    const ClosedCurve warped(sample_grid(n, [](double x) {
        const double w = x + 0.1 * std::sin(kTwoPi * x);
        return Vec2{std::cos(kTwoPi * w), std::sin(kTwoPi * w)};
    }));
    inputs.push_back(warped);
    double idem = 0.0, dev = 0.0;
    for (const auto& c : inputs) {
        const auto once = reparametrize_constant_speed(c);
        const auto twice = reparametrize_constant_speed(once);
        for (std::size_t j = 0; j < n; ++j) idem = std::max(idem, norm(once[j] - twice[j]));
        dev = std::max(dev, constant_speed_deviation(once));
    }
    const auto recovered = reparametrize_constant_speed(warped);
    const auto uniform = oracle::circle(int(n), 1.0);
    double rec = 0.0;
    for (std::size_t j = 0; j < n; ++j) rec = std::max(rec, norm(recovered[j] - uniform[j]));
    const bool ok = idem < kIdempotenceTol && dev < kDeviationTol && rec < kWarpedRecoveryTol;
    return {ok, fmt("N = 256: idempotence %.2e (tol %.0e), deviation %.2e (tol %.0e), warped recovery %.2e (tol %.0e)",
                    idem, kIdempotenceTol, dev, kDeviationTol, rec, kWarpedRecoveryTol)};
}

Outcome non_quadratic_smoke() {
    const auto& t = smoke_run();
    if (t.error) return {false, "run aborted: " + *t.error};
    const auto rs = certify(t);
    const bool ok = all_proved_bounds_pass(rs) && std::abs(t.times.back() - 2.0) < 1e-12;
    const auto fc = flat_core_report(t.curves.back(), 1e-3);
    std::string failed;
    for (const auto& r : rs) {
        if (r.kind == CertificateKind::ProvedBound && !r.pass) failed += " " + r.name;
    }
    return {ok, fmt("p = 3 to T = %g, %zu certificates%s; flat core (|kappa| < 1e-3): %zu intervals, measure %.4f, "
                    "min |kappa| = %.3e",
                    t.times.back(), rs.size(), failed.empty() ? " all pass" : (", failed:" + failed).c_str(),
                    fc.intervals.size(), fc.total_measure,
                    [&] {
                        double m = INFINITY;
                        for (double k : curvature(t.curves.back()).values) m = std::min(m, std::abs(k));
                        return m;
                    }())};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "gradient correctness", gradient_correctness},
        {2, "scaling identity", scaling_identity},
        {3, "per-step dissipation", per_step_dissipation},
        {4, "energy inequality on dyadic windows", energy_inequality},
        {5, "length bounds", length_bounds},
        {6, "stationary circle", stationary_circle},
        {7, "elastica limit", elastica_limit},
        {8, "weak-form and tangential residual refinement", residual_refinement},
        {9, "uniqueness probe", uniqueness_probe},
        {10, "reparametrization", reparametrization},
        {11, "p = 3 smoke run", non_quadratic_smoke},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %2d (%s): %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", int(std::size(criteria)) - failed, std::size(criteria));
    return failed == 0 ? 0 : 1;
}
