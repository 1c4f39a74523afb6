#include "pelastic/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

namespace pelastic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string step_context(std::size_t i) { return "step " + std::to_string(i); }

std::string window_context(const Trajectory& traj, std::size_t a, std::size_t b) {
    std::ostringstream os;
    os.precision(6);
    os << "window [" << traj.times[a] << ", " << traj.times[b] << "]";
    return os.str();
}

double rel_tol(double bound) { return kBoundRelTol * std::max(1.0, std::abs(bound)); }

// (t_i - t_{i-1}) L(gamma_{i-1}) / 2 * ||V_i||^2, the proximity penalty of
// step i written with the stored curves only.
std::vector<double> step_penalties(const Trajectory& traj) {
    std::vector<double> out(traj.steps() + 1, 0.0);
    for (std::size_t i = 1; i <= traj.steps(); ++i) {
        const double v = l2_norm(velocity(i, traj));
        out[i] = 0.5 * traj.step_length(i) * length(traj.curves[i - 1]) * v * v;
    }
    return out;
}

std::vector<double> energies(const Trajectory& traj, const EnergyParams& params) {
    std::vector<double> out;
    out.reserve(traj.curves.size());
    for (const auto& c : traj.curves) out.push_back(total_energy(c, params).total);
    return out;
}

// Fourier test fields up to mode K in each component: constant, cos and sin.
struct TestField {
    VectorField e;
    double w2p_norm = 0.0;
};

std::vector<TestField> fourier_test_fields(std::size_t n, int K, double p) {
    std::vector<TestField> out;
    for (int comp = 0; comp < 2; ++comp) {
        for (int k = 0; k <= K; ++k) {
            for (int trig = 0; trig < (k == 0 ? 1 : 2); ++trig) {
                VectorField e{std::vector<Vec2>(n)};
                for (std::size_t j = 0; j < n; ++j) {
                    const double x = static_cast<double>(j) / static_cast<double>(n);
                    const double v = trig == 0 ? std::cos(kTwoPi * k * x) : std::sin(kTwoPi * k * x);
                    e[j] = comp == 0 ? Vec2{v, 0.0} : Vec2{0.0, v};
                }
                const auto ex = d1(e);
                const auto exx = d2(e);
                double sum = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    sum += std::pow(norm(e[j]), p) + std::pow(norm(ex[j]), p) + std::pow(norm(exx[j]), p);
                }
                out.push_back({std::move(e), std::pow(sum / static_cast<double>(n), 1.0 / p)});
            }
        }
    }
    return out;
}

std::vector<ScalarField> fourier_scalars(std::size_t n, int K) {
    std::vector<ScalarField> out;
    for (int k = 0; k <= K; ++k) {
        for (int trig = 0; trig < (k == 0 ? 1 : 2); ++trig) {
            ScalarField r{std::vector<double>(n)};
            for (std::size_t j = 0; j < n; ++j) {
                const double x = static_cast<double>(j) / static_cast<double>(n);
                r[j] = trig == 0 ? std::cos(kTwoPi * k * x) : std::sin(kTwoPi * k * x);
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

// residual[i-1][m] = <G_i, e_m> for the L^2(dx) representatives G_i; the
// hat at node m averages the residuals of the adjacent steps.
double hat_tested_max(const Trajectory& traj, const std::vector<std::vector<double>>& residual,
                      const std::vector<TestField>& fields) {
    const std::size_t n = traj.steps();
    double worst = 0.0;
    for (std::size_t node = 0; node <= n; ++node) {
        for (std::size_t m = 0; m < fields.size(); ++m) {
            double num = 0.0;
            double den = 0.0;
            for (std::size_t i : {node, node + 1}) {
                if (i < 1 || i > n) continue;
                const double w = 0.5 * traj.step_length(i);
                num += w * residual[i - 1][m];
                den += w;
            }
            worst = std::max(worst, std::abs(num / den) / fields[m].w2p_norm);
        }
    }
    return worst;
}

void require_steps(const Trajectory& traj, std::size_t k, const char* what) {
    if (traj.steps() < k) {
        throw Error(ErrorKind::InvalidParameter,
                    std::string(what) + ": trajectory needs at least " + std::to_string(k) + " steps");
    }
}

}  // namespace

const char* to_string(CertificateKind kind) {
    switch (kind) {
        case CertificateKind::ProvedBound: return "proved_bound";
        case CertificateKind::Heuristic: return "heuristic";
        case CertificateKind::Informational: return "informational";
    }
    return "unknown";
}

CertificateReport make_report(std::string name, double measured, double bound, double tolerance,
                              std::string context, CertificateKind kind) {
    CertificateReport r;
    r.name = std::move(name);
    r.measured = measured;
    r.bound = bound;
    r.tolerance = tolerance;
    r.context = std::move(context);
    r.kind = kind;
    r.pass = kind == CertificateKind::Informational || measured <= bound + tolerance;
    return r;
}

bool all_proved_bounds_pass(const std::vector<CertificateReport>& reports) {
    return std::all_of(reports.begin(), reports.end(),
                       [](const auto& r) { return r.kind != CertificateKind::ProvedBound || r.pass; });
}

std::vector<CertificateReport> check_dissipation(const Trajectory& traj) {
    std::vector<CertificateReport> out;
    const std::size_t n = traj.steps();
    if (n == 0) return out;
    const auto& params = traj.config.params;
    const auto e = energies(traj, params);
    const auto pen = step_penalties(traj);

    // E(g_i) + P_i - E(g_{i-1}) <= 0
    double worst = -std::numeric_limits<double>::infinity();
    std::size_t worst_i = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        const double excess = e[i] + pen[i] - e[i - 1];
        if (excess > worst) {
            worst = excess;
            worst_i = i;
        }
    }
    out.push_back(make_report("step_dissipation", worst, 0.0, kStepDissipationTol, step_context(worst_i),
                              CertificateKind::ProvedBound));

    // E(t_b) - E(t_a) + sum_{a<i<=b} P_i <= 0 on dyadic windows.
    std::vector<double> cum(n + 1, 0.0);
    for (std::size_t i = 1; i <= n; ++i) cum[i] = cum[i - 1] + pen[i];
    worst = -std::numeric_limits<double>::infinity();
    std::size_t wa = 0, wb = n;
    for (std::size_t level = 1; level <= n; level *= 2) {
        for (std::size_t j = 0; j < level; ++j) {
            const std::size_t a = j * n / level;
            const std::size_t b = (j + 1) * n / level;
            if (a == b) continue;
            const double excess = e[b] - e[a] + (cum[b] - cum[a]);
            if (excess > worst) {
                worst = excess;
                wa = a;
                wb = b;
            }
        }
    }
    out.push_back(make_report("energy_inequality_windows", worst, 0.0, kWindowDissipationTol,
                              window_context(traj, wa, wb), CertificateKind::ProvedBound));

    out.push_back(make_report("cumulative_dissipation", cum[n], e[0], kWindowDissipationTol, "all steps",
                              CertificateKind::ProvedBound));

    const double p = params.p();
    double v2 = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double v = l2_norm(velocity(i, traj));
        v2 += traj.step_length(i) * v * v;
    }
    const double vbound = 2.0 * std::pow(p * e[0] / std::pow(kTwoPi, p), 1.0 / (p - 1.0)) * e[0];
    out.push_back(make_report("velocity_l2_bound", v2, vbound, rel_tol(vbound), "all steps",
                              CertificateKind::ProvedBound));
    return out;
}

std::vector<CertificateReport> check_length_bounds(const Trajectory& traj, const EnergyParams& params) {
    std::vector<CertificateReport> out;
    if (traj.curves.empty()) return out;
    const double p = params.p();
    const double lambda = params.lambda();
    const double e0 = total_energy(traj.curves.front(), params).total;

    // Lower length bound from each curve's own bending energy; reported as
    // (bound value, length) at the curve with the smallest relative margin.
    double worst_margin = std::numeric_limits<double>::infinity();
    double lb_at = 0.0, len_at = 0.0;
    std::size_t at = 0;
    double lmin = std::numeric_limits<double>::infinity(), lmax = 0.0, bmax = 0.0, h2max = 0.0;
    std::size_t lmin_i = 0, lmax_i = 0, bmax_i = 0, h2max_i = 0;
    for (std::size_t i = 0; i < traj.curves.size(); ++i) {
        const auto& c = traj.curves[i];
        const double len = length(c);
        const double bend = bending_energy(c, params);
        const double lb = std::pow(std::pow(kTwoPi, p) / (p * bend), 1.0 / (p - 1.0));
        const double margin = (len - lb) / len;
        if (margin < worst_margin) {
            worst_margin = margin;
            lb_at = lb;
            len_at = len;
            at = i;
        }
        if (len < lmin) lmin = len, lmin_i = i;
        if (len > lmax) lmax = len, lmax_i = i;
        if (bend > bmax) bmax = bend, bmax_i = i;
        const double h2 = second_derivative_p_norm(c, p);
        if (h2 > h2max) h2max = h2, h2max_i = i;
    }
    auto curve_context = [](std::size_t i) { return "curve " + std::to_string(i); };
    out.push_back(make_report("poincare_length_bound", lb_at, len_at, rel_tol(len_at), curve_context(at),
                              CertificateKind::ProvedBound));

    const double lower = std::pow(std::pow(kTwoPi, p) / (p * e0), 1.0 / (p - 1.0));
    out.push_back(make_report("length_sandwich_lower", lower, lmin, rel_tol(lmin), curve_context(lmin_i),
                              CertificateKind::ProvedBound));
    out.push_back(make_report("length_sandwich_upper", lmax, e0 / lambda, rel_tol(e0 / lambda),
                              curve_context(lmax_i), CertificateKind::ProvedBound));
    out.push_back(make_report("bending_energy_bound", bmax, e0, rel_tol(e0), curve_context(bmax_i),
                              CertificateKind::ProvedBound));
    const double h2bound = p * lambda * std::pow(2.0 * e0 / lambda, 2.0 * p);
    out.push_back(make_report("second_derivative_bound", h2max, h2bound, rel_tol(h2bound),
                              curve_context(h2max_i), CertificateKind::ProvedBound));
    return out;
}

CertificateReport check_constraint(const Trajectory& traj) {
    double worst = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < traj.curves.size(); ++i) {
        const double d = constant_speed_deviation(traj.curves[i]);
        if (d > worst) worst = d, at = i;
    }
    return make_report("constant_speed_constraint", worst, traj.config.tol_ac, 0.0,
                       "curve " + std::to_string(at), CertificateKind::ProvedBound);
}

std::vector<CertificateReport> certify(const Trajectory& traj) {
    auto out = check_dissipation(traj);
    const auto bounds = check_length_bounds(traj, traj.config.params);
    out.insert(out.end(), bounds.begin(), bounds.end());
    out.push_back(check_constraint(traj));
    return out;
}

double weak_residual(const Trajectory& traj, const EnergyParams& params, int K) {
    require_steps(traj, 1, "weak_residual");
    const std::size_t n = traj.curves.front().size();
    const auto fields = fourier_test_fields(n, K, params.p());
    std::vector<std::vector<double>> residual(traj.steps());
    for (std::size_t i = 1; i <= traj.steps(); ++i) {
        const auto& g = traj.curves[i];
        auto rep = gradient_energy(g, params, traj.config.tol_ac);
        const auto v = velocity(i, traj);
        const double len = length(g);
        for (std::size_t j = 0; j < n; ++j) rep[j] += len * v[j];
        for (const auto& f : fields) residual[i - 1].push_back(pairing(rep, f.e));
    }
    return hat_tested_max(traj, residual, fields);
}

double weak_residual_constrained(const Trajectory& traj, const EnergyParams& params, int K) {
    require_steps(traj, 1, "weak_residual_constrained");
    const std::size_t n = traj.curves.front().size();
    const auto fields = fourier_test_fields(n, K, params.p());
    std::vector<std::vector<double>> residual(traj.steps());
    for (std::size_t i = 1; i <= traj.steps(); ++i) {
        const auto rep = gradient_step_functional(traj.curves[i], traj.curves[i - 1], traj.step_length(i),
                                                  params, traj.config.tol_ac);
        for (const auto& f : fields) residual[i - 1].push_back(pairing(rep, f.e));
    }
    return hat_tested_max(traj, residual, fields);
}

namespace {

double tangential_ratio(const Trajectory& traj, const std::vector<ScalarField>& rhos) {
    const std::size_t n = traj.curves.front().size();
    std::vector<double> num(rhos.size(), 0.0);
    double den = 0.0;
    for (std::size_t i = 1; i <= traj.steps(); ++i) {
        const auto& g = traj.curves[i];
        const auto gx = d1(g);
        const auto v = velocity(i, traj);
        const double len = length(g);
        const double dt = traj.step_length(i);
        std::vector<double> w(n);
        for (std::size_t j = 0; j < n; ++j) w[j] = dot(v[j], gx[j]);
        for (std::size_t m = 0; m < rhos.size(); ++m) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += w[j] * rhos[m][j];
            num[m] += dt * len * s / static_cast<double>(n);
        }
        den += dt * len * len * l2_norm(v);
    }
    constexpr double eps = 1e-15;
    double worst = 0.0;
    for (std::size_t m = 0; m < rhos.size(); ++m) {
        double r2 = 0.0;
        for (double r : rhos[m].values) r2 += r * r;
        const double rnorm = std::sqrt(r2 / static_cast<double>(n));
        worst = std::max(worst, std::abs(num[m]) / (den * rnorm + eps));
    }
    return worst;
}

}  // namespace

double tangential_residual(const Trajectory& traj, int rho_basis_size) {
    require_steps(traj, 1, "tangential_residual");
    return tangential_ratio(traj, fourier_scalars(traj.curves.front().size(), rho_basis_size));
}

double tangential_residual_constant_mode(const Trajectory& traj) {
    require_steps(traj, 1, "tangential_residual_constant_mode");
    return tangential_ratio(traj, fourier_scalars(traj.curves.front().size(), 0));
}

double elastica_residual(const ClosedCurve& curve, const EnergyParams& params) {
    const std::size_t n = curve.size();
    const auto s = speed(curve);
    double sum = 0.0;
    if (params.p() == 2.0) {
        const auto k = curvature(curve);
        auto ks = d1(k);
        for (std::size_t j = 0; j < n; ++j) ks[j] /= s[j];
        auto kss = d1(ks);
        for (std::size_t j = 0; j < n; ++j) {
            const double r = -kss[j] / s[j] - 0.5 * k[j] * k[j] * k[j] + params.lambda() * k[j];
            sum += r * r * s[j];
        }
    } else {
        const auto g = gradient_energy(curve, params);
        for (std::size_t j = 0; j < n; ++j) sum += norm2(g[j]) / s[j];
    }
    return std::sqrt(sum / static_cast<double>(n));
}

FlatCoreReport flat_core_report(const ClosedCurve& curve, double kappa_threshold) {
    FlatCoreReport rep;
    rep.threshold = kappa_threshold;
    const auto k = curvature(curve);
    const std::size_t n = curve.size();
    std::vector<bool> flat(n);
    for (std::size_t j = 0; j < n; ++j) flat[j] = std::abs(k[j]) < kappa_threshold;
    const double h = 1.0 / static_cast<double>(n);

    if (std::all_of(flat.begin(), flat.end(), [](bool f) { return f; })) {
        rep.intervals.push_back({0.0, 1.0, 1.0});
        rep.total_measure = 1.0;
        return rep;
    }
    // Start scanning right after a non-flat node so runs never straddle the
    // scan origin.
    std::size_t start = 0;
    while (flat[start]) ++start;
    std::size_t run = 0;
    std::size_t run_begin = 0;
    for (std::size_t step = 1; step <= n; ++step) {
        const std::size_t j = (start + step) % n;
        if (flat[j]) {
            if (run == 0) run_begin = j;
            ++run;
        }
        if ((!flat[j] || step == n) && run > 0) {
            const double begin = static_cast<double>(run_begin) * h;
            const double measure = static_cast<double>(run) * h;
            rep.intervals.push_back({begin, begin + measure, measure});
            rep.total_measure += measure;
            run = 0;
        }
    }
    std::sort(rep.intervals.begin(), rep.intervals.end(),
              [](const auto& a, const auto& b) { return a.begin < b.begin; });
    return rep;
}

double recentered_distance(const ClosedCurve& a, const ClosedCurve& b) {
    require_same_grid(a.size(), b.size(), "recentered_distance");
    const std::size_t n = a.size();
    Vec2 ma, mb;
    for (std::size_t j = 0; j < n; ++j) {
        ma += a[j];
        mb += b[j];
    }
    ma = ma / static_cast<double>(n);
    mb = mb / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += norm2((a[j] - ma) - (b[j] - mb));
    return std::sqrt(sum / static_cast<double>(n));
}

RefinementStudy refinement_study(const ClosedCurve& init, const FlowConfig& cfg, int levels, int threads) {
    if (levels < 2) throw Error(ErrorKind::InvalidParameter, "refinement_study needs at least 2 levels");
    RefinementStudy study;
    const std::size_t runs = static_cast<std::size_t>(levels) + 1;
    std::vector<FlowConfig> configs(runs, cfg);
    for (std::size_t k = 0; k < runs; ++k) {
        configs[k].tau = cfg.tau / std::pow(2.0, static_cast<double>(k));
        study.taus.push_back(configs[k].tau);
    }

    std::vector<std::optional<ClosedCurve>> terminal(runs);
    std::vector<std::string> errors(runs);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < runs; k = next++) {
            try {
                auto traj = run_flow(init, configs[k]);
                if (traj.error) {
                    errors[k] = *traj.error;
                } else {
                    terminal[k] = traj.curves.back();
                }
            } catch (const Error& e) {
                errors[k] = e.what();
            }
        }
    };
    const std::size_t nthreads = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1, runs);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < nthreads; ++t) pool.emplace_back(worker);
        worker();
    }
    for (std::size_t k = 0; k < runs; ++k) {
        if (!errors[k].empty()) study.errors.push_back("tau " + std::to_string(study.taus[k]) + ": " + errors[k]);
    }
    if (!study.errors.empty()) return study;

    for (std::size_t k = 0; k + 1 < runs; ++k) {
        study.distances.push_back(recentered_distance(*terminal[k], *terminal[k + 1]));
    }
    const bool unique_regime = cfg.params.p() == 2.0;
    for (std::size_t k = 0; k < study.distances.size(); ++k) {
        std::ostringstream ctx;
        ctx << "d(" << study.taus[k] << ", " << study.taus[k + 1] << ")";
        if (k == 0 || !unique_regime) {
            study.reports.push_back(make_report("refinement_distance", study.distances[k], 0.0, 0.0, ctx.str(),
                                                CertificateKind::Informational));
        } else {
            study.reports.push_back(make_report("refinement_distance_decrease", study.distances[k],
                                                study.distances[k - 1], 0.0, ctx.str(),
                                                CertificateKind::Heuristic));
        }
    }
    return study;
}

namespace {

ClosedCurve random_constant_speed_curve(std::size_t n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double radius = 1.0 + 0.5 * (u(rng) + 1.0);
    std::vector<double> a(4), b(4);
    for (int k = 2; k < 4; ++k) {
        a[k] = 0.05 * u(rng);
        b[k] = 0.05 * u(rng);
    }
    auto pts = sample_grid(n, [&](double x) {
        const double th = kTwoPi * x;
        double r = radius;
        for (int k = 2; k < 4; ++k) r *= 1.0 + a[k] * std::cos(k * th) + b[k] * std::sin(k * th);
        return Vec2{r * std::cos(th), r * std::sin(th)};
    });
    return reparametrize_constant_speed(ClosedCurve(std::move(pts)));
}

VectorField random_smooth_field(std::size_t n, std::mt19937_64& rng, double amplitude) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    constexpr int kModes = 5;
    std::vector<Vec2> c(kModes), s(kModes);
    for (int k = 0; k < kModes; ++k) {
        c[k] = Vec2{u(rng), u(rng)} * (amplitude / (1.0 + k));
        s[k] = Vec2{u(rng), u(rng)} * (amplitude / (1.0 + k));
    }
    return {sample_grid(n, [&](double x) {
        Vec2 v;
        for (int k = 0; k < kModes; ++k) v += std::cos(kTwoPi * k * x) * c[k] + std::sin(kTwoPi * k * x) * s[k];
        return v;
    })};
}

ClosedCurve shifted(const ClosedCurve& g, const VectorField& eta, double delta) {
    std::vector<Vec2> out(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) out[j] = g[j] + delta * eta[j];
    return reparametrize_constant_speed(ClosedCurve(std::move(out)));
}

template <class F>
double central_difference(const ClosedCurve& g, const VectorField& eta, double delta, F&& f) {
    return (f(shifted(g, eta, delta)) - f(shifted(g, eta, -delta))) / (2.0 * delta);
}

}  // namespace

std::vector<GradientCheck> gradient_check(const std::vector<double>& exponents, std::size_t n, int pairs,
                                          std::uint64_t seed) {
    std::vector<GradientCheck> out;
    std::mt19937_64 rng(seed);
    constexpr double tau = 0.1;
    for (double p : exponents) {
        const EnergyParams params(p, 1.0);
        for (int pair = 0; pair < pairs; ++pair) {
            const auto gamma = random_constant_speed_curve(n, rng);
            const auto eta = random_smooth_field(n, rng, 1.0);
            const auto prev = shifted(gamma, random_smooth_field(n, rng, 0.05), 1.0);

            auto record = [&](const char* term, double analytic, auto&& f) {
                GradientCheck gc;
                gc.p = p;
                gc.pair = pair;
                gc.term = term;
                gc.analytic = analytic;
                const double coarse = central_difference(gamma, eta, 1e-3, f);
                const double fine = central_difference(gamma, eta, 1e-4, f);
                gc.rel_err_coarse = std::abs(analytic - coarse) / std::max(1.0, std::abs(coarse));
                gc.rel_err_fine = std::abs(analytic - fine) / std::max(1.0, std::abs(fine));
                gc.pass = gc.rel_err_fine < 1e-5 &&
                          (gc.rel_err_fine <= 0.05 * gc.rel_err_coarse || gc.rel_err_fine < 1e-9);
                out.push_back(gc);
            };
            record("bending", first_variation_bending(gamma, eta, params),
                   [&](const ClosedCurve& c) { return bending_energy(c, params); });
            record("length", first_variation_length(gamma, eta), [](const ClosedCurve& c) { return length(c); });
            record("penalty", first_variation_penalty(gamma, prev, eta, tau),
                   [&](const ClosedCurve& c) { return penalty(c, prev, tau); });
        }
    }
    return out;
}

}  // namespace pelastic
