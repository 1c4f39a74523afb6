#include "pelastic/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace pelastic {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void parse_error(const std::string& msg) { throw Error(ErrorKind::Parse, msg); }

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
        if (!keys.count(key)) parse_error("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read_field(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        parse_error(where + "." + key + ": " + e.what());
    }
}

json shape_to_json(const ShapeSpec& spec) {
    return std::visit(
        [](const auto& s) -> json {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, CircleSpec>) {
                return {{"kind", "circle"}, {"r", s.r}};
            } else if constexpr (std::is_same_v<S, EllipseSpec>) {
                return {{"kind", "ellipse"}, {"a", s.a}, {"b", s.b}};
            } else {
                return {{"kind", "fourier_perturbed_circle"},
                        {"r", s.r},
                        {"modes", s.modes},
                        {"amplitude", s.amplitude},
                        {"seed", s.seed}};
            }
        },
        spec);
}

ShapeSpec shape_from_json(const json& j, std::uint64_t default_seed) {
    if (!j.is_object()) parse_error("initial_shape must be an object");
    std::string kind;
    read_field(j, "kind", kind, "initial_shape");
    if (kind == "circle") {
        reject_unknown(j, {"kind", "r"}, "initial_shape");
        CircleSpec s;
        read_field(j, "r", s.r, "initial_shape");
        return s;
    }
    if (kind == "ellipse") {
        reject_unknown(j, {"kind", "a", "b"}, "initial_shape");
        EllipseSpec s;
        read_field(j, "a", s.a, "initial_shape");
        read_field(j, "b", s.b, "initial_shape");
        return s;
    }
    if (kind == "fourier_perturbed_circle") {
        reject_unknown(j, {"kind", "r", "modes", "amplitude", "seed"}, "initial_shape");
        PerturbedCircleSpec s;
        s.seed = default_seed;
        read_field(j, "r", s.r, "initial_shape");
        read_field(j, "modes", s.modes, "initial_shape");
        read_field(j, "amplitude", s.amplitude, "initial_shape");
        read_field(j, "seed", s.seed, "initial_shape");
        return s;
    }
    parse_error("unknown initial_shape kind '" + kind + "'");
}

json config_to_json(const FlowConfig& c) {
    return {{"p", c.params.p()},
            {"lambda", c.params.lambda()},
            {"grid_size", c.grid_size},
            {"tau", c.tau},
            {"horizon", c.horizon},
            {"inner_tol", c.inner_tol},
            {"inner_max_iters", c.inner_max_iters},
            {"armijo_c", c.armijo_c},
            {"backtrack_factor", c.backtrack_factor},
            {"tol_reparam", c.tol_reparam},
            {"tol_ac", c.tol_ac},
            {"seed", c.seed}};
}

FlowConfig config_from_json(const json& j) {
    if (!j.is_object()) parse_error("config must be an object");
    reject_unknown(j,
                   {"p", "lambda", "grid_size", "tau", "horizon", "inner_tol", "inner_max_iters", "armijo_c",
                    "backtrack_factor", "tol_reparam", "tol_ac", "seed"},
                   "config");
    FlowConfig c;
    double p = c.params.p();
    double lambda = c.params.lambda();
    read_field(j, "p", p, "config");
    read_field(j, "lambda", lambda, "config");
    c.params = EnergyParams(p, lambda);
    read_field(j, "grid_size", c.grid_size, "config");
    read_field(j, "tau", c.tau, "config");
    read_field(j, "horizon", c.horizon, "config");
    read_field(j, "inner_tol", c.inner_tol, "config");
    read_field(j, "inner_max_iters", c.inner_max_iters, "config");
    read_field(j, "armijo_c", c.armijo_c, "config");
    read_field(j, "backtrack_factor", c.backtrack_factor, "config");
    read_field(j, "tol_reparam", c.tol_reparam, "config");
    read_field(j, "tol_ac", c.tol_ac, "config");
    read_field(j, "seed", c.seed, "config");
    c.validate();
    return c;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::string& text, const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

std::string format17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void validate_shape(const ShapeSpec& spec) {
    auto bad = [](const std::string& msg) { throw Error(ErrorKind::InvalidParameter, msg); };
    std::visit(
        [&](const auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, CircleSpec>) {
                if (!(s.r > 0.0)) bad("circle radius must be positive");
            } else if constexpr (std::is_same_v<S, EllipseSpec>) {
                if (!(s.a > 0.0 && s.b > 0.0)) bad("ellipse semi-axes must be positive");
            } else {
                if (!(s.r > 0.0)) bad("perturbed circle radius must be positive");
                if (s.modes < 1) bad("perturbed circle needs at least one mode");
                if (!(s.amplitude >= 0.0) || !std::isfinite(s.amplitude)) bad("amplitude must be finite and >= 0");
            }
        },
        spec);
}

ClosedCurve generate_initial(const ShapeSpec& spec, std::size_t n) {
    validate_shape(spec);
    if (const auto* c = std::get_if<CircleSpec>(&spec)) {
        const double r = c->r;
        return ClosedCurve(sample_grid(n, [r](double x) { return Vec2{r * std::cos(kTwoPi * x), r * std::sin(kTwoPi * x)}; }));
    }
    if (const auto* e = std::get_if<EllipseSpec>(&spec)) {
        const double a = e->a, b = e->b;
        auto pts = sample_grid(n, [a, b](double x) { return Vec2{a * std::cos(kTwoPi * x), b * std::sin(kTwoPi * x)}; });
        return reparametrize_constant_speed(ClosedCurve(std::move(pts)));
    }
    const auto& s = std::get<PerturbedCircleSpec>(spec);
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> a(s.modes), b(s.modes);
    for (int k = 0; k < s.modes; ++k) {
        a[k] = u(rng);
        b[k] = u(rng);
    }
    auto radius = [&](double th) {
        double sum = 0.0;
        for (int k = 0; k < s.modes; ++k) sum += a[k] * std::cos((k + 2) * th) + b[k] * std::sin((k + 2) * th);
        return s.r * (1.0 + s.amplitude / s.modes * sum);
    };
    // A polar curve is immersed exactly when its radius stays positive.
    const std::size_t fine = 16 * n;
    for (std::size_t j = 0; j < fine; ++j) {
        if (!(radius(kTwoPi * static_cast<double>(j) / static_cast<double>(fine)) > 0.0)) {
            throw Error(ErrorKind::DegenerateCurve, "perturbation amplitude too large: radius reaches zero");
        }
    }
    auto pts = sample_grid(n, [&](double x) {
        const double th = kTwoPi * x;
        const double r = radius(th);
        return Vec2{r * std::cos(th), r * std::sin(th)};
    });
    return reparametrize_constant_speed(ClosedCurve(std::move(pts)));
}

RunManifest parse_manifest(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        parse_error(std::string("manifest: ") + e.what());
    }
    if (!j.is_object()) parse_error("manifest must be a JSON object");
    reject_unknown(j,
                   {"config", "initial_shape", "output_dir", "snapshot_stride", "refine_levels",
                    "flat_core_threshold", "sweep"},
                   "manifest");
    RunManifest m;
    if (j.contains("config")) m.config = config_from_json(j.at("config"));
    if (j.contains("initial_shape")) m.initial_shape = shape_from_json(j.at("initial_shape"), m.config.seed);
    validate_shape(m.initial_shape);
    std::string out = m.output_dir.string();
    read_field(j, "output_dir", out, "manifest");
    m.output_dir = out;
    read_field(j, "snapshot_stride", m.snapshot_stride, "manifest");
    read_field(j, "refine_levels", m.refine_levels, "manifest");
    read_field(j, "flat_core_threshold", m.flat_core_threshold, "manifest");
    if (m.snapshot_stride < 1) throw Error(ErrorKind::InvalidParameter, "snapshot_stride must be at least 1");
    if (m.refine_levels < 2) throw Error(ErrorKind::InvalidParameter, "refine_levels must be at least 2");
    if (!(m.flat_core_threshold >= 0.0)) throw Error(ErrorKind::InvalidParameter, "flat_core_threshold must be >= 0");
    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        if (!sw.is_object()) parse_error("sweep must be an object");
        reject_unknown(sw, {"p", "lambda"}, "sweep");
        SweepSpec s;
        read_field(sw, "p", s.p, "sweep");
        read_field(sw, "lambda", s.lambda, "sweep");
        for (double p : s.p) EnergyParams(p, 1.0);
        for (double l : s.lambda) EnergyParams(2.0, l);
        m.sweep = s;
    }
    return m;
}

std::string serialize_manifest(const RunManifest& m) {
    json j = {{"config", config_to_json(m.config)},
              {"initial_shape", shape_to_json(m.initial_shape)},
              {"output_dir", m.output_dir.string()},
              {"snapshot_stride", m.snapshot_stride},
              {"refine_levels", m.refine_levels},
              {"flat_core_threshold", m.flat_core_threshold}};
    if (m.sweep) j["sweep"] = {{"p", m.sweep->p}, {"lambda", m.sweep->lambda}};
    return j.dump(2) + "\n";
}

RunManifest load_manifest(const fs::path& path) {
    try {
        return parse_manifest(read_text(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Io) throw;
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
}

void save_manifest(const RunManifest& manifest, const fs::path& path) { write_text(serialize_manifest(manifest), path); }

void write_snapshot(const ClosedCurve& curve, double t, const fs::path& path) {
    const auto k = curvature(curve);
    const auto s = speed(curve);
    std::ostringstream os;
    os << "t,j,x,gamma_x,gamma_y,kappa,speed\n";
    const std::string ts = format17(t);
    for (std::size_t j = 0; j < curve.size(); ++j) {
        os << ts << ',' << j << ',' << format17(curve.node(j)) << ',' << format17(curve[j].x) << ','
           << format17(curve[j].y) << ',' << format17(k[j]) << ',' << format17(s[j]) << '\n';
    }
    write_text(os.str(), path);
}

Snapshot read_snapshot(const fs::path& path) {
    std::istringstream in(read_text(path));
    std::string line;
    auto fail = [&](const std::string& msg) { throw Error(ErrorKind::Parse, path.string() + ": " + msg); };
    if (!std::getline(in, line) || line != "t,j,x,gamma_x,gamma_y,kappa,speed") fail("unexpected header");
    std::vector<Vec2> pts;
    double t = 0.0;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 7) fail("row " + std::to_string(row) + " has " + std::to_string(cells.size()) + " fields");
        try {
            if (std::stoull(cells[1]) != row) fail("node index out of order at row " + std::to_string(row));
            if (row == 0) t = std::stod(cells[0]);
            pts.push_back({std::stod(cells[3]), std::stod(cells[4])});
        } catch (const std::logic_error&) {
            fail("malformed number at row " + std::to_string(row));
        }
        ++row;
    }
    return {t, ClosedCurve(std::move(pts))};
}

void write_report(const std::vector<CertificateReport>& reports, const fs::path& path) {
    json arr = json::array();
    for (const auto& r : reports) {
        arr.push_back({{"name", r.name},
                       {"pass", r.pass},
                       {"measured", number_or_null(r.measured)},
                       {"bound", number_or_null(r.bound)},
                       {"tolerance", number_or_null(r.tolerance)},
                       {"context", r.context},
                       {"kind", to_string(r.kind)}});
    }
    write_text(arr.dump(2) + "\n", path);
}

std::vector<CertificateReport> read_report(const fs::path& path) {
    json arr;
    try {
        arr = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    std::vector<CertificateReport> out;
    auto num = [](const json& v) { return v.is_null() ? std::nan("") : v.get<double>(); };
    try {
        for (const auto& r : arr) {
            CertificateReport c;
            c.name = r.at("name").get<std::string>();
            c.pass = r.at("pass").get<bool>();
            c.measured = num(r.at("measured"));
            c.bound = num(r.at("bound"));
            c.tolerance = num(r.at("tolerance"));
            c.context = r.at("context").get<std::string>();
            const auto kind = r.at("kind").get<std::string>();
            if (kind == "proved_bound") c.kind = CertificateKind::ProvedBound;
            else if (kind == "heuristic") c.kind = CertificateKind::Heuristic;
            else if (kind == "informational") c.kind = CertificateKind::Informational;
            else throw Error(ErrorKind::Parse, path.string() + ": unknown kind " + kind);
            out.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    return out;
}

void emit_plot_data(const Trajectory& traj, const fs::path& path) {
    json arr = json::array();
    const auto& params = traj.config.params;
    for (std::size_t i = 0; i < traj.curves.size(); ++i) {
        const auto e = total_energy(traj.curves[i], params);
        json rec = {{"t", traj.times[i]},
                    {"step", i},
                    {"energy", e.total},
                    {"bending", e.bending},
                    {"length", e.len},
                    {"speed_deviation", constant_speed_deviation(traj.curves[i])}};
        if (i >= 1 && i <= traj.records.size()) {
            const auto& r = traj.records[i - 1];
            rec["penalty"] = r.penalty_value;
            rec["inner_iters"] = r.inner_iters;
            rec["grad_norm"] = r.grad_norm_final;
            rec["status"] = to_string(r.status);
            rec["dissipation_slack"] = r.dissipation_slack;
        }
        arr.push_back(std::move(rec));
    }
    write_text(arr.dump(2) + "\n", path);
}

void write_flat_core(const FlatCoreReport& report, const fs::path& path) {
    json intervals = json::array();
    for (const auto& iv : report.intervals) {
        intervals.push_back({{"begin", iv.begin}, {"end", iv.end}, {"measure", iv.measure}});
    }
    const json j = {{"threshold", report.threshold}, {"total_measure", report.total_measure}, {"intervals", intervals}};
    write_text(j.dump(2) + "\n", path);
}

RunOutcome execute_run(const RunManifest& manifest, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir / "snapshots", ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + (out_dir / "snapshots").string() + ": " + ec.message());
    save_manifest(manifest, out_dir / "manifest.json");

    const auto init = generate_initial(manifest.initial_shape, manifest.config.grid_size);
    RunOutcome outcome{run_flow(init, manifest.config), {}};
    const auto& traj = outcome.trajectory;

    for (std::size_t i = 0; i < traj.curves.size(); ++i) {
        if (i % manifest.snapshot_stride != 0 && i + 1 != traj.curves.size()) continue;
        char name[32];
        std::snprintf(name, sizeof name, "step_%06zu.csv", i);
        write_snapshot(traj.curves[i], traj.times[i], out_dir / "snapshots" / name);
    }

    auto& reports = outcome.reports;
    reports = certify(traj);
    reports.push_back(make_report("run_completed", traj.error ? 1.0 : 0.0, 0.0, 0.0,
                                  traj.error.value_or("all steps"), CertificateKind::ProvedBound));
    const auto& params = manifest.config.params;
    reports.push_back(make_report("terminal_elastica_residual", elastica_residual(traj.curves.back(), params), 0.0,
                                  0.0, "t = " + format17(traj.times.back()), CertificateKind::Informational));
    if (traj.steps() >= 1) {
        reports.push_back(make_report("weak_residual", weak_residual(traj, params), 0.0, 0.0, "K = 8",
                                      CertificateKind::Informational));
        reports.push_back(make_report("weak_residual_constrained", weak_residual_constrained(traj, params), 0.0,
                                      0.0, "K = 8", CertificateKind::Informational));
        reports.push_back(make_report("tangential_residual", tangential_residual(traj), 0.0, 0.0, "K = 8",
                                      CertificateKind::Informational));
    }
    write_report(reports, out_dir / "reports.json");
    emit_plot_data(traj, out_dir / "plot.json");
    if (params.p() > 2.0) {
        write_flat_core(flat_core_report(traj.curves.back(), manifest.flat_core_threshold), out_dir / "flat_core.json");
    }
    return outcome;
}

Trajectory load_trajectory(const fs::path& run_dir) {
    const auto manifest = load_manifest(run_dir / "manifest.json");
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(run_dir / "snapshots", ec)) {
        if (entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    if (ec) throw Error(ErrorKind::Io, "cannot list " + (run_dir / "snapshots").string() + ": " + ec.message());
    if (files.empty()) throw Error(ErrorKind::Io, "no snapshots in " + (run_dir / "snapshots").string());
    std::sort(files.begin(), files.end());
    Trajectory traj;
    traj.config = manifest.config;
    for (const auto& f : files) {
        auto snap = read_snapshot(f);
        require_same_grid(snap.curve.size(), manifest.config.grid_size, "load_trajectory");
        if (!traj.times.empty() && !(snap.t > traj.times.back())) {
            throw Error(ErrorKind::Parse, f.string() + ": snapshot times not increasing");
        }
        traj.times.push_back(snap.t);
        traj.curves.push_back(std::move(snap.curve));
    }
    return traj;
}

}  // namespace pelastic
