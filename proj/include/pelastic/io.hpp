#pragma once
// Run manifests, initial-curve generators and the on-disk formats: CSV
// snapshots, JSON reports and JSON plot series.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pelastic/diagnostics.hpp"
#include "pelastic/flow.hpp"

namespace pelastic {

struct CircleSpec {
    double r = 1.0;
    friend bool operator==(const CircleSpec&, const CircleSpec&) = default;
};

struct EllipseSpec {
    double a = 1.2;
    double b = 0.8;
    friend bool operator==(const EllipseSpec&, const EllipseSpec&) = default;
};

/// Polar curve r (1 + amplitude / modes * sum_{k=2}^{modes+1} (a_k cos k th + b_k sin k th))
/// with a_k, b_k uniform in [-1, 1] drawn from mt19937_64(seed).
struct PerturbedCircleSpec {
    double r = 1.0;
    int modes = 3;
    double amplitude = 0.1;
    std::uint64_t seed = 0;
    friend bool operator==(const PerturbedCircleSpec&, const PerturbedCircleSpec&) = default;
};

using ShapeSpec = std::variant<CircleSpec, EllipseSpec, PerturbedCircleSpec>;

/// Throws InvalidParameter for nonpositive sizes or modes.
void validate_shape(const ShapeSpec& spec);

/// Samples the shape on n nodes and reparametrizes it to constant speed.
/// Throws DegenerateCurve when the perturbation destroys the immersion.
ClosedCurve generate_initial(const ShapeSpec& spec, std::size_t n);

struct SweepSpec {
    std::vector<double> p;
    std::vector<double> lambda;
    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

struct RunManifest {
    FlowConfig config;
    ShapeSpec initial_shape = EllipseSpec{};
    std::filesystem::path output_dir = "out";
    std::size_t snapshot_stride = 1;
    /// tau halvings performed by the refine subcommand.
    int refine_levels = 2;
    /// |kappa| threshold of the flat-core report written for p > 2.
    double flat_core_threshold = 1e-3;
    std::optional<SweepSpec> sweep;
    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

/// Throws Parse on malformed text and InvalidParameter on invalid values.
/// A perturbed-circle shape without its own seed takes config.seed.
RunManifest parse_manifest(const std::string& text);
std::string serialize_manifest(const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const RunManifest& manifest, const std::filesystem::path& path);

/// CSV with header t,j,x,gamma_x,gamma_y,kappa,speed and 17 significant
/// digits per value.
void write_snapshot(const ClosedCurve& curve, double t, const std::filesystem::path& path);

struct Snapshot {
    double t = 0.0;
    ClosedCurve curve;
};

Snapshot read_snapshot(const std::filesystem::path& path);

void write_report(const std::vector<CertificateReport>& reports, const std::filesystem::path& path);
std::vector<CertificateReport> read_report(const std::filesystem::path& path);

/// One JSON record per stored curve: t, step, energy, bending, length,
/// speed_deviation and, for steps >= 1, penalty, inner_iters, grad_norm,
/// status and dissipation_slack.
void emit_plot_data(const Trajectory& traj, const std::filesystem::path& path);

void write_flat_core(const FlatCoreReport& report, const std::filesystem::path& path);

struct RunOutcome {
    Trajectory trajectory;
    std::vector<CertificateReport> reports;
};

/// Generates the initial curve, runs the flow and writes into `out_dir`:
/// manifest.json, snapshots/step_XXXXXX.csv (every stride-th step plus the
/// last), reports.json, plot.json and, for p > 2, flat_core.json.
RunOutcome execute_run(const RunManifest& manifest, const std::filesystem::path& out_dir);

/// Rebuilds a trajectory from the manifest and snapshots that execute_run
/// wrote. With a stride above 1 the steps are the stored snapshots.
Trajectory load_trajectory(const std::filesystem::path& run_dir);

}  // namespace pelastic
