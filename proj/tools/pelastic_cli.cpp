// Command-line driver: run, check-gradients, diagnose, refine, sweep.
// Exit status is 0 only when every proved-bound certificate passes.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "pelastic/diagnostics.hpp"
#include "pelastic/io.hpp"

namespace fs = std::filesystem;
using namespace pelastic;

namespace {

struct Options {
    std::string manifest;
    std::string out;
    bool quiet = false;
    int threads = 1;
};

void print_reports(const std::vector<CertificateReport>& reports) {
    for (const auto& r : reports) {
        std::printf("  %-4s %-30s measured=%-14.6g bound=%-14.6g %s [%s]\n",
                    r.kind == CertificateKind::Informational ? "info" : (r.pass ? "ok" : "FAIL"), r.name.c_str(),
                    r.measured, r.bound, r.context.c_str(), to_string(r.kind));
    }
}

RunManifest manifest_from(const Options& opt) {
    if (opt.manifest.empty()) throw Error(ErrorKind::InvalidParameter, "--manifest is required");
    return load_manifest(opt.manifest);
}

fs::path out_dir(const Options& opt, const RunManifest& m) { return opt.out.empty() ? m.output_dir : fs::path(opt.out); }

int cmd_run(const Options& opt) {
    const auto m = manifest_from(opt);
    const auto dir = out_dir(opt, m);
    const auto outcome = execute_run(m, dir);
    const bool ok = all_proved_bounds_pass(outcome.reports);
    if (!opt.quiet) {
        const auto& traj = outcome.trajectory;
        std::printf("run: %zu steps to t = %g, output in %s\n", traj.steps(), traj.times.back(), dir.c_str());
        if (traj.initial_reparametrized) std::printf("  initial curve was reparametrized to constant speed\n");
        if (traj.error) std::printf("  aborted: %s\n", traj.error->c_str());
        print_reports(outcome.reports);
    }
    return ok ? 0 : 1;
}

int cmd_check_gradients(const Options& opt, std::size_t n, int pairs) {
    std::uint64_t seed = 0;
    if (!opt.manifest.empty()) seed = load_manifest(opt.manifest).config.seed;
    const auto checks = gradient_check({2.0, 3.0}, n, pairs, seed);
    bool ok = true;
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : checks) {
        ok = ok && c.pass;
        arr.push_back({{"p", c.p},
                       {"pair", c.pair},
                       {"term", c.term},
                       {"analytic", c.analytic},
                       {"rel_err_coarse", c.rel_err_coarse},
                       {"rel_err_fine", c.rel_err_fine},
                       {"pass", c.pass}});
        if (!opt.quiet && (!c.pass || c.pair == 0)) {
            std::printf("  %-4s p=%g pair=%-2d %-8s analytic=%-14.8g err(1e-3)=%.2e err(1e-4)=%.2e\n",
                        c.pass ? "ok" : "FAIL", c.p, c.pair, c.term.c_str(), c.analytic, c.rel_err_coarse,
                        c.rel_err_fine);
        }
    }
    if (!opt.out.empty()) {
        fs::create_directories(opt.out);
        std::ofstream(fs::path(opt.out) / "gradient_check.json") << arr.dump(2) << "\n";
    }
    if (!opt.quiet) std::printf("check-gradients: %zu checks, %s\n", checks.size(), ok ? "all pass" : "FAILURES");
    return ok ? 0 : 1;
}

int cmd_diagnose(const Options& opt, const std::string& run_dir_arg) {
    const fs::path run_dir = run_dir_arg.empty() ? fs::path(opt.out) : fs::path(run_dir_arg);
    if (run_dir.empty()) throw Error(ErrorKind::InvalidParameter, "diagnose needs a run directory");
    const auto traj = load_trajectory(run_dir);
    auto reports = certify(traj);
    const auto& params = traj.config.params;
    reports.push_back(make_report("terminal_elastica_residual", elastica_residual(traj.curves.back(), params), 0.0,
                                  0.0, "last snapshot", CertificateKind::Informational));
    if (traj.steps() >= 1) {
        reports.push_back(make_report("weak_residual", weak_residual(traj, params), 0.0, 0.0, "snapshot steps",
                                      CertificateKind::Informational));
        reports.push_back(make_report("tangential_residual", tangential_residual(traj), 0.0, 0.0,
                                      "snapshot steps", CertificateKind::Informational));
    }
    write_report(reports, run_dir / "diagnose_report.json");
    if (!opt.quiet) {
        std::printf("diagnose: %zu snapshots from %s\n", traj.curves.size(), run_dir.c_str());
        print_reports(reports);
    }
    return all_proved_bounds_pass(reports) ? 0 : 1;
}

int cmd_refine(const Options& opt) {
    const auto m = manifest_from(opt);
    const auto dir = out_dir(opt, m);
    const auto init = generate_initial(m.initial_shape, m.config.grid_size);
    const auto study = refinement_study(init, m.config, m.refine_levels, opt.threads);
    nlohmann::json j = {{"taus", study.taus}, {"distances", study.distances}, {"errors", study.errors}};
    fs::create_directories(dir);
    std::ofstream(dir / "refine.json") << j.dump(2) << "\n";
    write_report(study.reports, dir / "refine_reports.json");
    if (!opt.quiet) {
        std::printf("refine: p = %g, %zu runs\n", m.config.params.p(), study.taus.size());
        for (std::size_t k = 0; k < study.distances.size(); ++k) {
            std::printf("  d(%g, %g) = %.6e\n", study.taus[k], study.taus[k + 1], study.distances[k]);
        }
        for (const auto& e : study.errors) std::printf("  error: %s\n", e.c_str());
        print_reports(study.reports);
    }
    return study.errors.empty() && all_proved_bounds_pass(study.reports) ? 0 : 1;
}

int cmd_sweep(const Options& opt) {
    const auto base = manifest_from(opt);
    if (!base.sweep) throw Error(ErrorKind::InvalidParameter, "manifest has no sweep section");
    const auto dir = out_dir(opt, base);
    std::vector<RunManifest> runs;
    std::vector<fs::path> dirs;
    for (double p : base.sweep->p) {
        for (double lambda : base.sweep->lambda) {
            RunManifest m = base;
            m.sweep.reset();
            m.config.params = EnergyParams(p, lambda);
            char name[64];
            std::snprintf(name, sizeof name, "p%g_lambda%g", p, lambda);
            m.output_dir = dir / name;
            dirs.push_back(m.output_dir);
            runs.push_back(std::move(m));
        }
    }
    std::vector<int> status(runs.size(), 1);
    std::vector<std::string> messages(runs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < runs.size(); k = next++) {
            try {
                const auto outcome = execute_run(runs[k], dirs[k]);
                status[k] = all_proved_bounds_pass(outcome.reports) ? 0 : 1;
                messages[k] = std::to_string(outcome.trajectory.steps()) + " steps";
            } catch (const Error& e) {
                messages[k] = e.what();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (int t = 1; t < std::max(1, opt.threads); ++t) pool.emplace_back(worker);
        worker();
    }
    bool ok = true;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        ok = ok && status[k] == 0;
        if (!opt.quiet) {
            std::printf("  %-4s %s: %s\n", status[k] == 0 ? "ok" : "FAIL", dirs[k].c_str(), messages[k].c_str());
        }
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Minimizing-movements simulator for the p-elastic flow of closed planar curves"};
    app.require_subcommand(1);
    Options opt;
    app.add_option("--manifest", opt.manifest, "Run manifest (JSON)");
    app.add_option("--out", opt.out, "Output directory, overrides the manifest");
    app.add_flag("--quiet", opt.quiet, "Suppress console output");
    app.add_option("--threads", opt.threads, "Concurrent runs for refine and sweep")->check(CLI::PositiveNumber);

    auto* run = app.add_subcommand("run", "Run the flow described by a manifest and certify it");
    auto* grad = app.add_subcommand("check-gradients", "Compare first variations with finite differences");
    std::size_t grad_n = 64;
    int grad_pairs = 20;
    grad->add_option("--grid", grad_n, "Grid size")->check(CLI::Range(8, 1 << 16));
    grad->add_option("--pairs", grad_pairs, "Random (curve, direction) pairs per exponent")->check(CLI::PositiveNumber);
    auto* diag = app.add_subcommand("diagnose", "Re-run certificates on the snapshots of a run directory");
    std::string run_dir;
    diag->add_option("run_dir", run_dir, "Run directory (defaults to --out)");
    auto* refine = app.add_subcommand("refine", "Compare terminal curves under repeated tau halving");
    auto* sweep = app.add_subcommand("sweep", "Run the manifest over its grid of p and lambda");
    for (auto* sub : {run, grad, diag, refine, sweep}) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(opt);
        if (*grad) return cmd_check_gradients(opt, grad_n, grad_pairs);
        if (*diag) return cmd_diagnose(opt, run_dir);
        if (*refine) return cmd_refine(opt);
        if (*sweep) return cmd_sweep(opt);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
