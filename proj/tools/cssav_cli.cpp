// Command-line front end: run a case, run a time-step convergence study, or
// check a mesh file.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>

#include "cssav/benchmarks.hpp"
#include "cssav/config.hpp"
#include "cssav/output.hpp"

namespace fs = std::filesystem;
using namespace cssav;

namespace {

struct Flags {
    std::string output;
    int snapshot_every = -1;
    bool quiet = false;
    bool deterministic = false;
};

RunConfig load(const std::string& path, const Flags& flags)
{
    RunConfig cfg = parse_config(path);
    if (!flags.output.empty()) cfg.output_dir = flags.output;
    if (flags.snapshot_every >= 0) cfg.snapshot_every = flags.snapshot_every;
    if (flags.quiet) cfg.verbosity = 0;
    validate(cfg);
    fs::create_directories(cfg.output_dir);
    return cfg;
}

FlowProblem problem_for(CaseId id, double nu)
{
    switch (id) {
    case CaseId::TaylorGreen: return taylor_green_problem(nu);
    case CaseId::LidCavity: return lid_cavity_problem();
    case CaseId::TurekCylinder: return turek_problem();
    }
    return {};
}

std::string snapshot_name(int step)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06d.vtk", step);
    return buf;
}

int run_case(const RunConfig& cfg)
{
    const Mesh mesh = make_case_mesh(cfg.case_id, cfg.mesh);
    const SavStepper stepper(mesh, cfg.params, problem_for(cfg.case_id, cfg.params.nu));
    const fs::path dir(cfg.output_dir);
    if (cfg.verbosity > 0)
        std::cout << to_string(cfg.case_id) << ": " << mesh.n_cells() << " cells, "
                  << stepper.velocity_space().n_dofs() << " velocity DOFs, " << cfg.params.n_steps() << " steps\n";

    Table forces{{"time", "cd", "cl"}, {{}, {}, {}}};
    FlowState state = stepper.initialize();
    const auto records = run_to_end(stepper, state, [&](const FlowState& b, const FlowState& a, const DiagnosticsRecord& r) {
        if (cfg.case_id == CaseId::TurekCylinder) {
            const Forces f = compute_forces(stepper, b, a);
            forces.columns[0].push_back(a.t);
            forces.columns[1].push_back(f.cd);
            forces.columns[2].push_back(f.cl);
        }
        if (cfg.snapshot_every > 0 && a.step % cfg.snapshot_every == 0)
            write_vtk(stepper.velocity_space(), stepper.pressure_space(), a, (dir / snapshot_name(a.step)).string());
        if (cfg.verbosity > 1)
            std::cout << "step " << r.step << " t=" << format_double(r.time) << " psi=" << format_double(r.psi)
                      << " Phi=" << format_double(r.phi) << '\n';
        return true;
    });

    write_diagnostics_csv(records, (dir / "diagnostics.csv").string());
    write_vtk(stepper.velocity_space(), stepper.pressure_space(), state, (dir / "final.vtk").string());

    double max_psi_dev = 0.0;
    for (const auto& r : records) max_psi_dev = std::max(max_psi_dev, std::abs(r.psi - 1.0));

    switch (cfg.case_id) {
    case CaseId::TaylorGreen: {
        const auto e = taylor_green_errors(stepper, state);
        write_table_csv({{"time", "pressure_l2", "grad_u_l2", "velocity_l2"},
                         {{state.t}, {e.pressure_l2}, {e.grad_u_l2}, {e.velocity_l2}}},
                        (dir / "errors.csv").string());
        if (cfg.verbosity > 0)
            std::cout << "errors at t=" << state.t << ": pressure " << e.pressure_l2 << ", velocity gradient "
                      << e.grad_u_l2 << "\n";
        break;
    }
    case CaseId::LidCavity: {
        const auto v = locate_primary_vortex(stepper.velocity_space(), state.u);
        double umax = 0.0;
        for (std::size_t i = 0; i + 1 < state.u.size(); i += 2)
            umax = std::max(umax, std::hypot(state.u[i], state.u[i + 1]));
        const double cfl = cfg.params.tau * umax / mesh.h();
        write_table_csv({{"x", "y", "speed", "cfl", "max_abs_psi_minus_one"},
                         {{v.x[0]}, {v.x[1]}, {v.speed}, {cfl}, {max_psi_dev}}},
                        (dir / "vortex.csv").string());
        if (cfg.verbosity > 0) {
            std::cout << "primary vortex at (" << v.x[0] << ", " << v.x[1] << ")\n";
            if (v.degenerate) std::cout << "warning: velocity vanishes in the search box\n";
            if (v.on_boundary) std::cout << "warning: minimum lies on the search box boundary\n";
        }
        break;
    }
    case CaseId::TurekCylinder: {
        write_table_csv(forces, (dir / "forces.csv").string());
        if (cfg.verbosity > 0 && !forces.columns[1].empty())
            std::cout << "max C_D " << *std::max_element(forces.columns[1].begin(), forces.columns[1].end())
                      << ", max C_L " << *std::max_element(forces.columns[2].begin(), forces.columns[2].end())
                      << "\n";
        break;
    }
    }
    if (cfg.verbosity > 0) std::cout << "max |psi - 1| = " << max_psi_dev << "\noutput written to " << dir << "\n";
    return 0;
}

int run_convergence(const RunConfig& cfg)
{
    if (cfg.case_id != CaseId::TaylorGreen) throw ConfigError("the convergence study needs case taylor_green");
    const Mesh mesh = make_case_mesh(cfg.case_id, cfg.mesh);
    const auto table = run_taylor_green_convergence(mesh, cfg.params, cfg.tau0, cfg.halvings);
    Table out{{"tau", "pressure_l2", "grad_u_l2", "velocity_l2", "pressure_order", "grad_order"},
              std::vector<std::vector<double>>(6)};
    std::printf("%12s %14s %8s %14s %8s\n", "tau", "|p-p_h|", "order", "|grad e_u|", "order");
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto& r = table.rows[k];
        const double po = k ? table.pressure_orders[k - 1] : std::nan("");
        const double go = k ? table.grad_orders[k - 1] : std::nan("");
        std::printf("%12.6g %14.6e %8.3f %14.6e %8.3f\n", r.tau, r.errors.pressure_l2, po, r.errors.grad_u_l2, go);
        const double row[] = {r.tau, r.errors.pressure_l2, r.errors.grad_u_l2, r.errors.velocity_l2, po, go};
        for (int c = 0; c < 6; ++c) out.columns[c].push_back(row[c]);
    }
    write_table_csv(out, (fs::path(cfg.output_dir) / "convergence.csv").string());
    return 0;
}

int validate_mesh(const std::string& path, const std::string& format)
{
    MeshReport report;
    const Mesh mesh = read_mesh(path, format == "gmsh" ? MeshFormat::GmshMsh2Ascii : MeshFormat::Native, {}, &report);
    const auto& sizes = mesh.element_sizes();
    std::map<BoundaryTag, int> per_tag;
    for (const Facet& f : mesh.facets()) ++per_tag[f.tag];
    std::cout << "nodes            " << mesh.n_nodes() << "\n"
              << "cells            " << mesh.n_cells() << "\n"
              << "boundary facets  " << mesh.facets().size() << "\n";
    for (const auto& [tag, n] : per_tag) std::cout << "  " << to_string(tag) << ": " << n << "\n";
    std::cout << "h                " << mesh.h() << "\n"
              << "min h_e          " << *std::min_element(sizes.begin(), sizes.end()) << "\n"
              << "quasi_uniformity " << quasi_uniformity(mesh) << "\n"
              << "reoriented cells " << report.reoriented_cells.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Incompressible flow solver: segregated BDF2 scheme with a scalar auxiliary variable"};
    app.require_subcommand(1);
    Flags flags;
    std::string config_path, mesh_path, mesh_format = "native";

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("config", config_path, "Configuration file")->required();
        cmd->add_option("--output", flags.output, "Output directory (overrides the configuration)");
        cmd->add_option("--snapshot-every", flags.snapshot_every, "Write a VTK snapshot every n steps")
            ->check(CLI::NonNegativeNumber);
        cmd->add_flag("--quiet", flags.quiet, "Print nothing on success");
        cmd->add_flag("--deterministic", flags.deterministic,
                      "Bitwise reproducible output (always the case: assembly and solvers are sequential)");
    };
    auto* run = app.add_subcommand("run", "Run a case end to end");
    add_common(run);
    auto* conv = app.add_subcommand("convergence", "Time-step halving study for the Taylor-Green vortex");
    add_common(conv);
    auto* vm = app.add_subcommand("validate-mesh", "Check a mesh file and print statistics");
    vm->add_option("path", mesh_path, "Mesh file")->required();
    vm->add_option("--format", mesh_format, "native or gmsh")->check(CLI::IsMember({"native", "gmsh"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) return run_case(load(config_path, flags));
        if (*conv) return run_convergence(load(config_path, flags));
        if (*vm) return validate_mesh(mesh_path, mesh_format);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
