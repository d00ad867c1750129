#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cssav/stepper.hpp"

namespace cssav {

enum class CaseId { TaylorGreen, LidCavity, TurekCylinder };

std::string_view to_string(CaseId id);
std::optional<CaseId> case_from_string(std::string_view name);

/// Scheme parameters of each case (viscosity, grad-div, SAV and time step).
SchemeParams default_params(CaseId id);

/// Where the mesh comes from: a file, or one of the built-in generators
/// (unit square for taylor_green and lid_cavity, the channel otherwise).
struct MeshSpec {
    std::string path;  // empty: use the generator
    MeshFormat format = MeshFormat::Native;
    int cells_per_side = 32;
    DiagonalPattern pattern = DiagonalPattern::Right;
    int refinement_level = 1;
    bool operator==(const MeshSpec&) const = default;
};

/// Builds the mesh for a case. For the cavity, generated meshes get their
/// top side retagged as DirichletLid.
Mesh make_case_mesh(CaseId id, const MeshSpec& spec);

/// Called after every completed step; returning false stops the run early.
using StepObserver = std::function<bool(const FlowState& before, const FlowState& after, const DiagnosticsRecord&)>;

/// Runs a stepper from initialization to params().t_end. The returned
/// records start with the initial level (step 0) and the first step.
std::vector<DiagnosticsRecord> run_to_end(const SavStepper& stepper, FlowState& state,
                                          const StepObserver& observer = {});

// Taylor-Green vortex ----------------------------------------------------

struct TaylorGreenValue {
    Vec2 u;
    double p;
};
TaylorGreenValue taylor_green_exact(const Vec2& x, double t, double nu);

/// Exact Dirichlet data, initial velocity and normal rate on the unit square.
FlowProblem taylor_green_problem(double nu);

struct TaylorGreenErrors {
    double pressure_l2 = 0.0;  // after matching the mean of the exact pressure
    double grad_u_l2 = 0.0;
    double velocity_l2 = 0.0;
};
TaylorGreenErrors taylor_green_errors(const SavStepper& stepper, const FlowState& state);

struct ConvergenceRow {
    double tau = 0.0;
    TaylorGreenErrors errors;
    double max_abs_psi_minus_one = 0.0;
    bool finite = true;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    /// log2(e(tau) / e(tau/2)) between consecutive rows.
    std::vector<double> pressure_orders;
    std::vector<double> grad_orders;
};

/// tau = tau0, tau0/2, ..., tau0/2^n_halvings, each run to base.t_end.
/// Only nu, gamma, alpha, t_end, pair and the solver settings of `base` are used.
ConvergenceTable run_taylor_green_convergence(const Mesh& mesh, const SchemeParams& base, double tau0, int n_halvings);

// Lid-driven cavity ------------------------------------------------------

/// Horizontal lid speed at abscissa x and time t.
double lid_velocity(double x, double t);

FlowProblem lid_cavity_problem();

struct SearchBox {
    Vec2 lo{0.15, 0.15};
    Vec2 hi{0.85, 0.85};
};

struct VortexLocation {
    Vec2 x{0.0, 0.0};
    double speed = 0.0;
    /// Minimum on the edge of the sampling box: probably not a vortex centre.
    bool on_boundary = false;
    /// Velocity (numerically) zero everywhere in the box.
    bool degenerate = false;
};

/// Minimum of |u| on a 201x201 grid over `box`, refined once by a 21x21 grid
/// spanning one coarse spacing on each side of the coarse minimum.
VortexLocation locate_primary_vortex(const FeSpace& velocity, std::span<const double> u, const SearchBox& box = {});

struct LidCavityResult {
    VortexLocation vortex;
    std::vector<double> psi_history;
    std::vector<DiagnosticsRecord> records;
    /// max_n tau |u_n|_inf / h.
    double cfl = 0.0;
    FlowState final_state;
};

LidCavityResult run_lid_cavity(const Mesh& mesh, const SchemeParams& params, const StepObserver& observer = {});

// Cylinder in a channel --------------------------------------------------

/// Peak centreline inflow speed and time period of the unsteady inflow.
inline constexpr double turek_peak_inflow = 1.5;
inline constexpr double turek_mean_velocity = 1.0;

double turek_inflow(double y, double t);
FlowProblem turek_problem();

struct Forces {
    double drag = 0.0;
    double lift = 0.0;
    double cd = 0.0;
    double cl = 0.0;
};

/// Forces on the cylinder from the discrete momentum residual tested with
/// the unit x (drag) and y (lift) field supported on cylinder nodes.
/// `before` and `after` are consecutive states; the time derivative is BDF2
/// when before.step >= 1 and backward Euler otherwise.
Forces compute_forces(const SavStepper& stepper, const FlowState& before, const FlowState& after);

struct TurekResult {
    std::vector<double> times;
    std::vector<double> cd;
    std::vector<double> cl;
    double cd_max = 0.0;
    double cl_max = 0.0;
    double t_cd_max = 0.0;
    double t_cl_max = 0.0;
    std::vector<double> psi_history;
    std::vector<DiagnosticsRecord> records;
    FlowState final_state;
};

TurekResult run_turek_cylinder(const Mesh& mesh, const SchemeParams& params, const StepObserver& observer = {});

}  // namespace cssav
