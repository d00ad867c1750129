#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cssav/fem.hpp"
#include "cssav/operators.hpp"
#include "cssav/sparse.hpp"

namespace cssav {

enum class ElementPair { TaylorHoodP2P1, EqualOrderP1P1 };

std::string_view to_string(ElementPair pair);
std::optional<ElementPair> element_pair_from_string(std::string_view name);
constexpr int velocity_degree(ElementPair pair) { return pair == ElementPair::TaylorHoodP2P1 ? 2 : 1; }

struct SchemeParams {
    double nu = 0.1;
    double gamma = 10.0;
    double alpha = 1.0;
    double tau = 0.01;
    double t_end = 1.0;
    ElementPair pair = ElementPair::TaylorHoodP2P1;
    SolverConfig momentum_solver{};
    SolverConfig ppe_solver{};

    /// Throws std::invalid_argument naming the first offending field.
    void validate() const;
    /// Number of steps needed to reach t_end (rounded to the nearest integer).
    int n_steps() const;
    bool operator==(const SchemeParams&) const = default;
};

/// Velocity prescribed on a Dirichlet boundary node or facet point.
using BoundaryVelocity = std::function<Vec2(const Vec2& x, double t, BoundaryTag tag)>;
/// Analytic d/dt (n . g) at a boundary point with outward normal n.
using NormalRate = std::function<double(const Vec2& x, double t, const Vec2& n, BoundaryTag tag)>;

/// Data of one flow problem. Empty functions stand for zero.
struct FlowProblem {
    BoundaryVelocity dirichlet;
    VectorFunction traction;
    VectorFunction forcing;
    VectorFunction initial_velocity;
    /// When empty, d/dt (n . g) is approximated by backward differences of g.
    NormalRate normal_rate;
};

struct FlowState {
    std::vector<double> u, u_prev;
    std::vector<double> p, p_prev;
    double psi = 1.0, psi_prev = 1.0;
    double t = 0.0;
    int step = 0;
};

struct DiagnosticsRecord {
    int step = 0;
    double time = 0.0;
    double psi = 1.0;
    /// (psi_n^2 + psi*_{n+1}^2) / alpha + |u_n|^2 + |u*_{n+1}|^2 in the L2 norm.
    double phi = 0.0;
    /// Relative residual of the discrete energy balance; NaN when the balance
    /// does not apply (inhomogeneous data, outflow boundary, first step).
    double energy_residual = 0.0;
    double div_u_l2 = 0.0;
    double grad_u_l2 = 0.0;

    bool energy_applicable() const { return energy_residual == energy_residual; }
};

/// A failed time step. `tag` is "init" or "step <n>".
class StepError : public std::runtime_error {
public:
    StepError(std::string tag, const std::string& what)
        : std::runtime_error("[" + tag + "] " + what), tag_(std::move(tag))
    {
    }
    const std::string& tag() const { return tag_; }

private:
    std::string tag_;
};

/// Closed-form SAV update
///   psi_{n+1} = (4 psi_n - psi_{n-1} - 2 tau alpha i1) / (3 + 2 tau alpha i2),
/// i1 = (p*, div u1), i2 = (p*, div u2). Throws StepError when the
/// denominator magnitude is below 1e-10.
double sav_update(double psi_n, double psi_prev, double tau, double alpha, double i1, double i2);

/// |2 (3a - 4b + c, a)_M - (|a|^2 - |b|^2 + |2a-b|^2 - |2b-c|^2 + |a-2b+c|^2)|
/// for a = v_{n+1}, b = v_n, c = v_{n-1}, norms weighted by M.
double bdf2_identity_check(std::span<const double> v_next, std::span<const double> v_n,
                           std::span<const double> v_prev, const SparseMatrix& m);

/// Momentum system of one step. Both right-hand sides are already lifted;
/// `matrix` carries the Dirichlet constraints.
struct MomentumSystem {
    SparseMatrix matrix;
    std::vector<double> rhs_u1;
    std::vector<double> rhs_u2;
    /// Unconstrained B p*, used for the SAV inner products.
    std::vector<double> pressure_load;
    DirichletData dirichlet;
    double time = 0.0;
};

struct SavUpdate {
    double psi = 1.0;
    std::vector<double> u;
};

/// Segregated BDF2 scheme with a scalar auxiliary variable. Per step:
/// two momentum solves sharing one matrix, the closed-form SAV update, and a
/// pressure Poisson solve. The mesh must outlive the stepper.
class SavStepper {
public:
    SavStepper(const Mesh& mesh, SchemeParams params, FlowProblem problem);

    const SchemeParams& params() const { return params_; }
    const FeSpace& velocity_space() const { return velocity_; }
    const FeSpace& pressure_space() const { return pressure_; }
    const SparseMatrix& mass() const { return mass_; }
    const SparseMatrix& stiffness() const { return stiffness_; }
    const SparseMatrix& graddiv() const { return graddiv_; }
    const SparseMatrix& coupling() const { return coupling_; }
    bool has_outflow() const { return has_outflow_; }
    /// True when g = 0, f = 0 and there is no outflow boundary.
    bool energy_balance_applies() const;

    /// psi_0 = psi_1 = 1, p_0 from the pressure equation, (u_1, p_1) from a
    /// backward Euler step. The returned state holds levels 1 and 0.
    FlowState initialize() const;

    MomentumSystem build_momentum(const FlowState& s) const;
    std::vector<double> step1_predict_u1(const FlowState& s, const MomentumSystem& sys) const;
    std::vector<double> step2_predict_u2(const MomentumSystem& sys) const;
    SavUpdate step3_update_sav(const FlowState& s, const MomentumSystem& sys, std::span<const double> u1,
                               std::span<const double> u2) const;
    /// Pressure at `time` for velocity u and SAV value psi. `order` selects the
    /// backward difference used for d/dt(n . g): 0 forward, 1 or 2 backward.
    std::vector<double> step4_solve_ppe(std::span<const double> u, double psi, double time, int order,
                                        std::span<const double> guess = {}) const;

    /// Steps 1-4, then rolls the history.
    std::pair<FlowState, DiagnosticsRecord> advance(const FlowState& s) const;

    /// Record for a state without an energy balance (residual NaN).
    DiagnosticsRecord diagnostics(const FlowState& s) const;
    /// Discrete energy of a state.
    double phi(const FlowState& s) const;
    /// Relative residual of the energy balance between two consecutive states;
    /// NaN when the balance does not apply or `before` is the initial level.
    double energy_check(const FlowState& before, const FlowState& after) const;

    /// Dirichlet DOFs and their values at time t.
    DirichletData velocity_dirichlet(double t) const;

private:
    std::string tag(int step) const;
    std::vector<double> solve_momentum(const SparseMatrix& a, std::span<const double> b, std::vector<double> x,
                                       const std::string& where) const;
    FacetRate normal_rate(double time, int order) const;
    std::vector<double> source(double t) const;

    const Mesh* mesh_;
    SchemeParams params_;
    FlowProblem problem_;
    FeSpace velocity_;
    FeSpace pressure_;
    SparseMatrix mass_, stiffness_, graddiv_, coupling_;
    SparseMatrix bdf2_base_, bdf1_base_;
    SparseMatrix laplacian_, laplacian_constrained_;
    std::vector<int> outflow_pressure_nodes_;
    std::vector<std::pair<int, BoundaryTag>> dirichlet_nodes_;
    bool has_outflow_ = false;
};

}  // namespace cssav
