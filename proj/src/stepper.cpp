#include "cssav/stepper.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace cssav {

std::string_view to_string(ElementPair pair)
{
    return pair == ElementPair::TaylorHoodP2P1 ? "taylor_hood_p2p1" : "equal_order_p1p1";
}

std::optional<ElementPair> element_pair_from_string(std::string_view name)
{
    if (name == "taylor_hood_p2p1") return ElementPair::TaylorHoodP2P1;
    if (name == "equal_order_p1p1") return ElementPair::EqualOrderP1P1;
    return std::nullopt;
}

void SchemeParams::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
    };
    positive(nu, "nu");
    positive(gamma, "gamma");
    positive(alpha, "alpha");
    positive(tau, "tau");
    positive(t_end, "t_end");
    momentum_solver.validate();
    ppe_solver.validate();
}

int SchemeParams::n_steps() const { return static_cast<int>(std::lround(t_end / tau)); }

double sav_update(double psi_n, double psi_prev, double tau, double alpha, double i1, double i2)
{
    const double den = 3.0 + 2.0 * tau * alpha * i2;
    if (!(std::abs(den) >= 1e-10)) {
        std::ostringstream msg;
        msg << "SAV denominator degenerate (" << den << ")";
        throw StepError("sav", msg.str());
    }
    return (4.0 * psi_n - psi_prev - 2.0 * tau * alpha * i1) / den;
}

namespace {

double quad_form(const SparseMatrix& a, std::span<const double> x)
{
    const auto ax = spmv(a, x);
    return dot(x, ax);
}

std::vector<double> combine(double a, std::span<const double> x, double b, std::span<const double> y)
{
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] + b * y[i];
    return z;
}

}  // namespace

double bdf2_identity_check(std::span<const double> v_next, std::span<const double> v_n,
                           std::span<const double> v_prev, const SparseMatrix& m)
{
    if (v_next.size() != v_n.size() || v_n.size() != v_prev.size())
        throw std::invalid_argument("BDF2 identity needs vectors of equal length");
    std::vector<double> bdf(v_n.size()), star_next(v_n.size()), star(v_n.size()), d2(v_n.size());
    for (std::size_t i = 0; i < v_n.size(); ++i) {
        bdf[i] = 3.0 * v_next[i] - 4.0 * v_n[i] + v_prev[i];
        star_next[i] = 2.0 * v_next[i] - v_n[i];
        star[i] = 2.0 * v_n[i] - v_prev[i];
        d2[i] = v_next[i] - 2.0 * v_n[i] + v_prev[i];
    }
    const auto mv = spmv(m, v_next);
    const double lhs = 2.0 * dot(bdf, mv);
    const double rhs = quad_form(m, v_next) - quad_form(m, v_n) + quad_form(m, star_next) - quad_form(m, star) +
                       quad_form(m, d2);
    return std::abs(lhs - rhs);
}

SavStepper::SavStepper(const Mesh& mesh, SchemeParams params, FlowProblem problem)
    : mesh_(&mesh),
      params_(std::move(params)),
      problem_(std::move(problem)),
      velocity_(mesh, velocity_degree(params_.pair), 2),
      pressure_(mesh, 1, 1)
{
    params_.validate();
    mass_ = assemble_mass(velocity_);
    stiffness_ = assemble_stiffness(velocity_);
    graddiv_ = assemble_graddiv(velocity_);
    coupling_ = assemble_pressure_coupling(velocity_, pressure_);

    const double nu = params_.nu;
    const double gn = params_.gamma * params_.nu;
    bdf2_base_ = cell_pattern(velocity_, velocity_);
    bdf2_base_.add_scaled(mass_, 1.5 / params_.tau).add_scaled(stiffness_, nu).add_scaled(graddiv_, gn);
    bdf1_base_ = cell_pattern(velocity_, velocity_);
    bdf1_base_.add_scaled(mass_, 1.0 / params_.tau).add_scaled(stiffness_, nu).add_scaled(graddiv_, gn);

    laplacian_ = assemble_stiffness(pressure_);
    laplacian_constrained_ = laplacian_;
    has_outflow_ = mesh.has_tag(BoundaryTag::NeumannOutflow);
    if (has_outflow_) {
        outflow_pressure_nodes_ = pressure_.tag_nodes(BoundaryTag::NeumannOutflow);
        constrain_matrix(laplacian_constrained_, outflow_pressure_nodes_);
    }

    std::map<int, BoundaryTag> node_tag;
    for (BoundaryTag tag : all_boundary_tags)
        if (is_dirichlet(tag))
            for (int n : velocity_.boundary_nodes(tag)) node_tag[n] = tag;
    dirichlet_nodes_.assign(node_tag.begin(), node_tag.end());
}

bool SavStepper::energy_balance_applies() const
{
    return !problem_.dirichlet && !problem_.forcing && !has_outflow_;
}

std::string SavStepper::tag(int step) const { return step <= 1 ? "init" : "step " + std::to_string(step); }

DirichletData SavStepper::velocity_dirichlet(double t) const
{
    DirichletData d;
    d.dofs.reserve(2 * dirichlet_nodes_.size());
    d.values.reserve(2 * dirichlet_nodes_.size());
    for (const auto& [node, tag] : dirichlet_nodes_) {
        Vec2 g{0.0, 0.0};
        if (problem_.dirichlet) g = problem_.dirichlet(velocity_.dof_coords()[node], t, tag);
        for (int c = 0; c < 2; ++c) {
            d.dofs.push_back(velocity_.dof(node, c));
            d.values.push_back(g[c]);
        }
    }
    return d;
}

std::vector<double> SavStepper::source(double t) const
{
    std::vector<double> b(velocity_.n_dofs(), 0.0);
    if (problem_.forcing) b = assemble_load(velocity_, problem_.forcing, t);
    if (problem_.traction && has_outflow_) {
        const auto tr = assemble_traction(velocity_, problem_.traction, t);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] += tr[i];
    }
    return b;
}

FacetRate SavStepper::normal_rate(double time, int order) const
{
    const Mesh& mesh = *mesh_;
    if (problem_.normal_rate) {
        return [this, &mesh, time](std::size_t fi, const Vec2& x) {
            return problem_.normal_rate(x, time, mesh.facet_normal(fi), mesh.facets()[fi].tag);
        };
    }
    if (!problem_.dirichlet) return {};
    const double tau = params_.tau;
    return [this, &mesh, time, order, tau](std::size_t fi, const Vec2& x) {
        const Vec2 n = mesh.facet_normal(fi);
        const BoundaryTag tag = mesh.facets()[fi].tag;
        auto gn = [&](double t) {
            const Vec2 g = problem_.dirichlet(x, t, tag);
            return n[0] * g[0] + n[1] * g[1];
        };
        if (order == 0) return (gn(time + tau) - gn(time)) / tau;
        if (order == 1) return (gn(time) - gn(time - tau)) / tau;
        return (3.0 * gn(time) - 4.0 * gn(time - tau) + gn(time - 2.0 * tau)) / (2.0 * tau);
    };
}

std::vector<double> SavStepper::solve_momentum(const SparseMatrix& a, std::span<const double> b, std::vector<double> x,
                                               const std::string& where) const
{
    const SolveResult r = bicgstab_solve(a, b, x, params_.momentum_solver);
    if (!r.converged()) throw SolverError(where + ": " + describe(r));
    return x;
}

MomentumSystem SavStepper::build_momentum(const FlowState& s) const
{
    MomentumSystem sys;
    sys.time = static_cast<double>(s.step + 1) * params_.tau;
    const auto u_star = combine(2.0, s.u, -1.0, s.u_prev);
    const auto p_star = combine(2.0, s.p, -1.0, s.p_prev);

    sys.matrix = bdf2_base_;
    add_convection(sys.matrix, velocity_, u_star);

    const auto hist = combine(2.0 / params_.tau, s.u, -0.5 / params_.tau, s.u_prev);
    sys.rhs_u1 = spmv(mass_, hist);
    const auto src = source(sys.time);
    for (std::size_t i = 0; i < src.size(); ++i) sys.rhs_u1[i] += src[i];

    // Pressure enters through (p*, div v); the plain (p*, v) pairing would
    // not be a consistent discretisation of the pressure gradient.
    sys.pressure_load = spmv(coupling_, p_star);
    sys.rhs_u2 = sys.pressure_load;

    sys.dirichlet = velocity_dirichlet(sys.time);
    const std::vector<double> zeros(sys.dirichlet.dofs.size(), 0.0);
    lift_dirichlet_rhs(sys.matrix, sys.rhs_u1, sys.dirichlet.dofs, sys.dirichlet.values);
    lift_dirichlet_rhs(sys.matrix, sys.rhs_u2, sys.dirichlet.dofs, zeros);
    constrain_matrix(sys.matrix, sys.dirichlet.dofs);
    return sys;
}

std::vector<double> SavStepper::step1_predict_u1(const FlowState& s, const MomentumSystem& sys) const
{
    auto guess = combine(2.0, s.u, -1.0, s.u_prev);
    for (std::size_t k = 0; k < sys.dirichlet.dofs.size(); ++k) guess[sys.dirichlet.dofs[k]] = sys.dirichlet.values[k];
    try {
        return solve_momentum(sys.matrix, sys.rhs_u1, std::move(guess), "first velocity predictor");
    } catch (const SolverError& e) {
        throw StepError(tag(s.step + 1), e.what());
    }
}

std::vector<double> SavStepper::step2_predict_u2(const MomentumSystem& sys) const
{
    const int step = static_cast<int>(std::lround(sys.time / params_.tau));
    try {
        return solve_momentum(sys.matrix, sys.rhs_u2, std::vector<double>(velocity_.n_dofs(), 0.0),
                              "second velocity predictor");
    } catch (const SolverError& e) {
        throw StepError(tag(step), e.what());
    }
}

SavUpdate SavStepper::step3_update_sav(const FlowState& s, const MomentumSystem& sys, std::span<const double> u1,
                                       std::span<const double> u2) const
{
    const double i1 = dot(sys.pressure_load, u1);
    const double i2 = dot(sys.pressure_load, u2);
    SavUpdate out;
    try {
        out.psi = sav_update(s.psi, s.psi_prev, params_.tau, params_.alpha, i1, i2);
    } catch (const StepError& e) {
        throw StepError(tag(s.step + 1), e.what());
    }
    out.u = combine(1.0, u1, out.psi, u2);
    return out;
}

std::vector<double> SavStepper::step4_solve_ppe(std::span<const double> u, double psi, double time, int order,
                                                std::span<const double> guess) const
{
    const int step = static_cast<int>(std::lround(time / params_.tau));
    if (!(std::abs(psi) >= 1e-6)) {
        std::ostringstream msg;
        msg << "SAV value " << psi << " too close to zero for the pressure equation";
        throw StepError(tag(step), msg.str());
    }
    const FacetRate rate = normal_rate(time, order);
    PpeRhsInput in;
    in.forcing = problem_.forcing ? &problem_.forcing : nullptr;
    in.normal_rate = rate ? &rate : nullptr;
    in.nu = params_.nu;
    in.time = time;
    auto rhs = assemble_ppe_rhs(pressure_, velocity_, u, in);
    for (double& r : rhs) r /= psi;

    std::vector<double> p(pressure_.n_dofs(), 0.0);
    if (guess.size() == p.size()) p.assign(guess.begin(), guess.end());
    SolveResult res;
    if (has_outflow_) {
        const auto bc = project_neumann_pressure(pressure_, velocity_, u, problem_.traction ? &problem_.traction : nullptr,
                                                 time, psi, params_.nu);
        lift_dirichlet_rhs(laplacian_, rhs, bc.dofs, bc.values);
        for (std::size_t k = 0; k < bc.dofs.size(); ++k) p[bc.dofs[k]] = bc.values[k];
        res = cg_solve(laplacian_constrained_, rhs, p, params_.ppe_solver);
    } else {
        res = cg_solve(laplacian_, rhs, p, params_.ppe_solver, Nullspace::Constants);
    }
    if (!res.converged()) throw StepError(tag(step), "pressure solve: " + describe(res));
    return p;
}

std::pair<FlowState, DiagnosticsRecord> SavStepper::advance(const FlowState& s) const
{
    const MomentumSystem sys = build_momentum(s);
    const auto u1 = step1_predict_u1(s, sys);
    const auto u2 = step2_predict_u2(sys);
    SavUpdate upd = step3_update_sav(s, sys, u1, u2);
    const auto p_guess = combine(2.0, s.p, -1.0, s.p_prev);
    auto p = step4_solve_ppe(upd.u, upd.psi, sys.time, 2, p_guess);

    FlowState next;
    next.u_prev = s.u;
    next.u = std::move(upd.u);
    next.p_prev = s.p;
    next.p = std::move(p);
    next.psi_prev = s.psi;
    next.psi = upd.psi;
    next.step = s.step + 1;
    next.t = sys.time;

    DiagnosticsRecord rec = diagnostics(next);
    rec.energy_residual = energy_check(s, next);
    return {std::move(next), rec};
}

FlowState SavStepper::initialize() const
{
    const double tau = params_.tau;
    FlowState s0;
    s0.u.assign(velocity_.n_dofs(), 0.0);
    if (problem_.initial_velocity) s0.u = interpolate(velocity_, problem_.initial_velocity, 0.0);
    const DirichletData g0 = velocity_dirichlet(0.0);
    for (std::size_t k = 0; k < g0.dofs.size(); ++k) s0.u[g0.dofs[k]] = g0.values[k];
    s0.p = step4_solve_ppe(s0.u, 1.0, 0.0, 0);

    SparseMatrix a = bdf1_base_;
    add_convection(a, velocity_, s0.u);
    auto b = spmv(mass_, s0.u);
    for (double& v : b) v /= tau;
    const auto src = source(tau);
    const auto bp = spmv(coupling_, s0.p);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += src[i] + bp[i];
    const DirichletData g1 = velocity_dirichlet(tau);
    apply_dirichlet(a, b, g1.dofs, g1.values);
    std::vector<double> u1 = s0.u;
    for (std::size_t k = 0; k < g1.dofs.size(); ++k) u1[g1.dofs[k]] = g1.values[k];
    try {
        u1 = solve_momentum(a, b, std::move(u1), "first step velocity");
    } catch (const SolverError& e) {
        throw StepError("init", e.what());
    }

    FlowState s1;
    s1.p = step4_solve_ppe(u1, 1.0, tau, 1, s0.p);
    s1.u_prev = std::move(s0.u);
    s1.u = std::move(u1);
    s1.p_prev = std::move(s0.p);
    s1.psi = s1.psi_prev = 1.0;
    s1.t = tau;
    s1.step = 1;
    return s1;
}

double SavStepper::phi(const FlowState& s) const
{
    const double psi_star = 2.0 * s.psi - s.psi_prev;
    const auto u_star = combine(2.0, s.u, -1.0, s.u_prev);
    return (s.psi * s.psi + psi_star * psi_star) / params_.alpha + quad_form(mass_, s.u) + quad_form(mass_, u_star);
}

DiagnosticsRecord SavStepper::diagnostics(const FlowState& s) const
{
    DiagnosticsRecord r;
    r.step = s.step;
    r.time = s.t;
    r.psi = s.psi;
    r.phi = phi(s);
    r.energy_residual = std::numeric_limits<double>::quiet_NaN();
    r.div_u_l2 = std::sqrt(std::max(0.0, quad_form(graddiv_, s.u)));
    r.grad_u_l2 = std::sqrt(std::max(0.0, quad_form(stiffness_, s.u)));
    return r;
}

double SavStepper::energy_check(const FlowState& before, const FlowState& after) const
{
    if (!energy_balance_applies() || before.step < 1) return std::numeric_limits<double>::quiet_NaN();
    const auto& u = after.u;
    std::vector<double> d2(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) d2[i] = u[i] - 2.0 * before.u[i] + before.u_prev[i];
    const double dpsi = after.psi - 2.0 * before.psi + before.psi_prev;
    const double tau = params_.tau;
    const double phi_n = phi(before);
    const double lhs = phi(after) - phi_n + dpsi * dpsi / params_.alpha + quad_form(mass_, d2) +
                       4.0 * tau * params_.nu * quad_form(stiffness_, u) +
                       4.0 * tau * params_.gamma * params_.nu * quad_form(graddiv_, u);
    return std::abs(lhs) / std::max(phi_n, std::numeric_limits<double>::min());
}

}  // namespace cssav
