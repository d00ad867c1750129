#include "cssav/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cssav {

std::string_view to_string(CaseId id)
{
    switch (id) {
    case CaseId::TaylorGreen: return "taylor_green";
    case CaseId::LidCavity: return "lid_cavity";
    case CaseId::TurekCylinder: return "turek_cylinder";
    }
    return "unknown";
}

std::optional<CaseId> case_from_string(std::string_view name)
{
    for (CaseId id : {CaseId::TaylorGreen, CaseId::LidCavity, CaseId::TurekCylinder})
        if (name == to_string(id)) return id;
    return std::nullopt;
}

SchemeParams default_params(CaseId id)
{
    SchemeParams p;
    switch (id) {
    case CaseId::TaylorGreen:
        p.nu = 0.1;
        p.gamma = 10.0;
        p.alpha = 1.0;
        p.tau = 0.25;
        p.t_end = 1.0;
        break;
    case CaseId::LidCavity:
        p.nu = 0.0025;
        p.gamma = 100.0;
        p.alpha = 0.1;
        p.tau = 1.0;
        p.t_end = 30.0;
        break;
    case CaseId::TurekCylinder:
        p.nu = 0.001;
        p.gamma = 1000.0;
        p.alpha = 0.1;
        p.tau = 0.0025;
        p.t_end = 8.0;
        break;
    }
    return p;
}

Mesh make_case_mesh(CaseId id, const MeshSpec& spec)
{
    if (!spec.path.empty()) return read_mesh(spec.path, spec.format);
    if (id == CaseId::TurekCylinder) return generate_turek_channel(spec.refinement_level);
    Mesh square = generate_unit_square(spec.cells_per_side, spec.cells_per_side, spec.pattern);
    if (id != CaseId::LidCavity) return square;
    return square.retagged([](const Facet& f, const Vec2& mid) {
        return std::abs(mid[1] - 1.0) < 1e-12 ? BoundaryTag::DirichletLid : f.tag;
    });
}

std::vector<DiagnosticsRecord> run_to_end(const SavStepper& stepper, FlowState& state, const StepObserver& observer)
{
    FlowState start;
    start.u = state.u_prev;
    start.u_prev = state.u_prev;
    start.p = state.p_prev;
    start.p_prev = state.p_prev;
    start.step = 0;
    start.t = 0.0;
    std::vector<DiagnosticsRecord> records{stepper.diagnostics(start), stepper.diagnostics(state)};
    if (observer && !observer(start, state, records.back())) return records;
    const int n = stepper.params().n_steps();
    while (state.step < n) {
        auto [next, rec] = stepper.advance(state);
        records.push_back(rec);
        const bool go_on = !observer || observer(state, next, rec);
        state = std::move(next);
        if (!go_on) break;
    }
    return records;
}

// Taylor-Green vortex ----------------------------------------------------

TaylorGreenValue taylor_green_exact(const Vec2& x, double t, double nu)
{
    using std::numbers::pi;
    const double e = std::exp(-2.0 * pi * pi * nu * t);
    const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
    const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
    return {{e * sx * cy, -e * sy * cx}, 0.5 * (cx * cx - sy * sy) * e * e};
}

FlowProblem taylor_green_problem(double nu)
{
    FlowProblem pr;
    pr.dirichlet = [nu](const Vec2& x, double t, BoundaryTag) { return taylor_green_exact(x, t, nu).u; };
    pr.initial_velocity = [nu](const Vec2& x, double t) { return taylor_green_exact(x, t, nu).u; };
    pr.normal_rate = [nu](const Vec2& x, double t, const Vec2& n, BoundaryTag) {
        const Vec2 u = taylor_green_exact(x, t, nu).u;
        const double rate = -2.0 * std::numbers::pi * std::numbers::pi * nu;
        return rate * (n[0] * u[0] + n[1] * u[1]);
    };
    return pr;
}

TaylorGreenErrors taylor_green_errors(const SavStepper& stepper, const FlowState& state)
{
    const FeSpace& vs = stepper.velocity_space();
    const FeSpace& ps = stepper.pressure_space();
    const Mesh& mesh = vs.mesh();
    const double nu = stepper.params().nu;
    const auto& rule = quadrature_rule(6);
    using std::numbers::pi;

    // Mean shift first, then the shifted pressure error.
    double area = 0.0, mean_diff = 0.0;
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const CellMap m = CellMap::of(mesh, c);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double w = rule.weights[q] * std::abs(m.det);
            const Vec2 x = m.to_physical(rule.points[q]);
            const double ph = evaluate_in_cell(ps, state.p, c, rule.points[q]).value[0];
            area += w;
            mean_diff += w * (taylor_green_exact(x, state.t, nu).p - ph);
        }
    }
    const double shift = mean_diff / area;

    TaylorGreenErrors err;
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const CellMap m = CellMap::of(mesh, c);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const double w = rule.weights[q] * std::abs(m.det);
            const Vec2 x = m.to_physical(rule.points[q]);
            const auto ex = taylor_green_exact(x, state.t, nu);
            const double ph = evaluate_in_cell(ps, state.p, c, rule.points[q]).value[0];
            const FieldValue uh = evaluate_in_cell(vs, state.u, c, rule.points[q]);
            const double e = std::exp(-2.0 * pi * pi * nu * state.t);
            const double sx = std::sin(pi * x[0]), cx = std::cos(pi * x[0]);
            const double sy = std::sin(pi * x[1]), cy = std::cos(pi * x[1]);
            const std::array<Vec2, 2> grad{{{pi * e * cx * cy, -pi * e * sx * sy}, {pi * e * sy * sx, -pi * e * cy * cx}}};
            err.pressure_l2 += w * std::pow(ph + shift - ex.p, 2);
            for (int k = 0; k < 2; ++k) {
                err.velocity_l2 += w * std::pow(uh.value[k] - ex.u[k], 2);
                err.grad_u_l2 += w * (std::pow(uh.grad[k][0] - grad[k][0], 2) + std::pow(uh.grad[k][1] - grad[k][1], 2));
            }
        }
    }
    err.pressure_l2 = std::sqrt(err.pressure_l2);
    err.grad_u_l2 = std::sqrt(err.grad_u_l2);
    err.velocity_l2 = std::sqrt(err.velocity_l2);
    return err;
}

ConvergenceTable run_taylor_green_convergence(const Mesh& mesh, const SchemeParams& base, double tau0, int n_halvings)
{
    if (n_halvings < 0) throw std::invalid_argument("n_halvings must be nonnegative");
    ConvergenceTable table;
    for (int k = 0; k <= n_halvings; ++k) {
        SchemeParams p = base;
        p.tau = tau0 / std::pow(2.0, k);
        const SavStepper stepper(mesh, p, taylor_green_problem(p.nu));
        FlowState state = stepper.initialize();
        ConvergenceRow row;
        row.tau = p.tau;
        run_to_end(stepper, state, [&row](const FlowState&, const FlowState& after, const DiagnosticsRecord& r) {
            row.max_abs_psi_minus_one = std::max(row.max_abs_psi_minus_one, std::abs(r.psi - 1.0));
            for (double v : after.u)
                if (!std::isfinite(v)) row.finite = false;
            return row.finite;
        });
        row.errors = taylor_green_errors(stepper, state);
        row.finite = row.finite && std::isfinite(row.errors.pressure_l2) && std::isfinite(row.errors.grad_u_l2);
        table.rows.push_back(row);
    }
    for (std::size_t k = 1; k < table.rows.size(); ++k) {
        const auto& a = table.rows[k - 1].errors;
        const auto& b = table.rows[k].errors;
        table.pressure_orders.push_back(std::log2(a.pressure_l2 / b.pressure_l2));
        table.grad_orders.push_back(std::log2(a.grad_u_l2 / b.grad_u_l2));
    }
    return table;
}

// Lid-driven cavity ------------------------------------------------------

double lid_velocity(double x, double t)
{
    constexpr double l = 0.1;
    const double s = std::abs(2.0 * x - 1.0);
    const double theta = std::numbers::pi / (4.0 * l) * (std::abs(2.0 * l + s - 1.0) + s + 2.0 * l - 1.0);
    const double bump = 0.5 * (1.0 - std::cos(theta));
    return -std::expm1(-3.0 * t) * (1.0 - bump * bump);
}

FlowProblem lid_cavity_problem()
{
    FlowProblem pr;
    pr.dirichlet = [](const Vec2& x, double t, BoundaryTag tag) {
        return tag == BoundaryTag::DirichletLid ? Vec2{lid_velocity(x[0], t), 0.0} : Vec2{0.0, 0.0};
    };
    // The lid moves tangentially, so n . g vanishes identically.
    pr.normal_rate = [](const Vec2&, double, const Vec2&, BoundaryTag) { return 0.0; };
    return pr;
}

VortexLocation locate_primary_vortex(const FeSpace& velocity, std::span<const double> u, const SearchBox& box)
{
    const PointLocator locator(velocity.mesh());
    auto speed = [&](const Vec2& x) {
        const FieldValue f = evaluate_field(velocity, u, x, &locator);
        return std::hypot(f.value[0], f.value[1]);
    };
    constexpr int coarse = 200;
    const double hx = (box.hi[0] - box.lo[0]) / coarse;
    const double hy = (box.hi[1] - box.lo[1]) / coarse;
    VortexLocation best;
    best.speed = std::numeric_limits<double>::infinity();
    double max_speed = 0.0;
    int bi = 0, bj = 0;
    for (int j = 0; j <= coarse; ++j)
        for (int i = 0; i <= coarse; ++i) {
            const Vec2 x{box.lo[0] + i * hx, box.lo[1] + j * hy};
            const double s = speed(x);
            max_speed = std::max(max_speed, s);
            if (s < best.speed) {
                best.speed = s;
                best.x = x;
                bi = i;
                bj = j;
            }
        }
    best.on_boundary = bi == 0 || bj == 0 || bi == coarse || bj == coarse;
    best.degenerate = max_speed < 1e-12;
    if (best.degenerate) return best;

    constexpr int fine = 20;
    const Vec2 c = best.x;
    for (int j = 0; j <= fine; ++j)
        for (int i = 0; i <= fine; ++i) {
            const Vec2 x{std::clamp(c[0] - hx + 2.0 * hx * i / fine, box.lo[0], box.hi[0]),
                         std::clamp(c[1] - hy + 2.0 * hy * j / fine, box.lo[1], box.hi[1])};
            const double s = speed(x);
            if (s < best.speed) {
                best.speed = s;
                best.x = x;
            }
        }
    return best;
}

LidCavityResult run_lid_cavity(const Mesh& mesh, const SchemeParams& params, const StepObserver& observer)
{
    const SavStepper stepper(mesh, params, lid_cavity_problem());
    LidCavityResult res;
    FlowState state = stepper.initialize();
    const double h = mesh.h();
    res.records = run_to_end(stepper, state, [&](const FlowState& b, const FlowState& a, const DiagnosticsRecord& r) {
        res.psi_history.push_back(r.psi);
        double umax = 0.0;
        for (std::size_t i = 0; i + 1 < a.u.size(); i += 2) umax = std::max(umax, std::hypot(a.u[i], a.u[i + 1]));
        res.cfl = std::max(res.cfl, params.tau * umax / h);
        return !observer || observer(b, a, r);
    });
    res.vortex = locate_primary_vortex(stepper.velocity_space(), state.u);
    res.final_state = std::move(state);
    return res;
}

// Cylinder in a channel --------------------------------------------------

double turek_inflow(double y, double t)
{
    const double h = TurekGeometry::height;
    return 4.0 * turek_peak_inflow * y * (h - y) / (h * h) * std::sin(std::numbers::pi * t / 8.0);
}

FlowProblem turek_problem()
{
    FlowProblem pr;
    pr.dirichlet = [](const Vec2& x, double t, BoundaryTag tag) {
        return tag == BoundaryTag::DirichletInflow ? Vec2{turek_inflow(x[1], t), 0.0} : Vec2{0.0, 0.0};
    };
    pr.normal_rate = [](const Vec2& x, double t, const Vec2& n, BoundaryTag tag) {
        if (tag != BoundaryTag::DirichletInflow) return 0.0;
        const double h = TurekGeometry::height;
        const double profile = 4.0 * turek_peak_inflow * x[1] * (h - x[1]) / (h * h);
        return n[0] * profile * std::numbers::pi / 8.0 * std::cos(std::numbers::pi * t / 8.0);
    };
    return pr;
}

Forces compute_forces(const SavStepper& stepper, const FlowState& before, const FlowState& after)
{
    const FeSpace& vs = stepper.velocity_space();
    const FeSpace& ps = stepper.pressure_space();
    const Mesh& mesh = vs.mesh();
    const auto& cyl = vs.boundary_nodes(BoundaryTag::DirichletCylinder);
    if (cyl.empty()) throw std::invalid_argument("force evaluation needs a DirichletCylinder boundary");
    std::vector<char> on_body(vs.n_nodes(), 0);
    for (int n : cyl) on_body[n] = 1;

    const SchemeParams& prm = stepper.params();
    std::vector<double> dt(after.u.size());
    if (before.step >= 1) {
        for (std::size_t i = 0; i < dt.size(); ++i)
            dt[i] = (3.0 * after.u[i] - 4.0 * after.u_prev[i] + before.u_prev[i]) / (2.0 * prm.tau);
    } else {
        for (std::size_t i = 0; i < dt.size(); ++i) dt[i] = (after.u[i] - after.u_prev[i]) / prm.tau;
    }

    const auto& rule = quadrature_rule(5);
    std::array<double, 2> residual{0.0, 0.0};
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        const auto nodes = vs.cell_nodes(c);
        if (std::none_of(nodes.begin(), nodes.end(), [&](int n) { return on_body[n] != 0; })) continue;
        const CellMap m = CellMap::of(mesh, c);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Bary& l = rule.points[q];
            const double w = rule.weights[q] * std::abs(m.det);
            const FieldValue u = evaluate_in_cell(vs, after.u, c, l);
            const FieldValue d = evaluate_in_cell(vs, dt, c, l);
            const double p = evaluate_in_cell(ps, after.p, c, l).value[0];
            const double div = u.grad[0][0] + u.grad[1][1];
            const BasisValues b = reference_basis(vs.degree(), l);
            for (int a = 0; a < b.count; ++a) {
                if (!on_body[nodes[a]]) continue;
                const Vec2 g = m.map_gradient(b.grad[a]);
                for (int k = 0; k < 2; ++k) {
                    const double conv = u.value[0] * u.grad[k][0] + u.value[1] * u.grad[k][1] + 0.5 * div * u.value[k];
                    residual[k] += w * ((d.value[k] + conv) * b.value[a] +
                                        prm.nu * (u.grad[k][0] * g[0] + u.grad[k][1] * g[1]) +
                                        (prm.gamma * prm.nu * div - p) * g[k]);
                }
            }
        }
    }
    Forces f;
    f.drag = -residual[0];
    f.lift = -residual[1];
    const double scale = 2.0 / (turek_mean_velocity * turek_mean_velocity * 2.0 * TurekGeometry::radius);
    f.cd = scale * f.drag;
    f.cl = scale * f.lift;
    return f;
}

TurekResult run_turek_cylinder(const Mesh& mesh, const SchemeParams& params, const StepObserver& observer)
{
    const SavStepper stepper(mesh, params, turek_problem());
    TurekResult res;
    res.cd_max = res.cl_max = -std::numeric_limits<double>::infinity();
    FlowState state = stepper.initialize();
    res.records = run_to_end(stepper, state, [&](const FlowState& b, const FlowState& a, const DiagnosticsRecord& r) {
        const Forces f = compute_forces(stepper, b, a);
        res.times.push_back(a.t);
        res.cd.push_back(f.cd);
        res.cl.push_back(f.cl);
        res.psi_history.push_back(r.psi);
        if (f.cd > res.cd_max) {
            res.cd_max = f.cd;
            res.t_cd_max = a.t;
        }
        if (f.cl > res.cl_max) {
            res.cl_max = f.cl;
            res.t_cl_max = a.t;
        }
        return !observer || observer(b, a, r);
    });
    res.final_state = std::move(state);
    return res;
}

}  // namespace cssav
