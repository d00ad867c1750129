#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cssav/benchmarks.hpp"

using namespace cssav;

namespace {

constexpr double pi = std::numbers::pi;

}  // namespace

TEST_SUITE("benchmarks")
{
    TEST_CASE("case names and defaults")
    {
        for (CaseId id : {CaseId::TaylorGreen, CaseId::LidCavity, CaseId::TurekCylinder})
            CHECK(case_from_string(to_string(id)) == id);
        CHECK_FALSE(case_from_string("poiseuille").has_value());
        const auto tg = default_params(CaseId::TaylorGreen);
        CHECK(tg.nu == 0.1);
        CHECK(tg.gamma == 10.0);
        CHECK(tg.alpha == 1.0);
        const auto lc = default_params(CaseId::LidCavity);
        CHECK(lc.nu == 0.0025);
        CHECK(lc.gamma == 100.0);
        CHECK(lc.alpha == 0.1);
        CHECK(lc.t_end == 30.0);
        const auto tc = default_params(CaseId::TurekCylinder);
        CHECK(tc.nu == 0.001);
        CHECK(tc.gamma == 1000.0);
        CHECK(tc.alpha == 0.1);
        CHECK(tc.t_end == 8.0);
    }

    TEST_CASE("Taylor-Green solution satisfies the equations")
    {
        const double nu = 0.07, h = 1e-4;
        for (const Vec2 x : {Vec2{0.2, 0.3}, Vec2{0.71, 0.45}, Vec2{0.5, 0.9}}) {
            const double t = 0.4;
            auto u = [&](double dx, double dy, double dt) { return taylor_green_exact({x[0] + dx, x[1] + dy}, t + dt, nu); };
            const auto c = u(0, 0, 0);
            Vec2 ux, uy, ut, lap;
            for (int k = 0; k < 2; ++k) {
                ux[k] = (u(h, 0, 0).u[k] - u(-h, 0, 0).u[k]) / (2 * h);
                uy[k] = (u(0, h, 0).u[k] - u(0, -h, 0).u[k]) / (2 * h);
                ut[k] = (u(0, 0, h).u[k] - u(0, 0, -h).u[k]) / (2 * h);
                lap[k] = (u(h, 0, 0).u[k] + u(-h, 0, 0).u[k] + u(0, h, 0).u[k] + u(0, -h, 0).u[k] - 4 * c.u[k]) / (h * h);
            }
            const double px = (u(h, 0, 0).p - u(-h, 0, 0).p) / (2 * h);
            const double py = (u(0, h, 0).p - u(0, -h, 0).p) / (2 * h);
            CHECK(std::abs(ux[0] + uy[1]) < 1e-7);
            const double rx = ut[0] + c.u[0] * ux[0] + c.u[1] * uy[0] - nu * lap[0] + px;
            const double ry = ut[1] + c.u[0] * ux[1] + c.u[1] * uy[1] - nu * lap[1] + py;
            CHECK(std::abs(rx) < 1e-5);
            CHECK(std::abs(ry) < 1e-5);
        }
        const auto v = taylor_green_exact({0.25, 0.0}, 0.0, 0.1);
        CHECK(v.u[0] == doctest::Approx(std::sin(pi / 4)));
        CHECK(std::abs(v.u[1]) < 1e-15);
        CHECK(v.p == doctest::Approx(0.25));
        // Boundary data and its normal rate agree with a time difference.
        const auto pr = taylor_green_problem(0.1);
        const Vec2 xb{1.0, 0.3}, n{1.0, 0.0};
        const double dt = 1e-5;
        const double fd = (pr.dirichlet(xb, 0.5 + dt, BoundaryTag::DirichletWall)[0] -
                           pr.dirichlet(xb, 0.5 - dt, BoundaryTag::DirichletWall)[0]) / (2 * dt);
        CHECK(pr.normal_rate(xb, 0.5, n, BoundaryTag::DirichletWall) == doctest::Approx(fd).epsilon(1e-6));
    }

    TEST_CASE("Taylor-Green errors vanish for the interpolated solution")
    {
        const Mesh m = generate_unit_square(8, 8);
        auto params = default_params(CaseId::TaylorGreen);
        const SavStepper st(m, params, taylor_green_problem(params.nu));
        FlowState s;
        s.t = 0.3;
        s.u = interpolate(st.velocity_space(),
                          VectorFunction([&](const Vec2& x, double t) { return taylor_green_exact(x, t, params.nu).u; }), s.t);
        s.p = interpolate(st.pressure_space(),
                          ScalarFunction([&](const Vec2& x, double t) { return taylor_green_exact(x, t, params.nu).p + 3.0; }), s.t);
        const auto e = taylor_green_errors(st, s);
        CHECK(e.velocity_l2 < 1e-3);
        CHECK(e.grad_u_l2 < 3e-2);
        CHECK(e.pressure_l2 < 3e-2);  // the constant shift is removed
    }

    TEST_CASE("short convergence study")
    {
        const Mesh m = generate_unit_square(8, 8);
        auto base = default_params(CaseId::TaylorGreen);
        base.t_end = 0.4;
        const auto table = run_taylor_green_convergence(m, base, 0.2, 1);
        REQUIRE(table.rows.size() == 2);
        CHECK(table.rows[1].tau == 0.1);
        CHECK(table.pressure_orders.size() == 1);
        for (const auto& r : table.rows) {
            CHECK(r.finite);
            CHECK(r.max_abs_psi_minus_one < 0.05);
            CHECK(r.errors.pressure_l2 < 0.1);
        }
    }

    TEST_CASE("lid profile")
    {
        CHECK(lid_velocity(0.5, 1e6) == 1.0);
        CHECK(std::abs(lid_velocity(0.0, 10.0)) < 1e-15);
        CHECK(std::abs(lid_velocity(1.0, 10.0)) < 1e-15);
        CHECK(lid_velocity(0.3, 0.0) == 0.0);
        CHECK(lid_velocity(0.5, 1.0) == doctest::Approx(1.0 - std::exp(-3.0)));
        double prev = lid_velocity(0.0, 5.0), max_jump = 0.0;
        for (int i = 1; i <= 1000; ++i) {
            const double x = i / 1000.0;
            const double v = lid_velocity(x, 5.0);
            max_jump = std::max(max_jump, std::abs(v - prev));
            CHECK(v == doctest::Approx(lid_velocity(1.0 - x, 5.0)));
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            prev = v;
        }
        // Steepest slope of the ramp is pi / 0.1.
        CHECK(max_jump <= std::numbers::pi / 0.1 * 1e-3);
    }

    TEST_CASE("vortex search")
    {
        const Mesh m = generate_unit_square(8, 8);
        const FeSpace s(m, 2, 2);
        const auto rot = interpolate(s, VectorFunction([](const Vec2& x, double) {
                                         return Vec2{-(x[1] - 0.6), x[0] - 0.4};
                                     }));
        const auto v = locate_primary_vortex(s, rot);
        CHECK(v.x[0] == doctest::Approx(0.4).epsilon(1e-3));
        CHECK(v.x[1] == doctest::Approx(0.6).epsilon(1e-3));
        CHECK_FALSE(v.on_boundary);
        CHECK_FALSE(v.degenerate);

        const auto off = interpolate(s, VectorFunction([](const Vec2& x, double) {
                                         return Vec2{-(x[1] - 0.95), x[0] - 0.5};
                                     }));
        CHECK(locate_primary_vortex(s, off).on_boundary);
        CHECK(locate_primary_vortex(s, std::vector<double>(s.n_dofs(), 0.0)).degenerate);
    }

    TEST_CASE("cavity mesh and a short cavity run")
    {
        MeshSpec spec;
        spec.cells_per_side = 8;
        const Mesh m = make_case_mesh(CaseId::LidCavity, spec);
        CHECK(m.has_tag(BoundaryTag::DirichletLid));
        auto params = default_params(CaseId::LidCavity);
        params.tau = 0.25;
        params.t_end = 1.0;
        int calls = 0;
        const auto r = run_lid_cavity(m, params, [&](const FlowState&, const FlowState&, const DiagnosticsRecord&) {
            ++calls;
            return true;
        });
        CHECK(calls == 4);
        CHECK(r.records.size() == 5);
        CHECK(r.records.front().step == 0);
        CHECK(r.records.back().step == 4);
        CHECK(r.final_state.t == doctest::Approx(1.0));
        CHECK(std::isfinite(r.cfl));
        CHECK(r.cfl > 0.0);
        for (double p : r.psi_history) CHECK(std::abs(p - 1.0) < 0.5);
    }

    TEST_CASE("early stop through the observer")
    {
        const Mesh m = generate_unit_square(4, 4);
        auto params = default_params(CaseId::TaylorGreen);
        const SavStepper st(m, params, taylor_green_problem(params.nu));
        FlowState s = st.initialize();
        const auto recs = run_to_end(st, s, [](const FlowState&, const FlowState& a, const DiagnosticsRecord&) {
            return a.step < 2;
        });
        CHECK(s.step == 2);
        CHECK(recs.back().step == 2);
    }

    TEST_CASE("channel inflow")
    {
        const double h = TurekGeometry::height;
        CHECK(turek_inflow(h / 2, 4.0) == doctest::Approx(turek_peak_inflow));
        CHECK(turek_inflow(0.0, 4.0) == 0.0);
        CHECK(turek_inflow(h / 2, 0.0) == 0.0);
        double mean = 0.0;
        const int n = 2000;
        for (int i = 0; i < n; ++i) mean += turek_inflow((i + 0.5) * h / n, 4.0) / n;
        CHECK(mean == doctest::Approx(turek_mean_velocity).epsilon(1e-5));
        const auto pr = turek_problem();
        const Vec2 x{0.0, 0.1}, nrm{-1.0, 0.0};
        const double dt = 1e-5;
        const double fd = -(turek_inflow(x[1], 2.0 + dt) - turek_inflow(x[1], 2.0 - dt)) / (2 * dt);
        CHECK(pr.normal_rate(x, 2.0, nrm, BoundaryTag::DirichletInflow) == doctest::Approx(fd).epsilon(1e-6));
        CHECK(pr.normal_rate(x, 2.0, nrm, BoundaryTag::DirichletWall) == 0.0);
    }

    TEST_CASE("forces vanish at rest and under uniform pressure")
    {
        const Mesh m = generate_turek_channel(0);
        const SavStepper st(m, default_params(CaseId::TurekCylinder), turek_problem());
        FlowState a;
        a.u.assign(st.velocity_space().n_dofs(), 0.0);
        a.u_prev = a.u;
        a.p.assign(st.pressure_space().n_dofs(), 0.0);
        a.p_prev = a.p;
        a.step = 1;
        FlowState b = a;
        b.step = 2;
        b.t = 0.0025;
        const auto f0 = compute_forces(st, a, b);
        CHECK(f0.drag == 0.0);
        CHECK(f0.lift == 0.0);
        std::fill(b.p.begin(), b.p.end(), 3.7);
        const auto f1 = compute_forces(st, a, b);
        CHECK(std::abs(f1.drag) < 1e-12);
        CHECK(std::abs(f1.lift) < 1e-12);
        CHECK(f1.cd == 20.0 * f1.drag);

        const Mesh square = generate_unit_square(4, 4);
        const SavStepper no_cyl(square, default_params(CaseId::TaylorGreen), {});
        FlowState z = no_cyl.initialize();
        CHECK_THROWS_AS(compute_forces(no_cyl, z, z), std::invalid_argument);
    }
}
