#include <doctest.h>

#include <cmath>
#include <random>

#include "cssav/benchmarks.hpp"
#include "cssav/stepper.hpp"

using namespace cssav;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937& rng)
{
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

// Smooth velocity vanishing on the boundary of the unit square.
Vec2 bubble_flow(const Vec2& x, double)
{
    const double pi = std::acos(-1.0);
    const double b = 16.0 * x[0] * (1 - x[0]) * x[1] * (1 - x[1]);
    return {b * std::sin(pi * x[0]) * std::cos(pi * x[1]), -b * std::cos(pi * x[0]) * std::sin(pi * x[1])};
}

SchemeParams small_params(ElementPair pair = ElementPair::TaylorHoodP2P1)
{
    SchemeParams p;
    p.nu = 0.1;
    p.gamma = 10.0;
    p.alpha = 1.0;
    p.tau = 0.1;
    p.t_end = 0.5;
    p.pair = pair;
    return p;
}

}  // namespace

TEST_SUITE("stepper")
{
    TEST_CASE("parameter validation")
    {
        SchemeParams p;
        CHECK_NOTHROW(p.validate());
        p.tau = -1.0;
        CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("tau"), std::invalid_argument);
        p = SchemeParams{};
        p.nu = 0.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p = SchemeParams{};
        p.gamma = -1.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p = SchemeParams{};
        p.alpha = 0.0;
        CHECK_THROWS_AS(p.validate(), std::invalid_argument);
        p = SchemeParams{};
        p.tau = 0.25;
        p.t_end = 1.0;
        CHECK(p.n_steps() == 4);
        CHECK(element_pair_from_string("taylor_hood_p2p1") == ElementPair::TaylorHoodP2P1);
        CHECK(element_pair_from_string(to_string(ElementPair::EqualOrderP1P1)) == ElementPair::EqualOrderP1P1);
        CHECK_FALSE(element_pair_from_string("p3").has_value());
    }

    TEST_CASE("closed-form SAV update")
    {
        CHECK(sav_update(1.0, 1.0, 0.1, 1.0, 0.0, 0.0) == 1.0);
        CHECK(sav_update(1.0, 1.0, 0.1, 1.0, 0.5, 1.0) == doctest::Approx(2.9 / 3.2));
        CHECK(sav_update(0.9, 0.8, 0.2, 0.5, -0.1, 0.0) == doctest::Approx((3.6 - 0.8 + 0.02) / 3.0));
        try {
            sav_update(1.0, 1.0, 0.1, 1.0, 0.0, -15.0);
            FAIL("expected StepError");
        } catch (const StepError& e) {
            CHECK(std::string(e.what()).find("denominator") != std::string::npos);
        }
    }

    TEST_CASE("BDF2 polarisation identity")
    {
        const Mesh m = generate_unit_square(4, 4);
        const FeSpace s(m, 2, 2);
        const auto mass = assemble_mass(s);
        std::mt19937 rng(1);
        for (int k = 0; k < 10; ++k) {
            const auto a = random_vector(s.n_dofs(), rng), b = random_vector(s.n_dofs(), rng),
                       c = random_vector(s.n_dofs(), rng);
            const double scale = dot(a, spmv(mass, a)) + dot(b, spmv(mass, b)) + dot(c, spmv(mass, c));
            CHECK(bdf2_identity_check(a, b, c, mass) <= 1e-12 * scale);
        }
    }

    TEST_CASE("the rest state stays at rest with psi exactly one")
    {
        const Mesh m = generate_unit_square(6, 6);
        for (ElementPair pair : {ElementPair::TaylorHoodP2P1, ElementPair::EqualOrderP1P1}) {
            const SavStepper st(m, small_params(pair), FlowProblem{});
            FlowState s = st.initialize();
            CHECK(s.step == 1);
            CHECK(s.t == doctest::Approx(0.1));
            for (int k = 0; k < 4; ++k) {
                auto [next, rec] = st.advance(s);
                CHECK(next.psi == 1.0);
                CHECK(next.step == s.step + 1);
                for (double v : next.u) CHECK(v == 0.0);
                CHECK(rec.phi == doctest::Approx(2.0 / st.params().alpha));
                s = std::move(next);
            }
        }
    }

    TEST_CASE("second momentum solve")
    {
        const Mesh m = generate_unit_square(6, 6);
        FlowProblem prob;
        prob.initial_velocity = bubble_flow;
        const SavStepper st(m, small_params(), prob);
        const FlowState s = st.initialize();

        SUBCASE("linear in the pressure load")
        {
            auto sys = st.build_momentum(s);
            const auto u2 = st.step2_predict_u2(sys);
            for (double& v : sys.rhs_u2) v *= -3.0;
            const auto w = st.step2_predict_u2(sys);
            double mx = 0.0;
            for (double v : u2) mx = std::max(mx, std::abs(v));
            REQUIRE(mx > 0.0);
            for (std::size_t i = 0; i < u2.size(); ++i) CHECK(std::abs(w[i] + 3.0 * u2[i]) <= 1e-8 * mx);
        }
        SUBCASE("constant extrapolated pressure gives zero")
        {
            FlowState c = s;
            std::fill(c.p.begin(), c.p.end(), 2.5);
            std::fill(c.p_prev.begin(), c.p_prev.end(), 2.5);
            const auto sys = st.build_momentum(c);
            for (double v : st.step2_predict_u2(sys)) CHECK(std::abs(v) < 1e-13);
        }
        SUBCASE("superposition")
        {
            const auto sys = st.build_momentum(s);
            const auto u1 = st.step1_predict_u1(s, sys);
            const auto u2 = st.step2_predict_u2(sys);
            const auto up = st.step3_update_sav(s, sys, u1, u2);
            for (std::size_t i = 0; i < u1.size(); ++i)
                CHECK(up.u[i] == u1[i] + up.psi * u2[i]);
            // psi solves the scalar equation of the SAV update.
            const double i1 = dot(sys.pressure_load, u1), i2 = dot(sys.pressure_load, u2);
            const double tau = st.params().tau, alpha = st.params().alpha;
            CHECK(std::abs((3.0 * up.psi - 4.0 * s.psi + s.psi_prev) / (2.0 * tau) + alpha * (i1 + up.psi * i2)) <
                  1e-12);
        }
    }

    TEST_CASE("pressure scales with 1/psi")
    {
        const Mesh m = generate_unit_square(6, 6);
        FlowProblem prob;
        prob.initial_velocity = bubble_flow;
        const SavStepper st(m, small_params(), prob);
        const FlowState s = st.initialize();
        const auto p1 = st.step4_solve_ppe(s.u, 1.0, s.t, 2);
        const auto p2 = st.step4_solve_ppe(s.u, 2.0, s.t, 2);
        double mx = 0.0;
        for (double v : p1) mx = std::max(mx, std::abs(v));
        REQUIRE(mx > 1e-3);
        for (std::size_t i = 0; i < p1.size(); ++i) CHECK(std::abs(p2[i] - 0.5 * p1[i]) <= 1e-8 * mx);
        CHECK_THROWS_AS(st.step4_solve_ppe(s.u, 1e-8, s.t, 2), StepError);
    }

    TEST_CASE("energy balance applicability")
    {
        const Mesh m = generate_unit_square(6, 6);
        FlowProblem prob;
        prob.initial_velocity = bubble_flow;
        const SavStepper free(m, small_params(), prob);
        CHECK(free.energy_balance_applies());
        FlowState s = free.initialize();
        auto [next, rec] = free.advance(s);
        CHECK(rec.energy_applicable());
        CHECK(rec.energy_residual < 1e-8);
        CHECK(rec.phi <= free.phi(s) * (1.0 + 1e-12));

        prob.forcing = [](const Vec2&, double) { return Vec2{1.0, 0.0}; };
        const SavStepper forced(m, small_params(), prob);
        CHECK_FALSE(forced.energy_balance_applies());
        auto [n2, r2] = forced.advance(forced.initialize());
        CHECK_FALSE(r2.energy_applicable());
        CHECK(std::isnan(forced.energy_check(s, n2)));
        CHECK(std::isnan(free.diagnostics(s).energy_residual));
    }

    TEST_CASE("boundary data is imposed")
    {
        const Mesh m = generate_unit_square(6, 6).retagged([](const Facet&, const Vec2& mid) {
            return mid[1] > 1.0 - 1e-12 ? BoundaryTag::DirichletLid : BoundaryTag::DirichletWall;
        });
        auto params = small_params();
        params.nu = 0.01;
        params.gamma = 1.0;
        params.alpha = 0.1;
        const SavStepper st(m, params, lid_cavity_problem());
        FlowState s = st.initialize();
        s = st.advance(s).first;
        const auto d = st.velocity_dirichlet(s.t);
        for (std::size_t k = 0; k < d.dofs.size(); ++k) CHECK(s.u[d.dofs[k]] == doctest::Approx(d.values[k]));
        double lid_max = 0.0;
        for (double v : d.values) lid_max = std::max(lid_max, v);
        CHECK(lid_max == doctest::Approx(-std::expm1(-3.0 * s.t)));
        for (double v : s.u) CHECK(std::isfinite(v));
        CHECK(std::abs(s.psi - 1.0) < 0.1);
    }

    TEST_CASE("step error tags")
    {
        const StepError e("step 7", "PPE solve failed");
        CHECK(e.tag() == "step 7");
        CHECK(std::string(e.what()) == "[step 7] PPE solve failed");
    }
}
