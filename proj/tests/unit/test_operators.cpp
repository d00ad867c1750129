#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cssav/operators.hpp"
#include "oracle.hpp"

using namespace cssav;

namespace {

Mesh reference_cell()
{
    const BoundaryTag w = BoundaryTag::DirichletWall;
    return Mesh({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}}, {{{0, 1}, w}, {{1, 2}, w}, {{2, 0}, w}});
}

Mesh square_with_outflow(int n)
{
    return generate_unit_square(n, n).retagged([](const Facet&, const Vec2& mid) {
        return mid[0] > 1.0 - 1e-12 ? BoundaryTag::NeumannOutflow : BoundaryTag::DirichletWall;
    });
}

std::vector<double> random_vector(std::size_t n, unsigned seed)
{
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = d(rng);
    return v;
}

double bilinear(const SparseMatrix& a, std::span<const double> x, std::span<const double> y)
{
    return dot(x, spmv(a, y));
}

}  // namespace

TEST_SUITE("operators")
{
    TEST_CASE("reference-cell P1 matrices")
    {
        const Mesh m = reference_cell();
        const FeSpace s(m, 1, 1);
        const auto mass = assemble_mass(s);
        const auto k = assemble_stiffness(s);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(mass.value(i, j) == doctest::Approx((i == j ? 2.0 : 1.0) / 24.0));
        const double kref[3][3] = {{1.0, -0.5, -0.5}, {-0.5, 0.5, 0.0}, {-0.5, 0.0, 0.5}};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(std::abs(k.value(i, j) - kref[i][j]) < 1e-15);
    }

    TEST_CASE("mass sums to the area and stiffness annihilates constants")
    {
        const Mesh m = generate_turek_channel(0);
        double area = 0.0;
        for (std::size_t c = 0; c < m.n_cells(); ++c) area += m.cell_area(c);
        for (int deg : {1, 2}) {
            const FeSpace s(m, deg, 1);
            const auto mass = assemble_mass(s);
            double total = 0.0;
            for (double v : mass.values()) total += v;
            CHECK(total == doctest::Approx(area).epsilon(1e-12));
            const auto k = assemble_stiffness(s);
            const auto k1 = spmv(k, std::vector<double>(s.n_dofs(), 1.0));
            for (double v : k1) CHECK(std::abs(v) <= 1e-12);
            // Symmetric to the last bit.
            CHECK(k.transpose().values().size() == k.values().size());
            for (std::size_t r = 0; r < s.n_dofs(); r += 7)
                for (std::size_t c = 0; c < s.n_dofs(); c += 5) CHECK(k.value(r, c) == k.value(c, r));
        }
    }

    TEST_CASE("mass matrix is exactly symmetric and positive definite")
    {
        const Mesh m = generate_turek_channel(0);
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> uni(-1.0, 1.0);
        for (int deg : {1, 2}) {
            const FeSpace s(m, deg, 2);
            const auto mass = assemble_mass(s);
            const auto mt = mass.transpose();
            REQUIRE(mt.values().size() == mass.values().size());
            double asym = 0.0;
            for (std::size_t i = 0; i < mass.values().size(); ++i)
                asym = std::max(asym, std::abs(mass.values()[i] - mt.values()[i]));
            CHECK(asym == 0.0);
            for (int k = 0; k < 20; ++k) {
                std::vector<double> x(s.n_dofs());
                for (double& v : x) v = uni(rng);
                CHECK(dot(x, spmv(mass, x)) > 0.0);
            }
        }
    }

    TEST_CASE("grad-div form")
    {
        const Mesh m = generate_unit_square(4, 4, DiagonalPattern::Crisscross);
        for (int deg : {1, 2}) {
            const FeSpace s(m, deg, 2);
            const auto g = assemble_graddiv(s);
            const auto rot = interpolate(s, VectorFunction([](const Vec2& x, double) { return Vec2{-x[1], x[0]}; }));
            const auto dil = interpolate(s, VectorFunction([](const Vec2& x, double) { return Vec2{x[0], x[1]}; }));
            CHECK(std::abs(bilinear(g, rot, rot)) < 1e-12);
            CHECK(bilinear(g, dil, dil) == doctest::Approx(4.0).epsilon(1e-12));
            CHECK(g.same_pattern(assemble_mass(s)));
        }
    }

    TEST_CASE("convection is skew-symmetric on fields vanishing on the boundary")
    {
        const Mesh m = generate_unit_square(5, 5);
        for (int deg : {1, 2}) {
            const FeSpace s(m, deg, 2);
            const auto w = random_vector(s.n_dofs(), 3);
            auto v = random_vector(s.n_dofs(), 4);
            for (BoundaryTag t : all_boundary_tags)
                for (int d : s.boundary_dofs(t)) v[d] = 0.0;
            const auto c = assemble_convection(s, w, 5);
            CHECK(std::abs(bilinear(c, v, v)) < 1e-12 * dot(v, v));
            // c(w; u, v) = -c(w; v, u) for such u, v.
            auto u = random_vector(s.n_dofs(), 5);
            for (BoundaryTag t : all_boundary_tags)
                for (int d : s.boundary_dofs(t)) u[d] = 0.0;
            CHECK(bilinear(c, v, u) == doctest::Approx(-bilinear(c, u, v)).epsilon(1e-10));
        }
    }

    TEST_CASE("convection matches the reference integral")
    {
        const Mesh m = generate_unit_square(3, 2);
        const FeSpace s(m, 2, 2);
        const auto w = random_vector(s.n_dofs(), 11);
        const auto x = random_vector(s.n_dofs(), 12);
        const auto y = random_vector(s.n_dofs(), 13);
        const auto c = assemble_convection(s, w);
        CHECK(bilinear(c, y, x) == doctest::Approx(oracle::convection(s, w, x, y)).epsilon(1e-12));

        auto sum = assemble_mass(s);
        add_convection(sum, s, w, 2.0);
        auto expect = assemble_mass(s);
        expect.add_scaled(c, 2.0);
        for (std::size_t k = 0; k < sum.values().size(); ++k)
            CHECK(std::abs(sum.values()[k] - expect.values()[k]) <= 1e-15 * (1.0 + std::abs(expect.values()[k])));
    }

    TEST_CASE("pressure coupling")
    {
        const Mesh m = generate_unit_square(4, 3);
        const FeSpace u(m, 2, 2), p(m, 1, 1);
        const auto b = assemble_pressure_coupling(u, p);
        CHECK(b.rows() == u.n_dofs());
        CHECK(b.cols() == p.n_dofs());
        // A constant pressure only sees boundary velocity DOFs: (1, div v) = int v . n.
        const auto b1 = spmv(b, std::vector<double>(p.n_dofs(), 1.0));
        std::vector<char> boundary(u.n_dofs(), 0);
        for (int d : u.boundary_dofs(BoundaryTag::DirichletWall)) boundary[d] = 1;
        for (std::size_t i = 0; i < b1.size(); ++i)
            if (!boundary[i]) CHECK(std::abs(b1[i]) < 1e-13);
        const auto v = random_vector(u.n_dofs(), 21);
        const auto q = random_vector(p.n_dofs(), 22);
        CHECK(dot(v, spmv(b, q)) == doctest::Approx(oracle::coupling(u, p, v, q)).epsilon(1e-12));
        std::vector<double> btv(p.n_dofs());
        b.multiply_transpose(v, btv);
        CHECK(dot(btv, q) == doctest::Approx(dot(v, spmv(b, q))).epsilon(1e-13));
    }

    TEST_CASE("load and traction vectors")
    {
        const Mesh m = square_with_outflow(4);
        const FeSpace s(m, 2, 2);
        const auto f = assemble_load(s, [](const Vec2&, double t) { return Vec2{1.0, 2.0 * t}; }, 3.0);
        double fx = 0.0, fy = 0.0;
        for (std::size_t i = 0; i < f.size(); i += 2) {
            fx += f[i];
            fy += f[i + 1];
        }
        CHECK(fx == doctest::Approx(1.0));
        CHECK(fy == doctest::Approx(6.0));

        const auto tr = assemble_traction(s, [](const Vec2& x, double) { return Vec2{x[1], 1.0}; }, 0.0);
        double tx = 0.0, ty = 0.0;
        for (std::size_t i = 0; i < tr.size(); i += 2) {
            tx += tr[i];
            ty += tr[i + 1];
        }
        CHECK(tx == doctest::Approx(0.5));
        CHECK(ty == doctest::Approx(1.0));
        for (std::size_t n = 0; n < s.n_nodes(); ++n)
            if (s.dof_coords()[n][0] < 1.0 - 1e-12) CHECK(tr[s.dof(n, 0)] == 0.0);
    }

    TEST_CASE("Dirichlet elimination on a 2x2 system")
    {
        auto a = SparseMatrix::from_triplets(2, 2, {{0, 0, 2.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}});
        std::vector<double> b{1.0, 1.0};
        const std::vector<int> dofs{1};
        const std::vector<double> vals{5.0};
        apply_dirichlet(a, b, dofs, vals);
        CHECK(b == std::vector<double>{-4.0, 5.0});
        CHECK(a.value(0, 0) == 2.0);
        CHECK(a.value(0, 1) == 0.0);
        CHECK(a.value(1, 0) == 0.0);
        CHECK(a.value(1, 1) == 1.0);
    }

    TEST_CASE("pressure Poisson right-hand side")
    {
        const Mesh m = generate_unit_square(4, 4);
        const FeSpace v(m, 2, 2), p(m, 1, 1);
        const auto qx = interpolate(p, ScalarFunction([](const Vec2& x, double) { return x[0]; }));

        SUBCASE("rigid rotation")
        {
            // u . grad u = -(x, y); the vorticity is constant, so the curl term vanishes.
            const auto u = interpolate(v, VectorFunction([](const Vec2& x, double) { return Vec2{-x[1], x[0]}; }));
            for (double nu : {0.01, 1.0}) {
                PpeRhsInput in;
                in.nu = nu;
                CHECK(dot(qx, assemble_ppe_rhs(p, v, u, in)) == doctest::Approx(0.5).epsilon(1e-12));
            }
        }
        SUBCASE("shear with varying vorticity")
        {
            // u = (y^2, 0): u . grad u = 0, div u = 0, omega = -2y.
            const auto u = interpolate(v, VectorFunction([](const Vec2& x, double) { return Vec2{x[1] * x[1], 0.0}; }));
            PpeRhsInput in;
            in.nu = 0.3;
            CHECK(dot(qx, assemble_ppe_rhs(p, v, u, in)) == doctest::Approx(0.6).epsilon(1e-12));
        }
        SUBCASE("forcing and normal rate")
        {
            const std::vector<double> u(v.n_dofs(), 0.0);
            const VectorFunction f = [](const Vec2&, double t) { return Vec2{t, 0.0}; };
            const FacetRate rate = [](std::size_t, const Vec2&) { return 1.0; };
            PpeRhsInput in;
            in.forcing = &f;
            in.normal_rate = &rate;
            in.time = 2.0;
            const auto r = assemble_ppe_rhs(p, v, u, in);
            // (f, grad x) = 2; boundary term -int_Gamma x ds = -2.
            CHECK(std::abs(dot(qx, r)) < 1e-12);
            double total = 0.0;
            for (double e : r) total += e;
            CHECK(total == doctest::Approx(-4.0).epsilon(1e-12));
        }
    }

    TEST_CASE("outflow pressure values")
    {
        const Mesh m = square_with_outflow(4);
        const FeSpace v(m, 2, 2), p(m, 1, 1);
        const auto u = interpolate(v, VectorFunction([](const Vec2& x, double) { return Vec2{x[0], 0.0}; }));
        const double nu = 0.3;
        const auto d = project_neumann_pressure(p, v, u, nullptr, 0.0, 2.0, nu);
        CHECK(d.dofs.size() == 5);
        for (double val : d.values) CHECK(val == doctest::Approx(nu / 2.0));

        const VectorFunction t = [](const Vec2&, double) { return Vec2{0.1, 7.0}; };
        const auto e = project_neumann_pressure(p, v, u, &t, 0.0, 1.0, nu);
        for (double val : e.values) CHECK(val == doctest::Approx(nu - 0.1));
        CHECK_THROWS_AS(project_neumann_pressure(p, v, u, nullptr, 0.0, 1e-9, nu), std::domain_error);
    }
}
