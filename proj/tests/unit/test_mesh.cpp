#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cssav/mesh.hpp"

using namespace cssav;

namespace {

// Unit triangle plus a second triangle, touching it at the origin, refined
// into four congruent children.
Mesh bowtie()
{
    std::vector<Vec2> x{{0, 0}, {1, 0}, {0, 1}, {-1, 0}, {0, -1}, {-0.5, 0}, {0, -0.5}, {-0.5, -0.5}};
    std::vector<std::array<int, 3>> cells{{0, 1, 2}, {0, 6, 5}, {5, 7, 3}, {6, 4, 7}, {5, 6, 7}};
    std::vector<TaggedEdge> f;
    const BoundaryTag w = BoundaryTag::DirichletWall;
    for (auto e : std::vector<std::array<int, 2>>{{0, 1}, {1, 2}, {2, 0}, {0, 5}, {5, 3}, {3, 7}, {7, 4}, {4, 6}, {6, 0}})
        f.push_back({e, w});
    return Mesh(x, cells, f);
}

}  // namespace

TEST_SUITE("mesh")
{
    TEST_CASE("unit square counts and tags")
    {
        const Mesh m = generate_unit_square(4, 3);
        CHECK(m.n_nodes() == 20);
        CHECK(m.n_cells() == 24);
        CHECK(m.facets().size() == 14);
        CHECK(m.edges().size() == m.n_nodes() + m.n_cells() - 1);
        for (const Facet& f : m.facets()) CHECK(f.tag == BoundaryTag::DirichletWall);
        double area = 0.0;
        for (std::size_t c = 0; c < m.n_cells(); ++c) area += m.cell_area(c);
        CHECK(area == doctest::Approx(1.0).epsilon(1e-14));

        const Mesh cc = generate_unit_square(3, 3, DiagonalPattern::Crisscross);
        CHECK(cc.n_cells() == 36);
        CHECK(cc.n_nodes() == 16 + 9);
    }

    TEST_CASE("outward normals close around the boundary")
    {
        const Mesh m = generate_turek_channel(0);
        Vec2 s{0, 0};
        for (std::size_t f = 0; f < m.facets().size(); ++f) {
            const Vec2 n = m.facet_normal(f);
            const double len = m.facet_length(f);
            s[0] += n[0] * len;
            s[1] += n[1] * len;
            CHECK(std::hypot(n[0], n[1]) == doctest::Approx(1.0));
            // The normal points away from the owning cell.
            const auto& c = m.cells()[m.facets()[f].cell];
            const auto& a = m.nodes()[m.facets()[f].nodes[0]];
            Vec2 centroid{0, 0};
            for (int k = 0; k < 3; ++k)
                for (int d = 0; d < 2; ++d) centroid[d] += m.nodes()[c[k]][d] / 3.0;
            CHECK((a[0] - centroid[0]) * n[0] + (a[1] - centroid[1]) * n[1] > 0.0);
        }
        CHECK(std::abs(s[0]) < 1e-12);
        CHECK(std::abs(s[1]) < 1e-12);
    }

    TEST_CASE("quasi-uniformity")
    {
        CHECK(quasi_uniformity(generate_unit_square(8, 8)) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(quasi_uniformity(bowtie()) == doctest::Approx(2.0).epsilon(1e-14));
    }

    TEST_CASE("clockwise cells are repaired and reported")
    {
        std::vector<Vec2> x{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        std::vector<std::array<int, 3>> cells{{0, 1, 2}, {0, 3, 2}};
        std::vector<TaggedEdge> f{{{0, 1}, BoundaryTag::DirichletWall},
                                  {{1, 2}, BoundaryTag::DirichletWall},
                                  {{2, 3}, BoundaryTag::DirichletLid},
                                  {{3, 0}, BoundaryTag::DirichletWall}};
        MeshReport report;
        const Mesh m(x, cells, f, &report);
        REQUIRE(report.reoriented_cells.size() == 1);
        CHECK(report.reoriented_cells[0] == 1);
        CHECK(m.cell_area(1) == doctest::Approx(0.5));
        CHECK(m.has_tag(BoundaryTag::DirichletLid));
        CHECK_FALSE(m.has_tag(BoundaryTag::NeumannOutflow));
    }

    TEST_CASE("invalid meshes are rejected")
    {
        std::vector<Vec2> x{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        std::vector<std::array<int, 3>> cells{{0, 1, 2}, {0, 2, 3}};
        const BoundaryTag w = BoundaryTag::DirichletWall;
        std::vector<TaggedEdge> ok{{{0, 1}, w}, {{1, 2}, w}, {{2, 3}, w}, {{3, 0}, w}};

        auto dangling = ok;
        dangling.push_back({{0, 2}, w});  // interior diagonal
        try {
            Mesh bad(x, cells, dangling);
            FAIL("expected MeshError");
        } catch (const MeshError& e) {
            CHECK(std::string(e.what()).find("facet 4") != std::string::npos);
        }

        auto missing = ok;
        missing.pop_back();
        CHECK_THROWS_AS(Mesh(x, cells, missing), MeshError);
        CHECK_THROWS_AS(Mesh(x, {{0, 1, 7}, {0, 2, 3}}, ok), MeshError);
        CHECK_THROWS_AS(Mesh({{0, 0}, {1, 0}, {2, 0}}, {{0, 1, 2}}, {}), MeshError);
    }

    TEST_CASE("native format round trip")
    {
        const Mesh m = generate_turek_channel(0);
        std::stringstream buf;
        write_native_mesh(m, buf);
        const Mesh r = read_native_mesh(buf);
        REQUIRE(r.n_nodes() == m.n_nodes());
        REQUIRE(r.n_cells() == m.n_cells());
        REQUIRE(r.facets().size() == m.facets().size());
        for (std::size_t i = 0; i < m.n_nodes(); ++i) CHECK(r.nodes()[i] == m.nodes()[i]);
        CHECK(r.cells() == m.cells());
        for (std::size_t f = 0; f < m.facets().size(); ++f) CHECK(r.facets()[f].tag == m.facets()[f].tag);
    }

    TEST_CASE("native reader reports the offending line")
    {
        std::istringstream in("NODES 3\n0 0\n1 0\n0 x\nCELLS 1\n0 1 2\nFACETS 0\n");
        try {
            read_native_mesh(in);
            FAIL("expected MeshError");
        } catch (const MeshError& e) {
            CHECK(std::string(e.what()).find("line 4") != std::string::npos);
        }
    }

    TEST_CASE("gmsh reader maps physical groups")
    {
        const std::string text = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
3
1 1 "bottom"
1 2 "sides"
2 3 "fluid"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 1 0 0
3 1 1 0
4 0 1 0
$EndNodes
$Elements
7
1 15 2 0 1 1
2 1 2 1 1 1 2
3 1 2 2 2 2 3
4 1 2 2 2 3 4
5 1 2 2 2 4 1
6 2 2 3 1 1 2 3
7 2 2 3 1 1 3 4
$EndElements
)";
        GmshTagMap tags;
        tags.by_name["bottom"] = BoundaryTag::DirichletLid;
        tags.by_id[2] = BoundaryTag::DirichletWall;
        std::istringstream in(text);
        const Mesh m = read_gmsh_mesh(in, tags);
        CHECK(m.n_cells() == 2);
        int lid = 0;
        for (const Facet& f : m.facets()) lid += f.tag == BoundaryTag::DirichletLid;
        CHECK(lid == 1);

        std::istringstream again(text);
        CHECK_THROWS_AS(read_gmsh_mesh(again, {}), MeshError);
    }

    TEST_CASE("channel geometry")
    {
        const Mesh m = generate_turek_channel(0);
        int cylinder = 0;
        for (const Facet& f : m.facets()) {
            if (f.tag != BoundaryTag::DirichletCylinder) continue;
            ++cylinder;
            for (int n : f.nodes) {
                const auto& p = m.nodes()[n];
                CHECK(std::hypot(p[0] - TurekGeometry::cx, p[1] - TurekGeometry::cy) ==
                      doctest::Approx(TurekGeometry::radius).epsilon(1e-12));
            }
        }
        CHECK(cylinder == 40);
        for (BoundaryTag t : all_boundary_tags)
            if (t != BoundaryTag::DirichletLid) CHECK(m.has_tag(t));
        double area = 0.0;
        for (std::size_t c = 0; c < m.n_cells(); ++c) area += m.cell_area(c);
        // Polygonal hole: slightly larger than the exact channel area.
        const double exact = TurekGeometry::length * TurekGeometry::height -
                             std::acos(-1.0) * TurekGeometry::radius * TurekGeometry::radius;
        CHECK(area == doctest::Approx(exact).epsilon(1e-4));
        CHECK(generate_turek_channel(1).n_cells() > 3 * m.n_cells());
    }
}
