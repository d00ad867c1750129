#include "cssav/mesh.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <unordered_map>

namespace cssav {

namespace {

/// Collects nodes, merging points that coincide to ~1e-10.
class NodePool {
public:
    int add(const Vec2& p)
    {
        const auto key = std::make_pair(std::llround(p[0] * 1e10), std::llround(p[1] * 1e10));
        auto [it, inserted] = index_.try_emplace(key, static_cast<int>(nodes_.size()));
        if (inserted) nodes_.push_back(p);
        return it->second;
    }
    std::vector<Vec2>& nodes() { return nodes_; }

private:
    std::map<std::pair<long long, long long>, int> index_;
    std::vector<Vec2> nodes_;
};

double signed_area(const std::vector<Vec2>& x, const std::array<int, 3>& c)
{
    const Vec2& a = x[c[0]];
    const Vec2& b = x[c[1]];
    const Vec2& d = x[c[2]];
    return 0.5 * ((b[0] - a[0]) * (d[1] - a[1]) - (d[0] - a[0]) * (b[1] - a[1]));
}

/// Splits quad (a,b,c,d), given counterclockwise, along its shorter diagonal.
void add_quad(const std::vector<Vec2>& x, std::vector<std::array<int, 3>>& cells, int a, int b, int c, int d)
{
    auto dist2 = [&](int i, int j) {
        const double dx = x[i][0] - x[j][0];
        const double dy = x[i][1] - x[j][1];
        return dx * dx + dy * dy;
    };
    std::array<int, 3> t1{a, b, c};
    std::array<int, 3> t2{a, c, d};
    if (dist2(b, d) < dist2(a, c) * (1.0 - 1e-12)) {
        t1 = {a, b, d};
        t2 = {b, c, d};
    }
    for (auto t : {t1, t2}) {
        if (signed_area(x, t) < 0.0) std::swap(t[1], t[2]);
        cells.push_back(t);
    }
}

/// Boundary edges (edges used by exactly one cell), in deterministic order.
std::vector<std::array<int, 2>> boundary_edges(const std::vector<std::array<int, 3>>& cells)
{
    std::map<std::pair<int, int>, int> count;
    for (const auto& c : cells)
        for (int k = 0; k < 3; ++k) {
            const int a = c[k];
            const int b = c[(k + 1) % 3];
            ++count[{std::min(a, b), std::max(a, b)}];
        }
    std::vector<std::array<int, 2>> result;
    for (const auto& [edge, n] : count)
        if (n == 1) result.push_back({edge.first, edge.second});
    return result;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> v(n + 1);
    for (int i = 0; i <= n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / n;
    v[n] = b;
    return v;
}

}  // namespace

Mesh generate_unit_square(int nx, int ny, DiagonalPattern pattern)
{
    if (nx < 1 || ny < 1) throw MeshError("unit square needs at least one cell per side");
    std::vector<Vec2> nodes;
    nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1) + (pattern == DiagonalPattern::Crisscross ? nx * ny : 0)));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.push_back({static_cast<double>(i) / nx, static_cast<double>(j) / ny});
    auto id = [nx](int i, int j) { return j * (nx + 1) + i; };

    std::vector<std::array<int, 3>> cells;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int v00 = id(i, j), v10 = id(i + 1, j), v01 = id(i, j + 1), v11 = id(i + 1, j + 1);
            if (pattern == DiagonalPattern::Right) {
                cells.push_back({v00, v10, v11});
                cells.push_back({v00, v11, v01});
            } else {
                const int c = static_cast<int>(nodes.size());
                nodes.push_back({(i + 0.5) / nx, (j + 0.5) / ny});
                cells.push_back({v00, v10, c});
                cells.push_back({v10, v11, c});
                cells.push_back({v11, v01, c});
                cells.push_back({v01, v00, c});
            }
        }
    }

    std::vector<TaggedEdge> facets;
    for (int i = 0; i < nx; ++i) facets.push_back({{id(i, 0), id(i + 1, 0)}, BoundaryTag::DirichletWall});
    for (int j = 0; j < ny; ++j) facets.push_back({{id(nx, j), id(nx, j + 1)}, BoundaryTag::DirichletWall});
    for (int i = nx; i > 0; --i) facets.push_back({{id(i, ny), id(i - 1, ny)}, BoundaryTag::DirichletWall});
    for (int j = ny; j > 0; --j) facets.push_back({{id(0, j), id(0, j - 1)}, BoundaryTag::DirichletWall});
    return Mesh(std::move(nodes), std::move(cells), facets);
}

Mesh generate_turek_channel(int refinement_level)
{
    if (refinement_level < 0) throw MeshError("refinement level must be nonnegative");
    using G = TurekGeometry;
    // Box [0.1,0.3]^2 around the cylinder, meshed as an O-grid; the rest of
    // the channel is a tensor grid conforming to the box boundary.
    const int nq = 10 << refinement_level;  // segments per box side (and per circle quarter)
    const int nr = nq / 2;                  // radial layers in the O-grid
    const double box_lo = 0.1, box_hi = 0.3;
    const double d = (box_hi - box_lo) / nq;

    std::vector<double> xs = linspace(0.0, box_lo, std::max(1, static_cast<int>(std::lround(box_lo / d))));
    {
        auto mid = linspace(box_lo, box_hi, nq);
        xs.insert(xs.end(), mid.begin() + 1, mid.end());
        // Downstream: quadratic grading, last spacing three times the first.
        const double len = G::length - box_hi;
        const int n = std::max(1, static_cast<int>(std::lround(0.5 * len / d)));
        for (int i = 1; i <= n; ++i) {
            const double s = static_cast<double>(i) / n;
            xs.push_back(i == n ? G::length : box_hi + len * (0.5 * s + 0.5 * s * s));
        }
    }
    std::vector<double> ys = linspace(0.0, box_lo, std::max(1, static_cast<int>(std::lround(box_lo / d))));
    {
        auto mid = linspace(box_lo, box_hi, nq);
        ys.insert(ys.end(), mid.begin() + 1, mid.end());
        auto top = linspace(box_hi, G::height, std::max(1, static_cast<int>(std::lround((G::height - box_hi) / d))));
        ys.insert(ys.end(), top.begin() + 1, top.end());
    }
    const int nxs = static_cast<int>(xs.size()) - 1;
    const int nys = static_cast<int>(ys.size()) - 1;
    const int i_lo = static_cast<int>(std::lround(box_lo / d));
    const int i_hi = i_lo + nq;
    const int j_lo = i_lo;
    const int j_hi = j_lo + nq;

    NodePool pool;
    std::vector<std::array<int, 3>> cells;
    std::vector<std::vector<int>> grid(nxs + 1, std::vector<int>(nys + 1, -1));
    for (int i = 0; i <= nxs; ++i)
        for (int j = 0; j <= nys; ++j) {
            const bool inside_box = i > i_lo && i < i_hi && j > j_lo && j < j_hi;
            if (!inside_box) grid[i][j] = pool.add({xs[i], ys[j]});
        }
    for (int i = 0; i < nxs; ++i)
        for (int j = 0; j < nys; ++j) {
            if (i >= i_lo && i < i_hi && j >= j_lo && j < j_hi) continue;
            add_quad(pool.nodes(), cells, grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]);
        }

    // Box perimeter, counterclockwise from the lower-left corner.
    std::vector<int> ring;
    for (int i = i_lo; i < i_hi; ++i) ring.push_back(grid[i][j_lo]);
    for (int j = j_lo; j < j_hi; ++j) ring.push_back(grid[i_hi][j]);
    for (int i = i_hi; i > i_lo; --i) ring.push_back(grid[i][j_hi]);
    for (int j = j_hi; j > j_lo; --j) ring.push_back(grid[i_lo][j]);
    const int n_ring = static_cast<int>(ring.size());

    std::vector<std::vector<int>> layer(nr + 1, std::vector<int>(n_ring));
    for (int k = 0; k < n_ring; ++k) {
        const double theta = -0.75 * std::numbers::pi + 2.0 * std::numbers::pi * k / n_ring;
        const Vec2 c{G::cx + G::radius * std::cos(theta), G::cy + G::radius * std::sin(theta)};
        const Vec2 s = pool.nodes()[ring[k]];
        for (int m = 0; m <= nr; ++m) {
            if (m == nr) {
                layer[m][k] = ring[k];
                continue;
            }
            const double t = static_cast<double>(m) / nr;
            layer[m][k] = pool.add({c[0] + t * (s[0] - c[0]), c[1] + t * (s[1] - c[1])});
        }
    }
    for (int m = 0; m < nr; ++m)
        for (int k = 0; k < n_ring; ++k) {
            const int k1 = (k + 1) % n_ring;
            add_quad(pool.nodes(), cells, layer[m][k], layer[m][k1], layer[m + 1][k1], layer[m + 1][k]);
        }

    const auto& x = pool.nodes();
    std::vector<TaggedEdge> facets;
    for (const auto& e : boundary_edges(cells)) {
        const Vec2 mid{0.5 * (x[e[0]][0] + x[e[1]][0]), 0.5 * (x[e[0]][1] + x[e[1]][1])};
        BoundaryTag tag = BoundaryTag::DirichletCylinder;
        if (std::abs(mid[0]) < 1e-12)
            tag = BoundaryTag::DirichletInflow;
        else if (std::abs(mid[0] - G::length) < 1e-12)
            tag = BoundaryTag::NeumannOutflow;
        else if (std::abs(mid[1]) < 1e-12 || std::abs(mid[1] - G::height) < 1e-12)
            tag = BoundaryTag::DirichletWall;
        facets.push_back({e, tag});
    }
    return Mesh(std::move(pool.nodes()), std::move(cells), facets);
}

}  // namespace cssav
