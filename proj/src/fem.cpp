#include "cssav/fem.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace cssav {

namespace {

QuadratureRule make_rule(int degree, std::initializer_list<std::pair<Bary, double>> orbits_area1)
{
    QuadratureRule rule;
    rule.degree = degree;
    for (const auto& [p, w] : orbits_area1) {
        // Expand the symmetry orbit of p.
        std::set<Bary> orbit;
        std::array<int, 3> perm{0, 1, 2};
        do {
            orbit.insert({p[perm[0]], p[perm[1]], p[perm[2]]});
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (const Bary& q : orbit) {
            rule.points.push_back(q);
            rule.weights.push_back(0.5 * w);
        }
    }
    return rule;
}

std::vector<QuadratureRule> build_rules()
{
    const double s15 = std::sqrt(15.0);
    const double a5 = (6.0 - s15) / 21.0;
    const double b5 = (6.0 + s15) / 21.0;
    std::vector<QuadratureRule> rules;
    rules.push_back(make_rule(1, {{{1.0 / 3, 1.0 / 3, 1.0 / 3}, 1.0}}));
    rules.push_back(make_rule(2, {{{2.0 / 3, 1.0 / 6, 1.0 / 6}, 1.0 / 3}}));
    // Dunavant degree 4, six points; also serves degree 3.
    const QuadratureRule d4 = make_rule(4, {
        {{0.108103018168070227, 0.445948490915964886, 0.445948490915964886}, 0.223381589678011065},
        {{0.816847572980458514, 0.091576213509770743, 0.091576213509770743}, 0.109951743655321935},
    });
    QuadratureRule d3 = d4;
    d3.degree = 3;
    rules.push_back(d3);
    rules.push_back(d4);
    // Radon's seven-point rule.
    rules.push_back(make_rule(5, {
        {{1.0 / 3, 1.0 / 3, 1.0 / 3}, 9.0 / 40.0},
        {{1.0 - 2.0 * a5, a5, a5}, (155.0 - s15) / 1200.0},
        {{1.0 - 2.0 * b5, b5, b5}, (155.0 + s15) / 1200.0},
    }));
    // Dunavant degree 6, twelve points.
    rules.push_back(make_rule(6, {
        {{0.501426509658179158, 0.249286745170910421, 0.249286745170910421}, 0.116786275726379366},
        {{0.873821971016995543, 0.063089014491502228, 0.063089014491502228}, 0.050844906370206817},
        {{0.053145049844816947, 0.310352451033784405, 0.636502499121398648}, 0.082851075618373575},
    }));
    return rules;
}

std::vector<LineRule> build_line_rules()
{
    std::vector<LineRule> rules;
    auto add = [&rules](std::initializer_list<double> xs, std::initializer_list<double> ws) {
        LineRule r;
        for (double x : xs) r.points.push_back(0.5 * (x + 1.0));
        for (double w : ws) r.weights.push_back(0.5 * w);
        rules.push_back(r);
    };
    add({0.0}, {2.0});
    const double g2 = 1.0 / std::sqrt(3.0);
    add({-g2, g2}, {1.0, 1.0});
    const double g3 = std::sqrt(0.6);
    add({-g3, 0.0, g3}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0});
    const double r30 = std::sqrt(30.0);
    const double x1 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double x2 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
    const double w1 = (18.0 + r30) / 36.0;
    const double w2 = (18.0 - r30) / 36.0;
    add({-x2, -x1, x1, x2}, {w2, w1, w1, w2});
    return rules;
}

}  // namespace

const QuadratureRule& quadrature_rule(int exactness_degree)
{
    static const std::vector<QuadratureRule> rules = build_rules();
    if (exactness_degree < 1 || exactness_degree > 6)
        throw std::invalid_argument("unsupported quadrature degree " + std::to_string(exactness_degree));
    return rules[exactness_degree - 1];
}

const LineRule& line_rule(int exactness_degree)
{
    static const std::vector<LineRule> rules = build_line_rules();
    if (exactness_degree < 0 || exactness_degree > 7)
        throw std::invalid_argument("unsupported line quadrature degree " + std::to_string(exactness_degree));
    return rules[exactness_degree / 2];
}

BasisValues reference_basis(int degree, const Bary& l)
{
    static constexpr std::array<Vec2, 3> dl{{{-1.0, -1.0}, {1.0, 0.0}, {0.0, 1.0}}};
    BasisValues b;
    if (degree == 1) {
        b.count = 3;
        for (int i = 0; i < 3; ++i) {
            b.value[i] = l[i];
            b.grad[i] = dl[i];
        }
        return b;
    }
    if (degree != 2) throw std::invalid_argument("unsupported element degree " + std::to_string(degree));
    b.count = 6;
    for (int i = 0; i < 3; ++i) {
        b.value[i] = l[i] * (2.0 * l[i] - 1.0);
        const double s = 4.0 * l[i] - 1.0;
        b.grad[i] = {s * dl[i][0], s * dl[i][1]};
    }
    static constexpr std::array<std::array<int, 2>, 3> edge{{{0, 1}, {1, 2}, {2, 0}}};
    for (int e = 0; e < 3; ++e) {
        const int i = edge[e][0];
        const int j = edge[e][1];
        b.value[3 + e] = 4.0 * l[i] * l[j];
        b.grad[3 + e] = {4.0 * (l[j] * dl[i][0] + l[i] * dl[j][0]), 4.0 * (l[j] * dl[i][1] + l[i] * dl[j][1])};
    }
    return b;
}

CellMap CellMap::of(const Mesh& mesh, std::size_t cell)
{
    const auto& c = mesh.cells()[cell];
    const Vec2& p0 = mesh.nodes()[c[0]];
    const Vec2& p1 = mesh.nodes()[c[1]];
    const Vec2& p2 = mesh.nodes()[c[2]];
    CellMap m;
    m.origin = p0;
    const double a = p1[0] - p0[0], b = p2[0] - p0[0];
    const double cc = p1[1] - p0[1], d = p2[1] - p0[1];
    m.jac = {a, b, cc, d};
    m.det = a * d - b * cc;
    m.inv_jac_t = {d / m.det, -cc / m.det, -b / m.det, a / m.det};
    return m;
}

Vec2 CellMap::to_physical(const Bary& l) const
{
    return {origin[0] + jac[0] * l[1] + jac[1] * l[2], origin[1] + jac[2] * l[1] + jac[3] * l[2]};
}

FeSpace::FeSpace(const Mesh& mesh, int degree, int components)
    : mesh_(&mesh), degree_(degree), components_(components)
{
    if (degree != 1 && degree != 2) throw std::invalid_argument("element degree must be 1 or 2");
    if (components != 1 && components != 2) throw std::invalid_argument("components must be 1 or 2");

    node_coords_ = mesh.nodes();
    const int nv = static_cast<int>(mesh.n_nodes());
    if (degree == 2) {
        for (const auto& e : mesh.edges()) {
            const Vec2& a = mesh.nodes()[e[0]];
            const Vec2& b = mesh.nodes()[e[1]];
            node_coords_.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])});
        }
    }
    const int per_cell = dofs_per_cell();
    cell_nodes_.resize(mesh.n_cells() * per_cell);
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        int* out = cell_nodes_.data() + c * per_cell;
        for (int k = 0; k < 3; ++k) out[k] = mesh.cells()[c][k];
        if (degree == 2)
            for (int k = 0; k < 3; ++k) out[3 + k] = nv + mesh.cell_edges()[c][k];
    }

    std::map<int, BoundaryTag> best;  // node -> resolved tag
    for (std::size_t f = 0; f < mesh.facets().size(); ++f) {
        const BoundaryTag tag = mesh.facets()[f].tag;
        for (int n : facet_nodes(f)) {
            tag_nodes_[tag].push_back(n);
            auto [it, inserted] = best.try_emplace(n, tag);
            if (!inserted && dirichlet_priority(tag) > dirichlet_priority(it->second)) it->second = tag;
        }
    }
    for (auto& [tag, nodes] : tag_nodes_) {
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    }
    for (const auto& [node, tag] : best) resolved_nodes_[tag].push_back(node);
}

std::vector<int> FeSpace::facet_nodes(std::size_t facet) const
{
    const Facet& f = mesh_->facets()[facet];
    std::vector<int> nodes{f.nodes[0], f.nodes[1]};
    if (degree_ == 2) {
        const auto cn = cell_nodes(f.cell);
        const auto& cell = mesh_->cells()[f.cell];
        for (int k = 0; k < 3; ++k)
            if (cell[k] == f.nodes[0] && cell[(k + 1) % 3] == f.nodes[1]) nodes.push_back(cn[3 + k]);
    }
    return nodes;
}

const std::vector<int>& FeSpace::tag_nodes(BoundaryTag tag) const
{
    static const std::vector<int> empty;
    auto it = tag_nodes_.find(tag);
    return it == tag_nodes_.end() ? empty : it->second;
}

const std::vector<int>& FeSpace::boundary_nodes(BoundaryTag tag) const
{
    static const std::vector<int> empty;
    auto it = resolved_nodes_.find(tag);
    return it == resolved_nodes_.end() ? empty : it->second;
}

std::vector<int> FeSpace::boundary_dofs(BoundaryTag tag) const
{
    std::vector<int> dofs;
    for (int n : boundary_nodes(tag))
        for (int c = 0; c < components_; ++c) dofs.push_back(dof(n, c));
    return dofs;
}

std::vector<int> FeSpace::dirichlet_nodes() const
{
    std::vector<int> nodes;
    for (const auto& [tag, list] : resolved_nodes_)
        if (is_dirichlet(tag)) nodes.insert(nodes.end(), list.begin(), list.end());
    std::sort(nodes.begin(), nodes.end());
    return nodes;
}

std::vector<double> interpolate(const FeSpace& space, const ScalarFunction& f, double t)
{
    if (space.components() != 1) throw std::invalid_argument("scalar interpolation needs a scalar space");
    std::vector<double> v(space.n_dofs());
    for (std::size_t n = 0; n < space.n_nodes(); ++n) v[n] = f(space.dof_coords()[n], t);
    return v;
}

std::vector<double> interpolate(const FeSpace& space, const VectorFunction& f, double t)
{
    if (space.components() != 2) throw std::invalid_argument("vector interpolation needs a vector space");
    std::vector<double> v(space.n_dofs());
    for (std::size_t n = 0; n < space.n_nodes(); ++n) {
        const Vec2 value = f(space.dof_coords()[n], t);
        v[2 * n] = value[0];
        v[2 * n + 1] = value[1];
    }
    return v;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh)
{
    lo_ = hi_ = mesh.nodes().front();
    for (const auto& p : mesh.nodes()) {
        lo_ = {std::min(lo_[0], p[0]), std::min(lo_[1], p[1])};
        hi_ = {std::max(hi_[0], p[0]), std::max(hi_[1], p[1])};
    }
    const int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.n_cells()) / 2.0)));
    nx_ = ny_ = n;
    bins_.assign(static_cast<std::size_t>(nx_ * ny_), {});
    auto bin_x = [this](double x) {
        return std::clamp(static_cast<int>((x - lo_[0]) / (hi_[0] - lo_[0]) * nx_), 0, nx_ - 1);
    };
    auto bin_y = [this](double y) {
        return std::clamp(static_cast<int>((y - lo_[1]) / (hi_[1] - lo_[1]) * ny_), 0, ny_ - 1);
    };
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
        Vec2 a = mesh.nodes()[mesh.cells()[c][0]], b = a;
        for (int v : mesh.cells()[c]) {
            const Vec2& p = mesh.nodes()[v];
            a = {std::min(a[0], p[0]), std::min(a[1], p[1])};
            b = {std::max(b[0], p[0]), std::max(b[1], p[1])};
        }
        for (int j = bin_y(a[1]); j <= bin_y(b[1]); ++j)
            for (int i = bin_x(a[0]); i <= bin_x(b[0]); ++i) bins_[j * nx_ + i].push_back(static_cast<int>(c));
    }
}

int PointLocator::locate(const Vec2& p, Bary* bary) const
{
    constexpr double tol = 1e-12;
    const double ex = 1e-12 * (hi_[0] - lo_[0]);
    const double ey = 1e-12 * (hi_[1] - lo_[1]);
    if (p[0] < lo_[0] - ex || p[0] > hi_[0] + ex || p[1] < lo_[1] - ey || p[1] > hi_[1] + ey) return -1;
    const int i = std::clamp(static_cast<int>((p[0] - lo_[0]) / (hi_[0] - lo_[0]) * nx_), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>((p[1] - lo_[1]) / (hi_[1] - lo_[1]) * ny_), 0, ny_ - 1);
    for (int c : bins_[j * nx_ + i]) {
        const CellMap m = CellMap::of(*mesh_, c);
        const double dx = p[0] - m.origin[0];
        const double dy = p[1] - m.origin[1];
        // xi = J^{-1} (p - x0); J^{-1} is the transpose of inv_jac_t.
        const double xi = m.inv_jac_t[0] * dx + m.inv_jac_t[2] * dy;
        const double eta = m.inv_jac_t[1] * dx + m.inv_jac_t[3] * dy;
        const Bary l{1.0 - xi - eta, xi, eta};
        if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) {
            if (bary) *bary = l;
            return c;
        }
    }
    return -1;
}

FieldValue evaluate_in_cell(const FeSpace& space, std::span<const double> dofs, std::size_t cell, const Bary& bary)
{
    const BasisValues b = reference_basis(space.degree(), bary);
    const CellMap m = CellMap::of(space.mesh(), cell);
    const auto nodes = space.cell_nodes(cell);
    FieldValue out;
    for (int k = 0; k < b.count; ++k) {
        const Vec2 g = m.map_gradient(b.grad[k]);
        for (int c = 0; c < space.components(); ++c) {
            const double u = dofs[space.dof(nodes[k], c)];
            out.value[c] += u * b.value[k];
            out.grad[c][0] += u * g[0];
            out.grad[c][1] += u * g[1];
        }
    }
    return out;
}

FieldValue evaluate_field(const FeSpace& space, std::span<const double> dofs, const Vec2& point,
                          const PointLocator* locator)
{
    if (dofs.size() != space.n_dofs()) throw std::invalid_argument("DOF vector does not match the space");
    Bary bary{};
    int cell = -1;
    if (locator) {
        cell = locator->locate(point, &bary);
    } else {
        const PointLocator local(space.mesh());
        cell = local.locate(point, &bary);
    }
    if (cell < 0)
        throw std::out_of_range("point (" + std::to_string(point[0]) + ", " + std::to_string(point[1]) +
                                ") lies outside the mesh");
    return evaluate_in_cell(space, dofs, static_cast<std::size_t>(cell), bary);
}

}  // namespace cssav
