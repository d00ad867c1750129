#include "cssav/operators.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace cssav {

int mass_quadrature_degree(int velocity_degree) { return 2 * velocity_degree; }
int stiffness_quadrature_degree(int velocity_degree) { return std::max(1, 2 * (velocity_degree - 1)); }
int convection_quadrature_degree(int velocity_degree) { return velocity_degree == 2 ? 5 : 2; }
int coupling_quadrature_degree(int velocity_degree) { return velocity_degree; }
int rhs_quadrature_degree(int velocity_degree) { return velocity_degree == 2 ? 5 : 3; }

namespace {

/// Basis data of one space at the points of one rule, mapped to a cell.
class CellBasis {
public:
    CellBasis(const FeSpace& space, const QuadratureRule& rule) : space_(&space), rule_(&rule)
    {
        for (const Bary& p : rule.points) ref_.push_back(reference_basis(space.degree(), p));
        n_ = space.dofs_per_cell();
        weight_.resize(rule.points.size());
        grad_.resize(rule.points.size());
        point_.resize(rule.points.size());
    }

    void reinit(std::size_t cell)
    {
        map_ = CellMap::of(space_->mesh(), cell);
        nodes_ = space_->cell_nodes(cell);
        for (std::size_t q = 0; q < ref_.size(); ++q) {
            weight_[q] = rule_->weights[q] * std::abs(map_.det);
            point_[q] = map_.to_physical(rule_->points[q]);
            for (int a = 0; a < n_; ++a) grad_[q][a] = map_.map_gradient(ref_[q].grad[a]);
        }
    }

    int n() const { return n_; }
    std::size_t n_points() const { return ref_.size(); }
    double weight(std::size_t q) const { return weight_[q]; }
    const Vec2& point(std::size_t q) const { return point_[q]; }
    double value(std::size_t q, int a) const { return ref_[q].value[a]; }
    const Vec2& grad(std::size_t q, int a) const { return grad_[q][a]; }
    std::span<const int> nodes() const { return nodes_; }

    /// Value and gradient of a two-component field at point q.
    FieldValue field(std::size_t q, std::span<const double> dofs) const
    {
        FieldValue f;
        for (int a = 0; a < n_; ++a) {
            for (int c = 0; c < 2; ++c) {
                const double u = dofs[space_->dof(nodes_[a], c)];
                f.value[c] += u * ref_[q].value[a];
                f.grad[c][0] += u * grad_[q][a][0];
                f.grad[c][1] += u * grad_[q][a][1];
            }
        }
        return f;
    }

private:
    const FeSpace* space_;
    const QuadratureRule* rule_;
    std::vector<BasisValues> ref_;
    int n_ = 0;
    CellMap map_{};
    std::span<const int> nodes_;
    std::vector<double> weight_;
    std::vector<Vec2> point_;
    std::vector<std::array<Vec2, max_local_dofs>> grad_;
};

int pick(int requested, int fallback) { return requested > 0 ? requested : fallback; }

void require_vector(const FeSpace& space, const char* what)
{
    if (space.components() != 2) throw std::invalid_argument(std::string(what) + " needs a two-component space");
}

void require_size(std::span<const double> v, std::size_t n, const char* what)
{
    if (v.size() != n) {
        std::ostringstream msg;
        msg << what << ": vector has " << v.size() << " entries, space has " << n << " DOFs";
        throw std::invalid_argument(msg.str());
    }
}

/// Adds a local scalar matrix to every component block (block diagonal).
void add_block_diagonal(SparseMatrix& a, const FeSpace& space, std::span<const int> nodes,
                        const std::array<std::array<double, max_local_dofs>, max_local_dofs>& local, int n)
{
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int c = 0; c < space.components(); ++c)
                a.add(space.dof(nodes[i], c), space.dof(nodes[j], c), local[i][j]);
}

/// Barycentric coordinates, in the owning cell, of the point at parameter s
/// along a boundary facet.
Bary facet_bary(const Mesh& mesh, const Facet& f, double s)
{
    const auto& cell = mesh.cells()[f.cell];
    Bary l{0.0, 0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
        if (cell[k] == f.nodes[0]) l[k] = 1.0 - s;
        if (cell[k] == f.nodes[1]) l[k] = s;
    }
    return l;
}

Bary bary_of(const CellMap& m, const Vec2& x)
{
    const double dx = x[0] - m.origin[0];
    const double dy = x[1] - m.origin[1];
    const double xi = m.inv_jac_t[0] * dx + m.inv_jac_t[2] * dy;
    const double eta = m.inv_jac_t[1] * dx + m.inv_jac_t[3] * dy;
    return {1.0 - xi - eta, xi, eta};
}

}  // namespace

SparseMatrix cell_pattern(const FeSpace& rows, const FeSpace& cols)
{
    if (&rows.mesh() != &cols.mesh()) throw std::invalid_argument("spaces must share the mesh");
    std::vector<std::vector<int>> node_cols(rows.n_nodes());
    for (std::size_t c = 0; c < rows.mesh().n_cells(); ++c) {
        const auto rn = rows.cell_nodes(c);
        const auto cn = cols.cell_nodes(c);
        for (int r : rn) node_cols[r].insert(node_cols[r].end(), cn.begin(), cn.end());
    }
    std::vector<std::vector<int>> pattern(rows.n_dofs());
    for (std::size_t r = 0; r < rows.n_nodes(); ++r) {
        auto& list = node_cols[r];
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        std::vector<int> dofs;
        dofs.reserve(list.size() * cols.components());
        for (int n : list)
            for (int k = 0; k < cols.components(); ++k) dofs.push_back(cols.dof(n, k));
        for (int k = 0; k < rows.components(); ++k) pattern[rows.dof(static_cast<int>(r), k)] = dofs;
    }
    return SparseMatrix::from_pattern(rows.n_dofs(), cols.n_dofs(), std::move(pattern));
}

SparseMatrix assemble_mass(const FeSpace& space, int quad_degree)
{
    const auto& rule = quadrature_rule(pick(quad_degree, mass_quadrature_degree(space.degree())));
    SparseMatrix a = cell_pattern(space, space);
    CellBasis cb(space, rule);
    std::array<std::array<double, max_local_dofs>, max_local_dofs> local{};
    for (std::size_t cell = 0; cell < space.mesh().n_cells(); ++cell) {
        cb.reinit(cell);
        for (auto& row : local) row.fill(0.0);
        for (std::size_t q = 0; q < cb.n_points(); ++q)
            for (int i = 0; i < cb.n(); ++i)
                for (int j = 0; j < cb.n(); ++j) local[i][j] += cb.weight(q) * (cb.value(q, i) * cb.value(q, j));
        add_block_diagonal(a, space, cb.nodes(), local, cb.n());
    }
    return a;
}

SparseMatrix assemble_stiffness(const FeSpace& space, int quad_degree)
{
    const auto& rule = quadrature_rule(pick(quad_degree, stiffness_quadrature_degree(space.degree())));
    SparseMatrix a = cell_pattern(space, space);
    CellBasis cb(space, rule);
    std::array<std::array<double, max_local_dofs>, max_local_dofs> local{};
    for (std::size_t cell = 0; cell < space.mesh().n_cells(); ++cell) {
        cb.reinit(cell);
        for (auto& row : local) row.fill(0.0);
        for (std::size_t q = 0; q < cb.n_points(); ++q)
            for (int i = 0; i < cb.n(); ++i)
                for (int j = 0; j < cb.n(); ++j) {
                    const Vec2& gi = cb.grad(q, i);
                    const Vec2& gj = cb.grad(q, j);
                    local[i][j] += cb.weight(q) * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
        add_block_diagonal(a, space, cb.nodes(), local, cb.n());
    }
    return a;
}

SparseMatrix assemble_graddiv(const FeSpace& space, int quad_degree)
{
    require_vector(space, "grad-div");
    const auto& rule = quadrature_rule(pick(quad_degree, stiffness_quadrature_degree(space.degree())));
    SparseMatrix a = cell_pattern(space, space);
    CellBasis cb(space, rule);
    for (std::size_t cell = 0; cell < space.mesh().n_cells(); ++cell) {
        cb.reinit(cell);
        const auto nodes = cb.nodes();
        for (int i = 0; i < cb.n(); ++i)
            for (int c = 0; c < 2; ++c)
                for (int j = 0; j < cb.n(); ++j)
                    for (int d = 0; d < 2; ++d) {
                        double s = 0.0;
                        for (std::size_t q = 0; q < cb.n_points(); ++q)
                            s += cb.weight(q) * (cb.grad(q, i)[c] * cb.grad(q, j)[d]);
                        a.add(space.dof(nodes[i], c), space.dof(nodes[j], d), s);
                    }
    }
    return a;
}

void add_convection(SparseMatrix& target, const FeSpace& space, std::span<const double> w, double scale,
                    int quad_degree)
{
    require_vector(space, "convection");
    require_size(w, space.n_dofs(), "convection");
    const auto& rule = quadrature_rule(pick(quad_degree, convection_quadrature_degree(space.degree())));
    CellBasis cb(space, rule);
    std::array<std::array<double, max_local_dofs>, max_local_dofs> local{};
    for (std::size_t cell = 0; cell < space.mesh().n_cells(); ++cell) {
        cb.reinit(cell);
        for (auto& row : local) row.fill(0.0);
        for (std::size_t q = 0; q < cb.n_points(); ++q) {
            const FieldValue wf = cb.field(q, w);
            const double half_div = 0.5 * (wf.grad[0][0] + wf.grad[1][1]);
            for (int j = 0; j < cb.n(); ++j) {
                const Vec2& gj = cb.grad(q, j);
                const double trial = wf.value[0] * gj[0] + wf.value[1] * gj[1] + half_div * cb.value(q, j);
                for (int i = 0; i < cb.n(); ++i) local[i][j] += cb.weight(q) * trial * cb.value(q, i);
            }
        }
        for (int i = 0; i < cb.n(); ++i)
            for (int j = 0; j < cb.n(); ++j) local[i][j] *= scale;
        add_block_diagonal(target, space, cb.nodes(), local, cb.n());
    }
}

SparseMatrix assemble_convection(const FeSpace& space, std::span<const double> w, int quad_degree)
{
    SparseMatrix a = cell_pattern(space, space);
    add_convection(a, space, w, 1.0, quad_degree);
    return a;
}

SparseMatrix assemble_pressure_coupling(const FeSpace& velocity, const FeSpace& pressure, int quad_degree)
{
    require_vector(velocity, "pressure coupling");
    if (pressure.components() != 1) throw std::invalid_argument("pressure space must be scalar");
    const auto& rule = quadrature_rule(pick(quad_degree, coupling_quadrature_degree(velocity.degree())));
    SparseMatrix b = cell_pattern(velocity, pressure);
    CellBasis cu(velocity, rule);
    CellBasis cp(pressure, rule);
    for (std::size_t cell = 0; cell < velocity.mesh().n_cells(); ++cell) {
        cu.reinit(cell);
        cp.reinit(cell);
        for (int i = 0; i < cu.n(); ++i)
            for (int c = 0; c < 2; ++c)
                for (int k = 0; k < cp.n(); ++k) {
                    double s = 0.0;
                    for (std::size_t q = 0; q < cu.n_points(); ++q)
                        s += cu.weight(q) * (cp.value(q, k) * cu.grad(q, i)[c]);
                    b.add(velocity.dof(cu.nodes()[i], c), cp.nodes()[k], s);
                }
    }
    return b;
}

std::vector<double> assemble_load(const FeSpace& space, const VectorFunction& f, double t, int quad_degree)
{
    require_vector(space, "load");
    const auto& rule = quadrature_rule(pick(quad_degree, rhs_quadrature_degree(space.degree())));
    std::vector<double> b(space.n_dofs(), 0.0);
    CellBasis cb(space, rule);
    for (std::size_t cell = 0; cell < space.mesh().n_cells(); ++cell) {
        cb.reinit(cell);
        for (std::size_t q = 0; q < cb.n_points(); ++q) {
            const Vec2 fq = f(cb.point(q), t);
            for (int i = 0; i < cb.n(); ++i)
                for (int c = 0; c < 2; ++c) b[space.dof(cb.nodes()[i], c)] += cb.weight(q) * fq[c] * cb.value(q, i);
        }
    }
    return b;
}

std::vector<double> assemble_traction(const FeSpace& space, const VectorFunction& traction, double time,
                                      BoundaryTag tag)
{
    require_vector(space, "traction");
    const Mesh& mesh = space.mesh();
    const auto& rule = line_rule(2 * space.degree() + 3);
    std::vector<double> b(space.n_dofs(), 0.0);
    for (std::size_t fi = 0; fi < mesh.facets().size(); ++fi) {
        const Facet& f = mesh.facets()[fi];
        if (f.tag != tag) continue;
        const double len = mesh.facet_length(fi);
        const CellMap m = CellMap::of(mesh, f.cell);
        const auto nodes = space.cell_nodes(f.cell);
        for (std::size_t q = 0; q < rule.points.size(); ++q) {
            const Bary l = facet_bary(mesh, f, rule.points[q]);
            const Vec2 x = m.to_physical(l);
            const Vec2 tq = traction(x, time);
            const BasisValues bv = reference_basis(space.degree(), l);
            for (int i = 0; i < bv.count; ++i)
                for (int c = 0; c < 2; ++c)
                    b[space.dof(nodes[i], c)] += rule.weights[q] * len * tq[c] * bv.value[i];
        }
    }
    return b;
}

std::vector<double> assemble_ppe_rhs(const FeSpace& pressure, const FeSpace& velocity, std::span<const double> u,
                                     const PpeRhsInput& input)
{
    require_vector(velocity, "PPE right-hand side");
    require_size(u, velocity.n_dofs(), "PPE right-hand side");
    if (pressure.components() != 1) throw std::invalid_argument("pressure space must be scalar");
    const Mesh& mesh = velocity.mesh();
    const auto& rule = quadrature_rule(pick(input.quad_degree, rhs_quadrature_degree(velocity.degree())));
    std::vector<double> r(pressure.n_dofs(), 0.0);

    CellBasis cu(velocity, rule);
    CellBasis cp(pressure, rule);
    for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
        cu.reinit(cell);
        cp.reinit(cell);
        for (std::size_t q = 0; q < cu.n_points(); ++q) {
            const FieldValue uf = cu.field(q, u);
            const double half_div = 0.5 * (uf.grad[0][0] + uf.grad[1][1]);
            Vec2 v{0.0, 0.0};
            if (input.forcing) v = (*input.forcing)(cu.point(q), input.time);
            for (int c = 0; c < 2; ++c)
                v[c] -= uf.value[0] * uf.grad[c][0] + uf.value[1] * uf.grad[c][1] + half_div * uf.value[c];
            for (int k = 0; k < cp.n(); ++k) {
                const Vec2& g = cp.grad(q, k);
                r[cp.nodes()[k]] += cu.weight(q) * (v[0] * g[0] + v[1] * g[1]);
            }
        }
    }

    const auto& lrule = line_rule(5);
    for (std::size_t fi = 0; fi < mesh.facets().size(); ++fi) {
        const Facet& f = mesh.facets()[fi];
        const Vec2 n = mesh.facet_normal(fi);
        const double len = mesh.facet_length(fi);
        const CellMap m = CellMap::of(mesh, f.cell);
        const auto pnodes = pressure.cell_nodes(f.cell);
        for (std::size_t q = 0; q < lrule.points.size(); ++q) {
            const Bary l = facet_bary(mesh, f, lrule.points[q]);
            const double wq = lrule.weights[q] * len;
            const BasisValues pb = reference_basis(pressure.degree(), l);
            const FieldValue uf = evaluate_in_cell(velocity, u, f.cell, l);
            const double omega = uf.grad[1][0] - uf.grad[0][1];
            double rate = 0.0;
            if (input.normal_rate && is_dirichlet(f.tag)) rate = (*input.normal_rate)(fi, m.to_physical(l));
            for (int k = 0; k < pb.count; ++k) {
                const Vec2 g = m.map_gradient(pb.grad[k]);
                const double tangential = n[0] * g[1] - n[1] * g[0];
                r[pnodes[k]] += wq * (input.nu * omega * tangential - rate * pb.value[k]);
            }
        }
    }
    return r;
}

void lift_dirichlet_rhs(const SparseMatrix& a, std::span<double> b, std::span<const int> dofs,
                        std::span<const double> values)
{
    if (dofs.size() != values.size()) throw std::invalid_argument("Dirichlet DOF and value counts differ");
    std::vector<double> g(a.cols(), 0.0);
    std::vector<char> fixed(a.cols(), 0);
    for (std::size_t k = 0; k < dofs.size(); ++k) {
        if (dofs[k] < 0 || static_cast<std::size_t>(dofs[k]) >= a.rows())
            throw std::out_of_range("Dirichlet DOF out of range");
        fixed[dofs[k]] = 1;
        g[dofs[k]] = values[k];
    }
    const auto off = a.offsets();
    const auto idx = a.indices();
    const auto val = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i) {
        if (fixed[i]) continue;
        for (int k = off[i]; k < off[i + 1]; ++k)
            if (fixed[idx[k]]) b[i] -= val[k] * g[idx[k]];
    }
    for (std::size_t k = 0; k < dofs.size(); ++k) b[dofs[k]] = values[k];
}

void constrain_matrix(SparseMatrix& a, std::span<const int> dofs)
{
    std::vector<char> fixed(a.cols(), 0);
    for (int d : dofs) {
        if (d < 0 || static_cast<std::size_t>(d) >= a.rows()) throw std::out_of_range("Dirichlet DOF out of range");
        fixed[d] = 1;
    }
    const auto off = a.offsets();
    const auto idx = a.indices();
    auto val = a.values();
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (int k = off[i]; k < off[i + 1]; ++k)
            if (fixed[i] || fixed[idx[k]]) val[k] = (fixed[i] && static_cast<std::size_t>(idx[k]) == i) ? 1.0 : 0.0;
    for (int d : dofs)
        if (a.find(d, d) < 0) throw std::invalid_argument("constrained DOF has no diagonal entry");
}

void apply_dirichlet(SparseMatrix& a, std::span<double> b, std::span<const int> dofs, std::span<const double> values)
{
    lift_dirichlet_rhs(a, b, dofs, values);
    constrain_matrix(a, dofs);
}

DirichletData project_neumann_pressure(const FeSpace& pressure, const FeSpace& velocity, std::span<const double> u,
                                       const VectorFunction* traction, double time, double psi, double nu)
{
    if (!(std::abs(psi) >= 1e-6)) {
        std::ostringstream msg;
        msg << "SAV value " << psi << " too close to zero for the outflow pressure condition";
        throw std::domain_error(msg.str());
    }
    require_size(u, velocity.n_dofs(), "outflow pressure");
    const Mesh& mesh = velocity.mesh();
    std::map<int, std::pair<double, int>> acc;
    for (std::size_t fi = 0; fi < mesh.facets().size(); ++fi) {
        const Facet& f = mesh.facets()[fi];
        if (f.tag != BoundaryTag::NeumannOutflow) continue;
        const Vec2 n = mesh.facet_normal(fi);
        const CellMap m = CellMap::of(mesh, f.cell);
        for (int node : pressure.facet_nodes(fi)) {
            const Vec2& x = pressure.dof_coords()[node];
            const FieldValue uf = evaluate_in_cell(velocity, u, f.cell, bary_of(m, x));
            double nn = 0.0;
            for (int c = 0; c < 2; ++c)
                for (int d = 0; d < 2; ++d) nn += uf.grad[c][d] * n[c] * n[d];
            double value = nu * nn;
            if (traction) {
                const Vec2 t = (*traction)(x, time);
                value -= t[0] * n[0] + t[1] * n[1];
            }
            auto& [sum, count] = acc[node];
            sum += value;
            ++count;
        }
    }
    DirichletData out;
    for (const auto& [node, sc] : acc) {
        out.dofs.push_back(node);
        out.values.push_back(sc.first / sc.second / psi);
    }
    return out;
}

}  // namespace cssav
