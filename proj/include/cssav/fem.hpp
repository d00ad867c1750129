#pragma once

#include <array>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "cssav/mesh.hpp"

namespace cssav {

using Bary = std::array<double, 3>;
using ScalarFunction = std::function<double(const Vec2& x, double t)>;
using VectorFunction = std::function<Vec2(const Vec2& x, double t)>;

/// Triangle rule on the reference cell {(xi,eta): xi,eta >= 0, xi+eta <= 1}.
/// Points are barycentric (1-xi-eta, xi, eta); weights sum to 1/2.
struct QuadratureRule {
    std::vector<Bary> points;
    std::vector<double> weights;
    int degree = 0;
};

/// Rule exact for polynomials of total degree <= `exactness_degree` (1..6).
/// All weights are positive. Throws std::invalid_argument otherwise.
const QuadratureRule& quadrature_rule(int exactness_degree);

/// Gauss-Legendre rule on [0,1] (weights sum to 1) exact to `exactness_degree`.
struct LineRule {
    std::vector<double> points;
    std::vector<double> weights;
};
const LineRule& line_rule(int exactness_degree);

inline constexpr int max_local_dofs = 6;

/// Lagrange basis values and reference-coordinate gradients at one point.
/// Degree 2 local ordering: vertices 0,1,2, then midpoints of edges
/// (0,1), (1,2), (2,0).
struct BasisValues {
    int count = 0;
    std::array<double, max_local_dofs> value{};
    std::array<Vec2, max_local_dofs> grad{};
};

BasisValues reference_basis(int degree, const Bary& point);

constexpr int local_dof_count(int degree) { return degree == 1 ? 3 : 6; }

/// Affine map of one cell: x = x0 + J xi.
struct CellMap {
    Vec2 origin;
    std::array<double, 4> jac;      // row-major J
    std::array<double, 4> inv_jac_t;  // row-major J^{-T}
    double det = 0.0;

    static CellMap of(const Mesh& mesh, std::size_t cell);
    Vec2 to_physical(const Bary& b) const;
    Vec2 map_gradient(const Vec2& ref_grad) const
    {
        return {inv_jac_t[0] * ref_grad[0] + inv_jac_t[1] * ref_grad[1],
                inv_jac_t[2] * ref_grad[0] + inv_jac_t[3] * ref_grad[1]};
    }
};

/// Continuous Lagrange space of degree 1 or 2 with 1 or 2 components.
///
/// Scalar nodes: mesh vertices first (same numbering as the mesh), then edge
/// midpoints in Mesh::edges() order. Vector DOFs are interleaved: the DOF of
/// (node, component) is node * components + component.
///
/// The space keeps a reference to `mesh`, which must outlive it.
class FeSpace {
public:
    FeSpace(const Mesh& mesh, int degree, int components);

    const Mesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    int components() const { return components_; }
    int dofs_per_cell() const { return local_dof_count(degree_); }

    std::size_t n_nodes() const { return node_coords_.size(); }
    std::size_t n_dofs() const { return node_coords_.size() * components_; }

    /// Coordinates of each scalar node.
    const std::vector<Vec2>& dof_coords() const { return node_coords_; }
    /// Scalar node indices of a cell in local order.
    std::span<const int> cell_nodes(std::size_t cell) const
    {
        return {cell_nodes_.data() + cell * dofs_per_cell(), static_cast<std::size_t>(dofs_per_cell())};
    }
    int dof(int node, int component) const { return node * components_ + component; }

    /// Scalar nodes on a boundary facet: the two end vertices, then the
    /// midpoint for degree 2.
    std::vector<int> facet_nodes(std::size_t facet) const;

    /// Nodes lying on facets with `tag`, before corner resolution.
    const std::vector<int>& tag_nodes(BoundaryTag tag) const;
    /// Nodes assigned to `tag` after corner resolution: a node on several
    /// Dirichlet tags goes to the one with the highest dirichlet_priority();
    /// a node on both a Dirichlet and the Neumann tag counts as Dirichlet.
    /// The resulting sets are pairwise disjoint.
    const std::vector<int>& boundary_nodes(BoundaryTag tag) const;
    /// DOF indices (all components) of boundary_nodes(tag).
    std::vector<int> boundary_dofs(BoundaryTag tag) const;
    /// Union of boundary_nodes over Dirichlet tags, sorted.
    std::vector<int> dirichlet_nodes() const;

private:
    const Mesh* mesh_;
    int degree_;
    int components_;
    std::vector<Vec2> node_coords_;
    std::vector<int> cell_nodes_;
    std::map<BoundaryTag, std::vector<int>> tag_nodes_;
    std::map<BoundaryTag, std::vector<int>> resolved_nodes_;
};

/// Nodal interpolant of a scalar (components == 1) field.
std::vector<double> interpolate(const FeSpace& space, const ScalarFunction& f, double t = 0.0);
/// Nodal interpolant of a vector (components == 2) field.
std::vector<double> interpolate(const FeSpace& space, const VectorFunction& f, double t = 0.0);

/// Uniform-bin point locator. Immutable after construction.
class PointLocator {
public:
    explicit PointLocator(const Mesh& mesh);
    /// Cell containing `p` (with tolerance) and its barycentric coordinates,
    /// or -1 if the point lies outside the mesh.
    int locate(const Vec2& p, Bary* bary = nullptr) const;

private:
    const Mesh* mesh_;
    Vec2 lo_{}, hi_{};
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> bins_;
};

struct FieldValue {
    std::array<double, 2> value{};
    /// grad[c] = gradient of component c.
    std::array<Vec2, 2> grad{};
};

/// Value (and gradient) of the finite element function `dofs` at `point`.
/// Throws std::out_of_range if the point lies outside the mesh.
FieldValue evaluate_field(const FeSpace& space, std::span<const double> dofs, const Vec2& point,
                          const PointLocator* locator = nullptr);

/// Same, for a known cell and barycentric position.
FieldValue evaluate_in_cell(const FeSpace& space, std::span<const double> dofs, std::size_t cell,
                            const Bary& bary);

}  // namespace cssav
