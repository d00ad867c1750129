#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cssav {

using Vec2 = std::array<double, 2>;

/// Raised for malformed or inconsistent triangulations and mesh files.
class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Boundary labels. Each label belongs to exactly one of Gamma_D (velocity
/// Dirichlet) or Gamma_N (traction / open boundary).
enum class BoundaryTag {
    DirichletWall,
    DirichletLid,
    DirichletInflow,
    NeumannOutflow,
    DirichletCylinder,
};

inline constexpr std::array<BoundaryTag, 5> all_boundary_tags = {
    BoundaryTag::DirichletWall, BoundaryTag::DirichletLid, BoundaryTag::DirichletInflow,
    BoundaryTag::NeumannOutflow, BoundaryTag::DirichletCylinder};

constexpr bool is_dirichlet(BoundaryTag tag) { return tag != BoundaryTag::NeumannOutflow; }

/// Precedence used when a node touches facets of two Dirichlet tags. The
/// no-slip wall always wins, so lid and inflow profiles vanish at corners.
constexpr int dirichlet_priority(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::DirichletWall: return 4;
    case BoundaryTag::DirichletCylinder: return 3;
    case BoundaryTag::DirichletInflow: return 2;
    case BoundaryTag::DirichletLid: return 1;
    case BoundaryTag::NeumannOutflow: return 0;
    }
    return 0;
}

std::string_view to_string(BoundaryTag tag);
std::optional<BoundaryTag> boundary_tag_from_string(std::string_view name);

/// A boundary edge. `nodes` are ordered counterclockwise with respect to
/// `cell`, so the outward normal is (dy, -dx) / length.
struct Facet {
    std::array<int, 2> nodes;
    int cell = -1;
    BoundaryTag tag = BoundaryTag::DirichletWall;
};

/// Facet as read from a file, before its owning cell is known.
struct TaggedEdge {
    std::array<int, 2> nodes;
    BoundaryTag tag;
};

/// What construction had to fix in the input.
struct MeshReport {
    std::vector<int> reoriented_cells;
};

/// Conforming triangulation with tagged boundary facets. Immutable once built.
class Mesh {
public:
    /// Validates the input and builds derived data. Clockwise cells are
    /// repaired by swapping their last two vertices and listed in `report`.
    /// Throws MeshError on dangling or missing facets, degenerate cells or
    /// out-of-range indices.
    Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> cells,
         const std::vector<TaggedEdge>& boundary, MeshReport* report = nullptr);

    const std::vector<Vec2>& nodes() const { return nodes_; }
    const std::vector<std::array<int, 3>>& cells() const { return cells_; }
    const std::vector<Facet>& facets() const { return facets_; }

    std::size_t n_nodes() const { return nodes_.size(); }
    std::size_t n_cells() const { return cells_.size(); }

    /// Signed area; positive for every cell after construction.
    double cell_area(std::size_t cell) const { return areas_[cell]; }
    /// Diameter (longest edge) of a cell.
    double element_size(std::size_t cell) const { return element_sizes_[cell]; }
    const std::vector<double>& element_sizes() const { return element_sizes_; }
    /// Largest element diameter.
    double h() const { return h_; }

    /// Outward unit normal and length of a boundary facet.
    Vec2 facet_normal(std::size_t facet) const;
    double facet_length(std::size_t facet) const;

    /// Sorted unique edges (node pairs with first < second).
    const std::vector<std::array<int, 2>>& edges() const { return edges_; }
    /// Per cell, indices into edges() of local edges (0,1), (1,2), (2,0).
    const std::vector<std::array<int, 3>>& cell_edges() const { return cell_edges_; }

    bool has_tag(BoundaryTag tag) const;

    /// Returns a copy whose facet tags are replaced by `retag(facet, midpoint)`.
    template <class F>
    Mesh retagged(F&& retag) const
    {
        std::vector<TaggedEdge> edges;
        edges.reserve(facets_.size());
        for (const Facet& f : facets_) {
            const Vec2& a = nodes_[f.nodes[0]];
            const Vec2& b = nodes_[f.nodes[1]];
            const Vec2 mid{0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])};
            edges.push_back({f.nodes, retag(f, mid)});
        }
        return Mesh(nodes_, cells_, edges);
    }

private:
    std::vector<Vec2> nodes_;
    std::vector<std::array<int, 3>> cells_;
    std::vector<Facet> facets_;
    std::vector<double> areas_;
    std::vector<double> element_sizes_;
    std::vector<std::array<int, 2>> edges_;
    std::vector<std::array<int, 3>> cell_edges_;
    double h_ = 0.0;
};

/// max over cells of h / h_e; equals 1 for meshes of congruent cells.
double quasi_uniformity(const Mesh& mesh);

enum class DiagonalPattern { Right, Crisscross };

/// Structured triangulation of (0,1)^2 with every side tagged DirichletWall.
Mesh generate_unit_square(int nx, int ny, DiagonalPattern pattern = DiagonalPattern::Right);

/// Channel [0,2.2]x[0,0.41] with a circular hole of radius 0.05 centred at
/// (0.2,0.2). Boundary vertices of the hole lie exactly on the circle.
Mesh generate_turek_channel(int refinement_level);

/// Cylinder geometry shared by the generator and the force evaluation.
struct TurekGeometry {
    static constexpr double length = 2.2;
    static constexpr double height = 0.41;
    static constexpr double cx = 0.2;
    static constexpr double cy = 0.2;
    static constexpr double radius = 0.05;
};

enum class MeshFormat { Native, GmshMsh2Ascii };

/// Physical-group id (or name) -> tag table used when reading Gmsh files.
struct GmshTagMap {
    std::map<int, BoundaryTag> by_id;
    std::map<std::string, BoundaryTag> by_name;
};

Mesh read_mesh(const std::string& path, MeshFormat format, const GmshTagMap& tags = {},
               MeshReport* report = nullptr);
Mesh read_native_mesh(std::istream& in, MeshReport* report = nullptr);
Mesh read_gmsh_mesh(std::istream& in, const GmshTagMap& tags, MeshReport* report = nullptr);

void write_native_mesh(const Mesh& mesh, std::ostream& out);
void write_native_mesh(const Mesh& mesh, const std::string& path);

}  // namespace cssav
