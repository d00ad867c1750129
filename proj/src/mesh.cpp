#include "cssav/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <unordered_map>

namespace cssav {

namespace {

std::uint64_t edge_key(int a, int b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

double distance(const Vec2& a, const Vec2& b) { return std::hypot(b[0] - a[0], b[1] - a[1]); }

}  // namespace

std::string_view to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::DirichletWall: return "DirichletWall";
    case BoundaryTag::DirichletLid: return "DirichletLid";
    case BoundaryTag::DirichletInflow: return "DirichletInflow";
    case BoundaryTag::NeumannOutflow: return "NeumannOutflow";
    case BoundaryTag::DirichletCylinder: return "DirichletCylinder";
    }
    return "unknown";
}

std::optional<BoundaryTag> boundary_tag_from_string(std::string_view name)
{
    for (BoundaryTag tag : all_boundary_tags)
        if (to_string(tag) == name) return tag;
    return std::nullopt;
}

Mesh::Mesh(std::vector<Vec2> nodes, std::vector<std::array<int, 3>> cells,
           const std::vector<TaggedEdge>& boundary, MeshReport* report)
    : nodes_(std::move(nodes)), cells_(std::move(cells))
{
    const int n_nodes = static_cast<int>(nodes_.size());
    if (cells_.empty()) throw MeshError("mesh has no cells");

    areas_.resize(cells_.size());
    element_sizes_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        auto& cell = cells_[c];
        for (int v : cell)
            if (v < 0 || v >= n_nodes) {
                std::ostringstream msg;
                msg << "cell " << c << " references node " << v << " outside [0," << n_nodes << ")";
                throw MeshError(msg.str());
            }
        if (cell[0] == cell[1] || cell[1] == cell[2] || cell[0] == cell[2])
            throw MeshError("cell " + std::to_string(c) + " repeats a vertex");
        double area = signed_area(nodes_[cell[0]], nodes_[cell[1]], nodes_[cell[2]]);
        if (area < 0.0) {
            std::swap(cell[1], cell[2]);
            area = -area;
            if (report) report->reoriented_cells.push_back(static_cast<int>(c));
        }
        if (!(area > 0.0)) throw MeshError("cell " + std::to_string(c) + " has zero area");
        areas_[c] = area;
        const Vec2& a = nodes_[cell[0]];
        const Vec2& b = nodes_[cell[1]];
        const Vec2& d = nodes_[cell[2]];
        element_sizes_[c] = std::max({distance(a, b), distance(b, d), distance(d, a)});
    }
    h_ = *std::max_element(element_sizes_.begin(), element_sizes_.end());

    // Edge -> (first cell, local edge, share count).
    struct EdgeUse {
        int edge = -1;
        int cell = -1;
        int local = -1;
        int count = 0;
    };
    std::unordered_map<std::uint64_t, EdgeUse> uses;
    uses.reserve(cells_.size() * 2);
    cell_edges_.resize(cells_.size());
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        for (int k = 0; k < 3; ++k) {
            const int a = cells_[c][k];
            const int b = cells_[c][(k + 1) % 3];
            auto [it, inserted] = uses.try_emplace(edge_key(a, b));
            EdgeUse& use = it->second;
            if (inserted) {
                use.edge = static_cast<int>(edges_.size());
                use.cell = static_cast<int>(c);
                use.local = k;
                edges_.push_back({std::min(a, b), std::max(a, b)});
            }
            if (++use.count > 2) {
                std::ostringstream msg;
                msg << "edge (" << a << "," << b << ") is shared by more than two cells";
                throw MeshError(msg.str());
            }
            cell_edges_[c][k] = use.edge;
        }
    }

    std::vector<char> seen(edges_.size(), 0);
    facets_.reserve(boundary.size());
    for (std::size_t f = 0; f < boundary.size(); ++f) {
        const auto& be = boundary[f];
        auto it = uses.find(edge_key(be.nodes[0], be.nodes[1]));
        if (it == uses.end() || it->second.count != 1) {
            std::ostringstream msg;
            msg << "facet " << f << " (" << be.nodes[0] << "," << be.nodes[1] << ") is dangling: "
                << (it == uses.end() ? "no cell contains it" : "it is an interior edge");
            throw MeshError(msg.str());
        }
        if (seen[it->second.edge]) throw MeshError("facet " + std::to_string(f) + " is tagged twice");
        seen[it->second.edge] = 1;
        const int c = it->second.cell;
        const int k = it->second.local;
        facets_.push_back({{cells_[c][k], cells_[c][(k + 1) % 3]}, c, be.tag});
    }
    for (const auto& [key, use] : uses) {
        if (use.count == 1 && !seen[use.edge]) {
            std::ostringstream msg;
            msg << "boundary edge (" << edges_[use.edge][0] << "," << edges_[use.edge][1]
                << ") carries no tag";
            throw MeshError(msg.str());
        }
    }
}

Vec2 Mesh::facet_normal(std::size_t facet) const
{
    const Vec2& a = nodes_[facets_[facet].nodes[0]];
    const Vec2& b = nodes_[facets_[facet].nodes[1]];
    const double len = distance(a, b);
    return {(b[1] - a[1]) / len, -(b[0] - a[0]) / len};
}

double Mesh::facet_length(std::size_t facet) const
{
    return distance(nodes_[facets_[facet].nodes[0]], nodes_[facets_[facet].nodes[1]]);
}

bool Mesh::has_tag(BoundaryTag tag) const
{
    return std::any_of(facets_.begin(), facets_.end(), [tag](const Facet& f) { return f.tag == tag; });
}

double quasi_uniformity(const Mesh& mesh)
{
    const auto& sizes = mesh.element_sizes();
    return mesh.h() / *std::min_element(sizes.begin(), sizes.end());
}

}  // namespace cssav
