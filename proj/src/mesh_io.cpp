#include "cssav/mesh.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>
#include <unordered_map>

namespace cssav {

namespace {

/// Whitespace tokenizer that tracks line numbers for error messages.
class TokenReader {
public:
    explicit TokenReader(std::istream& in) : in_(in) {}

    bool next(std::string& token)
    {
        while (!(line_stream_ >> token)) {
            std::string line;
            if (!std::getline(in_, line)) return false;
            ++line_;
            line_stream_.clear();
            line_stream_.str(line);
        }
        return true;
    }

    std::string expect_token(const char* what)
    {
        std::string token;
        if (!next(token)) fail(std::string("unexpected end of file while reading ") + what);
        return token;
    }

    long long expect_int(const char* what)
    {
        const std::string token = expect_token(what);
        long long value = 0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            fail(std::string("expected integer for ") + what + ", got '" + token + "'");
        return value;
    }

    double expect_double(const char* what)
    {
        const std::string token = expect_token(what);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || ptr != token.data() + token.size())
            fail(std::string("expected number for ") + what + ", got '" + token + "'");
        return value;
    }

    void expect_keyword(const std::string& keyword)
    {
        const std::string token = expect_token(keyword.c_str());
        if (token != keyword) fail("expected '" + keyword + "', got '" + token + "'");
    }

    /// Reads the remainder of the current line as one string.
    std::string rest_of_line()
    {
        std::string rest;
        std::getline(line_stream_, rest);
        return rest;
    }

    [[noreturn]] void fail(const std::string& message) const
    {
        throw MeshError("line " + std::to_string(line_) + ": " + message);
    }

    int line() const { return line_; }

private:
    std::istream& in_;
    std::istringstream line_stream_;
    int line_ = 0;
};

}  // namespace

Mesh read_native_mesh(std::istream& in, MeshReport* report)
{
    TokenReader reader(in);
    reader.expect_keyword("NODES");
    const long long n_nodes = reader.expect_int("node count");
    if (n_nodes < 3) reader.fail("node count must be at least 3");
    std::vector<Vec2> nodes(static_cast<std::size_t>(n_nodes));
    for (auto& p : nodes) {
        p[0] = reader.expect_double("x coordinate");
        p[1] = reader.expect_double("y coordinate");
    }

    reader.expect_keyword("CELLS");
    const long long n_cells = reader.expect_int("cell count");
    if (n_cells < 1) reader.fail("cell count must be positive");
    std::vector<std::array<int, 3>> cells(static_cast<std::size_t>(n_cells));
    for (auto& c : cells)
        for (int& v : c) v = static_cast<int>(reader.expect_int("cell vertex"));

    reader.expect_keyword("FACETS");
    const long long n_facets = reader.expect_int("facet count");
    if (n_facets < 0) reader.fail("facet count must be nonnegative");
    std::vector<TaggedEdge> facets(static_cast<std::size_t>(n_facets));
    for (auto& f : facets) {
        f.nodes[0] = static_cast<int>(reader.expect_int("facet node"));
        f.nodes[1] = static_cast<int>(reader.expect_int("facet node"));
        const std::string name = reader.expect_token("facet tag");
        auto tag = boundary_tag_from_string(name);
        if (!tag) reader.fail("unknown boundary tag '" + name + "'");
        f.tag = *tag;
    }
    return Mesh(std::move(nodes), std::move(cells), facets, report);
}

Mesh read_gmsh_mesh(std::istream& in, const GmshTagMap& tags, MeshReport* report)
{
    TokenReader reader(in);
    std::map<int, std::string> physical_names;
    std::unordered_map<long long, int> node_index;
    std::vector<Vec2> nodes;
    std::vector<std::array<int, 3>> cells;
    std::vector<TaggedEdge> facets;
    bool have_nodes = false;
    bool have_elements = false;

    std::string token;
    while (reader.next(token)) {
        if (token == "$MeshFormat") {
            const std::string version = reader.expect_token("format version");
            if (version.rfind("2.", 0) != 0) reader.fail("only MSH 2.x is supported, got " + version);
            if (reader.expect_int("file type") != 0) reader.fail("binary MSH files are not supported");
            reader.expect_int("data size");
            reader.expect_keyword("$EndMeshFormat");
        } else if (token == "$PhysicalNames") {
            const long long count = reader.expect_int("physical name count");
            for (long long i = 0; i < count; ++i) {
                reader.expect_int("physical dimension");
                const int id = static_cast<int>(reader.expect_int("physical id"));
                std::string name = reader.expect_token("physical name");
                if (name.size() >= 2 && name.front() == '"' && name.back() == '"')
                    name = name.substr(1, name.size() - 2);
                physical_names[id] = name;
            }
            reader.expect_keyword("$EndPhysicalNames");
        } else if (token == "$Nodes") {
            const long long count = reader.expect_int("node count");
            nodes.reserve(static_cast<std::size_t>(count));
            for (long long i = 0; i < count; ++i) {
                const long long id = reader.expect_int("node id");
                const double x = reader.expect_double("x");
                const double y = reader.expect_double("y");
                reader.expect_double("z");
                node_index[id] = static_cast<int>(nodes.size());
                nodes.push_back({x, y});
            }
            reader.expect_keyword("$EndNodes");
            have_nodes = true;
        } else if (token == "$Elements") {
            if (!have_nodes) reader.fail("$Elements before $Nodes");
            const long long count = reader.expect_int("element count");
            auto node_of = [&](long long id) {
                auto it = node_index.find(id);
                if (it == node_index.end()) reader.fail("element references unknown node " + std::to_string(id));
                return it->second;
            };
            for (long long i = 0; i < count; ++i) {
                const long long id = reader.expect_int("element id");
                const long long type = reader.expect_int("element type");
                const long long ntags = reader.expect_int("tag count");
                int physical = 0;
                for (long long t = 0; t < ntags; ++t) {
                    const long long value = reader.expect_int("element tag");
                    if (t == 0) physical = static_cast<int>(value);
                }
                if (type == 2) {
                    std::array<int, 3> c{};
                    for (int& v : c) v = node_of(reader.expect_int("triangle node"));
                    cells.push_back(c);
                } else if (type == 1) {
                    const int a = node_of(reader.expect_int("line node"));
                    const int b = node_of(reader.expect_int("line node"));
                    std::optional<BoundaryTag> tag;
                    if (auto it = tags.by_id.find(physical); it != tags.by_id.end()) tag = it->second;
                    if (!tag) {
                        if (auto nit = physical_names.find(physical); nit != physical_names.end()) {
                            if (auto it = tags.by_name.find(nit->second); it != tags.by_name.end())
                                tag = it->second;
                            else
                                tag = boundary_tag_from_string(nit->second);
                        }
                    }
                    if (!tag) {
                        std::string label = std::to_string(physical);
                        if (auto nit = physical_names.find(physical); nit != physical_names.end())
                            label += " (\"" + nit->second + "\")";
                        reader.fail("line element " + std::to_string(id) + " belongs to physical group " +
                                    label + " which has no boundary tag mapping");
                    }
                    facets.push_back({{a, b}, *tag});
                } else if (type == 15) {
                    reader.expect_int("point node");
                } else {
                    reader.fail("unsupported element type " + std::to_string(type) + " (element " +
                                std::to_string(id) + ")");
                }
            }
            reader.expect_keyword("$EndElements");
            have_elements = true;
        } else if (!token.empty() && token[0] == '$' && token.rfind("$End", 0) != 0) {
            // Unknown section: skip to its end marker.
            const std::string end = "$End" + token.substr(1);
            std::string t;
            while (reader.next(t) && t != end) {}
        } else {
            reader.fail("unexpected token '" + token + "'");
        }
    }
    if (!have_nodes || !have_elements) throw MeshError("Gmsh file lacks $Nodes or $Elements");
    return Mesh(std::move(nodes), std::move(cells), facets, report);
}

Mesh read_mesh(const std::string& path, MeshFormat format, const GmshTagMap& tags, MeshReport* report)
{
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file '" + path + "'");
    try {
        return format == MeshFormat::Native ? read_native_mesh(in, report) : read_gmsh_mesh(in, tags, report);
    } catch (const MeshError& e) {
        throw MeshError(path + ": " + e.what());
    }
}

void write_native_mesh(const Mesh& mesh, std::ostream& out)
{
    out << std::setprecision(17);
    out << "NODES " << mesh.n_nodes() << '\n';
    for (const auto& p : mesh.nodes()) out << p[0] << ' ' << p[1] << '\n';
    out << "CELLS " << mesh.n_cells() << '\n';
    for (const auto& c : mesh.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    out << "FACETS " << mesh.facets().size() << '\n';
    for (const auto& f : mesh.facets()) out << f.nodes[0] << ' ' << f.nodes[1] << ' ' << to_string(f.tag) << '\n';
}

void write_native_mesh(const Mesh& mesh, const std::string& path)
{
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file '" + path + "'");
    out.imbue(std::locale::classic());
    write_native_mesh(mesh, out);
    if (!out) throw MeshError("write failed for '" + path + "'");
}

}  // namespace cssav
