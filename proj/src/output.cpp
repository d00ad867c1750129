#include "cssav/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cssav {

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_output(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::string& path)
{
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

double parse_double(std::string_view s, int line)
{
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("diagnostics CSV line " + std::to_string(line) + ": bad number '" + std::string(s) +
                                 "'");
    return v;
}

}  // namespace

void write_vtk(const FeSpace& velocity, const FeSpace& pressure, const FlowState& state, std::ostream& out)
{
    const Mesh& mesh = velocity.mesh();
    const std::size_t n = mesh.n_nodes();
    if (state.u.size() != velocity.n_dofs() || state.p.size() != pressure.n_dofs())
        throw std::invalid_argument("state does not match the spaces");
    out << "# vtk DataFile Version 2.0\nflow field t=" << format_double(state.t) << "\nASCII\n"
        << "DATASET UNSTRUCTURED_GRID\nPOINTS " << n << " double\n";
    for (const Vec2& x : mesh.nodes()) out << format_double(x[0]) << ' ' << format_double(x[1]) << " 0\n";
    out << "CELLS " << mesh.n_cells() << ' ' << 4 * mesh.n_cells() << '\n';
    for (const auto& c : mesh.cells()) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
    out << "CELL_TYPES " << mesh.n_cells() << '\n';
    for (std::size_t c = 0; c < mesh.n_cells(); ++c) out << "5\n";
    out << "POINT_DATA " << n << "\nVECTORS velocity double\n";
    for (std::size_t i = 0; i < n; ++i) {
        const int v = static_cast<int>(i);
        out << format_double(state.u[velocity.dof(v, 0)]) << ' ' << format_double(state.u[velocity.dof(v, 1)])
            << " 0\n";
    }
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < n; ++i) out << format_double(state.p[i]) << '\n';
    out << "SCALARS velocity_magnitude double 1\nLOOKUP_TABLE default\n";
    for (std::size_t i = 0; i < n; ++i) {
        const int v = static_cast<int>(i);
        out << format_double(std::hypot(state.u[velocity.dof(v, 0)], state.u[velocity.dof(v, 1)])) << '\n';
    }
}

void write_vtk(const FeSpace& velocity, const FeSpace& pressure, const FlowState& state, const std::string& path)
{
    auto out = open_output(path);
    write_vtk(velocity, pressure, state, out);
    finish(out, path);
}

void write_diagnostics_csv(const std::vector<DiagnosticsRecord>& records, std::ostream& out)
{
    if (records.empty()) throw std::invalid_argument("no diagnostics records to write");
    out << "step,time,psi,Phi,energy_residual,div_u_l2,grad_u_l2\n";
    for (const auto& r : records)
        out << r.step << ',' << format_double(r.time) << ',' << format_double(r.psi) << ',' << format_double(r.phi)
            << ',' << format_double(r.energy_residual) << ',' << format_double(r.div_u_l2) << ','
            << format_double(r.grad_u_l2) << '\n';
}

void write_diagnostics_csv(const std::vector<DiagnosticsRecord>& records, const std::string& path)
{
    auto out = open_output(path);
    write_diagnostics_csv(records, out);
    finish(out, path);
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != "step,time,psi,Phi,energy_residual,div_u_l2,grad_u_l2")
        throw std::runtime_error("diagnostics CSV: unexpected header");
    std::vector<DiagnosticsRecord> records;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string_view> f;
        std::string_view rest(line);
        for (auto comma = rest.find(','); comma != std::string_view::npos; comma = rest.find(',')) {
            f.push_back(rest.substr(0, comma));
            rest.remove_prefix(comma + 1);
        }
        f.push_back(rest);
        if (f.size() != 7) throw std::runtime_error("diagnostics CSV line " + std::to_string(line_no) + ": 7 fields expected");
        DiagnosticsRecord r;
        r.step = static_cast<int>(parse_double(f[0], line_no));
        r.time = parse_double(f[1], line_no);
        r.psi = parse_double(f[2], line_no);
        r.phi = parse_double(f[3], line_no);
        r.energy_residual = parse_double(f[4], line_no);
        r.div_u_l2 = parse_double(f[5], line_no);
        r.grad_u_l2 = parse_double(f[6], line_no);
        records.push_back(r);
    }
    return records;
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_diagnostics_csv(in);
}

void write_table_csv(const Table& table, const std::string& path)
{
    if (table.names.size() != table.columns.size()) throw std::invalid_argument("table names and columns differ");
    std::size_t rows = table.columns.empty() ? 0 : table.columns.front().size();
    for (const auto& c : table.columns)
        if (c.size() != rows) throw std::invalid_argument("table columns have different lengths");
    auto out = open_output(path);
    for (std::size_t k = 0; k < table.names.size(); ++k) out << (k ? "," : "") << table.names[k];
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << format_double(table.columns[k][i]);
        out << '\n';
    }
    finish(out, path);
}

}  // namespace cssav
