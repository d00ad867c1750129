#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "cssav/stepper.hpp"

namespace cssav {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Legacy ASCII VTK unstructured grid of the mesh vertices and linear
/// triangles with point data `velocity` (z = 0), `pressure` and
/// `velocity_magnitude`. Quadratic fields are sampled at the vertices.
void write_vtk(const FeSpace& velocity, const FeSpace& pressure, const FlowState& state, std::ostream& out);
void write_vtk(const FeSpace& velocity, const FeSpace& pressure, const FlowState& state, const std::string& path);

/// CSV with header step,time,psi,Phi,energy_residual,div_u_l2,grad_u_l2.
/// Throws std::invalid_argument for an empty list, std::runtime_error on IO failure.
void write_diagnostics_csv(const std::vector<DiagnosticsRecord>& records, std::ostream& out);
void write_diagnostics_csv(const std::vector<DiagnosticsRecord>& records, const std::string& path);
std::vector<DiagnosticsRecord> read_diagnostics_csv(std::istream& in);
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::string& path);

/// Named columns of equal length written as CSV.
struct Table {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
};
void write_table_csv(const Table& table, const std::string& path);

}  // namespace cssav
