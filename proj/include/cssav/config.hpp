#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "cssav/benchmarks.hpp"

namespace cssav {

/// Malformed or invalid configuration. `line()` is 0 when the problem is not
/// tied to one line (e.g. a failed validation).
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0) : std::runtime_error(what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// One run, as described by a configuration file:
///
///   [case]
///   name = lid_cavity
///   [mesh]
///   cells_per_side = 96
///   [scheme]
///   element_pair = equal_order_p1p1
///   gamma = 50
///
/// Sections: case, mesh, scheme, solver, convergence, output. Scheme values
/// not given in the file take the defaults of the selected case.
struct RunConfig {
    CaseId case_id = CaseId::TaylorGreen;
    MeshSpec mesh;
    SchemeParams params = default_params(CaseId::TaylorGreen);
    /// First step size and number of halvings of the convergence study.
    double tau0 = 0.2;
    int halvings = 3;
    std::string output_dir = "output";
    /// Write a VTK snapshot every n steps; 0 writes only the final state.
    int snapshot_every = 0;
    /// 0 quiet, 1 summary, 2 per-step lines.
    int verbosity = 1;

    bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a configuration. Throws ConfigError with the line
/// number on syntax errors, unknown or repeated keys and bad values, and
/// naming the field on validation failures.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::string& path);

/// Validation of a complete RunConfig; throws ConfigError naming the field.
void validate(const RunConfig& cfg);

/// Canonical text form; parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& cfg);

}  // namespace cssav
