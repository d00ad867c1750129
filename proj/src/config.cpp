#include "cssav/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace cssav {

namespace {

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string format_number(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

struct Entry {
    std::string value;
    int line;
};

double to_double(const std::string& key, const Entry& e)
{
    double v = 0.0;
    const char* end = e.value.data() + e.value.size();
    const auto res = std::from_chars(e.value.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError("line " + std::to_string(e.line) + ": " + key + " expects a number, got '" + e.value + "'",
                          e.line);
    return v;
}

int to_int(const std::string& key, const Entry& e)
{
    int v = 0;
    const char* end = e.value.data() + e.value.size();
    const auto res = std::from_chars(e.value.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end)
        throw ConfigError("line " + std::to_string(e.line) + ": " + key + " expects an integer, got '" + e.value + "'",
                          e.line);
    return v;
}

[[noreturn]] void bad_choice(const std::string& key, const Entry& e, const char* choices)
{
    throw ConfigError("line " + std::to_string(e.line) + ": " + key + " must be one of " + choices + ", got '" +
                          e.value + "'",
                      e.line);
}

using Setter = std::function<void(RunConfig&, const std::string& key, const Entry&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"mesh.file", [](RunConfig& c, const std::string&, const Entry& e) { c.mesh.path = e.value; }},
        {"mesh.format",
         [](RunConfig& c, const std::string& k, const Entry& e) {
             if (e.value == "native")
                 c.mesh.format = MeshFormat::Native;
             else if (e.value == "gmsh")
                 c.mesh.format = MeshFormat::GmshMsh2Ascii;
             else
                 bad_choice(k, e, "native, gmsh");
         }},
        {"mesh.cells_per_side",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.mesh.cells_per_side = to_int(k, e); }},
        {"mesh.pattern",
         [](RunConfig& c, const std::string& k, const Entry& e) {
             if (e.value == "right")
                 c.mesh.pattern = DiagonalPattern::Right;
             else if (e.value == "crisscross")
                 c.mesh.pattern = DiagonalPattern::Crisscross;
             else
                 bad_choice(k, e, "right, crisscross");
         }},
        {"mesh.refinement_level",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.mesh.refinement_level = to_int(k, e); }},
        {"scheme.element_pair",
         [](RunConfig& c, const std::string& k, const Entry& e) {
             const auto p = element_pair_from_string(e.value);
             if (!p) bad_choice(k, e, "taylor_hood_p2p1, equal_order_p1p1");
             c.params.pair = *p;
         }},
        {"scheme.nu", [](RunConfig& c, const std::string& k, const Entry& e) { c.params.nu = to_double(k, e); }},
        {"scheme.gamma", [](RunConfig& c, const std::string& k, const Entry& e) { c.params.gamma = to_double(k, e); }},
        {"scheme.alpha", [](RunConfig& c, const std::string& k, const Entry& e) { c.params.alpha = to_double(k, e); }},
        {"scheme.tau", [](RunConfig& c, const std::string& k, const Entry& e) { c.params.tau = to_double(k, e); }},
        {"scheme.t_end", [](RunConfig& c, const std::string& k, const Entry& e) { c.params.t_end = to_double(k, e); }},
        {"solver.momentum_rtol",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.params.momentum_solver.rtol = to_double(k, e); }},
        {"solver.momentum_atol",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.params.momentum_solver.atol = to_double(k, e); }},
        {"solver.momentum_max_iterations",
         [](RunConfig& c, const std::string& k, const Entry& e) {
             c.params.momentum_solver.max_iterations = to_int(k, e);
         }},
        {"solver.ppe_rtol",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.params.ppe_solver.rtol = to_double(k, e); }},
        {"solver.ppe_atol",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.params.ppe_solver.atol = to_double(k, e); }},
        {"solver.ppe_max_iterations",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.params.ppe_solver.max_iterations = to_int(k, e); }},
        {"convergence.tau0", [](RunConfig& c, const std::string& k, const Entry& e) { c.tau0 = to_double(k, e); }},
        {"convergence.halvings", [](RunConfig& c, const std::string& k, const Entry& e) { c.halvings = to_int(k, e); }},
        {"output.directory", [](RunConfig& c, const std::string&, const Entry& e) { c.output_dir = e.value; }},
        {"output.snapshot_every",
         [](RunConfig& c, const std::string& k, const Entry& e) { c.snapshot_every = to_int(k, e); }},
        {"output.verbosity", [](RunConfig& c, const std::string& k, const Entry& e) { c.verbosity = to_int(k, e); }},
    };
    return table;
}

}  // namespace

void validate(const RunConfig& cfg)
{
    try {
        cfg.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid configuration: scheme/solver ") + e.what());
    }
    if (cfg.mesh.path.empty()) {
        if (cfg.mesh.cells_per_side < 1) throw ConfigError("invalid configuration: mesh.cells_per_side must be >= 1");
        if (cfg.mesh.refinement_level < 0)
            throw ConfigError("invalid configuration: mesh.refinement_level must be >= 0");
    }
    if (!(cfg.tau0 > 0.0)) throw ConfigError("invalid configuration: convergence.tau0 must be positive");
    if (cfg.halvings < 0) throw ConfigError("invalid configuration: convergence.halvings must be >= 0");
    if (cfg.snapshot_every < 0) throw ConfigError("invalid configuration: output.snapshot_every must be >= 0");
    if (cfg.output_dir.empty()) throw ConfigError("invalid configuration: output.directory must not be empty");
}

RunConfig parse_config_text(std::string_view text)
{
    std::map<std::string, Entry> entries;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        const auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        const auto line = trim(raw);
        if (line.empty() || line.front() == '#' || line.front() == ';') continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(where + "unterminated section header", line_no);
            section = std::string(trim(line.substr(1, line.size() - 2)));
            static const char* known[] = {"case", "mesh", "scheme", "solver", "convergence", "output"};
            if (std::find(std::begin(known), std::end(known), section) == std::end(known))
                throw ConfigError(where + "unknown section [" + section + "]", line_no);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ConfigError(where + "expected 'key = value'", line_no);
        if (section.empty()) throw ConfigError(where + "key outside of any section", line_no);
        const std::string key = section + "." + std::string(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key != "case.name" && !setters().contains(key))
            throw ConfigError(where + "unknown key '" + key + "'", line_no);
        if (entries.contains(key)) throw ConfigError(where + "repeated key '" + key + "'", line_no);
        entries[key] = {value, line_no};
    }

    RunConfig cfg;
    if (auto it = entries.find("case.name"); it != entries.end()) {
        const auto id = case_from_string(it->second.value);
        if (!id) bad_choice("case.name", it->second, "taylor_green, lid_cavity, turek_cylinder");
        cfg.case_id = *id;
        entries.erase(it);
    }
    cfg.params = default_params(cfg.case_id);
    for (const auto& [key, entry] : entries) setters().at(key)(cfg, key, entry);
    validate(cfg);
    return cfg;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration file '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str());
}

std::string serialize_config(const RunConfig& c)
{
    std::ostringstream o;
    o << "[case]\nname = " << to_string(c.case_id) << "\n\n[mesh]\n";
    if (!c.mesh.path.empty()) o << "file = " << c.mesh.path << "\n";
    o << "format = " << (c.mesh.format == MeshFormat::Native ? "native" : "gmsh") << "\n"
      << "cells_per_side = " << c.mesh.cells_per_side << "\n"
      << "pattern = " << (c.mesh.pattern == DiagonalPattern::Right ? "right" : "crisscross") << "\n"
      << "refinement_level = " << c.mesh.refinement_level << "\n\n[scheme]\n"
      << "element_pair = " << to_string(c.params.pair) << "\n"
      << "nu = " << format_number(c.params.nu) << "\n"
      << "gamma = " << format_number(c.params.gamma) << "\n"
      << "alpha = " << format_number(c.params.alpha) << "\n"
      << "tau = " << format_number(c.params.tau) << "\n"
      << "t_end = " << format_number(c.params.t_end) << "\n\n[solver]\n"
      << "momentum_rtol = " << format_number(c.params.momentum_solver.rtol) << "\n"
      << "momentum_atol = " << format_number(c.params.momentum_solver.atol) << "\n"
      << "momentum_max_iterations = " << c.params.momentum_solver.max_iterations << "\n"
      << "ppe_rtol = " << format_number(c.params.ppe_solver.rtol) << "\n"
      << "ppe_atol = " << format_number(c.params.ppe_solver.atol) << "\n"
      << "ppe_max_iterations = " << c.params.ppe_solver.max_iterations << "\n\n[convergence]\n"
      << "tau0 = " << format_number(c.tau0) << "\n"
      << "halvings = " << c.halvings << "\n\n[output]\n"
      << "directory = " << c.output_dir << "\n"
      << "snapshot_every = " << c.snapshot_every << "\n"
      << "verbosity = " << c.verbosity << "\n";
    return o.str();
}

}  // namespace cssav
