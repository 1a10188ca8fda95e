// Convergence studies driven by flat key = value configuration files.
//
// Config format: one `key = value` per line, `#` starts a comment, and a line `[section]`
// prefixes the following keys with `section.`. Recognised keys:
//
//   problem            advect1d_expsin | advect2d_sin
//   space.kind         P1D | Q2D | P2D
//   space.degree       k >= 0
//   mesh.family        uniform | alpha | random
//   mesh.alpha         shift parameter, |alpha| < 1           (alpha family)
//   mesh.fraction      perturbation fraction in [0,1)         (random family)
//   mesh.seed          unsigned 64-bit seed                    (random family, required)
//   domain.lo, domain.hi   interval, applied to every direction
//   study.label        free text
//   study.N            comma separated cell counts per direction
//   study.full_scale   allow N beyond the desk caps (1D: 320, 2D: 128)
//   study.truncate     stop refining once E2 < 100 * DBL_EPSILON
//   time.T, time.c     final time and dt = c * min h
//   time.scheme        euler | ssprk2 | ssprk3 | rk4 | custom
//   time.tableau.a     rows separated by ';', entries by ','   (custom only)
//   time.tableau.b, time.tableau.c, time.order                 (custom only)
//   output.dir         output directory (relative paths are resolved against $CFDG_OUTPUT_ROOT if set)
//   output.fields      also write the final DG coefficients per level
#pragma once

#include <cerrno>
#include <cfloat>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "cfdg/dg_operator.hpp"
#include "cfdg/field.hpp"
#include "cfdg/mesh.hpp"
#include "cfdg/metrics.hpp"
#include "cfdg/shifted_projection.hpp"
#include "cfdg/time_integration.hpp"

namespace cfdg {

/// Configuration problem, tagged with the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class MeshFamily { uniform, alpha, random };

inline std::string to_string(MeshFamily f) {
    switch (f) {
        case MeshFamily::uniform: return "uniform";
        case MeshFamily::alpha: return "alpha";
        case MeshFamily::random: return "random";
    }
    return "?";
}

inline constexpr int desk_cap_1d = 320;
inline constexpr int desk_cap_2d = 128;

struct StudyConfig {
    std::string problem = "advect1d_expsin";
    Space space{SpaceKind::P1D, 2};
    MeshFamily family = MeshFamily::uniform;
    double alpha = 0.0;
    double fraction = 0.3;
    std::optional<std::uint64_t> seed;
    Interval domain{0.0, 2.0 * std::numbers::pi};
    std::string label;
    std::vector<int> ns{10, 20, 40, 80, 160, 320};
    bool full_scale = false;
    bool truncate = true;
    double final_time = 1.0;
    double dt_coefficient = 0.01;
    std::string scheme_name = "rk4";
    RKScheme custom_scheme;  // used when scheme_name == "custom"
    std::string output_dir = "results";
    bool dump_fields = false;

    int dimension() const { return problem == "advect2d_sin" ? 2 : 1; }

    RKScheme scheme() const { return scheme_name == "custom" ? custom_scheme : scheme_by_name(scheme_name); }

    IntegrationConfig integration() const { return {final_time, dt_coefficient, scheme()}; }

    bool operator==(const StudyConfig& o) const {
        const auto same_scheme = [](const RKScheme& a, const RKScheme& b) {
            return a.name == b.name && a.a == b.a && a.b == b.b && a.c == b.c && a.order == b.order;
        };
        return problem == o.problem && space == o.space && family == o.family && alpha == o.alpha &&
               fraction == o.fraction && seed == o.seed && domain.lo == o.domain.lo && domain.hi == o.domain.hi &&
               label == o.label && ns == o.ns && full_scale == o.full_scale && truncate == o.truncate &&
               final_time == o.final_time && dt_coefficient == o.dt_coefficient && scheme_name == o.scheme_name &&
               same_scheme(custom_scheme, o.custom_scheme) && output_dir == o.output_dir &&
               dump_fields == o.dump_fields;
    }

    /// Throws ConfigError naming the first inconsistent key.
    void validate() const {
        if (problem != "advect1d_expsin" && problem != "advect2d_sin")
            throw ConfigError("problem", "unknown problem '" + problem + "'");
        if ((dimension() == 1) != (space.kind == SpaceKind::P1D))
            throw ConfigError("space.kind", "space " + to_string(space.kind) + " does not match problem " + problem);
        if (space.degree < 0) throw ConfigError("space.degree", "must be nonnegative");
        if (family == MeshFamily::alpha && !(std::abs(alpha) < 1.0)) throw ConfigError("mesh.alpha", "|alpha| must be < 1");
        if (family == MeshFamily::random) {
            if (!seed) throw ConfigError("mesh.seed", "random mesh family requires a seed");
            if (!(fraction >= 0.0 && fraction < 1.0)) throw ConfigError("mesh.fraction", "must lie in [0,1)");
        }
        if (!(domain.hi > domain.lo)) throw ConfigError("domain", "need domain.lo < domain.hi");
        if (ns.empty()) throw ConfigError("study.N", "empty list");
        const int min_n = family == MeshFamily::uniform ? 1 : 2;
        const int cap = dimension() == 1 ? desk_cap_1d : desk_cap_2d;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            if (ns[i] < min_n) throw ConfigError("study.N", "N = " + std::to_string(ns[i]) + " too small for this mesh family");
            if (i > 0 && ns[i] <= ns[i - 1]) throw ConfigError("study.N", "must be strictly increasing");
            if (!full_scale && ns[i] > cap)
                throw ConfigError("study.N", "N = " + std::to_string(ns[i]) + " exceeds the desk-scale cap " +
                                                 std::to_string(cap) + " (set study.full_scale = true)");
        }
        if (!(final_time > 0.0)) throw ConfigError("time.T", "must be positive");
        if (!(dt_coefficient > 0.0)) throw ConfigError("time.c", "must be positive");
        try {
            scheme().validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(scheme_name == "custom" ? "time.tableau" : "time.scheme", e.what());
        }
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE || !std::isfinite(x))
        throw ConfigError(key, "expected a real number, got '" + v + "'");
    return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size() || errno == ERANGE)
        throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    errno = 0;
    char* end = nullptr;
    if (v.empty() || v[0] == '-') throw ConfigError(key, "expected an unsigned integer, got '" + v + "'");
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size() || errno == ERANGE) throw ConfigError(key, "expected an unsigned integer, got '" + v + "'");
    return x;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(key, "expected true or false, got '" + v + "'");
}

inline std::vector<double> parse_real_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& item : split(v, ',')) out.push_back(parse_real(key, item));
    return out;
}

inline std::string format_real(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string join_reals(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_real(xs[i]);
    return s;
}

}  // namespace detail

using KeyValues = std::map<std::string, std::string>;

/// Reads `key = value` lines with optional `[section]` prefixes.
inline KeyValues parse_key_values(const std::string& text) {
    KeyValues kv;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError("", "line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
        if (!section.empty()) key = section + "." + key;
        kv[key] = detail::trim(line.substr(eq + 1));
    }
    return kv;
}

/// Applies a `key=value` override.
inline void apply_override(KeyValues& kv, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("", "override '" + assignment + "' is not key=value");
    const std::string key = detail::trim(assignment.substr(0, eq));
    if (key.empty()) throw ConfigError("", "override '" + assignment + "' has an empty key");
    kv[key] = detail::trim(assignment.substr(eq + 1));
}

inline StudyConfig config_from_key_values(const KeyValues& kv) {
    StudyConfig cfg;
    bool domain_lo_set = false, domain_hi_set = false;
    for (const auto& [key, value] : kv) {
        if (key == "problem") {
            cfg.problem = value;
        } else if (key == "space.kind") {
            try {
                cfg.space.kind = space_kind_from_string(value);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(key, e.what());
            }
        } else if (key == "space.degree") {
            const long long k = detail::parse_int(key, value);
            if (k < 0 || k > 20) throw ConfigError(key, "degree must lie in [0, 20]");
            cfg.space.degree = static_cast<int>(k);
        } else if (key == "mesh.family") {
            if (value == "uniform") cfg.family = MeshFamily::uniform;
            else if (value == "alpha") cfg.family = MeshFamily::alpha;
            else if (value == "random") cfg.family = MeshFamily::random;
            else throw ConfigError(key, "unknown mesh family '" + value + "'");
        } else if (key == "mesh.alpha") {
            cfg.alpha = detail::parse_real(key, value);
        } else if (key == "mesh.fraction") {
            cfg.fraction = detail::parse_real(key, value);
        } else if (key == "mesh.seed") {
            cfg.seed = detail::parse_u64(key, value);
        } else if (key == "domain.lo") {
            cfg.domain.lo = detail::parse_real(key, value);
            domain_lo_set = true;
        } else if (key == "domain.hi") {
            cfg.domain.hi = detail::parse_real(key, value);
            domain_hi_set = true;
        } else if (key == "study.label") {
            cfg.label = value;
        } else if (key == "study.N") {
            cfg.ns.clear();
            for (const auto& item : detail::split(value, ',')) {
                const long long n = detail::parse_int(key, item);
                if (n < 1 || n > 1'000'000) throw ConfigError(key, "N out of range: " + item);
                cfg.ns.push_back(static_cast<int>(n));
            }
        } else if (key == "study.full_scale") {
            cfg.full_scale = detail::parse_bool(key, value);
        } else if (key == "study.truncate") {
            cfg.truncate = detail::parse_bool(key, value);
        } else if (key == "time.T") {
            cfg.final_time = detail::parse_real(key, value);
        } else if (key == "time.c") {
            cfg.dt_coefficient = detail::parse_real(key, value);
        } else if (key == "time.scheme") {
            cfg.scheme_name = value;
            if (value != "custom") {
                try {
                    scheme_by_name(value);
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(key, e.what());
                }
            }
        } else if (key == "time.tableau.a") {
            cfg.custom_scheme.a.clear();
            for (const auto& row : detail::split(value, ';')) cfg.custom_scheme.a.push_back(detail::parse_real_list(key, row));
        } else if (key == "time.tableau.b") {
            cfg.custom_scheme.b = detail::parse_real_list(key, value);
        } else if (key == "time.tableau.c") {
            cfg.custom_scheme.c = detail::parse_real_list(key, value);
        } else if (key == "time.order") {
            cfg.custom_scheme.order = static_cast<int>(detail::parse_int(key, value));
        } else if (key == "output.dir") {
            cfg.output_dir = value;
        } else if (key == "output.fields") {
            cfg.dump_fields = detail::parse_bool(key, value);
        } else {
            throw ConfigError(key, "unknown key");
        }
    }
    if (cfg.scheme_name == "custom") cfg.custom_scheme.name = "custom";
    (void)domain_lo_set;
    (void)domain_hi_set;
    cfg.validate();
    return cfg;
}

inline StudyConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {}) {
    KeyValues kv = parse_key_values(text);
    for (const auto& o : overrides) apply_override(kv, o);
    return config_from_key_values(kv);
}

inline StudyConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {}) {
    std::ifstream in(path);
    if (!in) throw ConfigError("", "cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), overrides);
}

/// Canonical text form; parse_config(serialize_config(c)) == c.
inline std::string serialize_config(const StudyConfig& cfg) {
    std::ostringstream os;
    os << "problem = " << cfg.problem << '\n';
    os << "space.kind = " << to_string(cfg.space.kind) << '\n';
    os << "space.degree = " << cfg.space.degree << '\n';
    os << "mesh.family = " << to_string(cfg.family) << '\n';
    os << "mesh.alpha = " << detail::format_real(cfg.alpha) << '\n';
    os << "mesh.fraction = " << detail::format_real(cfg.fraction) << '\n';
    if (cfg.seed) os << "mesh.seed = " << *cfg.seed << '\n';
    os << "domain.lo = " << detail::format_real(cfg.domain.lo) << '\n';
    os << "domain.hi = " << detail::format_real(cfg.domain.hi) << '\n';
    if (!cfg.label.empty()) os << "study.label = " << cfg.label << '\n';
    os << "study.N = ";
    for (std::size_t i = 0; i < cfg.ns.size(); ++i) os << (i ? "," : "") << cfg.ns[i];
    os << '\n';
    os << "study.full_scale = " << (cfg.full_scale ? "true" : "false") << '\n';
    os << "study.truncate = " << (cfg.truncate ? "true" : "false") << '\n';
    os << "time.T = " << detail::format_real(cfg.final_time) << '\n';
    os << "time.c = " << detail::format_real(cfg.dt_coefficient) << '\n';
    os << "time.scheme = " << cfg.scheme_name << '\n';
    if (cfg.scheme_name == "custom") {
        os << "time.tableau.a = ";
        for (std::size_t i = 0; i < cfg.custom_scheme.a.size(); ++i)
            os << (i ? ";" : "") << detail::join_reals(cfg.custom_scheme.a[i]);
        os << '\n';
        os << "time.tableau.b = " << detail::join_reals(cfg.custom_scheme.b) << '\n';
        os << "time.tableau.c = " << detail::join_reals(cfg.custom_scheme.c) << '\n';
        os << "time.order = " << cfg.custom_scheme.order << '\n';
    }
    os << "output.dir = " << cfg.output_dir << '\n';
    os << "output.fields = " << (cfg.dump_fields ? "true" : "false") << '\n';
    return os.str();
}

// ---------------------------------------------------------------------------
// Running
// ---------------------------------------------------------------------------

/// 1D mesh of the configured family at resolution n; `axis` selects the seed stream in 2D.
inline Mesh1D build_mesh_1d(const StudyConfig& cfg, int n, int axis = 0) {
    switch (cfg.family) {
        case MeshFamily::uniform: return uniform_mesh(n, cfg.domain);
        case MeshFamily::alpha: return alpha_mesh(n, cfg.alpha, cfg.domain);
        case MeshFamily::random: return random_mesh(n, cfg.fraction, cfg.seed.value_or(0) + axis, cfg.domain);
    }
    throw std::logic_error("unreachable mesh family");
}

inline TensorMesh2D build_mesh_2d(const StudyConfig& cfg, int n) {
    return tensor_mesh(build_mesh_1d(cfg, n, 0), build_mesh_1d(cfg, n, 1));
}

/// Truncation rule for refinement ladders: errors this close to roundoff carry no rate information.
inline bool below_truncation_threshold(double e2) { return e2 < 100.0 * DBL_EPSILON; }

/// Final state of one refinement level, kept for optional output.
struct LevelResult {
    int n = 0;
    std::optional<Field1D> field_1d;
    std::optional<Field2D> field_2d;
};

struct StudyResult {
    ConvergenceTable table;
    std::vector<LevelResult> levels;
    bool truncated = false;
};

/// Runs every level: mesh, L2-projected initial data, time integration to T, error metrics.
inline StudyResult run_study(const StudyConfig& cfg) {
    cfg.validate();
    StudyResult result;
    result.table.label = cfg.label;
    result.table.has_flux_error = cfg.dimension() == 1;
    const IntegrationConfig integ = cfg.integration();
    for (int n : cfg.ns) {
        ConvergenceRow row;
        row.n = n;
        LevelResult level;
        level.n = n;
        if (cfg.dimension() == 1) {
            Problem1D pb = advect1d_expsin();
            const Mesh1D mesh = build_mesh_1d(cfg, n);
            const Operator1D op(mesh, cfg.space.degree);
            Field1D u = integrate(op, l2_project(pb.initial, mesh, cfg.space.degree), integ);
            row.e2 = error_E2(pb.exact, u, integ.final_time);
            row.ea = error_EA(pb.exact, u, integ.final_time);
            row.ef = error_Ef(pb.exact, u, integ.final_time);
            level.field_1d = std::move(u);
        } else {
            Problem2D pb = advect2d_sin();
            const TensorMesh2D mesh = build_mesh_2d(cfg, n);
            const Operator2D op(mesh, cfg.space);
            Field2D u = integrate(op, l2_project(pb.initial, mesh, cfg.space), integ);
            row.e2 = error_E2(pb.exact, u, integ.final_time);
            row.ea = error_EA(pb.exact, u, integ.final_time);
            level.field_2d = std::move(u);
        }
        result.table.rows.push_back(row);
        result.levels.push_back(std::move(level));
        if (cfg.truncate && below_truncation_threshold(row.e2)) {
            result.truncated = n != cfg.ns.back();
            break;
        }
    }
    result.table.finalize();
    return result;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

/// Writes via a temporary file in the same directory and renames over the target.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

/// Output directory, re-rooted under $CFDG_OUTPUT_ROOT when that is set and the path is relative.
inline std::filesystem::path resolve_output_dir(const StudyConfig& cfg) {
    std::filesystem::path dir(cfg.output_dir);
    if (const char* root = std::getenv("CFDG_OUTPUT_ROOT"); root && *root && dir.is_relative())
        return std::filesystem::path(root) / dir;
    return dir;
}

/// One column `x`, full precision.
inline std::string nodes_csv(const Mesh1D& mesh) {
    std::string s = "x\n";
    for (double x : mesh.nodes()) s += detail::format_real(x) + "\n";
    return s;
}

/// Columns: xc, c0..ck (1D) or xc, yc, c_a_b in mode order (2D).
inline std::string field_csv(const Field1D& f) {
    std::string s = "xc";
    for (int m = 0; m <= f.degree(); ++m) s += ",c" + std::to_string(m);
    s += '\n';
    for (int j = 0; j < f.num_cells(); ++j) {
        s += detail::format_real(f.mesh().center(j));
        for (double c : f.cell(j)) s += "," + detail::format_real(c);
        s += '\n';
    }
    return s;
}

inline std::string field_csv(const Field2D& f) {
    std::string s = "xc,yc";
    for (const auto& md : f.modes()) s += ",c" + std::to_string(md.a) + "_" + std::to_string(md.b);
    s += '\n';
    for (int j = 0; j < f.mesh().ny(); ++j)
        for (int i = 0; i < f.mesh().nx(); ++i) {
            s += detail::format_real(f.mesh().x().center(i)) + "," + detail::format_real(f.mesh().y().center(j));
            for (double c : f.cell(i, j)) s += "," + detail::format_real(c);
            s += '\n';
        }
    return s;
}

/// Writes mesh node files for every configured N; returns the paths written.
inline std::vector<std::filesystem::path> dump_mesh(const StudyConfig& cfg, const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> written;
    for (int n : cfg.ns) {
        const std::string stem = "mesh_N" + std::to_string(n);
        if (cfg.dimension() == 1) {
            written.push_back(dir / (stem + ".csv"));
            write_file_atomic(written.back(), nodes_csv(build_mesh_1d(cfg, n)));
        } else {
            const TensorMesh2D mesh = build_mesh_2d(cfg, n);
            written.push_back(dir / (stem + "_x.csv"));
            write_file_atomic(written.back(), nodes_csv(mesh.x()));
            written.push_back(dir / (stem + "_y.csv"));
            write_file_atomic(written.back(), nodes_csv(mesh.y()));
        }
    }
    return written;
}

/// table.csv, table.md, config.txt; realized random meshes; optional final fields.
inline void write_study_outputs(const StudyConfig& cfg, const StudyResult& result, const std::filesystem::path& dir) {
    write_file_atomic(dir / "table.csv", result.table.to_csv());
    write_file_atomic(dir / "table.md", result.table.to_markdown());
    write_file_atomic(dir / "config.txt", serialize_config(cfg));
    if (cfg.family == MeshFamily::random) {
        StudyConfig done = cfg;
        done.ns.clear();
        for (const auto& row : result.table.rows) done.ns.push_back(row.n);
        dump_mesh(done, dir);
    }
    if (cfg.dump_fields) {
        for (const auto& level : result.levels) {
            const auto path = dir / ("field_N" + std::to_string(level.n) + ".csv");
            if (level.field_1d) write_file_atomic(path, field_csv(*level.field_1d));
            if (level.field_2d) write_file_atomic(path, field_csv(*level.field_2d));
        }
    }
}

}  // namespace cfdg
