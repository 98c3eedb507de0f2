#include "hall_lab/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "hall_lab/errors.hpp"

namespace hall {

namespace {

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    auto a = s.find_first_not_of(ws);
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(ws);
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& s) {
    double v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError("expected a finite number, got '" + s + "'");
    return v;
}

template <class Int>
Int to_int(const std::string& s) {
    Int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError("expected an integer, got '" + s + "'");
    return v;
}

std::vector<double> to_doubles(const std::string& s) {
    std::vector<double> out;
    if (trim(s).empty()) return out;
    for (const auto& t : split(s, ',')) out.push_back(to_double(t));
    return out;
}

std::vector<int> to_ints(const std::string& s) {
    std::vector<int> out;
    if (trim(s).empty()) return out;
    for (const auto& t : split(s, ',')) out.push_back(to_int<int>(t));
    return out;
}

std::pair<int, int> to_range(const std::string& s) {
    auto parts = split(s, ':');
    if (parts.size() != 2) throw ConfigError("expected a range lo:hi, got '" + s + "'");
    std::pair<int, int> r{to_int<int>(parts[0]), to_int<int>(parts[1])};
    if (r.first > r.second) throw ConfigError("empty range '" + s + "'");
    return r;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

template <class T, class F>
std::string join_map(const std::vector<T>& v, F f) {
    std::vector<std::string> parts;
    for (const auto& x : v) parts.push_back(f(x));
    return join(parts, ",");
}

using Triangle = std::array<std::array<int, 2>, 3>;

std::vector<Triangle> to_triangles(const std::string& s) {
    std::vector<Triangle> out;
    if (trim(s).empty()) return out;
    for (const auto& group : split(s, ';')) {
        std::istringstream is(group);
        std::string pt;
        Triangle t{};
        int k = 0;
        while (is >> pt) {
            if (k == 3) throw ConfigError("triangle with more than three points: '" + group + "'");
            auto c = split(pt, ',');
            if (c.size() != 2) throw ConfigError("bad triangle point '" + pt + "'");
            t[k++] = {to_int<int>(c[0]), to_int<int>(c[1])};
        }
        if (k != 3) throw ConfigError("triangle needs three points: '" + group + "'");
        out.push_back(t);
    }
    return out;
}

std::string from_triangles(const std::vector<Triangle>& ts) {
    std::vector<std::string> groups;
    for (const auto& t : ts) {
        std::vector<std::string> pts;
        for (const auto& p : t) pts.push_back(std::to_string(p[0]) + "," + std::to_string(p[1]));
        groups.push_back(join(pts, " "));
    }
    return join(groups, "; ");
}

struct Key {
    std::function<void(ExperimentConfig&, const std::string&)> parse;
    std::function<std::string(const ExperimentConfig&)> format;
};

std::string fmt_range(std::pair<int, int> r) { return std::to_string(r.first) + ":" + std::to_string(r.second); }

const std::map<std::string, Key>& keys() {
    using C = ExperimentConfig;
    static const std::map<std::string, Key> table = {
        {"command",
         {[](C& c, const std::string& v) {
              if (!v.empty() && v != "bulk" && v != "edge" && v != "topology" && v != "harper" && v != "diagnose")
                  throw ConfigError("unknown command '" + v + "'");
              c.command = v;
          },
          [](const C& c) { return c.command; }}},
        {"name",
         {[](C& c, const std::string& v) {
              for (char ch : v)
                  if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '-' && ch != '.')
                      throw ConfigError("name may only contain letters, digits, '_', '-', '.'");
              c.name = v;
          },
          [](const C& c) { return c.name; }}},
        {"flux_num",
         {[](C& c, const std::string& v) {
              c.flux_num = to_int<std::int64_t>(v);
              c.flux_rational = true;
          },
          [](const C& c) { return c.flux_rational ? std::to_string(c.flux_num) : std::string(); }}},
        {"flux_den",
         {[](C& c, const std::string& v) {
              c.flux_den = to_int<std::int64_t>(v);
              if (c.flux_den == 0) throw ConfigError("flux_den must be nonzero");
              c.flux_rational = true;
          },
          [](const C& c) { return c.flux_rational ? std::to_string(c.flux_den) : std::string(); }}},
        {"flux",
         {[](C& c, const std::string& v) {
              c.flux_real = to_double(v);
              c.flux_rational = false;
          },
          [](const C& c) { return c.flux_rational ? std::string() : format_double(c.flux_real); }}},
        {"alpha", {[](C& c, const std::string& v) { c.alpha = to_double(v); }, [](const C& c) { return format_double(c.alpha); }}},
        {"seed", {[](C& c, const std::string& v) { c.seed = to_int<std::uint64_t>(v); }, [](const C& c) { return std::to_string(c.seed); }}},
        {"box_x1", {[](C& c, const std::string& v) { c.box_x1 = to_range(v); }, [](const C& c) { return fmt_range(c.box_x1); }}},
        {"box_x2", {[](C& c, const std::string& v) { c.box_x2 = to_range(v); }, [](const C& c) { return fmt_range(c.box_x2); }}},
        {"edge_x1", {[](C& c, const std::string& v) { c.edge_x1 = to_range(v); }, [](const C& c) { return fmt_range(c.edge_x1); }}},
        {"edge_a",
         {[](C& c, const std::string& v) {
              c.edge_a = to_ints(v);
              for (int a : c.edge_a)
                  if (a < 0) throw ConfigError("edge_a must be nonnegative");
          },
          [](const C& c) { return join_map(c.edge_a, [](int x) { return std::to_string(x); }); }}},
        {"edge_top", {[](C& c, const std::string& v) { c.edge_top = to_int<int>(v); }, [](const C& c) { return std::to_string(c.edge_top); }}},
        {"window", {[](C& c, const std::string& v) { c.window = to_int<int>(v); }, [](const C& c) { return std::to_string(c.window); }}},
        {"rho_lo", {[](C& c, const std::string& v) { c.rho_lo = to_double(v); }, [](const C& c) { return format_double(c.rho_lo); }}},
        {"rho_hi", {[](C& c, const std::string& v) { c.rho_hi = to_double(v); }, [](const C& c) { return format_double(c.rho_hi); }}},
        {"rho_shape",
         {[](C& c, const std::string& v) {
              if (v != "bump" && v != "skewed_bump") throw ConfigError("rho_shape must be bump or skewed_bump");
              c.rho_shape = v;
          },
          [](const C& c) { return c.rho_shape; }}},
        {"lambda_grid", {[](C& c, const std::string& v) { c.lambda_grid = to_doubles(v); }, [](const C& c) { return join_map(c.lambda_grid, format_double); }}},
        {"t_grid", {[](C& c, const std::string& v) { c.t_grid = to_doubles(v); }, [](const C& c) { return join_map(c.t_grid, format_double); }}},
        {"T_grid",
         {[](C& c, const std::string& v) {
              c.T_grid = to_doubles(v);
              for (double T : c.T_grid)
                  if (!(T > 0)) throw ConfigError("T_grid entries must be positive");
          },
          [](const C& c) { return join_map(c.T_grid, format_double); }}},
        {"quad_nodes", {[](C& c, const std::string& v) { c.quad_nodes = to_int<int>(v); }, [](const C& c) { return std::to_string(c.quad_nodes); }}},
        {"samples", {[](C& c, const std::string& v) { c.samples = to_int<int>(v); }, [](const C& c) { return std::to_string(c.samples); }}},
        {"z",
         {[](C& c, const std::string& v) {
              auto d = to_doubles(v);
              if (d.size() != 2) throw ConfigError("z must be re,im");
              c.z = {d[0], d[1]};
          },
          [](const C& c) { return format_double(c.z.real()) + "," + format_double(c.z.imag()); }}},
        {"resolvent_radius", {[](C& c, const std::string& v) { c.resolvent_radius = to_int<int>(v); }, [](const C& c) { return std::to_string(c.resolvent_radius); }}},
        {"mc_radius", {[](C& c, const std::string& v) { c.mc_radius = to_int<int>(v); }, [](const C& c) { return std::to_string(c.mc_radius); }}},
        {"neumann_flux", {[](C& c, const std::string& v) { c.neumann_flux = to_doubles(v); }, [](const C& c) { return join_map(c.neumann_flux, format_double); }}},
        {"connes_radii", {[](C& c, const std::string& v) { c.connes_radii = to_ints(v); }, [](const C& c) { return join_map(c.connes_radii, [](int x) { return std::to_string(x); }); }}},
        {"triangles", {[](C& c, const std::string& v) { c.triangles = to_triangles(v); }, [](const C& c) { return from_triangles(c.triangles); }}},
        {"index_radii", {[](C& c, const std::string& v) { c.index_radii = to_ints(v); }, [](const C& c) { return join_map(c.index_radii, [](int x) { return std::to_string(x); }); }}},
        {"marker_inner", {[](C& c, const std::string& v) { c.marker_inner = to_int<int>(v); }, [](const C& c) { return std::to_string(c.marker_inner); }}},
        {"marker_cutoff", {[](C& c, const std::string& v) { c.marker_cutoff = to_int<int>(v); }, [](const C& c) { return std::to_string(c.marker_cutoff); }}},
        {"mu", {[](C& c, const std::string& v) { c.mu = to_double(v); }, [](const C& c) { return format_double(c.mu); }}},
        {"nu_grid", {[](C& c, const std::string& v) { c.nu_grid = to_doubles(v); }, [](const C& c) { return join_map(c.nu_grid, format_double); }}},
        {"delta_grid", {[](C& c, const std::string& v) { c.delta_grid = to_doubles(v); }, [](const C& c) { return join_map(c.delta_grid, format_double); }}},
        {"eta_grid", {[](C& c, const std::string& v) { c.eta_grid = to_doubles(v); }, [](const C& c) { return join_map(c.eta_grid, format_double); }}},
    };
    return table;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double ExperimentConfig::phi() const {
    const double frac = flux_rational ? static_cast<double>(flux_num) / static_cast<double>(flux_den) : flux_real;
    return 2.0 * std::numbers::pi * frac;
}

int ExperimentConfig::box_radius() const {
    return std::min(box_x1.second - box_x1.first, box_x2.second - box_x2.first) / 2;
}

int ExperimentConfig::resolved_window() const { return window >= 0 ? window : box_radius() / 4; }

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    bool real_flux = false, rational_flux = false;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        auto it = keys().find(key);
        if (it == keys().end()) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        const bool flux_key = key == "flux_num" || key == "flux_den" || key == "flux";
        if (flux_key && value.empty()) continue;
        if (flux_key) (key == "flux" ? real_flux : rational_flux) = true;
        try {
            it->second.parse(cfg, value);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + " (" + key + "): " + e.what());
        }
    }
    if (real_flux && rational_flux) throw ConfigError("give the flux either as flux_num/flux_den or as flux, not both");
    if (cfg.flux_rational && cfg.flux_den == 0) throw ConfigError("flux_den must be nonzero");
    if (cfg.rho_lo >= cfg.rho_hi) throw ConfigError("rho_lo must be below rho_hi");
    if (cfg.quad_nodes < 1) throw ConfigError("quad_nodes must be positive");
    if (cfg.samples == 1 || cfg.samples < 0) throw ConfigError("samples must be 0 (skip) or at least 2");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::map<std::string, std::string> config_entries(const ExperimentConfig& cfg) {
    std::map<std::string, std::string> out;
    for (const auto& [k, key] : keys()) out[k] = key.format(cfg);
    return out;
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : config_entries(cfg)) out += k + " = " + v + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize_config(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace hall
