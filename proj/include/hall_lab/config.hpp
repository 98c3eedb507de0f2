/// Run configuration: flat `key = value` text with `#` comments.
///
/// Scalars: numbers as written; ranges as `lo:hi`; lists comma separated;
/// complex numbers as `re,im`; triangles as `x,y x,y x,y` groups separated
/// by `;`. The flux is phi / 2pi, given either exactly (`flux_num`,
/// `flux_den`) or as a real (`flux`).
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hall {

struct ExperimentConfig {
    std::string command;
    std::string name;

    bool flux_rational = true;
    std::int64_t flux_num = 1;
    std::int64_t flux_den = 3;
    double flux_real = 0.0;

    double alpha = 0.0;
    std::uint64_t seed = 1;

    std::pair<int, int> box_x1{-16, 16};
    std::pair<int, int> box_x2{-16, 16};
    std::pair<int, int> edge_x1{-24, 23};
    std::vector<int> edge_a{15};
    int edge_top = 16;
    int window = -1;  // -1: box radius / 4

    double rho_lo = -1.9;
    double rho_hi = -0.9;
    std::string rho_shape = "bump";

    std::vector<double> lambda_grid;
    std::vector<double> t_grid;
    std::vector<double> T_grid;

    int quad_nodes = 24;
    int samples = 2000;
    std::complex<double> z{2.0, 0.5};
    int resolvent_radius = 30;
    int mc_radius = 10;
    std::vector<double> neumann_flux;  // phi / 2pi values

    std::vector<int> connes_radii{20, 40, 80};
    std::vector<std::array<std::array<int, 2>, 3>> triangles;
    std::vector<int> index_radii{8, 12};
    int marker_inner = 2;
    int marker_cutoff = 12;

    double mu = 1.0;
    std::vector<double> nu_grid{0.0, 1.0, 2.0};
    std::vector<double> delta_grid;
    std::vector<double> eta_grid;

    double phi() const;
    int box_radius() const;
    int resolved_window() const;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses config text; throws ConfigError with a line number on failure.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// Canonical text: every key, sorted, doubles with 17 significant digits.
std::string serialize_config(const ExperimentConfig& cfg);
/// Key/value pairs of the canonical form.
std::map<std::string, std::string> config_entries(const ExperimentConfig& cfg);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

/// Shortest-round-trip-safe decimal form used in configs and CSV files.
std::string format_double(double v);

}  // namespace hall
