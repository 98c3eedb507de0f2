#include "hall_lab/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "hall_lab/errors.hpp"
#include "hall_lab/harper.hpp"
#include "hall_lab/parallel.hpp"
#include "hall_lab/topology.hpp"

namespace hall {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kNaN = std::nan("");

using Row = std::vector<std::string>;

std::string num(double v) { return format_double(v); }
std::string num(int v) { return std::to_string(v); }

void alarm_if(std::vector<std::string>& alarms, bool cond, const std::string& what) {
    if (cond) alarms.push_back(what);
}

LatticeOperator bulk_operator(const ExperimentConfig& cfg, const Box& box) {
    LatticeOperator h = harper_hamiltonian(box, cfg.phi());
    if (cfg.alpha != 0.0) h = add_diagonal(h, cauchy_potential(box, {cfg.alpha, cfg.seed}));
    return h;
}

SmoothStep make_rho(const ExperimentConfig& cfg) {
    return cfg.rho_shape == "skewed_bump" ? SmoothStep::skewed_bump(cfg.rho_lo, cfg.rho_hi)
                                          : SmoothStep::bump(cfg.rho_lo, cfg.rho_hi);
}

TraceWindow bulk_window(const ExperimentConfig& cfg, const Box& box) {
    TraceWindow w = TraceWindow::ball(switch_crossing(0, 0), cfg.resolved_window());
    if (!w.contained_in(box)) throw ConfigError("trace window " + w.describe() + " leaves the box");
    return w;
}

}  // namespace

std::string CsvTable::render() const {
    std::string out = "# hall-lab schema=" + std::to_string(kSchemaVersion) + " command=" + command + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
        out += "\n";
    }
    return out;
}

RunOutcome run_bulk(const ExperimentConfig& cfg, int threads) {
    RunOutcome out;
    out.table.command = "bulk";
    out.table.columns = {"lambda",        "sigma_2pi",        "imag_residual",    "full_trace",
                         "window_delta_2pi", "term_minus_2pi", "term_plus_2pi",    "term_delta_2pi",
                         "term_delta_blocks_2pi", "decomposition_gap_2pi", "decomposition_gap_full", "status"};
    const Box box = make_box(cfg.box_x1, cfg.box_x2);
    const TraceWindow w = bulk_window(cfg, box);
    if (cfg.lambda_grid.empty()) return out;
    const Hamiltonian h(bulk_operator(cfg, box));
    const auto l1 = switch_function(box, 1), l2 = switch_function(box, 2);
    std::function<Row(int)> row = [&](int i) -> Row {
        const double lam = cfg.lambda_grid[i];
        try {
            LatticeOperator p = spectral_projection(h.spectrum, EnergySet::below(lam));
            ConductanceReport k = kubo_streda(p, l1, l2, w);
            Row r{num(lam), num(kTwoPi * k.value), num(k.imag_residual), num(k.full_trace), num(kTwoPi * k.window_delta)};
            if (cfg.rho_lo < lam && lam < cfg.rho_hi) {
                SigmaBDecomposition d = sigma_b_decomposition(h.spectrum, cfg.rho_lo, cfg.rho_hi, lam, l1, l2, w);
                SigmaBDecomposition df =
                    sigma_b_decomposition(h.spectrum, cfg.rho_lo, cfg.rho_hi, lam, l1, l2, TraceWindow::full_box());
                for (double v : {d.term_minus, d.term_plus, d.term_delta, d.term_delta_blocks}) r.push_back(num(kTwoPi * v));
                r.push_back(num(kTwoPi * std::abs(d.sum() - k.value)));
                r.push_back(num(std::abs(df.sum() - df.kubo)));
            } else {
                for (int j = 0; j < 6; ++j) r.push_back(num(kNaN));
            }
            r.push_back("ok");
            return r;
        } catch (const AmbiguousCutError&) {
            Row r{num(lam)};
            for (int j = 0; j < 10; ++j) r.push_back(num(kNaN));
            r.push_back("ambiguous_cut");
            return r;
        }
    };
    out.table.rows = parallel_map(static_cast<int>(cfg.lambda_grid.size()), threads, row);
    for (const auto& r : out.table.rows) {
        if (r.back() != "ok") continue;
        const std::string at = " at lambda=" + r[0];
        alarm_if(out.alarms, std::stod(r[2]) > kImagResidualAlarm, "imaginary residual" + at);
        alarm_if(out.alarms, std::stod(r[3]) > kFullTraceAlarm, "full-box trace residual" + at);
        alarm_if(out.alarms, std::stod(r[4]) > kWindowDeltaAlarm, "window sensitivity" + at);
        if (r[10] != "nan") alarm_if(out.alarms, std::stod(r[10]) > 1e-9, "decomposition identity" + at);
    }
    return out;
}

RunOutcome run_edge(const ExperimentConfig& cfg, int threads) {
    RunOutcome out;
    out.table.command = "edge";
    out.table.columns = {"a", "kind", "time", "lhs_2pi", "windowed_current_2pi", "correction_2pi",
                         "sigma_b_2pi", "rhs_2pi", "gap_2pi", "imag_residual"};
    const Box box = make_box(cfg.box_x1, cfg.box_x2);
    const TraceWindow w = bulk_window(cfg, box);
    for (int a : cfg.edge_a)
        if (-a > cfg.edge_top) throw ConfigError("edge_top must lie above -a");
    if (cfg.edge_a.empty()) return out;
    const SmoothStep rho = make_rho(cfg);
    const double lo = cfg.rho_lo, hi = cfg.rho_hi;
    const SwitchLines lines{};
    const Hamiltonian h_b(bulk_operator(cfg, box));
    const ConductanceReport oracle = bulk_oracle(h_b, lo, hi, lines, w.radius);
    const double sb = oracle.value;
    alarm_if(out.alarms, oracle.imag_residual > kImagResidualAlarm, "bulk oracle imaginary residual");
    alarm_if(out.alarms, kTwoPi * oracle.window_delta > kWindowDeltaAlarm, "bulk oracle window sensitivity");
    const auto l1b = switch_function(box, 1), l2b = switch_function(box, 2);

    std::function<std::vector<Row>(int)> per_a = [&](int i) {
        const int a = cfg.edge_a[i];
        const Box big = make_box(cfg.edge_x1, {-a - 1, cfg.edge_top});
        const EdgeGeometry geom = make_edge_geometry(cfg.edge_x1, a, cfg.edge_top);
        const Hamiltonian h_a(restrict_half_plane(bulk_operator(cfg, big), geom).h_a);
        const auto l1 = switch_function(h_a.box(), 1), l2 = switch_function(h_a.box(), 2);
        std::vector<Row> rows;
        const std::string as = num(a);
        ConductanceReport gap = edge_conductance_gap(h_a, rho, l1);
        rows.push_back({as, "gap", num(kNaN), num(kTwoPi * gap.value), num(kNaN), num(kNaN), num(kTwoPi * sb),
                        num(kNaN), num(kTwoPi * std::abs(gap.value - sb)), num(gap.imag_residual)});
        ConductanceReport e1 = sigma_e1(h_a, h_b, rho, lo, hi, lines);
        rows.push_back({as, "e1", num(0.0), num(kTwoPi * e1.value), num(kTwoPi * e1.diagnostic("windowed_current")),
                        num(kTwoPi * e1.diagnostic("bound_state_current")), num(kTwoPi * sb), num(kNaN),
                        num(kTwoPi * std::abs(e1.value - sb)), num(e1.imag_residual)});
        for (double t : cfg.t_grid) {
            EdgeTrace cur = windowed_edge_current(h_a, rho, l1, l2, t);
            double corr = bound_state_correction(h_b, rho, lo, hi, l1b, l2b, t);
            double rhs = sb + corr;
            rows.push_back({as, "t", num(t), num(kTwoPi * cur.value), num(kTwoPi * cur.value), num(kTwoPi * corr),
                            num(kTwoPi * sb), num(kTwoPi * rhs), num(kTwoPi * std::abs(cur.value - rhs)),
                            num(cur.imag_residual)});
        }
        for (double T : cfg.T_grid) {
            ConductanceReport e2 = sigma_e2(h_a, rho, l1, l2, T);
            rows.push_back({as, "T", num(T), num(kTwoPi * e2.value), num(kNaN), num(kNaN), num(kTwoPi * sb), num(kNaN),
                            num(kTwoPi * std::abs(e2.value - sb)), num(e2.imag_residual)});
        }
        return rows;
    };
    for (auto& rows : parallel_map(static_cast<int>(cfg.edge_a.size()), threads, per_a))
        for (auto& r : rows) out.table.rows.push_back(std::move(r));
    for (const auto& r : out.table.rows)
        alarm_if(out.alarms, std::stod(r[9]) > kImagResidualAlarm, "imaginary residual at a=" + r[0] + " kind=" + r[1]);
    return out;
}

RunOutcome run_topology(const ExperimentConfig& cfg, int threads) {
    RunOutcome out;
    out.table.command = "topology";
    out.table.columns = {"kind", "label", "radius", "value", "reference", "error", "detail"};
    // Connes sums
    struct Job {
        int tri;
        int radius;
    };
    std::vector<Job> jobs;
    for (std::size_t t = 0; t < cfg.triangles.size(); ++t)
        for (int r : cfg.connes_radii) jobs.push_back({static_cast<int>(t), r});
    std::function<Row(int)> connes = [&](int i) -> Row {
        const auto& tri = cfg.triangles[jobs[i].tri];
        SitePoint u[3];
        for (int k = 0; k < 3; ++k) u[k] = SitePoint::site(tri[k][0], tri[k][1]);
        ConnesSum s = connes_area_sum(u[0], u[1], u[2], jobs[i].radius);
        double ref = kTwoPi * oriented_area(u[0], u[1], u[2]);
        return {"connes", "triangle" + std::to_string(jobs[i].tri), num(jobs[i].radius), num(s.value), num(ref),
                num(std::abs(s.value - ref)), "between=" + std::to_string(s.between_count)};
    };
    out.table.rows = parallel_map(static_cast<int>(jobs.size()), threads, connes);

    if (cfg.index_radii.empty()) return out;
    const Box box = make_box(cfg.box_x1, cfg.box_x2);
    const TraceWindow w = bulk_window(cfg, box);
    const Hamiltonian h(bulk_operator(cfg, box));
    const double lam = gap_midpoint(h.spectrum, 0.5 * (cfg.rho_lo + cfg.rho_hi));
    const LatticeOperator p = spectral_projection(h.spectrum, EnergySet::below(lam));
    const SitePoint center = switch_crossing(0, 0);
    const FluxUnitary u = flux_unitary(box, center);
    const std::string lam_s = "lambda=" + num(lam);

    std::vector<double> idx;
    for (int r : cfg.index_radii) {
        TraceWindow wi = TraceWindow::ball(center, r);
        if (!wi.contained_in(box)) throw ConfigError("index window " + wi.describe() + " leaves the box");
        IndexResult ir = index_pair(p, u, wi);
        idx.push_back(ir.windowed);
        alarm_if(out.alarms, ir.full_trace > kFullTraceAlarm, "index full trace at W=" + num(r));
        out.table.rows.push_back({"index", "W=" + num(r), num(r), num(ir.windowed), num(kNaN), num(kNaN),
                                  lam_s + " full_trace=" + num(ir.full_trace)});
    }
    const double n = std::round(idx.front());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        out.table.rows[out.table.rows.size() - idx.size() + i][4] = num(n);
        out.table.rows[out.table.rows.size() - idx.size() + i][5] = num(std::abs(idx[i] - n));
    }
    const auto l1 = switch_function(box, 1), l2 = switch_function(box, 2);
    ConductanceReport k = kubo_streda(p, l1, l2, w);
    alarm_if(out.alarms, k.full_trace > kFullTraceAlarm, "Kubo-Streda full trace");
    alarm_if(out.alarms, k.imag_residual > kImagResidualAlarm, "Kubo-Streda imaginary residual");
    out.table.rows.push_back({"kubo", "W=" + num(w.radius), num(w.radius), num(kTwoPi * k.value), num(n),
                              num(std::abs(kTwoPi * k.value - n)), lam_s});
    double marker = kTwoPi * trace_per_unit_volume_marker(p, cfg.marker_inner, cfg.marker_cutoff);
    out.table.rows.push_back({"marker", "L=" + num(cfg.marker_inner) + " cutoff=" + num(cfg.marker_cutoff),
                              num(cfg.marker_inner), num(marker), num(n), num(std::abs(marker - n)), lam_s});
    double spread = 0;
    for (double v : idx) spread = std::max(spread, std::abs(v - idx.front()));
    double worst = std::max({std::abs(kTwoPi * k.value - n), std::abs(marker - n), std::abs(idx.front() - n)});
    out.table.rows.push_back({"agreement", "index_kubo_marker", num(w.radius), num(worst), num(n), num(worst),
                              "index_spread=" + num(spread)});
    return out;
}

RunOutcome run_harper(const ExperimentConfig& cfg, int threads) {
    RunOutcome out;
    out.table.command = "harper";
    out.table.columns = {"kind", "phi", "param", "value_re", "value_im", "reference_re", "reference_im",
                         "alt_reference", "ratio", "quad_delta", "stderr", "zscore"};
    const double phi = cfg.phi();
    const Box rbox = centered_box(cfg.resolvent_radius);
    for (double lam : cfg.lambda_grid) {
        double jb = j_b(phi, cfg.alpha, lam, cfg.quad_nodes, rbox, threads);
        double jb2 = j_b(phi, cfg.alpha, lam, 2 * cfg.quad_nodes, rbox, threads);
        double lead = leading_asymptotic(phi, cfg.alpha, lam);
        double alt = neumann_leading(phi, cfg.alpha, lam);
        double delta = std::abs(jb2 - jb);
        alarm_if(out.alarms, delta > 1e-6, "quadrature refinement at lambda=" + num(lam));
        out.table.rows.push_back({"jb", num(phi), num(lam), num(jb), num(0.0), num(lead), num(0.0), num(alt),
                                  num(lead != 0.0 ? jb / lead : kNaN), num(delta), num(kNaN), num(kNaN)});
    }
    for (double f : cfg.neumann_flux) {
        const double ph = kTwoPi * f;
        for (int n = 0; n <= 2; ++n) {
            cplx v = neumann_term(ph, n, 0.0, centered_box(n + 4));
            cplx ref = n == 2 ? cplx(0.0, 8.0 * std::sin(ph) * (std::cos(ph) + 1.0)) : cplx(0.0);
            if (n < 2) alarm_if(out.alarms, std::abs(v) > 1e-12, "Neumann term N=" + num(n) + " nonzero");
            out.table.rows.push_back({"neumann", num(ph), num(n), num(v.real()), num(v.imag()), num(ref.real()),
                                      num(ref.imag()), num(kNaN), num(kNaN), num(kNaN), num(kNaN), num(kNaN)});
        }
    }
    if (cfg.samples > 0 && cfg.alpha != 0.0) {
        const Box mbox = centered_box(cfg.mc_radius);
        MonteCarloResult mc = disorder_average_trace(phi, cfg.alpha, cfg.z, cfg.samples, cfg.seed, mbox, threads);
        const double sign = cfg.z.imag() > 0 ? 1.0 : -1.0;
        cplx ref = t_phi_trace(phi, cfg.z + cplx(0.0, std::abs(cfg.alpha) * sign), mbox).value;
        double z = mc.standard_error > 0 ? std::abs(mc.mean - ref) / mc.standard_error : kNaN;
        out.table.rows.push_back({"montecarlo", num(phi), num(cfg.samples), num(mc.mean.real()), num(mc.mean.imag()),
                                  num(ref.real()), num(ref.imag()), num(kNaN), num(kNaN), num(kNaN),
                                  num(mc.standard_error), num(z)});
    }
    return out;
}

RunOutcome run_diagnose(const ExperimentConfig& cfg, int threads) {
    RunOutcome out;
    out.table.command = "diagnose";
    out.table.columns = {"kind", "param1", "param2", "value", "bound", "violation"};
    const Box box = make_box(cfg.box_x1, cfg.box_x2);
    const Hamiltonian h(bulk_operator(cfg, box));
    auto& rows = out.table.rows;
    int violations = 0;
    auto add = [&](const std::string& kind, double p1, double p2, double value, double bound, bool violated) {
        violations += violated ? 1 : 0;
        rows.push_back({kind, num(p1), num(p2), num(value), num(bound), violated ? "1" : "0"});
    };
    {
        double c1 = short_range_constant(h.op, cfg.mu), bound = 4.0 * std::expm1(cfg.mu);
        add("C1", cfg.mu, kNaN, c1, bound, c1 > bound * (1 + 1e-12));
    }
    for (int a : cfg.edge_a) {
        if (-a <= box.x2_min || -a > box.x2_max) continue;
        auto geom = make_edge_geometry(cfg.box_x1, a, box.x2_max);
        auto r = restrict_half_plane(h.op, geom);
        double c3 = boundary_defect_norm(r.e_a, cfg.mu, a), bound = 2.0 * std::exp(cfg.mu);
        add("C3", cfg.mu, a, c3, bound, c3 > bound);
    }
    auto ell = [](int x1, int x2) { return static_cast<double>(std::abs(x1) + std::abs(x2)); };
    struct Pt {
        double a, b;
    };
    std::vector<Pt> prop;
    for (double d : cfg.delta_grid) {
        if (d > cfg.mu) throw ConfigError("delta_grid entries must not exceed mu");
        for (double t : cfg.t_grid) prop.push_back({d, t});
    }
    std::function<BoundCheck(int)> prop_job = [&](int i) { return propagation_speed_check(h, ell, prop[i].a, prop[i].b); };
    auto prop_res = parallel_map(static_cast<int>(prop.size()), threads, prop_job);
    for (std::size_t i = 0; i < prop.size(); ++i)
        add("propagation", prop[i].a, prop[i].b, prop_res[i].value, prop_res[i].bound, !prop_res[i].holds());
    std::vector<Pt> zs;
    for (double lam : cfg.lambda_grid)
        for (double eta : cfg.eta_grid) zs.push_back({lam, eta});
    std::function<BoundCheck(int)> ct_job = [&](int i) { return combes_thomas_check(h, ell, {zs[i].a, zs[i].b}); };
    auto ct_res = parallel_map(static_cast<int>(zs.size()), threads, ct_job);
    for (std::size_t i = 0; i < zs.size(); ++i)
        add("combes_thomas", zs[i].a, zs[i].b, ct_res[i].value, ct_res[i].bound, !ct_res[i].holds());
    for (double nu : cfg.nu_grid)
        add("dynamical_localization", nu, cfg.mu,
            dynamical_localization_bound(h.spectrum, cfg.rho_lo, cfg.rho_hi, cfg.mu, nu, cfg.t_grid), kNaN, false);
    double total = 0;
    for (const auto& m : localization_minima(h.spectrum, cfg.rho_lo, cfg.rho_hi)) {
        add("m_zeta", m.eigenvalue, m.index, m.m, 1.0 / std::sqrt(2.0), m.m > 1.0 / std::sqrt(2.0) + 1e-12);
        total += m.m;
    }
    add("m_zeta_total", cfg.rho_lo, cfg.rho_hi, total, kNaN, false);
    add("violations", kNaN, kNaN, violations, 0.0, violations > 0);
    alarm_if(out.alarms, violations > 0, std::to_string(violations) + " bound violations");
    return out;
}

RunOutcome run_command(const ExperimentConfig& cfg, int threads) {
    if (cfg.command == "bulk") return run_bulk(cfg, threads);
    if (cfg.command == "edge") return run_edge(cfg, threads);
    if (cfg.command == "topology") return run_topology(cfg, threads);
    if (cfg.command == "harper") return run_harper(cfg, threads);
    if (cfg.command == "diagnose") return run_diagnose(cfg, threads);
    throw ConfigError("unknown command '" + cfg.command + "'");
}

WrittenFiles write_outputs(const ExperimentConfig& cfg, const RunOutcome& outcome, const std::string& dir,
                           double wall_seconds, int threads) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::string name = cfg.name.empty() ? cfg.command : cfg.name;
    WrittenFiles files{(fs::path(dir) / (name + ".csv")).string(), (fs::path(dir) / (name + ".manifest.json")).string()};
    {
        std::ofstream csv(files.csv, std::ios::binary);
        csv << outcome.table.render();
        if (!csv) throw std::runtime_error("cannot write " + files.csv);
    }
    nlohmann::ordered_json m;
    m["tool"] = "hall-lab";
    m["version"] = HALL_LAB_VERSION;
    m["schema_version"] = kSchemaVersion;
    m["command"] = cfg.command;
    m["config_hash"] = config_hash(cfg);
    m["seed"] = cfg.seed;
    m["threads"] = threads;
    m["wall_time_seconds"] = wall_seconds;
    m["outputs"] = {fs::path(files.csv).filename().string()};
    m["rows"] = outcome.table.rows.size();
    m["alarms"] = outcome.alarms;
    m["calibration"] = {{"combes_thomas_c", kCombesThomasc}, {"combes_thomas_C", kCombesThomasC}};
    m["config"] = config_entries(cfg);
    std::ofstream js(files.manifest, std::ios::binary);
    js << m.dump(2) << "\n";
    if (!js) throw std::runtime_error("cannot write " + files.manifest);
    return files;
}

int cli_main(int argc, char** argv) {
    CLI::App app{"hall-lab: finite-lattice quantum Hall conductance laboratory"};
    app.set_version_flag("--version", HALL_LAB_VERSION);
    std::string command, config_path, out_dir = ".";
    int threads = 0;
    std::uint64_t seed = 0;
    app.add_option("command", command, "bulk | edge | topology | harper | diagnose")
        ->required()
        ->check(CLI::IsMember({"bulk", "edge", "topology", "harper", "diagnose"}));
    app.add_option("--config", config_path, "configuration file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--threads", threads, "worker threads (fallback: HALL_LAB_THREADS)")->check(CLI::PositiveNumber);
    auto* seed_opt = app.add_option("--seed", seed, "override the configured seed");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }
    if (threads == 0) {
        if (const char* env = std::getenv("HALL_LAB_THREADS")) {
            try {
                threads = std::stoi(env);
            } catch (const std::exception&) {
                threads = 0;
            }
            if (threads <= 0) {
                std::cerr << "hall-lab: HALL_LAB_THREADS must be a positive integer\n";
                return kExitConfig;
            }
        } else {
            threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        }
    }
    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
        if (!cfg.command.empty() && cfg.command != command)
            throw ConfigError("config is for command '" + cfg.command + "', not '" + command + "'");
        cfg.command = command;
        if (*seed_opt) cfg.seed = seed;
    } catch (const ConfigError& e) {
        std::cerr << "hall-lab: " << e.what() << "\n";
        return kExitConfig;
    }
    const auto start = std::chrono::steady_clock::now();
    RunOutcome outcome;
    try {
        outcome = run_command(cfg, threads);
    } catch (const ConfigError& e) {
        std::cerr << "hall-lab: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "hall-lab: numerical failure: " << e.what() << "\n";
        return kExitAlarm;
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    WrittenFiles files = write_outputs(cfg, outcome, out_dir, wall, threads);
    std::cout << files.csv << "\n" << files.manifest << "\n";
    for (const auto& a : outcome.alarms) std::cerr << "hall-lab: alarm: " << a << "\n";
    return outcome.alarms.empty() ? kExitOk : kExitAlarm;
}

}  // namespace hall
