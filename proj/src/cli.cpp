#include "sax/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <variant>

#include <CLI11.hpp>

#include "sax/boundary.hpp"
#include "sax/classify.hpp"
#include "sax/errors.hpp"
#include "sax/refmodes.hpp"
#include "sax/scattering.hpp"
#include "sax/spectrum.hpp"
#include "sax/timeevo.hpp"

namespace sax {

namespace {

using Cell = std::variant<double, long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string format_number(double v, int precision) {
    if (!std::isfinite(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

std::string json_string(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

std::string csv_cell(const Cell& c, int precision) {
    if (const auto* d = std::get_if<double>(&c)) return format_number(*d, precision);
    if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

std::string json_cell(const Cell& c, int precision) {
    if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? format_number(*d, precision) : "null";
    if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
    return json_string(std::get<std::string>(c));
}

std::string render_csv(const Table& t, int precision) {
    std::string out;
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += "\n";
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i], precision);
        out += "\n";
    }
    return out;
}

std::string render_json_rows(const Table& t, int precision) {
    std::string out = "[";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        out += r ? ",\n  {" : "\n  {";
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            out += (i ? ", " : "") + json_string(t.columns[i]) + ": " + json_cell(t.rows[r][i], precision);
        out += "}";
    }
    return out + (t.rows.empty() ? "]" : "\n]");
}

std::string render(const Table& t, const std::string& command, const OutputSpec& o) {
    if (o.format == OutputSpec::Format::csv) return render_csv(t, o.precision);
    return "{\"command\": " + json_string(command) + ", \"rows\": " + render_json_rows(t, o.precision) + "}\n";
}

// Runs f(0..n-1) on a small pool; results keep input order, the first failure (by index) is
// rethrown.
template <typename R, typename F>
std::vector<R> parallel_map(std::size_t n, F f) {
    std::vector<R> out(n);
    std::vector<std::exception_ptr> err(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t nt = std::min(n, hw);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

// The problems of a run: one per sweep value, or the configured one.
struct Variant {
    std::optional<double> value;
    Problem problem;
};

std::vector<Variant> variants(const RunConfig& rc) {
    std::vector<Variant> v;
    if (!rc.sweep) return {{std::nullopt, rc.problem}};
    for (double x : rc.sweep->values) v.push_back({x, with_parameter(rc.problem, rc.sweep->parameter, x)});
    return v;
}

std::vector<std::string> with_sweep_column(const RunConfig& rc, std::vector<std::string> cols) {
    if (rc.sweep) cols.insert(cols.begin(), rc.sweep->parameter);
    return cols;
}

double out_energy(const RunConfig& rc, double E) { return rc.units ? energy_to_physical(E, *rc.units) : E; }
double out_time(const RunConfig& rc, double t) { return rc.units ? time_to_physical(t, *rc.units) : t; }

std::string exponent_text(const std::complex<double>& z, int precision) {
    if (z.imag() == 0.0) return format_number(z.real(), precision);
    return format_number(z.real(), precision) + (z.imag() < 0.0 ? "-" : "+") +
           format_number(std::abs(z.imag()), precision) + "i";
}

std::vector<Artifact> run_classify(const RunConfig& rc) {
    const Problem& p = rc.problem;
    std::vector<Side> sides = rc.classify.sides.empty() ? sides_of(p.domain) : rc.classify.sides;
    const auto [n, m] = deficiency_indices(p);
    Table t{{"side", "verdict", "evidence", "exponent_1", "exponent_2", "deficiency_index", "rule"}, {}};
    for (Side s : sides) {
        const EndpointClassification c = classify_endpoint(p, s, p.E0, rc.classify.mode);
        std::string e1 = "", e2 = "";
        if (c.exponents) {
            e1 = exponent_text((*c.exponents)[0], rc.output.precision);
            e2 = exponent_text((*c.exponents)[1], rc.output.precision);
        }
        t.rows.push_back({std::string(to_string(s)), std::string(to_string(c.verdict)),
                          std::string(c.path == EvidencePath::analytic ? "Analytic" : "Numerical"), e1, e2,
                          static_cast<long>(n), c.rule});
    }
    (void)m;
    return {{rc.output.path, render(t, "classify", rc.output)}};
}

std::vector<Artifact> run_refmodes(const RunConfig& rc) {
    const RefmodesParams& q = rc.refmodes;
    const ReferenceModes modes = reference_modes(rc.problem, q.side, q.E0.value_or(rc.problem.E0));
    const Grid g = Grid::geometric(modes.endpoint(), q.near, q.far, q.count, modes.orientation() > 0);
    const RealSamples a = modes.sample(g, 0), b = modes.sample(g, 1);
    Table t{{"x", "phi1", "p_dphi1", "phi2", "p_dphi2"}, {}};
    for (Eigen::Index i = 0; i < g.size(); ++i)
        t.rows.push_back({g[i], a.psi[i], a.p_dpsi[i], b.psi[i], b.p_dpsi[i]});
    return {{rc.output.path, render(t, "refmodes", rc.output)}};
}

std::vector<Artifact> run_bound(const RunConfig& rc) {
    const std::vector<Variant> vs = variants(rc);
    const BoundParams& q = rc.bound;
    const auto results = parallel_map<std::vector<BoundState>>(vs.size(), [&](std::size_t i) {
        return bound_states(vs[i].problem, q.window, q.max_states, q.backend);
    });
    Table t{with_sweep_column(rc, {"n", "E", "nodes", "backend"}), {}};
    std::vector<Artifact> files;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        for (std::size_t k = 0; k < results[i].size(); ++k) {
            const BoundState& s = results[i][k];
            std::vector<Cell> row{static_cast<long>(k + 1), out_energy(rc, s.energy), static_cast<long>(s.nodes),
                                  std::string(to_string(s.backend))};
            if (vs[i].value) row.insert(row.begin(), *vs[i].value);
            t.rows.push_back(std::move(row));
            if (q.dump) {
                Table f{{"x", "re_psi", "im_psi"}, {}};
                for (Eigen::Index j = 0; j < s.psi.size(); ++j)
                    f.rows.push_back({s.psi.grid[j], s.psi.psi[j].real(), s.psi.psi[j].imag()});
                std::string name = *q.dump;
                if (vs[i].value) name += "_" + std::to_string(i);
                name += "_" + std::to_string(k + 1) + ".csv";
                files.push_back({name, render_csv(f, rc.output.precision)});
            }
        }
    }
    files.insert(files.begin(), {rc.output.path, render(t, "bound", rc.output)});
    return files;
}

std::vector<Artifact> run_scatter(const RunConfig& rc) {
    const std::vector<Variant> vs = variants(rc);
    const std::vector<double>& ks = rc.scatter.k;
    if (ks.empty()) throw ConfigError("command.scatter.k: no wavenumbers given");
    const bool line = rc.problem.domain.kind == Domain1D::Kind::line;
    const std::size_t nk = ks.size();
    const auto pts = parallel_map<ScatteringPoint>(vs.size() * nk, [&](std::size_t i) {
        return scattering_point(vs[i / nk].problem, ks[i % nk]);
    });
    std::vector<std::string> filter(vs.size());
    if (rc.scatter.filter) {
        if (!line) throw ConfigError("command.scatter.filter: filter curves need a line problem");
        for (std::size_t i = 0; i < vs.size(); ++i) {
            std::vector<double> T;
            for (std::size_t j = 0; j < nk; ++j) T.push_back(pts[i * nk + j].transmission);
            std::vector<double> sorted = ks;
            if (!std::is_sorted(sorted.begin(), sorted.end())) throw ConfigError("command.scatter.k: filter needs ascending k");
            filter[i] = to_string(filter_curve(vs[i].problem, vs[i].problem.bc.unitary(), ks).kind);
        }
    }
    Table t;
    if (line)
        t.columns = with_sweep_column(rc, {"k", "re_r_left", "im_r_left", "re_t_left", "im_t_left", "re_t_right",
                                           "im_t_right", "re_r_right", "im_r_right", "T", "error"});
    else
        t.columns = with_sweep_column(rc, {"k", "delta", "re_S", "im_S", "tau", "error"});
    if (rc.scatter.filter) t.columns.push_back("filter");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const ScatteringPoint& s = pts[i];
        std::vector<Cell> row{s.k};
        if (line) {
            for (auto [r, c] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
                row.push_back(s.S(r, c).real());
                row.push_back(s.S(r, c).imag());
            }
            row.push_back(s.transmission);
        } else {
            row.push_back(s.delta);
            row.push_back(s.S(0, 0).real());
            row.push_back(s.S(0, 0).imag());
            row.push_back(s.tau ? out_time(rc, *s.tau) : NAN);
        }
        row.push_back(s.error);
        if (vs[i / nk].value) row.insert(row.begin(), *vs[i / nk].value);
        if (rc.scatter.filter) row.push_back(filter[i / nk]);
        t.rows.push_back(std::move(row));
    }
    return {{rc.output.path, render(t, "scatter", rc.output)}};
}

std::vector<Artifact> run_evolve(const RunConfig& rc) {
    const EvolveParams& q = rc.evolve;
    const WavePacket pk = gaussian_packet(rc.problem, q.disc, q.x0, q.sigma, q.k0);
    EvolveOptions opt;
    opt.snapshot_every = q.snapshot_every;
    opt.snapshot_times = q.snapshot_times;
    const Trajectory tr = evolve(pk, rc.problem, q.disc, q.dt, q.T, opt);
    std::optional<double> tau, tau_wigner;
    if (q.measure_delay) {
        if (rc.problem.domain.kind != Domain1D::Kind::half_line)
            throw ConfigError("command.evolve.measure_delay: needs a half line");
        const ExtendedReal L = robin_from_theta(rc.problem.bc.robin().theta, rc.problem.bc.L0);
        DelayOptions d;
        d.x0 = q.x0;
        d.sigma = q.sigma;
        d.k0 = q.k0;
        tau = out_time(rc, measure_time_delay(rc.problem, L, d).tau);
        tau_wigner = out_time(rc, wigner_time_delay(rc.problem, -q.k0));
    }
    const int p = rc.output.precision;
    const Snapshot& first = tr.frames.front();
    const Snapshot& last = tr.frames.back();
    std::string summary = "{";
    auto field = [&](const std::string& k, const std::string& v) {
        summary += (summary.size() > 1 ? ", " : "") + json_string(k) + ": " + v;
    };
    field("steps", std::to_string(tr.steps));
    field("max_step_drift", format_number(tr.max_step_drift, p));
    field("norm_drift", format_number(last.norm - first.norm, p));
    field("norm_final", format_number(last.norm, p));
    field("norm_minus_final", format_number(last.norm_minus, p));
    field("norm_plus_final", format_number(last.norm_plus, p));
    field("energy_initial", format_number(out_energy(rc, first.energy), p));
    field("energy_final", format_number(out_energy(rc, last.energy), p));
    field("tau_measured", tau ? format_number(*tau, p) : "null");
    field("tau_wigner", tau_wigner ? format_number(*tau_wigner, p) : "null");
    summary += "}";

    Table frames{{"t", "x", "abs2", "re_psi", "im_psi"}, {}};
    for (const Snapshot& s : tr.frames)
        for (Eigen::Index i = 0; i < s.psi.size(); ++i)
            frames.rows.push_back({out_time(rc, s.t), tr.mesh.x[i], std::norm(s.psi[i]), s.psi[i].real(), s.psi[i].imag()});
    if (rc.output.format == OutputSpec::Format::json)
        return {{rc.output.path, "{\"command\": \"evolve\", \"summary\": " + summary +
                                     ", \"rows\": " + render_json_rows(frames, p) + "}\n"}};
    const std::string summary_path = rc.output.path.empty() ? std::string("-summary") : rc.output.path + ".summary.json";
    return {{rc.output.path, render_csv(frames, p)}, {summary_path, summary + "\n"}};
}

std::string error_json(const std::string& stage, const std::string& type, const std::string& message) {
    return "{\"error\": {\"stage\": " + json_string(stage) + ", \"type\": " + json_string(type) +
           ", \"message\": " + json_string(message) + "}}";
}

}  // namespace

std::vector<Artifact> run(const RunConfig& config) {
    if (config.command.empty()) throw ConfigError("no command given (set command.name or --command)");
    if (config.command == "classify") return run_classify(config);
    if (config.command == "refmodes") return run_refmodes(config);
    if (config.command == "bound") return run_bound(config);
    if (config.command == "scatter") return run_scatter(config);
    if (config.command == "evolve") return run_evolve(config);
    throw ConfigError("unknown command '" + config.command + "'");
}

void write_atomically(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(static_cast<unsigned long>(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + path + "'");
        out << content;
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw ConfigError("cannot write '" + path + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot move output into place at '" + path + "': " + ec.message());
    }
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Self-adjoint extensions of 1-D Schroedinger operators"};
    std::string config_path, command, out, format;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON run configuration")->required();
    app.add_option("--command", command, "classify | refmodes | bound | scatter | evolve (overrides the config)");
    app.add_option("--out", out, "output path (overrides the config; default standard output)");
    app.add_option("--format", format, "csv | json (overrides the config)");
    app.add_flag("--quiet", quiet, "no progress messages");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            app.exit(e);
            return 0;
        }
        std::cerr << error_json("arguments", "config", e.what()) << "\n";
        return 2;
    }

    std::string stage = "config";
    try {
        RunConfig rc = load_config(config_path);
        if (!command.empty()) {
            const auto& names = command_names();
            if (std::find(names.begin(), names.end(), command) == names.end())
                throw ConfigError("--command: unknown command '" + command + "'");
            rc.command = command;
        }
        if (!out.empty()) rc.output.path = out;
        if (!format.empty()) {
            if (format == "csv")
                rc.output.format = OutputSpec::Format::csv;
            else if (format == "json")
                rc.output.format = OutputSpec::Format::json;
            else
                throw ConfigError("--format: expected csv or json");
        }
        if (rc.command.empty()) throw ConfigError("no command given (set command.name or --command)");
        stage = rc.command;
        const std::vector<Artifact> arts = run(rc);
        stage = "output";
        for (const Artifact& a : arts) {
            if (a.path.empty()) {
                std::cout << a.content;
            } else if (a.path == "-summary") {
                if (!quiet) std::cerr << a.content;
            } else {
                write_atomically(a.path, a.content);
                if (!quiet) std::cerr << "wrote " << a.path << "\n";
            }
        }
        std::cout.flush();
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << error_json(stage, "config", e.what()) << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << error_json(stage, "numerical", e.what()) << "\n";
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << error_json(stage, "config", e.what()) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << error_json(stage, "numerical", e.what()) << "\n";
        return 3;
    }
}

}  // namespace sax
