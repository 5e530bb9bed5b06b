#include "sax/config.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <fstream>
#include <set>
#include <sstream>

#include "sax/boundary.hpp"
#include "sax/errors.hpp"

namespace sax {

using nlohmann::json;

namespace {

// Every object is read through this: keys outside `allowed` are errors.
void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items())
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ConfigError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(where + ": must be finite");
    return v;
}

double number_or(const json& j, const char* key, const std::string& where, double fallback) {
    return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

long integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return j.get<long>();
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) throw ConfigError(where + ": expected a string");
    return j.get<std::string>();
}

bool boolean(const json& j, const std::string& where) {
    if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
    return j.get<bool>();
}

ExtendedReal extended(const json& j, const std::string& where) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "inf" || s == "infinity") return ExtendedReal::infinity();
        throw ConfigError(where + ": expected a number or \"inf\"");
    }
    return ExtendedReal(number(j, where));
}

std::vector<double> number_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw ConfigError(where + ": expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

Sweep parse_sweep(const json& j, const std::string& where) {
    check_keys(j, where, {"start", "stop", "count", "scale"});
    for (const char* k : {"start", "stop", "count"})
        if (!j.contains(k)) throw ConfigError(where + ": missing '" + k + "'");
    Sweep s;
    s.start = number(j.at("start"), where + ".start");
    s.stop = number(j.at("stop"), where + ".stop");
    const long n = integer(j.at("count"), where + ".count");
    if (n < 1 || n > 1'000'000) throw ConfigError(where + ".count: must lie in [1, 1e6]");
    s.count = static_cast<int>(n);
    if (j.contains("scale")) {
        const std::string sc = text(j.at("scale"), where + ".scale");
        if (sc == "log")
            s.log = true;
        else if (sc != "linear")
            throw ConfigError(where + ".scale: expected linear or log");
    }
    if (s.log && !(s.start > 0.0 && s.stop > 0.0)) throw ConfigError(where + ": log sweeps need positive bounds");
    return s;
}

// A number, a list of numbers or a sweep object.
std::vector<double> values(const json& j, const std::string& where) {
    if (j.is_number()) return {number(j, where)};
    if (j.is_array()) return number_list(j, where);
    return parse_sweep(j, where).values();
}

Domain1D parse_domain(const json& j) {
    if (j.is_string()) {
        const std::string k = j.get<std::string>();
        if (k == "half_line") return Domain1D::half_line();
        if (k == "line") return Domain1D::line();
        throw ConfigError("problem.domain: expected half_line, line or an interval object");
    }
    check_keys(j, "problem.domain", {"kind", "lower", "upper"});
    const std::string k = text(j.value("kind", json()), "problem.domain.kind");
    if (k == "half_line") return Domain1D::half_line();
    if (k == "line") return Domain1D::line();
    if (k != "interval") throw ConfigError("problem.domain.kind: expected half_line, line or interval");
    if (!j.contains("lower") || !j.contains("upper")) throw ConfigError("problem.domain: interval needs lower and upper");
    const double a = number(j.at("lower"), "problem.domain.lower");
    const double b = number(j.at("upper"), "problem.domain.upper");
    if (!(a < b)) throw ConfigError("problem.domain: lower must be below upper");
    return Domain1D::interval(a, b);
}

PotentialSpec parse_potential(const json& j) {
    const std::string w = "problem.potential";
    check_keys(j, w, {"family", "params"});
    const std::string fam = text(j.value("family", json()), w + ".family");
    const json params = j.value("params", json::object());
    const std::string pw = w + ".params";
    auto need = [&](const char* key) {
        if (!params.contains(key)) throw ConfigError(pw + ": missing '" + key + "'");
        return params.at(key);
    };
    if (fam == "free") {
        check_keys(params, pw, {});
        return {potential::Free{}};
    }
    if (fam == "inverse_square") {
        check_keys(params, pw, {"c"});
        return {potential::InverseSquare{number(need("c"), pw + ".c")}};
    }
    if (fam == "coulomb") {
        check_keys(params, pw, {"g"});
        return {potential::Coulomb{number(need("g"), pw + ".g")}};
    }
    if (fam == "coulomb_centrifugal") {
        check_keys(params, pw, {"g", "l"});
        const long l = integer(need("l"), pw + ".l");
        if (l < 0) throw ConfigError(pw + ".l: must be >= 0");
        return {potential::CoulombPlusCentrifugal{number(need("g"), pw + ".g"), static_cast<int>(l)}};
    }
    if (fam == "power_law") {
        check_keys(params, pw, {"a", "s"});
        return {potential::PowerLaw{number(need("a"), pw + ".a"), number(need("s"), pw + ".s")}};
    }
    if (fam == "tabulated") {
        check_keys(params, pw, {"x", "v", "lower_exponents"});
        potential::Tabulated t;
        t.x = number_list(need("x"), pw + ".x");
        t.v = number_list(need("v"), pw + ".v");
        if (params.contains("lower_exponents")) {
            const auto e = number_list(params.at("lower_exponents"), pw + ".lower_exponents");
            if (e.size() != 2) throw ConfigError(pw + ".lower_exponents: expected two numbers");
            t.lower_exponents = std::array<double, 2>{e[0], e[1]};
        }
        return {t};
    }
    throw ConfigError(w + ".family: unknown family '" + fam + "'");
}

Eigen::Matrix2cd parse_matrix(const json& j, const std::string& where) {
    // [[[re, im], [re, im]], [[re, im], [re, im]]]
    if (!j.is_array() || j.size() != 2) throw ConfigError(where + ": expected a 2x2 array of [re, im] pairs");
    Eigen::Matrix2cd U;
    for (int r = 0; r < 2; ++r) {
        if (!j[r].is_array() || j[r].size() != 2) throw ConfigError(where + ": expected a 2x2 array of [re, im] pairs");
        for (int c = 0; c < 2; ++c) {
            const auto v = number_list(j[r][c], where);
            if (v.size() != 2) throw ConfigError(where + ": entries are [re, im] pairs");
            U(r, c) = {v[0], v[1]};
        }
    }
    return U;
}

BoundaryCondition parse_bc(const json& j, const Domain1D& d, double L0) {
    const std::string w = "problem.bc";
    check_keys(j, w, {"variant", "params"});
    const std::string var = text(j.value("variant", json()), w + ".variant");
    const json params = j.value("params", json::object());
    const std::string pw = w + ".params";
    if (var == "robin") {
        check_keys(params, pw, {"L", "theta", "upper_L", "upper_theta"});
        if (params.contains("L") == params.contains("theta")) throw ConfigError(pw + ": give exactly one of L, theta");
        const double theta = params.contains("L") ? theta_from_robin(extended(params.at("L"), pw + ".L"), L0)
                                                  : number(params.at("theta"), pw + ".theta");
        if (!(theta >= 0.0 && theta < 2.0 * std::numbers::pi)) throw ConfigError(pw + ".theta: must lie in [0, 2 pi)");
        BoundaryCondition bc = BoundaryCondition::robin_theta(theta, L0);
        if (params.contains("upper_L") || params.contains("upper_theta")) {
            if (d.kind != Domain1D::Kind::interval) throw ConfigError(pw + ": upper-end conditions need an interval");
            if (params.contains("upper_L") && params.contains("upper_theta"))
                throw ConfigError(pw + ": give at most one of upper_L, upper_theta");
            std::get<RobinBC>(bc.variant).upper_theta =
                params.contains("upper_L") ? theta_from_robin(extended(params.at("upper_L"), pw + ".upper_L"), L0)
                                           : number(params.at("upper_theta"), pw + ".upper_theta");
        }
        return bc;
    }
    if (var == "u2") {
        if (params.contains("preset")) {
            const std::string pre = text(params.at("preset"), pw + ".preset");
            if (pre == "transparent") {
                check_keys(params, pw, {"preset"});
                return BoundaryCondition::u2(transparent_u2(), L0);
            }
            if (pre == "delta") {
                check_keys(params, pw, {"preset", "alpha"});
                if (!params.contains("alpha")) throw ConfigError(pw + ": delta preset needs alpha");
                return BoundaryCondition::u2(delta_u2(number(params.at("alpha"), pw + ".alpha"), L0), L0);
            }
            throw ConfigError(pw + ".preset: expected transparent or delta");
        }
        if (params.contains("U")) {
            check_keys(params, pw, {"U"});
            const Eigen::Matrix2cd U = parse_matrix(params.at("U"), pw + ".U");
            if (!is_unitary(U)) throw ConfigError(pw + ".U: not unitary to 1e-12");
            return BoundaryCondition::u2(U, L0);
        }
        check_keys(params, pw, {"theta_plus", "theta_minus", "L_plus", "L_minus", "mixing", "phase"});
        U2Params p;
        auto angle = [&](const char* th, const char* len) {
            if (params.contains(th) && params.contains(len))
                throw ConfigError(pw + ": give at most one of " + th + ", " + len);
            if (params.contains(len)) return theta_from_robin(extended(params.at(len), pw + "." + len), L0);
            return number_or(params, th, pw, 0.0);
        };
        p.theta_plus = angle("theta_plus", "L_plus");
        p.theta_minus = angle("theta_minus", "L_minus");
        p.mixing = number_or(params, "mixing", pw, 0.0);
        p.phase = number_or(params, "phase", pw, 0.0);
        return BoundaryCondition::u2(p, L0);
    }
    throw ConfigError(w + ".variant: expected robin or u2");
}

Side parse_side(const json& j, const std::string& where) {
    const auto s = side_from_string(text(j, where));
    if (!s) throw ConfigError(where + ": expected lower, upper, origin_minus or origin_plus");
    return *s;
}

Backend parse_backend(const std::string& s, const std::string& where) {
    if (s == "auto") return Backend::automatic;
    if (s == "shooting") return Backend::shooting;
    if (s == "closed_form") return Backend::closed_form;
    if (s == "digamma") return Backend::digamma;
    throw ConfigError(where + ": expected auto, shooting, closed_form or digamma");
}

void parse_classify(const json& j, ClassifyParams& p) {
    const std::string w = "command.classify";
    check_keys(j, w, {"sides", "mode"});
    if (j.contains("sides")) {
        if (!j.at("sides").is_array()) throw ConfigError(w + ".sides: expected an array");
        for (const auto& s : j.at("sides")) p.sides.push_back(parse_side(s, w + ".sides"));
    }
    if (j.contains("mode")) {
        const std::string m = text(j.at("mode"), w + ".mode");
        if (m == "numerical_only")
            p.mode = EvidenceMode::numerical_only;
        else if (m != "prefer_analytic")
            throw ConfigError(w + ".mode: expected prefer_analytic or numerical_only");
    }
}

void parse_refmodes(const json& j, RefmodesParams& p) {
    const std::string w = "command.refmodes";
    check_keys(j, w, {"side", "E0", "near", "far", "count"});
    if (j.contains("side")) p.side = parse_side(j.at("side"), w + ".side");
    if (j.contains("E0")) p.E0 = number(j.at("E0"), w + ".E0");
    p.near = number_or(j, "near", w, p.near);
    p.far = number_or(j, "far", w, p.far);
    if (j.contains("count")) p.count = static_cast<int>(integer(j.at("count"), w + ".count"));
    if (!(p.near > 0.0 && p.far > p.near)) throw ConfigError(w + ": need 0 < near < far");
    if (p.count < Grid::min_nodes) throw ConfigError(w + ".count: at least 32 nodes");
}

void parse_bound(const json& j, BoundParams& p) {
    const std::string w = "command.bound";
    check_keys(j, w, {"window", "max_states", "backend", "dump"});
    if (j.contains("window")) {
        const auto v = number_list(j.at("window"), w + ".window");
        if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError(w + ".window: expected [lo, hi] with lo < hi");
        p.window = {v[0], v[1]};
    }
    if (j.contains("max_states")) {
        const long n = integer(j.at("max_states"), w + ".max_states");
        if (n < 0) throw ConfigError(w + ".max_states: must be >= 0");
        p.max_states = static_cast<std::size_t>(n);
    }
    if (j.contains("backend")) p.backend = parse_backend(text(j.at("backend"), w + ".backend"), w + ".backend");
    if (j.contains("dump")) p.dump = text(j.at("dump"), w + ".dump");
}

void parse_scatter(const json& j, ScatterParams& p) {
    const std::string w = "command.scatter";
    check_keys(j, w, {"k", "filter"});
    if (j.contains("k")) p.k = values(j.at("k"), w + ".k");
    if (j.contains("filter")) p.filter = boolean(j.at("filter"), w + ".filter");
    for (double k : p.k)
        if (!(k > 0.0)) throw ConfigError(w + ".k: wavenumbers must be positive");
}

void parse_evolve(const json& j, EvolveParams& p) {
    const std::string w = "command.evolve";
    check_keys(j, w, {"packet", "dt", "T", "h", "extent", "snapshot_every", "snapshot_times", "measure_delay"});
    if (j.contains("packet")) {
        const json& pk = j.at("packet");
        check_keys(pk, w + ".packet", {"x0", "sigma", "k0"});
        p.x0 = number_or(pk, "x0", w + ".packet", p.x0);
        p.sigma = number_or(pk, "sigma", w + ".packet", p.sigma);
        p.k0 = number_or(pk, "k0", w + ".packet", p.k0);
    }
    p.dt = number_or(j, "dt", w, p.dt);
    p.T = number_or(j, "T", w, p.T);
    p.disc.h = number_or(j, "h", w, p.disc.h);
    p.disc.extent = number_or(j, "extent", w, p.disc.extent);
    if (j.contains("snapshot_every")) p.snapshot_every = integer(j.at("snapshot_every"), w + ".snapshot_every");
    if (j.contains("snapshot_times")) p.snapshot_times = number_list(j.at("snapshot_times"), w + ".snapshot_times");
    if (j.contains("measure_delay")) p.measure_delay = boolean(j.at("measure_delay"), w + ".measure_delay");
    if (!(p.sigma > 0.0) || !(p.dt > 0.0) || !(p.T >= 0.0) || p.snapshot_every < 0)
        throw ConfigError(w + ": need sigma > 0, dt > 0, T >= 0, snapshot_every >= 0");
}

}  // namespace

std::vector<double> Sweep::values() const {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) {
        const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
        v.push_back(log ? start * std::pow(stop / start, f) : start + (stop - start) * f);
    }
    return v;
}

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"classify", "refmodes", "bound", "scatter", "evolve"};
    return names;
}

Problem parse_problem(const json& j) {
    check_keys(j, "problem", {"domain", "potential", "weight", "bc", "E0", "L0", "units"});
    for (const char* k : {"domain", "potential", "bc"})
        if (!j.contains(k)) throw ConfigError(std::string("problem: missing '") + k + "'");
    const Domain1D d = parse_domain(j.at("domain"));
    const PotentialSpec v = parse_potential(j.at("potential"));
    KineticWeight w;
    if (j.contains("weight")) {
        check_keys(j.at("weight"), "problem.weight", {"coefficient", "power"});
        w.coefficient = number_or(j.at("weight"), "coefficient", "problem.weight", 1.0);
        w.power = number_or(j.at("weight"), "power", "problem.weight", 0.0);
        if (!(w.coefficient > 0.0)) throw ConfigError("problem.weight.coefficient: must be positive");
    }
    const double L0 = number_or(j, "L0", "problem", 1.0);
    if (!(L0 > 0.0)) throw ConfigError("problem.L0: must be positive");
    const BoundaryCondition bc = parse_bc(j.at("bc"), d, L0);
    const double E0 = number_or(j, "E0", "problem", 0.0);
    Problem p = make_problem(d, v, bc, E0, w);
    if (j.contains("units")) {
        check_keys(j.at("units"), "problem.units", {"hbar", "mass"});
        Units u;
        u.hbar = number_or(j.at("units"), "hbar", "problem.units", 1.0);
        u.mass = number_or(j.at("units"), "mass", "problem.units", 0.5);
        p = to_internal_units(p, u);
    }
    return p;
}

RunConfig parse_config(const json& j) {
    check_keys(j, "config", {"problem", "command", "output"});
    if (!j.contains("problem")) throw ConfigError("config: missing 'problem'");
    RunConfig rc;
    rc.problem = parse_problem(j.at("problem"));
    if (j.at("problem").contains("units")) {
        const json& u = j.at("problem").at("units");
        rc.units = Units{number_or(u, "hbar", "problem.units", 1.0), number_or(u, "mass", "problem.units", 0.5)};
    }
    if (j.contains("command")) {
        const json& c = j.at("command");
        check_keys(c, "command", {"name", "classify", "refmodes", "bound", "scatter", "evolve", "sweep"});
        if (c.contains("name")) rc.command = text(c.at("name"), "command.name");
        if (c.contains("classify")) parse_classify(c.at("classify"), rc.classify);
        if (c.contains("refmodes")) parse_refmodes(c.at("refmodes"), rc.refmodes);
        if (c.contains("bound")) parse_bound(c.at("bound"), rc.bound);
        if (c.contains("scatter")) parse_scatter(c.at("scatter"), rc.scatter);
        if (c.contains("evolve")) parse_evolve(c.at("evolve"), rc.evolve);
        if (c.contains("sweep")) {
            const json& s = c.at("sweep");
            check_keys(s, "command.sweep", {"parameter", "values", "start", "stop", "count", "scale"});
            ParameterSweep ps;
            ps.parameter = text(s.value("parameter", json()), "command.sweep.parameter");
            if (s.contains("values")) {
                for (const char* k : {"start", "stop", "count", "scale"})
                    if (s.contains(k)) throw ConfigError("command.sweep: give either values or start/stop/count");
                ps.values = number_list(s.at("values"), "command.sweep.values");
            } else {
                json g = s;
                g.erase("parameter");
                ps.values = parse_sweep(g, "command.sweep").values();
            }
            // Fail early on parameters that do not fit the problem.
            with_parameter(rc.problem, ps.parameter, ps.values.empty() ? 0.0 : ps.values.front());
            rc.sweep = std::move(ps);
        }
    }
    if (!rc.command.empty() &&
        std::find(command_names().begin(), command_names().end(), rc.command) == command_names().end())
        throw ConfigError("command.name: unknown command '" + rc.command + "'");
    if (rc.units) {
        rc.bound.window.lo = energy_to_internal(rc.bound.window.lo, *rc.units);
        rc.bound.window.hi = energy_to_internal(rc.bound.window.hi, *rc.units);
        if (rc.refmodes.E0) rc.refmodes.E0 = energy_to_internal(*rc.refmodes.E0, *rc.units);
        rc.evolve.dt = time_to_internal(rc.evolve.dt, *rc.units);
        rc.evolve.T = time_to_internal(rc.evolve.T, *rc.units);
        for (double& t : rc.evolve.snapshot_times) t = time_to_internal(t, *rc.units);
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        check_keys(o, "output", {"format", "path", "precision"});
        if (o.contains("format")) {
            const std::string f = text(o.at("format"), "output.format");
            if (f == "json")
                rc.output.format = OutputSpec::Format::json;
            else if (f != "csv")
                throw ConfigError("output.format: expected csv or json");
        }
        if (o.contains("path")) rc.output.path = text(o.at("path"), "output.path");
        if (o.contains("precision")) {
            const long p = integer(o.at("precision"), "output.precision");
            if (p < 1 || p > 17) throw ConfigError("output.precision: must lie in [1, 17]");
            rc.output.precision = static_cast<int>(p);
        }
    }
    return rc;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    json j;
    try {
        j = json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

Problem with_parameter(const Problem& p, const std::string& parameter, double value) {
    Problem q = p;
    if (p.bc.is_robin()) {
        RobinBC r = p.bc.robin();
        if (parameter == "L")
            r.theta = theta_from_robin(ExtendedReal(value), p.bc.L0);
        else if (parameter == "theta")
            r.theta = value;
        else
            throw ConfigError("sweep parameter '" + parameter + "' does not apply to a Robin condition (use L or theta)");
        q.bc.variant = r;
    } else {
        if (parameter == "alpha") {
            q.bc.variant = U2BC{delta_u2(value, p.bc.L0)};
        } else {
            U2Params u = params_from_u2(p.bc.unitary());
            if (parameter == "theta_plus")
                u.theta_plus = value;
            else if (parameter == "theta_minus")
                u.theta_minus = value;
            else if (parameter == "L_plus")
                u.theta_plus = theta_from_robin(ExtendedReal(value), p.bc.L0);
            else if (parameter == "L_minus")
                u.theta_minus = theta_from_robin(ExtendedReal(value), p.bc.L0);
            else if (parameter == "mixing")
                u.mixing = value;
            else if (parameter == "phase")
                u.phase = value;
            else
                throw ConfigError("sweep parameter '" + parameter + "' does not apply to a U(2) condition");
            q.bc.variant = U2BC{u2_from_params(u)};
        }
    }
    validate(q);
    return q;
}

}  // namespace sax
