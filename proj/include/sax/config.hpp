#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sax/classify.hpp"
#include "sax/model.hpp"
#include "sax/spectrum.hpp"
#include "sax/timeevo.hpp"

namespace sax {

// {start, stop, count, scale: linear | log}
struct Sweep {
    double start = 0.0;
    double stop = 0.0;
    int count = 1;
    bool log = false;
    std::vector<double> values() const;
};

// A boundary parameter varied across runs: L, theta (half line), theta_plus, theta_minus,
// mixing, phase (line, U(2) parameters) or alpha (line, delta interaction).
struct ParameterSweep {
    std::string parameter;
    std::vector<double> values;
};

struct ClassifyParams {
    std::vector<Side> sides;  // empty: every side of the domain
    EvidenceMode mode = EvidenceMode::prefer_analytic;
};

struct RefmodesParams {
    Side side = Side::lower;
    std::optional<double> E0;
    double near = 1e-6;  // distances from the endpoint
    double far = 1.0;
    int count = 200;
};

struct BoundParams {
    EnergyWindow window{-10.0, -1e-3};
    std::size_t max_states = 0;
    Backend backend = Backend::automatic;
    std::optional<std::string> dump;  // eigenfunction CSV prefix
};

struct ScatterParams {
    std::vector<double> k;
    bool filter = false;
};

struct EvolveParams {
    double x0 = 20.0;
    double sigma = 2.0;
    double k0 = -1.0;
    double dt = 0.01;
    double T = 20.0;
    Discretization disc;
    long snapshot_every = 0;
    std::vector<double> snapshot_times;
    bool measure_delay = false;
};

struct OutputSpec {
    enum class Format { csv, json };
    Format format = Format::csv;
    std::string path;  // empty: standard output
    int precision = 12;
};

struct RunConfig {
    Problem problem;  // internal units
    std::optional<Units> units;  // set when the config is in physical units
    std::string command;
    ClassifyParams classify;
    RefmodesParams refmodes;
    BoundParams bound;
    ScatterParams scatter;
    EvolveParams evolve;
    std::optional<ParameterSweep> sweep;
    OutputSpec output;
};

// Strict parsing: unknown keys, wrong types and out-of-range values throw ConfigError.
Problem parse_problem(const nlohmann::json& j);
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// The problem with one boundary parameter replaced (see ParameterSweep).
Problem with_parameter(const Problem& p, const std::string& parameter, double value);

const std::vector<std::string>& command_names();

}  // namespace sax
