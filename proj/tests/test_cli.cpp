#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sax/cli.hpp"
#include "sax/config.hpp"
#include "sax/errors.hpp"

using namespace sax;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("sax_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << body;
    return p;
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

// Runs the sax binary named by SAX_CLI.
Result run_binary(const std::string& args) {
    const char* bin = std::getenv("SAX_CLI");
    REQUIRE(bin != nullptr);
    const fs::path out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
    const std::string cmd = std::string(bin) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

const char* free_bound = R"({
  "problem": {"domain": "half_line", "potential": {"family": "free", "params": {}},
              "bc": {"variant": "robin", "params": {"L": 1}}},
  "command": {"name": "bound"}
})";

const char* classify_lp = R"({
  "problem": {"domain": "half_line", "potential": {"family": "inverse_square", "params": {"c": 1.3125}},
              "bc": {"variant": "robin", "params": {"L": "inf"}}},
  "command": {"name": "classify", "classify": {"sides": ["lower"]}},
  "output": {"format": "json"}
})";

const char* line_scatter = R"({
  "problem": {"domain": "line", "potential": {"family": "free", "params": {}},
              "bc": {"variant": "u2", "params": {"preset": "delta", "alpha": 1}}},
  "command": {"name": "scatter", "scatter": {"k": {"start": 0.1, "stop": 10, "count": 9, "scale": "log"}},
              "sweep": {"parameter": "alpha", "values": [0.5, 1, 2, 4]}}
})";

}  // namespace

TEST_CASE("bound on the free half line") {
    const Result r = run_binary("--config " + write_config("bound.json", free_bound).string());
    CHECK(r.code == 0);
    CHECK(r.out == "n,E,nodes,backend\n1,-1,0,ClosedForm\n");
}

TEST_CASE("classify reports limit point") {
    const Result r = run_binary("--config " + write_config("classify.json", classify_lp).string());
    CHECK(r.code == 0);
    CHECK(r.out.find("\"verdict\": \"LimitPoint\"") != std::string::npos);
    CHECK(r.out.find("\"side\": \"lower\"") != std::string::npos);
}

TEST_CASE("malformed config leaves no output") {
    const fs::path out = scratch() / "never.csv";
    fs::remove(out);
    const Result r = run_binary("--config " + write_config("bad.json", "{\"problem\": {").string() + " --out " + out.string());
    CHECK(r.code == 2);
    CHECK_FALSE(fs::exists(out));
    CHECK(r.err.find("\"stage\": \"config\"") != std::string::npos);

    const Result u = run_binary("--config " + write_config("unknown.json", R"({"problem": {"domain": "half_line", "colour": 1}})").string());
    CHECK(u.code == 2);
    CHECK(u.err.find("colour") != std::string::npos);

    CHECK(run_binary("--config " + write_config("b2.json", free_bound).string() + " --format xml").code == 2);
    CHECK(run_binary("--command bound").code == 2);
}

TEST_CASE("computation errors name their stage") {
    const std::string coulomb = R"({
      "problem": {"domain": "half_line", "potential": {"family": "coulomb", "params": {"g": -2}},
                  "bc": {"variant": "robin", "params": {"L": 0}}},
      "command": {"name": "scatter", "scatter": {"k": [1.0]}}
    })";
    const fs::path out = scratch() / "coulomb.csv";
    const Result r = run_binary("--config " + write_config("coulomb.json", coulomb).string() + " --out " + out.string());
    CHECK(r.code == 2);
    CHECK(r.err.find("\"stage\": \"scatter\"") != std::string::npos);
    CHECK_FALSE(fs::exists(out));
}

TEST_CASE("output is reproducible and ordered") {
    const fs::path cfg = write_config("scatter.json", line_scatter);
    const fs::path a = scratch() / "a.csv", b = scratch() / "b.csv";
    REQUIRE(run_binary("--config " + cfg.string() + " --out " + a.string() + " --quiet").code == 0);
    REQUIRE(run_binary("--config " + cfg.string() + " --out " + b.string() + " --quiet").code == 0);
    const std::string ta = slurp(a);
    CHECK(ta == slurp(b));
    std::istringstream in(ta);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("alpha,k,", 0) == 0);
    int rows = 0;
    double last_alpha = -1;
    while (std::getline(in, line)) {
        const double alpha = std::stod(line.substr(0, line.find(',')));
        CHECK(alpha >= last_alpha);
        last_alpha = alpha;
        ++rows;
    }
    CHECK(rows == 36);
}

TEST_CASE("command override and bound sweep") {
    const std::string cfg = R"({
      "problem": {"domain": "half_line", "potential": {"family": "free", "params": {}},
                  "bc": {"variant": "robin", "params": {"L": 1}}},
      "command": {"name": "classify", "sweep": {"parameter": "L", "values": [0.5, 2]}}
    })";
    const Result r = run_binary("--config " + write_config("override.json", cfg).string() + " --command bound");
    CHECK(r.code == 0);
    CHECK(r.out == "L,n,E,nodes,backend\n0.5,1,-4,0,ClosedForm\n2,1,-0.25,0,ClosedForm\n");
}

TEST_CASE("config parsing") {
    const RunConfig rc = parse_config(nlohmann::json::parse(line_scatter));
    CHECK(rc.command == "scatter");
    REQUIRE(rc.scatter.k.size() == 9);
    CHECK(rc.scatter.k.front() == doctest::Approx(0.1));
    CHECK(rc.scatter.k[4] == doctest::Approx(1.0));
    CHECK(rc.scatter.k.back() == doctest::Approx(10.0));
    REQUIRE(rc.sweep);
    CHECK(rc.sweep->values.size() == 4);
    CHECK(rc.output.precision == 12);

    const Sweep s{1.0, 3.0, 5, false};
    CHECK(s.values() == std::vector<double>{1.0, 1.5, 2.0, 2.5, 3.0});

    auto j = nlohmann::json::parse(free_bound);
    j["output"] = {{"precision", 40}};
    CHECK_THROWS_AS(parse_config(j), ConfigError);
    j = nlohmann::json::parse(free_bound);
    j["problem"]["bc"]["params"]["theta"] = 1.0;
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    // Physical units: hbar = 2, m = 1 gives hbar^2 / 2m = 2.
    j = nlohmann::json::parse(free_bound);
    j["problem"]["units"] = {{"hbar", 2.0}, {"mass", 1.0}};
    j["problem"]["potential"] = {{"family", "coulomb"}, {"params", {{"g", -4.0}}}};
    const RunConfig ph = parse_config(j);
    CHECK(std::get<potential::Coulomb>(ph.problem.potential.family()).g == doctest::Approx(-2.0));
    REQUIRE(ph.units);
}

TEST_CASE("with_parameter") {
    const RunConfig rc = parse_config(nlohmann::json::parse(free_bound));
    const Problem p = with_parameter(rc.problem, "L", 0.25);
    CHECK(robin_from_theta(p.bc.robin().theta).value() == doctest::Approx(0.25));
    CHECK_THROWS_AS(with_parameter(rc.problem, "alpha", 1.0), ConfigError);
}

TEST_CASE("atomic writes") {
    const fs::path p = scratch() / "atomic.txt";
    write_atomically(p.string(), "one\n");
    write_atomically(p.string(), "two\n");
    CHECK(slurp(p) == "two\n");
    for (const auto& e : fs::directory_iterator(scratch()))
        CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
    CHECK_THROWS_AS(write_atomically((scratch() / "missing" / "x.txt").string(), "x"), ConfigError);
}
