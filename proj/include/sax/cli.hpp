#pragma once

#include <string>
#include <vector>

#include "sax/config.hpp"

namespace sax {

// Files produced by one run. Nothing is written until every computation has succeeded.
struct Artifact {
    std::string path;  // empty: standard output
    std::string content;
};

// Runs the configured command and returns its artifacts. Throws ConfigError or NumericalError.
std::vector<Artifact> run(const RunConfig& config);

// Writes content to path through a temporary file in the same directory and a rename.
void write_atomically(const std::string& path, const std::string& content);

// Command-line entry point. Exit codes: 0 success, 2 configuration error, 3 numerical failure.
// Errors are reported on stderr as one JSON object {"error": {"stage", "type", "message"}}.
int run_cli(int argc, char** argv);

}  // namespace sax
