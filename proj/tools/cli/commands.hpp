#pragma once

#include <CLI11.hpp>

#include <functional>
#include <string>
#include <vector>

namespace boundpath::cli {

using Command = std::function<int()>;

/// Every add_* registers a subcommand whose callback stores its runner in
/// `selected`; main runs it after parsing.
void add_convert(CLI::App& app, Command& selected);
void add_generate(CLI::App& app, Command& selected);
void add_query(CLI::App& app, Command& selected);
void add_validate(CLI::App& app, Command& selected);
void add_fuzz(CLI::App& app, Command& selected);
void add_simulate(CLI::App& app, Command& selected);
void add_bench(CLI::App& app, Command& selected);
void add_replay(CLI::App& app, Command& selected);

/// Full command line of this invocation, recorded in manifests.
const std::vector<std::string>& invocation();
void set_invocation(std::vector<std::string> args);

/// Parses and runs a command line. Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace boundpath::cli
