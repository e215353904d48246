#include "commands.hpp"
#include "common.hpp"

#include "boundpath/types.hpp"

#include <iostream>

namespace boundpath::cli {

namespace {
std::vector<std::string> g_invocation;
}

const std::vector<std::string>& invocation() { return g_invocation; }
void set_invocation(std::vector<std::string> args) { g_invocation = std::move(args); }

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Shortest interior paths to the boundary of self-intersecting simplicial meshes", "boundpath"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  Command selected;
  add_convert(app, selected);
  add_generate(app, selected);
  add_query(app, selected);
  add_validate(app, selected);
  add_fuzz(app, selected);
  add_simulate(app, selected);
  add_bench(app, selected);
  add_replay(app, selected);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  set_invocation(std::vector<std::string>(args.begin() + 1, args.end()));
  try {
    return selected ? selected() : kExitUsage;
  } catch (const CLI::Error& e) {
    std::cerr << "boundpath: " << e.what() << "\nRun with --help for usage.\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "boundpath: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "boundpath: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace boundpath::cli
