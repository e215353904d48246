#include "cli/commands.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return boundpath::cli::run_cli(args);
}
