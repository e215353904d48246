#include "commands.hpp"
#include "common.hpp"

#include <iostream>
#include <memory>

namespace boundpath::cli {

namespace {

struct ReplayArgs {
  std::string manifest;
  std::string out;
};

int run_replay(const ReplayArgs& a) {
  const nlohmann::json m = nlohmann::json::parse(read_text_file(a.manifest));
  if (!m.contains("argv") || !m["argv"].is_array() || m["argv"].empty())
    throw Error(ErrorCode::ParseError, a.manifest + ": manifest has no argv");
  std::vector<std::string> args{"boundpath"};
  for (const auto& tok : m["argv"]) args.push_back(tok.get<std::string>());
  if (args[1] == "replay") throw Error(ErrorCode::InvalidArgument, "refusing to replay a replay");

  if (!a.out.empty()) {
    bool replaced = false;
    for (std::size_t i = 1; i < args.size(); ++i) {
      if ((args[i] == "--out" || args[i] == "-o") && i + 1 < args.size()) {
        args[i + 1] = a.out;
        replaced = true;
      } else if (args[i].rfind("--out=", 0) == 0) {
        args[i] = "--out=" + a.out;
        replaced = true;
      }
    }
    if (!replaced) {
      args.push_back("--out");
      args.push_back(a.out);
    }
  }
  std::cerr << "replaying:";
  for (std::size_t i = 1; i < args.size(); ++i) std::cerr << ' ' << args[i];
  std::cerr << '\n';
  return run_cli(args);
}

}  // namespace

void add_replay(CLI::App& app, Command& selected) {
  auto a = std::make_shared<ReplayArgs>();
  auto* sub = app.add_subcommand("replay", "Re-run the command recorded in a manifest.json");
  sub->add_option("manifest", a->manifest, "manifest.json written by an earlier run")->required();
  sub->add_option("--out,-o", a->out, "Write outputs here instead of the recorded directory");
  sub->callback([a, &selected] { selected = [a] { return run_replay(*a); }; });
}

}  // namespace boundpath::cli
