#pragma once

#include "boundpath/closest_query.hpp"
#include "boundpath/mesh.hpp"
#include "boundpath/mesh_io.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace boundpath::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitUsage = 2;

/// Query tuning shared by every subcommand. Each flag also reads
/// BOUNDPATH_<NAME> from the environment; the command line wins.
struct CommonOptions {
  std::optional<double> eps_i;
  std::optional<double> eps_r;
  bool no_culling = false;
  bool allow_backward = false;
  unsigned seed = 1;
  int threads = 1;
  std::string path_obj;
  std::string trace;

  void add_to(CLI::App& app, bool with_outputs);
  QueryConfig query_config() const;
  nlohmann::json overrides() const;
};

/// Parses "x y z" (or "x,y,z"). Throws CLI::ValidationError on bad input.
template <int Dim>
Vec<Dim> parse_point(const std::string& text);

/// Lowest-index element containing p, or -1.
template <int Dim>
int locate_element(const SimplexMesh<Dim>& mesh, const Vec<Dim>& p, double tolerance = 1e-12);

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Callers write
/// results into slot i so output order never depends on scheduling.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

/// Records how an output directory was produced.
struct RunManifest {
  std::string command;
  std::vector<std::string> inputs;
  nlohmann::json overrides = nlohmann::json::object();
  unsigned seed = 0;
  std::string output_dir;
  std::vector<std::string> argv;
};

void write_manifest(const RunManifest& manifest);
std::string tool_version();

/// Vertices lying strictly inside some element they are not part of.
template <int Dim>
std::vector<std::pair<int, int>> penetrating_vertices(const SimplexMesh<Dim>& mesh);

}  // namespace boundpath::cli
