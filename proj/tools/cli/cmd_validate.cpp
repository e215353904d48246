#include "commands.hpp"
#include "common.hpp"
#include "harness.hpp"

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace boundpath::cli {

namespace {

struct ValidateArgs {
  CommonOptions common;
  std::vector<std::string> inputs;
  int samples = 200;
  int max_elements = 5000;
  std::string out;
  std::string inject = "none";
};

std::vector<std::filesystem::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::filesystem::path> out;
  for (const auto& in : inputs) {
    const std::filesystem::path p(in);
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto& entry : std::filesystem::directory_iterator(p)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".json" || ext == ".node")) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (std::filesystem::exists(p)) {
      out.push_back(p);
    } else {
      throw Error(ErrorCode::Io, "no such file or directory: " + in);
    }
  }
  return out;
}

template <int Dim>
std::string replay_command(const std::string& mesh, const nlohmann::json& rec) {
  std::ostringstream cmd;
  cmd << std::setprecision(17) << "boundpath query " << mesh << " --point \"";
  for (int k = 0; k < Dim; ++k) cmd << (k ? " " : "") << rec["point"][k].get<double>();
  cmd << "\" --element " << rec["element"].get<int>();
  if (!rec["exclude_vertex"].is_null()) cmd << " --exclude-vertex " << rec["exclude_vertex"].get<int>();
  return cmd.str();
}

struct MeshReport {
  std::string path;
  int elements = 0;
  int samples = 0;
  int self_queries = 0;
  bool skipped = false;
  std::vector<nlohmann::json> mismatches;
};

template <int Dim>
MeshReport validate_mesh(const SimplexMesh<Dim>& mesh, const std::string& path, std::size_t index,
                         const ValidateArgs& a) {
  MeshReport r;
  r.path = path;
  r.elements = static_cast<int>(mesh.num_elements());
  if (r.elements > a.max_elements) {
    r.skipped = true;
    return r;
  }
  std::seed_seq seq{a.common.seed, static_cast<unsigned>(index)};
  std::mt19937_64 rng(seq);
  const auto samples = draw_samples(mesh, a.samples, rng);
  r.samples = static_cast<int>(samples.size());
  const BoundaryBvh<Dim> bvh(mesh);
  const QueryConfig qc = a.common.query_config();
  const Mutant mutant = a.inject == "skip-validity" ? Mutant::SkipValidity : Mutant::None;
  std::vector<Comparison> results(samples.size());
  parallel_for(static_cast<int>(samples.size()), a.common.threads, [&](int i) {
    results[static_cast<std::size_t>(i)] = compare_with_oracle(mesh, bvh, samples[static_cast<std::size_t>(i)], qc, mutant);
  });
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].exclude_vertex) ++r.self_queries;
    if (results[i].match) continue;
    nlohmann::json m = results[i].record;
    m["mesh"] = path;
    m["sample"] = i;
    m["replay"] = replay_command<Dim>(path, m);
    r.mismatches.push_back(std::move(m));
  }
  return r;
}

int run_validate(const ValidateArgs& a) {
  const auto files = expand_inputs(a.inputs);
  if (files.empty()) throw Error(ErrorCode::Io, "no meshes found");
  std::vector<MeshReport> reports;
  for (std::size_t i = 0; i < files.size(); ++i) {
    const AnyMesh mesh = load_mesh(files[i]);
    reports.push_back(
        std::visit([&](const auto& m) { return validate_mesh(m, files[i].string(), i, a); }, mesh));
  }

  std::size_t total = 0, samples = 0;
  nlohmann::json doc{{"meshes", nlohmann::json::array()}};
  for (const auto& r : reports) {
    if (r.skipped) {
      std::cout << r.path << ": skipped, " << r.elements << " elements exceeds --max-elements\n";
    } else {
      std::cout << r.path << ": " << r.samples << " samples (" << r.self_queries << " self-queries), "
                << r.mismatches.size() << " mismatches\n";
    }
    total += r.mismatches.size();
    samples += static_cast<std::size_t>(r.samples);
    doc["meshes"].push_back({{"path", r.path},
                             {"elements", r.elements},
                             {"skipped", r.skipped},
                             {"samples", r.samples},
                             {"self_queries", r.self_queries},
                             {"mismatches", r.mismatches.size()}});
  }
  doc["samples"] = samples;
  doc["mismatches"] = total;
  std::cout << samples << " samples, " << total << " mismatches\n";

  if (!a.out.empty()) {
    const std::filesystem::path dir(a.out);
    std::filesystem::create_directories(dir / "replays");
    write_text_file(dir / "report.json", doc.dump(2) + "\n");
    int k = 0;
    for (const auto& r : reports) {
      for (const auto& m : r.mismatches) {
        std::ostringstream name;
        name << "mismatch_" << std::setw(5) << std::setfill('0') << k++ << ".json";
        write_text_file(dir / "replays" / name.str(), m.dump(2) + "\n");
      }
    }
    RunManifest manifest;
    manifest.command = "validate";
    for (const auto& f : files) manifest.inputs.push_back(f.string());
    manifest.overrides = a.common.overrides();
    manifest.overrides["samples"] = a.samples;
    manifest.overrides["max_elements"] = a.max_elements;
    if (a.inject != "none") manifest.overrides["inject"] = a.inject;
    manifest.seed = a.common.seed;
    manifest.output_dir = a.out;
    manifest.argv = invocation();
    write_manifest(manifest);
  }
  return total == 0 ? kExitOk : kExitFindings;
}

}  // namespace

void add_validate(CLI::App& app, Command& selected) {
  auto a = std::make_shared<ValidateArgs>();
  auto* sub = app.add_subcommand("validate", "Compare engine answers against the brute-force oracle");
  sub->add_option("inputs", a->inputs, "Mesh files or directories of meshes")->required();
  sub->add_option("--samples,-n", a->samples, "Query points per mesh")->check(CLI::NonNegativeNumber);
  sub->add_option("--max-elements", a->max_elements, "Skip meshes larger than this")->check(CLI::PositiveNumber);
  sub->add_option("--out,-o", a->out, "Directory for report.json, replays/ and manifest.json");
  sub->add_option("--inject", a->inject, "Harness self-test: run a deliberately broken engine")
      ->check(CLI::IsMember({"none", "skip-validity"}))
      ->group("Testing");
  a->common.add_to(*sub, false);
  sub->callback([a, &selected] { selected = [a] { return run_validate(*a); }; });
}

}  // namespace boundpath::cli
