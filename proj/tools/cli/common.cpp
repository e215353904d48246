#include "common.hpp"

#include "boundpath/aabb_tree.hpp"
#include "boundpath/geometry.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#ifndef BOUNDPATH_VERSION
#define BOUNDPATH_VERSION "0.0.0"
#endif

namespace boundpath::cli {

void CommonOptions::add_to(CLI::App& app, bool with_outputs) {
  app.add_option("--eps-i", eps_i, "Intersection tolerance for exit-face tests")->envname("BOUNDPATH_EPS_I");
  app.add_option("--eps-r", eps_r, "Culling tolerance for the feasible-region check")->envname("BOUNDPATH_EPS_R");
  app.add_flag("--no-culling", no_culling, "Disable feasible-region culling")->envname("BOUNDPATH_NO_CULLING");
  app.add_flag("--allow-backward", allow_backward, "Force backward travel on even without inverted elements")
      ->envname("BOUNDPATH_ALLOW_BACKWARD");
  app.add_option("--seed", seed, "Seed for every random draw")->envname("BOUNDPATH_SEED");
  app.add_option("--threads", threads, "Worker threads for batch queries")
      ->envname("BOUNDPATH_THREADS")
      ->check(CLI::Range(1, 1024));
  if (with_outputs) {
    app.add_option("--path-obj", path_obj, "Write each shortest path as a two-vertex OBJ polyline");
    app.add_option("--trace", trace, "Write the element trace of each accepted traversal");
  }
}

QueryConfig CommonOptions::query_config() const {
  QueryConfig q;
  if (eps_i) q.traversal.epsilon_i = *eps_i;
  if (eps_r) q.epsilon_r = *eps_r;
  q.enable_culling = !no_culling;
  if (allow_backward) q.backward_override = true;
  return q;
}

nlohmann::json CommonOptions::overrides() const {
  nlohmann::json j = nlohmann::json::object();
  if (eps_i) j["eps_i"] = *eps_i;
  if (eps_r) j["eps_r"] = *eps_r;
  if (no_culling) j["no_culling"] = true;
  if (allow_backward) j["allow_backward"] = true;
  j["threads"] = threads;
  return j;
}

template <int Dim>
Vec<Dim> parse_point(const std::string& text) {
  std::string cleaned = text;
  std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
  std::istringstream in(cleaned);
  Vec<Dim> p;
  for (int k = 0; k < Dim; ++k) {
    if (!(in >> p[k])) throw CLI::ValidationError("point", "expected " + std::to_string(Dim) + " numbers: '" + text + "'");
  }
  std::string rest;
  if (in >> rest) throw CLI::ValidationError("point", "trailing input in '" + text + "'");
  if (!p.allFinite()) throw CLI::ValidationError("point", "non-finite coordinate in '" + text + "'");
  return p;
}

template Vec2 parse_point<2>(const std::string&);
template Vec3 parse_point<3>(const std::string&);

template <int Dim>
int locate_element(const SimplexMesh<Dim>& mesh, const Vec<Dim>& p, double tolerance) {
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
    if (element_contains(mesh, e, p, tolerance)) return e;
  }
  return -1;
}

template int locate_element<2>(const TriMesh2&, const Vec2&, double);
template int locate_element<3>(const TetMesh&, const Vec3&, double);

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  threads = std::clamp(threads, 1, std::max(1, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

std::string tool_version() { return BOUNDPATH_VERSION; }

void write_manifest(const RunManifest& m) {
  nlohmann::json j{{"command", m.command},
                   {"inputs", m.inputs},
                   {"overrides", m.overrides},
                   {"seed", m.seed},
                   {"output_dir", m.output_dir},
                   {"tool_version", tool_version()},
                   {"argv", m.argv}};
  std::filesystem::create_directories(m.output_dir);
  write_text_file(std::filesystem::path(m.output_dir) / "manifest.json", j.dump(2) + "\n");
}

template <int Dim>
std::vector<std::pair<int, int>> penetrating_vertices(const SimplexMesh<Dim>& mesh) {
  std::vector<Aabb<Dim>> boxes(mesh.num_elements());
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
    for (int v : mesh.element(e)) boxes[static_cast<std::size_t>(e)].extend(mesh.vertex(v));
  }
  AabbTree<Dim> tree(boxes);
  std::vector<std::pair<int, int>> out;
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
    Aabb<Dim> probe;
    probe.extend(mesh.vertex(v));
    int found = -1;
    tree.query_overlap(probe, [&](int e) {
      if (mesh.flipped_or_flat(e)) return;
      const auto& el = mesh.element(e);
      if (std::find(el.begin(), el.end(), v) != el.end()) return;
      const auto w = barycentric(mesh, e, mesh.vertex(v));
      if (!w || *std::min_element(w->begin(), w->end()) <= 1e-9) return;
      if (found < 0 || e < found) found = e;
    });
    if (found >= 0) out.emplace_back(v, found);
  }
  return out;
}

template std::vector<std::pair<int, int>> penetrating_vertices<2>(const TriMesh2&);
template std::vector<std::pair<int, int>> penetrating_vertices<3>(const TetMesh&);

}  // namespace boundpath::cli
