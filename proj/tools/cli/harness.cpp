#include "harness.hpp"

#include "common.hpp"

#include "boundpath/geometry.hpp"
#include "boundpath/oracle.hpp"
#include "boundpath/traversal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boundpath::cli {

namespace {

template <int Dim>
nlohmann::json vec_json(const Vec<Dim>& v) {
  nlohmann::json a = nlohmann::json::array();
  for (int k = 0; k < Dim; ++k) a.push_back(v[k]);
  return a;
}

template <int Dim>
std::optional<ClosestBoundaryResult<Dim>> nearest_unchecked(const SimplexMesh<Dim>& mesh, const Vec<Dim>& p,
                                                            std::optional<int> exclude) {
  std::optional<ClosestBoundaryResult<Dim>> best;
  const auto& faces = mesh.boundary_faces();
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const auto& bf = faces[static_cast<std::size_t>(f)];
    if (mesh.flipped_or_flat(bf.element)) continue;
    if (exclude && std::find(bf.vertices.begin(), bf.vertices.end(), *exclude) != bf.vertices.end()) continue;
    FacePoint<Dim> cp;
    try {
      cp = closest_point_on_face(mesh, f, p);
    } catch (const Error&) {
      continue;
    }
    const double d = (cp.point - p).norm();
    if (d <= 1e-14) continue;
    if (!best || d < best->distance) best = ClosestBoundaryResult<Dim>{cp.point, f, cp.feature, d, {}};
  }
  return best;
}

}  // namespace

template <int Dim>
std::vector<Sample<Dim>> draw_samples(const SimplexMesh<Dim>& mesh, int count, std::mt19937_64& rng) {
  std::vector<Sample<Dim>> out;
  if (count <= 0) return out;
  auto pen = penetrating_vertices(mesh);
  std::shuffle(pen.begin(), pen.end(), rng);
  const std::size_t self = std::min<std::size_t>(pen.size(), static_cast<std::size_t>(count / 2));
  for (std::size_t i = 0; i < self; ++i) out.push_back({mesh.vertex(pen[i].first), pen[i].second, pen[i].first});
  std::vector<int> usable;
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e)
    if (!mesh.flipped_or_flat(e)) usable.push_back(e);
  if (usable.empty()) return out;
  std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
  while (static_cast<int>(out.size()) < count) {
    const int e = usable[pick(rng)];
    out.push_back({gen::random_point_in_element(mesh, e, rng), e, std::nullopt});
  }
  return out;
}

template std::vector<Sample<2>> draw_samples<2>(const TriMesh2&, int, std::mt19937_64&);
template std::vector<Sample<3>> draw_samples<3>(const TetMesh&, int, std::mt19937_64&);

template <int Dim>
Comparison compare_with_oracle(const SimplexMesh<Dim>& mesh, const BoundaryBvh<Dim>& bvh, const Sample<Dim>& sample,
                               const QueryConfig& config, Mutant mutant) {
  QueryConfig qc = config;
  qc.exclude_vertex = sample.exclude_vertex;
  const bool backward = qc.backward_override.value_or(mesh.has_inverted_interior());

  std::optional<ClosestBoundaryResult<Dim>> engine;
  QueryStats stats;
  if (mutant == Mutant::SkipValidity) {
    if (!mesh.flipped_or_flat(sample.element)) engine = nearest_unchecked(mesh, sample.point, sample.exclude_vertex);
  } else {
    QueryScratch scratch;
    engine = shortest_path_to_boundary(mesh, bvh, sample.point, sample.element, qc, scratch);
    stats = scratch.last_stats;
  }
  const OracleReport<Dim> oracle =
      oracle_closest_boundary(mesh, sample.point, sample.element, sample.exclude_vertex, backward);

  Comparison c;
  if (engine.has_value() != oracle.best.has_value()) {
    c.match = false;
  } else if (engine) {
    c.match = std::abs(engine->distance - oracle.best->distance) <= 1e-9 &&
              oracle_valid_path(mesh, engine->point, engine->face, sample.point, backward,
                                std::optional<int>(sample.element));
  }
  c.record = {{"point", vec_json<Dim>(sample.point)},
              {"element", sample.element},
              {"exclude_vertex", sample.exclude_vertex ? nlohmann::json(*sample.exclude_vertex) : nlohmann::json()},
              {"backward", backward},
              {"engine", to_json<Dim>(sample.point, engine, stats)},
              {"oracle_face", oracle.best ? nlohmann::json(oracle.best->face) : nlohmann::json()},
              {"oracle_distance", oracle.best ? nlohmann::json(oracle.best->distance) : nlohmann::json()},
              {"match", c.match}};
  return c;
}

template Comparison compare_with_oracle<2>(const TriMesh2&, const BoundaryBvh<2>&, const Sample<2>&,
                                           const QueryConfig&, Mutant);
template Comparison compare_with_oracle<3>(const TetMesh&, const BoundaryBvh<3>&, const Sample<3>&,
                                           const QueryConfig&, Mutant);

Comparison compare_ray(const TetMesh& mesh, const gen::ThreadedRay& ray, const TraversalConfig& config) {
  TraversalScratch scratch;
  const PathResult r = is_valid_path(mesh, ray.s, ray.face, ray.p, std::optional<int>(ray.p_element), config,
                                     scratch);
  const bool oracle = oracle_valid_path(mesh, ray.s, ray.face, ray.p, config.allow_backward,
                                        std::optional<int>(ray.p_element));
  Comparison c;
  c.match = r.valid() == oracle && r.verdict != PathVerdict::StepBudget;
  c.record = {{"s", vec_json<3>(ray.s)},
              {"face", ray.face},
              {"p", vec_json<3>(ray.p)},
              {"p_element", ray.p_element},
              {"engine", to_string(r.verdict)},
              {"oracle", oracle ? "valid" : "invalid"},
              {"elements_visited", r.stats.elements_visited},
              {"loop_events", r.stats.loop_events},
              {"used_fallback", r.stats.used_fallback},
              {"match", c.match}};
  return c;
}

}  // namespace boundpath::cli
