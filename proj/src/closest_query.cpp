#include "boundpath/closest_query.hpp"

#include "boundpath/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace boundpath {

const char* to_string(QueryStatus status) {
  switch (status) {
    case QueryStatus::Found: return "found";
    case QueryStatus::NoValidPath: return "no_valid_path";
    case QueryStatus::InsideInvertedElement: return "inside_inverted_element";
  }
  return "unknown";
}

template <int Dim>
BoundaryBvh<Dim>::BoundaryBvh(const SimplexMesh<Dim>& mesh) {
  rebuild(mesh);
}

template <int Dim>
void BoundaryBvh<Dim>::compute_boxes(const SimplexMesh<Dim>& mesh) {
  const auto& faces = mesh.boundary_faces();
  boxes_.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) {
    Aabb<Dim> box;
    for (int v : faces[f].vertices) box.extend(mesh.vertex(v));
    boxes_[f] = box;
  }
}

template <int Dim>
void BoundaryBvh<Dim>::rebuild(const SimplexMesh<Dim>& mesh) {
  if (mesh.boundary_faces().empty()) throw Error(ErrorCode::EmptyBoundary, "mesh has no boundary faces");
  compute_boxes(mesh);
  tree_.build(boxes_);
}

template <int Dim>
void BoundaryBvh<Dim>::refit(const SimplexMesh<Dim>& mesh) {
  if (mesh.boundary_faces().size() != tree_.size()) {
    rebuild(mesh);
    return;
  }
  compute_boxes(mesh);
  tree_.refit(boxes_);
}

template class BoundaryBvh<2>;
template class BoundaryBvh<3>;

namespace {

bool has_directed_edge(const std::array<int, 3>& f, int a, int b) {
  for (int k = 0; k < 3; ++k)
    if (f[k] == a && f[(k + 1) % 3] == b) return true;
  return false;
}

bool contains_vertex(const std::array<int, 3>& f, int v) { return f[0] == v || f[1] == v || f[2] == v; }

template <std::size_t N>
bool has_vertex(const std::array<int, N>& f, std::optional<int> v) {
  return v && std::find(f.begin(), f.end(), *v) != f.end();
}

// Moving from vertex a towards n stays on a candidate face only if some
// boundary face through that edge avoids the excluded vertex.
template <int Dim>
bool edge_usable(const SimplexMesh<Dim>& mesh, int a, int n, std::optional<int> excluded) {
  if (!excluded) return true;
  if constexpr (Dim == 2) {
    return *excluded != a && *excluded != n;
  } else {
    for (int f : mesh.boundary_faces_around(a)) {
      const auto& verts = mesh.boundary_face(f).vertices;
      if (std::find(verts.begin(), verts.end(), n) != verts.end() && !has_vertex(verts, excluded)) return true;
    }
    return false;
  }
}

}  // namespace

template <int Dim>
bool feasible_region_check(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, const BoundaryFeature& feature,
                           const Vec<Dim>& p, double threshold, std::optional<int> excluded) {
  switch (feature.kind) {
    case FeatureKind::FaceInterior:
      return true;
    case FeatureKind::Vertex:
      for (int n : mesh.boundary_neighbors(feature.vertices[0])) {
        if (!edge_usable(mesh, feature.vertices[0], n, excluded)) continue;
        if ((p - s).dot(s - mesh.vertex(n)) < threshold) return false;
      }
      return true;
    case FeatureKind::Edge:
      if constexpr (Dim == 3) {
        const int a = feature.vertices[0];
        const int b = feature.vertices[1];
        int f0 = -1, f1 = -1, shared = 0;
        for (int f : mesh.boundary_faces_around(a)) {
          const auto& verts = mesh.boundary_face(f).vertices;
          if (!contains_vertex(verts, b)) continue;
          ++shared;
          if (has_directed_edge(verts, a, b)) f0 = f;
          else if (has_directed_edge(verts, b, a)) f1 = f;
        }
        if (shared != 2 || f0 < 0 || f1 < 0) return true;
        const Vec3& v0 = mesh.vertex(a);
        const Vec3& v1 = mesh.vertex(b);
        if ((p - v0).dot(v1 - v0) < threshold) return false;
        if ((p - v1).dot(v0 - v1) < threshold) return false;
        const Vec3 n0 = -face_area_vector(mesh, f0).normalized();
        const Vec3 n1 = -face_area_vector(mesh, f1).normalized();
        const bool f0_usable = !has_vertex(mesh.boundary_face(f0).vertices, excluded);
        const bool f1_usable = !has_vertex(mesh.boundary_face(f1).vertices, excluded);
        if (f0_usable && (p - s).dot(n0.cross(v1 - v0)) < threshold) return false;
        if (f1_usable && (p - s).dot(n1.cross(v0 - v1)) < threshold) return false;
      }
      return true;
  }
  return true;
}

template bool feasible_region_check<2>(const TriMesh2&, const Vec2&, const BoundaryFeature&, const Vec2&, double,
                                       std::optional<int>);
template bool feasible_region_check<3>(const TetMesh&, const Vec3&, const BoundaryFeature&, const Vec3&, double,
                                       std::optional<int>);

template <int Dim>
std::optional<ClosestBoundaryResult<Dim>> shortest_path_to_boundary(const SimplexMesh<Dim>& mesh,
                                                                    const BoundaryBvh<Dim>& bvh, const Vec<Dim>& p,
                                                                    int p_element, const QueryConfig& config,
                                                                    QueryScratch& scratch) {
  QueryStats stats;
  scratch.last_stats = stats;
  scratch.accepted.clear();
  if (mesh.flipped_or_flat(p_element)) {
    scratch.status = QueryStatus::InsideInvertedElement;
    return std::nullopt;
  }

  TraversalConfig tcfg = config.traversal;
  tcfg.allow_backward = config.backward_override.value_or(mesh.has_inverted_interior());
  const double threshold = -std::abs(config.epsilon_r) * config.epsilon_r_scale;
  // The culling argument moves s along the boundary to a nearer point and
  // assumes that point is reachable too; inside inverted regions it may not be.
  const bool cull = config.enable_culling && !tcfg.allow_backward;

  std::optional<ClosestBoundaryResult<Dim>> best;
  auto visit = [&](int face, double& radius) {
    ++stats.bvh_candidates_tested;
    const auto& bf = mesh.boundary_face(face);
    if (mesh.flipped_or_flat(bf.element)) return;
    if (config.exclude_vertex) {
      for (int v : bf.vertices)
        if (v == *config.exclude_vertex) return;
    }
    FacePoint<Dim> cp;
    try {
      cp = closest_point_on_face(mesh, face, p);
    } catch (const Error&) {
      return;
    }
    const double dist = (cp.point - p).norm();
    if (dist <= 1e-14 || dist >= radius) return;
    if (cull && !feasible_region_check(mesh, cp.point, cp.feature, p, threshold, config.exclude_vertex)) {
      ++stats.culled;
      return;
    }
    ++stats.traversals_run;
    const PathResult r = is_valid_path(mesh, cp.point, face, p, std::optional<int>(p_element), tcfg,
                                       scratch.traversal);
    stats.elements_visited += r.stats.elements_visited;
    stats.loop_events += r.stats.loop_events;
    stats.starvation_events += r.stats.starvation_events;
    stats.fallbacks += r.stats.used_fallback ? 1 : 0;
    if (!r.valid()) return;
    best = ClosestBoundaryResult<Dim>{cp.point, face, cp.feature, dist, {}};
    radius = dist;
    scratch.accepted.push_back(dist);
  };
  bvh.enumerate(p, std::numeric_limits<double>::infinity(), visit, scratch.heap);

  scratch.last_stats = stats;
  scratch.status = best ? QueryStatus::Found : QueryStatus::NoValidPath;
  if (best) best->stats = stats;
  return best;
}

template std::optional<ClosestBoundaryResult<2>> shortest_path_to_boundary<2>(const TriMesh2&,
                                                                              const BoundaryBvh<2>&, const Vec2&,
                                                                              int, const QueryConfig&,
                                                                              QueryScratch&);
template std::optional<ClosestBoundaryResult<3>> shortest_path_to_boundary<3>(const TetMesh&, const BoundaryBvh<3>&,
                                                                              const Vec3&, int, const QueryConfig&,
                                                                              QueryScratch&);

nlohmann::json to_json(const QueryStats& stats) {
  return {{"bvh_candidates_tested", stats.bvh_candidates_tested},
          {"culled", stats.culled},
          {"traversals_run", stats.traversals_run},
          {"elements_visited", stats.elements_visited},
          {"loop_events", stats.loop_events},
          {"starvation_events", stats.starvation_events},
          {"fallbacks", stats.fallbacks}};
}

namespace {

template <int Dim>
nlohmann::json point_json(const Vec<Dim>& p) {
  nlohmann::json out = nlohmann::json::array();
  for (int k = 0; k < Dim; ++k) out.push_back(p[k]);
  return out;
}

}  // namespace

template <int Dim>
nlohmann::json to_json(const Vec<Dim>& query_point, const std::optional<ClosestBoundaryResult<Dim>>& result,
                       const QueryStats& stats) {
  nlohmann::json j;
  j["query_point"] = point_json<Dim>(query_point);
  if (result) {
    j["result_point"] = point_json<Dim>(result->point);
    j["face"] = result->face;
    nlohmann::json feature{{"kind", to_string(result->feature.kind)}};
    if (result->feature.kind == FeatureKind::Edge) {
      feature["vertices"] = {result->feature.vertices[0], result->feature.vertices[1]};
    } else if (result->feature.kind == FeatureKind::Vertex) {
      feature["vertices"] = {result->feature.vertices[0]};
    }
    j["feature"] = feature;
    j["distance"] = result->distance;
  } else {
    j["result_point"] = nullptr;
    j["face"] = nullptr;
    j["feature"] = nullptr;
    j["distance"] = nullptr;
  }
  j["stats"] = to_json(stats);
  return j;
}

template nlohmann::json to_json<2>(const Vec2&, const std::optional<ClosestBoundaryResult<2>>&, const QueryStats&);
template nlohmann::json to_json<3>(const Vec3&, const std::optional<ClosestBoundaryResult<3>>&, const QueryStats&);

}  // namespace boundpath
