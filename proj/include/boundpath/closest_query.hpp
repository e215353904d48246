#pragma once

#include "boundpath/aabb_tree.hpp"
#include "boundpath/mesh.hpp"
#include "boundpath/traversal.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace boundpath {

/// Bounding-box hierarchy over the boundary faces of a mesh.
template <int Dim>
class BoundaryBvh {
 public:
  /// Throws Error(EmptyBoundary) when the mesh has no boundary faces.
  explicit BoundaryBvh(const SimplexMesh<Dim>& mesh);

  /// Recompute boxes for the mesh's current positions; topology is kept.
  void refit(const SimplexMesh<Dim>& mesh);
  void rebuild(const SimplexMesh<Dim>& mesh);

  const AabbTree<Dim>& tree() const { return tree_; }

  /// Boundary faces whose boxes are within `radius` of p, nearest box first.
  /// `visit(face, radius)` may shrink the radius.
  template <class Visit>
  void enumerate(const Vec<Dim>& p, double radius, Visit&& visit, std::vector<std::pair<double, int>>& heap) const {
    tree_.enumerate_nearest(p, radius, std::forward<Visit>(visit), heap);
  }

 private:
  void compute_boxes(const SimplexMesh<Dim>& mesh);

  std::vector<Aabb<Dim>> boxes_;
  AabbTree<Dim> tree_;
};

struct QueryConfig {
  /// Culling relaxation, stored as a magnitude; thresholds are
  /// -|epsilon_r| * epsilon_r_scale.
  double epsilon_r = 0.01;
  double epsilon_r_scale = 1.0;
  /// Ignored while backward travel is active: the culling argument needs an
  /// inversion-free neighborhood.
  bool enable_culling = true;
  TraversalConfig traversal;
  /// Boundary vertex the query point coincides with (self-query). Faces
  /// incident to it are never candidates.
  std::optional<int> exclude_vertex;
  /// Force backward traversal on or off; by default it is used exactly when
  /// the mesh has inverted interior elements.
  std::optional<bool> backward_override;
};

struct QueryStats {
  int bvh_candidates_tested = 0;
  int culled = 0;
  int traversals_run = 0;
  long elements_visited = 0;
  int loop_events = 0;
  int starvation_events = 0;
  int fallbacks = 0;
};

enum class QueryStatus { Found, NoValidPath, InsideInvertedElement };

const char* to_string(QueryStatus status);

template <int Dim>
struct ClosestBoundaryResult {
  Vec<Dim> point;
  int face = -1;
  BoundaryFeature feature;
  double distance = 0.0;
  QueryStats stats;
};

struct QueryScratch {
  TraversalScratch traversal;
  std::vector<std::pair<double, int>> heap;
  QueryStats last_stats;
  QueryStatus status = QueryStatus::NoValidPath;
  /// Distances of the candidates accepted during the last query, in order.
  std::vector<double> accepted;
};

/// False iff p is provably outside the feasible region of boundary point s
/// (s is then not the closest boundary point of p). Face-interior points
/// always pass. Inputs that do not form a manifold edge pass as well.
/// With `excluded` set, half-spaces whose nearer points lie only on faces
/// incident to that vertex are not tested, since those faces are never
/// candidates.
template <int Dim>
bool feasible_region_check(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, const BoundaryFeature& feature,
                           const Vec<Dim>& p, double threshold, std::optional<int> excluded = std::nullopt);

/// Shortest valid path from p (inside element p_element) to the boundary.
/// Returns nothing when no candidate validates, or when p_element is
/// inverted or degenerate; scratch.status tells which.
template <int Dim>
std::optional<ClosestBoundaryResult<Dim>> shortest_path_to_boundary(const SimplexMesh<Dim>& mesh,
                                                                    const BoundaryBvh<Dim>& bvh, const Vec<Dim>& p,
                                                                    int p_element, const QueryConfig& config,
                                                                    QueryScratch& scratch);

nlohmann::json to_json(const QueryStats& stats);

template <int Dim>
nlohmann::json to_json(const Vec<Dim>& query_point, const std::optional<ClosestBoundaryResult<Dim>>& result,
                       const QueryStats& stats);

}  // namespace boundpath
