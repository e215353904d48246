#pragma once

#include "boundpath/aabb_tree.hpp"
#include "boundpath/closest_query.hpp"
#include "boundpath/mesh.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace boundpath {

struct SimConfig {
  double dt = 1.0 / 60.0;
  int substeps = 1;
  int iterations = 3;
  Vec3 gravity = Vec3(0.0, -9.81, 0.0);
  double collision_compliance = 0.0;
  double spring_compliance = 0.0;
  /// Only used for penalty-energy reporting; projection is compliance based.
  double stiffness = 1e4;
  /// Constraints enforce (x - s) . n >= collision_margin.
  double collision_margin = 0.0;
  /// Fraction of velocity removed per substep.
  double damping = 0.0;
  /// Accepted and stored, no effect on the solve.
  double friction = 0.0;
  QueryConfig query;
};

/// All bodies of a scene share one mesh with one connected component per
/// body. Positions live in the mesh.
struct SimState {
  TetMesh mesh;
  std::vector<Vec3> previous;
  std::vector<Vec3> velocity;
  std::vector<double> inverse_mass;
  std::vector<std::array<int, 2>> springs;
  std::vector<double> rest_length;
  std::vector<int> body;  // per vertex

  /// Lumped masses from element volumes times `density`; springs on every
  /// element edge at its current length.
  static SimState from_bodies(const std::vector<TetMesh>& bodies, double density = 1000.0);
};

struct VertexContact {
  int vertex;
  int element;
};

struct EdgeContact {
  std::array<int, 2> edge;
  int element;
  Vec3 center;
  double weight;  // position of center along the edge, 0 at edge[0]
};

struct CentroidContact {
  int source_element;
  int element;
  Vec3 centroid;
};

/// Element hierarchy over all elements; inverted or degenerate ones are
/// skipped at query time.
class ElementBvh {
 public:
  explicit ElementBvh(const TetMesh& mesh);
  void refit(const TetMesh& mesh);
  const AabbTree<3>& tree() const { return tree_; }

 private:
  void compute_boxes(const TetMesh& mesh);
  std::vector<Aabb<3>> boxes_;
  AabbTree<3> tree_;
};

/// Every (vertex, element) pair with the vertex strictly inside a
/// non-incident, non-inverted element.
std::vector<VertexContact> dcd_vertex_tet(const TetMesh& mesh, const ElementBvh& bvh);

/// Boundary edges clipped against non-incident elements. One record per
/// edge: the clipped chord center nearest the edge midpoint.
std::vector<EdgeContact> dcd_edge_tet(const TetMesh& mesh, const ElementBvh& bvh);

/// Element centroids strictly inside elements sharing no vertex with their
/// own element.
std::vector<CentroidContact> dcd_centroid_tet(const TetMesh& mesh, const ElementBvh& bvh);

/// Vertices with at least one vertex-tet contact.
int count_penetrating_vertices(const std::vector<VertexContact>& contacts);

struct CollisionConstraint {
  enum class Subject { Vertex, Edge, Centroid };
  Subject subject = Subject::Vertex;
  std::array<int, 4> vertices{-1, -1, -1, -1};
  std::array<double, 4> weights{0.0, 0.0, 0.0, 0.0};
  int count = 0;
  Vec3 target = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double compliance = 0.0;
  double lambda = 0.0;

  Vec3 subject_point(const std::vector<Vec3>& x) const;
  /// (x - s) . n for the current subject point.
  double value(const std::vector<Vec3>& x) const;
};

/// Single-vertex constraint from a query result. Throws Error(ZeroNormal)
/// if the pseudo-normal vanishes.
CollisionConstraint build_collision_constraint(int vertex, const ClosestBoundaryResult<3>& result,
                                               const TetMesh& mesh, double compliance = 0.0);

/// Zero-compliance-aware XPBD projection enforcing value >= margin.
/// Returns the applied multiplier increment.
double project_constraint(CollisionConstraint& c, std::vector<Vec3>& x, const std::vector<double>& inverse_mass,
                          double dt, double margin = 0.0);

double penalty_energy(const Vec3& x, const Vec3& s, const Vec3& n, double k);
Vec3 penalty_gradient(const Vec3& x, const Vec3& s, const Vec3& n, double k);

struct SubstepReport {
  int penetrating_vertices = 0;  // before projection
  int vertex_contacts = 0;
  int edge_contacts = 0;
  int centroid_contacts = 0;
  int constraints = 0;
  int failed_queries = 0;
  double max_penetration = 0.0;
  QueryStats query_totals;
};

nlohmann::json to_json(const SubstepReport& report);

/// Owns the spatial structures that follow a SimState across substeps.
class Simulator {
 public:
  Simulator(SimState state, SimConfig config);

  /// Predict, refit, detect, build constraints, iterate springs and
  /// collisions, update velocities. Throws Error(NumericalBlowup) when a
  /// position becomes non-finite.
  SubstepReport substep();

  /// Vertex-tet penetrations of the current pose.
  int penetration_count() const;

  const SimState& state() const { return state_; }
  SimState& state() { return state_; }
  const SimConfig& config() const { return config_; }

 private:
  SimState state_;
  SimConfig config_;
  BoundaryBvh<3> boundary_bvh_;
  ElementBvh element_bvh_;
  QueryScratch scratch_;
  std::vector<double> spring_lambda_;
};

/// Convenience wrapper over Simulator::substep for callers holding only a
/// state.
SubstepReport xpbd_substep(SimState& state, const SimConfig& config);

struct BodySpec {
  std::optional<std::string> path;
  nlohmann::json generator;  // used when path is empty
  Vec3 translate = Vec3::Zero();
  double scale = 1.0;
  Vec3 velocity = Vec3::Zero();
};

struct Scene {
  std::vector<BodySpec> bodies;
  SimConfig config;
  double density = 1000.0;
  int frames = 1;
  unsigned seed = 0;
};

/// Parse a scene file. Relative mesh paths resolve against the file's
/// directory. Throws Error(ParseError) or Error(Io).
Scene load_scene(const std::filesystem::path& path);
Scene parse_scene(const std::string& text, const std::filesystem::path& base_dir);
TetMesh instantiate_body(const BodySpec& body);

}  // namespace boundpath
