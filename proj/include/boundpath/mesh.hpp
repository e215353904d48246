#pragma once

#include "boundpath/types.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace boundpath {

/// A boundary face (triangle in 3D, segment in 2D). Vertex order makes the
/// face normal point out of the owning element when that element is
/// positively oriented.
template <int Dim>
struct BoundaryFace {
  std::array<int, Dim> vertices{};
  int element = -1;
  int local_face = -1;
};

/// Per-element neighbor table. Slot i is the element across the face
/// opposite local vertex i, or kBoundary.
template <int Dim>
using Adjacency = std::vector<std::array<int, Dim + 1>>;

/// Local face table: face i is opposite local vertex i, ordered outward for a
/// positively oriented simplex.
template <int Dim>
const std::array<std::array<int, Dim>, Dim + 1>& local_faces();

template <int Dim>
Adjacency<Dim> build_adjacency(std::span<const std::array<int, Dim + 1>> elements);

/// Indexed simplicial mesh: tetrahedra in 3D, triangles in 2D.
///
/// Topology is fixed at construction. Vertex positions may be replaced with
/// set_positions(), which refreshes orientation flags but leaves adjacency
/// and boundary faces untouched.
template <int Dim>
class SimplexMesh {
 public:
  static constexpr int kDim = Dim;
  static constexpr int kElementVertices = Dim + 1;
  using Point = Vec<Dim>;
  using Element = std::array<int, Dim + 1>;
  using Face = std::array<int, Dim>;

  SimplexMesh() = default;
  SimplexMesh(std::vector<Point> vertices, std::vector<Element> elements);

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_elements() const { return elements_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int v) const { return vertices_[static_cast<std::size_t>(v)]; }
  const std::vector<Element>& elements() const { return elements_; }
  const Element& element(int e) const { return elements_[static_cast<std::size_t>(e)]; }

  const Adjacency<Dim>& adjacency() const { return adjacency_; }
  int neighbor(int e, int local_face) const {
    return adjacency_[static_cast<std::size_t>(e)][static_cast<std::size_t>(local_face)];
  }
  /// Local index of the face of `e` shared with `other`, or -1.
  int shared_face(int e, int other) const;

  /// Vertices of local face `local_face` of `e`, outward ordered.
  Face face_vertices(int e, int local_face) const;

  const std::vector<BoundaryFace<Dim>>& boundary_faces() const { return boundary_faces_; }
  const BoundaryFace<Dim>& boundary_face(int f) const {
    return boundary_faces_[static_cast<std::size_t>(f)];
  }
  /// Boundary face id for (e, local_face), or -1 for interior faces.
  int boundary_face_of(int e, int local_face) const {
    return boundary_index_[static_cast<std::size_t>(e)][static_cast<std::size_t>(local_face)];
  }

  double signed_volume(int e) const;
  bool inverted(int e) const { return inverted_[static_cast<std::size_t>(e)] != 0; }
  bool degenerate(int e) const { return degenerate_[static_cast<std::size_t>(e)] != 0; }
  /// Inverted or degenerate: never used as a query start or boundary owner.
  bool flipped_or_flat(int e) const { return inverted(e) || degenerate(e); }
  std::size_t inverted_count() const { return inverted_count_; }
  /// True if some inverted/degenerate element has no boundary face.
  bool has_inverted_interior() const { return inverted_interior_count_ > 0; }

  /// Boundary faces incident to vertex v (empty for interior vertices).
  std::span<const int> boundary_faces_around(int v) const;
  /// Vertices joined to v by a boundary edge (3D) or boundary segment (2D).
  std::span<const int> boundary_neighbors(int v) const;
  bool is_boundary_vertex(int v) const { return !boundary_faces_around(v).empty(); }

  /// Replace all vertex positions (same count). Derived spatial structures
  /// built over the old positions must be refit by the caller.
  void set_positions(std::vector<Point> positions);

  std::vector<std::string> names;

 private:
  void build_topology();
  void update_orientation();

  std::vector<Point> vertices_;
  std::vector<Element> elements_;
  Adjacency<Dim> adjacency_;
  std::vector<BoundaryFace<Dim>> boundary_faces_;
  std::vector<std::array<int, Dim + 1>> boundary_index_;
  std::vector<char> inverted_;
  std::vector<char> degenerate_;
  std::size_t inverted_count_ = 0;
  std::size_t inverted_interior_count_ = 0;

  // CSR tables over vertices.
  std::vector<int> vf_offsets_, vf_faces_;
  std::vector<int> vn_offsets_, vn_vertices_;
};

using TetMesh = SimplexMesh<3>;
using TriMesh2 = SimplexMesh<2>;

/// Signed volume of a simplex given its vertices (area in 2D).
double simplex_volume(const std::array<Vec3, 4>& p);
double simplex_volume(const std::array<Vec2, 3>& p);

extern template class SimplexMesh<2>;
extern template class SimplexMesh<3>;

}  // namespace boundpath
