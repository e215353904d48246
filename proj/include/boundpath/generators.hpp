#pragma once

#include "boundpath/mesh.hpp"

#include <functional>
#include <random>
#include <vector>

namespace boundpath::gen {

TetMesh single_tet();
/// Unit cube split into 5 tetrahedra, scaled by `size`.
TetMesh cube_5tet(double size = 1.0);

/// Structured grid of nx*ny*nz cells, each split into 6 tetrahedra sharing the
/// cell diagonal (Kuhn subdivision, conforming across cells).
TetMesh tet_grid(int nx, int ny, int nz, const Vec3& origin = Vec3::Zero(), const Vec3& cell = Vec3::Ones());

/// nx*ny cells, each split along the (i,j)-(i+1,j+1) diagonal.
TriMesh2 tri_grid(int nx, int ny, const Vec2& origin = Vec2::Zero(), const Vec2& cell = Vec2::Ones());

/// Vertex id of grid node (i, j[, k]).
inline int grid_vertex(int nx, int i, int j) { return j * (nx + 1) + i; }
inline int grid_vertex(int nx, int ny, int i, int j, int k) { return (k * (ny + 1) + j) * (nx + 1) + i; }

/// Coil map for a bar lying along +x with its thickness along y. The bar is
/// wrapped around a circle of radius `radius` by `total_angle` radians, with
/// the radius growing by `pitch` per radian. Angles beyond 2*pi fold the bar
/// end back over its start. Orientation preserving while radius - y > 0.
struct CoilMap {
  double length = 1.0;
  double total_angle = 2.3 * 3.141592653589793;
  double radius = 1.0;
  double pitch = 0.0;

  Vec2 operator()(const Vec2& p) const;
  Vec3 operator()(const Vec3& p) const;
};

template <int Dim>
SimplexMesh<Dim> deformed(const SimplexMesh<Dim>& mesh, const std::function<Vec<Dim>(const Vec<Dim>&)>& map);

/// Parameters for procedurally folded (self-intersecting) bars.
struct FoldedBarParams {
  int nx = 12, ny = 3, nz = 2;
  double cell = 0.25;
  double extra_angle = 0.3 * 3.141592653589793;  // beyond a full turn
  double overlap = 0.5;      // radial offset of the returning layer, in bar thicknesses
  double wobble = 0.15;      // smooth perturbation amplitude, in cells
  unsigned seed = 1;
};

/// A coiled bar whose end overlaps its start. Guaranteed inversion-free: the
/// perturbation is halved until no element is inverted or degenerate.
TetMesh folded_bar_3d(const FoldedBarParams& params);
TriMesh2 folded_bar_2d(const FoldedBarParams& params);

/// Random draw of FoldedBarParams for corpus generation. The 3D element
/// count lands in [min_elements, max_elements] when that range allows it.
FoldedBarParams random_folded_params(std::mt19937_64& rng, int min_elements, int max_elements);

/// 6x4 triangle grid with interior vertex (3,2) pushed across the edge
/// (4,2)-(4,3): exactly one inverted triangle, none of its edges on the
/// boundary.
TriMesh2 inverted_interior_grid();

/// 6x4 triangle grid with boundary vertex (4,0) folded inward so that its
/// boundary triangle (3,0),(4,0),(4,1) is inverted.
TriMesh2 inverted_boundary_grid();

/// n^3 Kuhn grid of unit cells with the column of cells over
/// [lo, hi] x [lo, hi] removed, which puts a tunnel through the block.
TetMesh holed_grid(int n, int lo, int hi);

/// Segment from boundary point s on face `face` to an interior point p in
/// element p_element.
struct ThreadedRay {
  Vec3 s;
  int face;
  Vec3 p;
  int p_element;
};

/// Rays that pass exactly through interior vertices or interior edge
/// midpoints. Starts are boundary face vertices, edge midpoints and
/// centroids; p = m + beta (m - s) for a threaded point m and beta in
/// {1/4, 1/2, 3/4, 1}. Draws whose p falls outside the mesh are discarded.
std::vector<ThreadedRay> threaded_rays(const TetMesh& mesh, int count, std::mt19937_64& rng);

/// Uniform random point inside element e.
template <int Dim>
Vec<Dim> random_point_in_element(const SimplexMesh<Dim>& mesh, int e, std::mt19937_64& rng);

/// Uniform random point on boundary face f.
template <int Dim>
Vec<Dim> random_point_on_face(const SimplexMesh<Dim>& mesh, int f, std::mt19937_64& rng);

}  // namespace boundpath::gen
