#pragma once

#include "boundpath/generators.hpp"
#include "boundpath/geometry.hpp"
#include "boundpath/mesh.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace boundpath::testing {

/// Index of the vertex at exactly `x`, or -1.
template <int Dim>
int find_vertex(const SimplexMesh<Dim>& mesh, const Vec<Dim>& x) {
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v)
    if ((mesh.vertex(v) - x).norm() < 1e-12) return v;
  return -1;
}

/// Tets (q_k, q_k+1, q_k+2, q_k+3) over a helix of points that circles the z
/// axis every three steps. Consecutive tets share a face and every shared
/// face is pierced by the axis in order.
inline TetMesh helix_bar(int tets) {
  std::vector<Vec3> q;
  for (int j = 0; j < tets + 3; ++j) {
    const double a = 2.0 * std::numbers::pi * j / 3.0;
    q.emplace_back(std::cos(a), std::sin(a), static_cast<double>(j));
  }
  std::vector<std::array<int, 4>> els;
  for (int k = 0; k < tets; ++k) {
    std::array<int, 4> el{k, k + 1, k + 2, k + 3};
    if (simplex_volume(std::array<Vec3, 4>{q[el[0]], q[el[1]], q[el[2]], q[el[3]]}) < 0) std::swap(el[0], el[1]);
    els.push_back(el);
  }
  return TetMesh(std::move(q), std::move(els));
}

/// First element containing p with barycentric slack `tol`.
template <int Dim>
std::optional<int> containing_element(const SimplexMesh<Dim>& mesh, const Vec<Dim>& p, double tol = 0.0) {
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e)
    if (!mesh.flipped_or_flat(e) && element_contains(mesh, e, p, tol)) return e;
  return std::nullopt;
}

inline TetMesh regular_tet() {
  std::vector<Vec3> v{{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
  std::array<int, 4> el{0, 1, 2, 3};
  if (simplex_volume(std::array<Vec3, 4>{v[0], v[1], v[2], v[3]}) < 0) std::swap(el[0], el[1]);
  return TetMesh(std::move(v), {el});
}

/// Folded, inversion-free bar used across suites.
inline TetMesh small_folded_bar(unsigned seed = 3) {
  gen::FoldedBarParams p;
  p.nx = 14;
  p.ny = 3;
  p.nz = 2;
  p.seed = seed;
  return gen::folded_bar_3d(p);
}

inline TriMesh2 small_folded_strip(unsigned seed = 3) {
  gen::FoldedBarParams p;
  p.nx = 24;
  p.ny = 3;
  p.seed = seed;
  return gen::folded_bar_2d(p);
}

}  // namespace boundpath::testing
