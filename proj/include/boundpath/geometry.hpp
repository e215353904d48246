#pragma once

#include "boundpath/mesh.hpp"

#include <array>
#include <optional>

namespace boundpath {

template <int Dim>
struct FacePoint {
  Vec<Dim> point;
  BoundaryFeature feature;
};

/// Euclidean closest point on triangle (a, b, c) to p. Feature vertex ids are
/// taken from `ids`, aligned with (a, b, c).
FacePoint<3> closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                                       const std::array<int, 3>& ids = {0, 1, 2});

FacePoint<2> closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b,
                                      const std::array<int, 2>& ids = {0, 1});

/// Closest point to p on boundary face `face`, with feature classification.
/// Throws Error(DegenerateFace) for (near-)zero area or length faces.
template <int Dim>
FacePoint<Dim> closest_point_on_face(const SimplexMesh<Dim>& mesh, int face, const Vec<Dim>& p);

/// Area-weighted outward normal of a boundary face: the cross product / 2 in
/// 3D, the edge rotated clockwise in 2D (its length equals the edge length).
template <int Dim>
Vec<Dim> face_area_vector(const SimplexMesh<Dim>& mesh, int face);

/// Unit outward normal at a boundary point. FaceInterior uses the face normal;
/// edges and vertices average the adjacent boundary face normals weighted by
/// area. Throws Error(ZeroNormal) if that sum vanishes.
template <int Dim>
Vec<Dim> pseudo_normal(const SimplexMesh<Dim>& mesh, int face, const BoundaryFeature& feature);

/// Barycentric coordinates of p in element e. Empty for degenerate elements.
template <int Dim>
std::optional<std::array<double, Dim + 1>> barycentric(const SimplexMesh<Dim>& mesh, int e, const Vec<Dim>& p);

/// p lies in element e with every barycentric coordinate >= -tolerance.
template <int Dim>
bool element_contains(const SimplexMesh<Dim>& mesh, int e, const Vec<Dim>& p, double tolerance);

template <int Dim>
Vec<Dim> element_centroid(const SimplexMesh<Dim>& mesh, int e);

}  // namespace boundpath
