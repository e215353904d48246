#include "boundpath/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace boundpath {

namespace {

constexpr double kFeatureTolerance = 1e-12;

double segment_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

FacePoint<3> closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                                       const std::array<int, 3>& ids) {
  // Voronoi-region walk (Ericson, Real-Time Collision Detection 5.1.5).
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);

  Vec3 q;
  if (d1 <= 0.0 && d2 <= 0.0) {
    q = a;
  } else {
    const Vec3 bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    const Vec3 cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    const double vc = d1 * d4 - d3 * d2;
    const double vb = d5 * d2 - d1 * d6;
    const double va = d3 * d6 - d5 * d4;
    if (d3 >= 0.0 && d4 <= d3) {
      q = b;
    } else if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
      q = a + (d1 / (d1 - d3)) * ab;
    } else if (d6 >= 0.0 && d5 <= d6) {
      q = c;
    } else if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
      q = a + (d2 / (d2 - d6)) * ac;
    } else if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
      q = b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
    } else {
      const double denom = 1.0 / (va + vb + vc);
      q = a + ab * (vb * denom) + ac * (vc * denom);
    }
  }

  const double diameter = std::max({ab.norm(), ac.norm(), (c - b).norm()});
  const double tol = kFeatureTolerance * diameter;
  const std::array<const Vec3*, 3> v{&a, &b, &c};
  for (int i = 0; i < 3; ++i) {
    if ((q - *v[i]).norm() <= tol) return {*v[i], BoundaryFeature::vertex(ids[i])};
  }
  for (int i = 0; i < 3; ++i) {
    const int j = (i + 1) % 3;
    if (segment_distance(q, *v[i], *v[j]) <= tol) return {q, BoundaryFeature::edge(ids[i], ids[j])};
  }
  return {q, BoundaryFeature::face()};
}

FacePoint<2> closest_point_on_segment(const Vec2& p, const Vec2& a, const Vec2& b, const std::array<int, 2>& ids) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double tol = kFeatureTolerance;
  if (t <= tol) return {a, BoundaryFeature::vertex(ids[0])};
  if (t >= 1.0 - tol) return {b, BoundaryFeature::vertex(ids[1])};
  return {a + t * ab, BoundaryFeature::face()};
}

template <>
FacePoint<3> closest_point_on_face<3>(const TetMesh& mesh, int face, const Vec3& p) {
  const auto& f = mesh.boundary_face(face);
  const Vec3& a = mesh.vertex(f.vertices[0]);
  const Vec3& b = mesh.vertex(f.vertices[1]);
  const Vec3& c = mesh.vertex(f.vertices[2]);
  const double diameter = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
  const double area2 = (b - a).cross(c - a).norm();
  if (diameter < 1e-14 || area2 <= 1e-14 * diameter * diameter) {
    throw Error(ErrorCode::DegenerateFace, "boundary face " + std::to_string(face) + " has zero area");
  }
  return closest_point_on_triangle(p, a, b, c, f.vertices);
}

template <>
FacePoint<2> closest_point_on_face<2>(const TriMesh2& mesh, int face, const Vec2& p) {
  const auto& f = mesh.boundary_face(face);
  const Vec2& a = mesh.vertex(f.vertices[0]);
  const Vec2& b = mesh.vertex(f.vertices[1]);
  if ((b - a).norm() < 1e-14) {
    throw Error(ErrorCode::DegenerateFace, "boundary segment " + std::to_string(face) + " has zero length");
  }
  return closest_point_on_segment(p, a, b, f.vertices);
}

template <>
Vec3 face_area_vector<3>(const TetMesh& mesh, int face) {
  const auto& f = mesh.boundary_face(face);
  const Vec3& a = mesh.vertex(f.vertices[0]);
  return 0.5 * (mesh.vertex(f.vertices[1]) - a).cross(mesh.vertex(f.vertices[2]) - a);
}

template <>
Vec2 face_area_vector<2>(const TriMesh2& mesh, int face) {
  const auto& f = mesh.boundary_face(face);
  const Vec2 d = mesh.vertex(f.vertices[1]) - mesh.vertex(f.vertices[0]);
  return {d.y(), -d.x()};
}

template <int Dim>
Vec<Dim> pseudo_normal(const SimplexMesh<Dim>& mesh, int face, const BoundaryFeature& feature) {
  Vec<Dim> sum = Vec<Dim>::Zero();
  switch (feature.kind) {
    case FeatureKind::FaceInterior:
      sum = face_area_vector(mesh, face);
      break;
    case FeatureKind::Edge: {
      const int a = feature.vertices[0];
      const int b = feature.vertices[1];
      for (int f : mesh.boundary_faces_around(a)) {
        const auto& verts = mesh.boundary_face(f).vertices;
        if (std::find(verts.begin(), verts.end(), b) != verts.end()) sum += face_area_vector(mesh, f);
      }
      break;
    }
    case FeatureKind::Vertex:
      for (int f : mesh.boundary_faces_around(feature.vertices[0])) sum += face_area_vector(mesh, f);
      break;
  }
  const double n = sum.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::ZeroNormal, "pseudo-normal vanishes at boundary face " + std::to_string(face));
  }
  return sum / n;
}

template Vec2 pseudo_normal<2>(const TriMesh2&, int, const BoundaryFeature&);
template Vec3 pseudo_normal<3>(const TetMesh&, int, const BoundaryFeature&);

template <int Dim>
std::optional<std::array<double, Dim + 1>> barycentric(const SimplexMesh<Dim>& mesh, int e, const Vec<Dim>& p) {
  const auto& el = mesh.element(e);
  std::array<Vec<Dim>, Dim + 1> v;
  for (int k = 0; k <= Dim; ++k) v[k] = mesh.vertex(el[k]);
  const double total = simplex_volume(v);
  if (total == 0.0 || !std::isfinite(total)) return std::nullopt;
  std::array<double, Dim + 1> w{};
  for (int k = 0; k <= Dim; ++k) {
    auto sub = v;
    sub[k] = p;
    w[k] = simplex_volume(sub) / total;
  }
  return w;
}

template std::optional<std::array<double, 3>> barycentric<2>(const TriMesh2&, int, const Vec2&);
template std::optional<std::array<double, 4>> barycentric<3>(const TetMesh&, int, const Vec3&);

template <int Dim>
bool element_contains(const SimplexMesh<Dim>& mesh, int e, const Vec<Dim>& p, double tolerance) {
  const auto w = barycentric(mesh, e, p);
  if (!w) return false;
  return std::all_of(w->begin(), w->end(), [&](double x) { return x >= -tolerance; });
}

template bool element_contains<2>(const TriMesh2&, int, const Vec2&, double);
template bool element_contains<3>(const TetMesh&, int, const Vec3&, double);

template <int Dim>
Vec<Dim> element_centroid(const SimplexMesh<Dim>& mesh, int e) {
  Vec<Dim> c = Vec<Dim>::Zero();
  for (int v : mesh.element(e)) c += mesh.vertex(v);
  return c / static_cast<double>(Dim + 1);
}

template Vec2 element_centroid<2>(const TriMesh2&, int);
template Vec3 element_centroid<3>(const TetMesh&, int);

}  // namespace boundpath
