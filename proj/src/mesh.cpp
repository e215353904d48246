#include "boundpath/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace boundpath {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonManifold: return "NonManifold";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::ZeroNormal: return "ZeroNormal";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptyBoundary: return "EmptyBoundary";
    case ErrorCode::ZeroLengthSegment: return "ZeroLengthSegment";
    case ErrorCode::NumericalBlowup: return "NumericalBlowup";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

const char* to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::FaceInterior: return "face";
    case FeatureKind::Edge: return "edge";
    case FeatureKind::Vertex: return "vertex";
  }
  return "unknown";
}

template <>
const std::array<std::array<int, 3>, 4>& local_faces<3>() {
  static const std::array<std::array<int, 3>, 4> faces{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};
  return faces;
}

template <>
const std::array<std::array<int, 2>, 3>& local_faces<2>() {
  static const std::array<std::array<int, 2>, 3> faces{{{1, 2}, {2, 0}, {0, 1}}};
  return faces;
}

double simplex_volume(const std::array<Vec3, 4>& p) {
  const Vec3 a = p[1] - p[0];
  const Vec3 b = p[2] - p[0];
  const Vec3 c = p[3] - p[0];
  return a.dot(b.cross(c)) / 6.0;
}

double simplex_volume(const std::array<Vec2, 3>& p) {
  const Vec2 a = p[1] - p[0];
  const Vec2 b = p[2] - p[0];
  return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

namespace {

template <int Dim>
struct FaceRecord {
  std::array<int, Dim> key;
  int element;
  int local_face;
};

template <int Dim>
std::string describe_face(const std::array<int, Dim>& key) {
  std::ostringstream os;
  os << "face (";
  for (int i = 0; i < Dim; ++i) os << (i ? "," : "") << key[static_cast<std::size_t>(i)];
  os << ")";
  return os.str();
}

}  // namespace

template <int Dim>
Adjacency<Dim> build_adjacency(std::span<const std::array<int, Dim + 1>> elements) {
  std::vector<FaceRecord<Dim>> records;
  records.reserve(elements.size() * (Dim + 1));
  const auto& faces = local_faces<Dim>();
  for (std::size_t e = 0; e < elements.size(); ++e) {
    for (int lf = 0; lf <= Dim; ++lf) {
      FaceRecord<Dim> r{};
      for (int k = 0; k < Dim; ++k) {
        r.key[static_cast<std::size_t>(k)] =
            elements[e][static_cast<std::size_t>(faces[static_cast<std::size_t>(lf)][static_cast<std::size_t>(k)])];
      }
      std::sort(r.key.begin(), r.key.end());
      r.element = static_cast<int>(e);
      r.local_face = lf;
      records.push_back(r);
    }
  }
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.element < b.element;
  });

  Adjacency<Dim> adjacency(elements.size());
  for (auto& slots : adjacency) slots.fill(kBoundary);

  std::size_t i = 0;
  while (i < records.size()) {
    std::size_t j = i + 1;
    while (j < records.size() && records[j].key == records[i].key) ++j;
    const std::size_t count = j - i;
    if (count > 2) {
      throw Error(ErrorCode::NonManifold,
                  describe_face<Dim>(records[i].key) + " is shared by " + std::to_string(count) + " elements");
    }
    if (count == 2) {
      const auto& a = records[i];
      const auto& b = records[i + 1];
      if (a.element == b.element) {
        throw Error(ErrorCode::NonManifold, describe_face<Dim>(a.key) + " repeated within one element");
      }
      adjacency[static_cast<std::size_t>(a.element)][static_cast<std::size_t>(a.local_face)] = b.element;
      adjacency[static_cast<std::size_t>(b.element)][static_cast<std::size_t>(b.local_face)] = a.element;
    }
    i = j;
  }
  return adjacency;
}

template Adjacency<2> build_adjacency<2>(std::span<const std::array<int, 3>>);
template Adjacency<3> build_adjacency<3>(std::span<const std::array<int, 4>>);

template <int Dim>
SimplexMesh<Dim>::SimplexMesh(std::vector<Point> vertices, std::vector<Element> elements)
    : vertices_(std::move(vertices)), elements_(std::move(elements)) {
  const auto n = static_cast<int>(vertices_.size());
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    for (int v : elements_[e]) {
      if (v < 0 || v >= n) {
        throw Error(ErrorCode::IndexOutOfRange, "element " + std::to_string(e) + " references vertex " +
                                                    std::to_string(v) + " of " + std::to_string(n));
      }
    }
  }
  for (std::size_t v = 0; v < vertices_.size(); ++v) {
    if (!vertices_[v].allFinite()) {
      throw Error(ErrorCode::InvalidArgument, "vertex " + std::to_string(v) + " is not finite");
    }
  }
  build_topology();
  update_orientation();
}

template <int Dim>
void SimplexMesh<Dim>::build_topology() {
  adjacency_ = build_adjacency<Dim>(std::span<const Element>(elements_));

  boundary_faces_.clear();
  boundary_index_.assign(elements_.size(), {});
  for (auto& slots : boundary_index_) slots.fill(-1);
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    for (int lf = 0; lf <= Dim; ++lf) {
      if (adjacency_[e][static_cast<std::size_t>(lf)] != kBoundary) continue;
      BoundaryFace<Dim> f;
      f.vertices = face_vertices(static_cast<int>(e), lf);
      f.element = static_cast<int>(e);
      f.local_face = lf;
      boundary_index_[e][static_cast<std::size_t>(lf)] = static_cast<int>(boundary_faces_.size());
      boundary_faces_.push_back(f);
    }
  }

  // vertex -> incident boundary faces
  const std::size_t nv = vertices_.size();
  vf_offsets_.assign(nv + 1, 0);
  for (const auto& f : boundary_faces_)
    for (int v : f.vertices) ++vf_offsets_[static_cast<std::size_t>(v) + 1];
  std::partial_sum(vf_offsets_.begin(), vf_offsets_.end(), vf_offsets_.begin());
  vf_faces_.assign(static_cast<std::size_t>(vf_offsets_.back()), -1);
  {
    std::vector<int> cursor(vf_offsets_.begin(), vf_offsets_.end() - 1);
    for (std::size_t fi = 0; fi < boundary_faces_.size(); ++fi)
      for (int v : boundary_faces_[fi].vertices)
        vf_faces_[static_cast<std::size_t>(cursor[static_cast<std::size_t>(v)]++)] = static_cast<int>(fi);
  }

  // vertex -> boundary neighbors (unique, sorted)
  std::vector<std::vector<int>> nbrs(nv);
  for (const auto& f : boundary_faces_) {
    for (int a = 0; a < Dim; ++a) {
      for (int b = 0; b < Dim; ++b) {
        if (a != b) nbrs[static_cast<std::size_t>(f.vertices[static_cast<std::size_t>(a)])].push_back(
            f.vertices[static_cast<std::size_t>(b)]);
      }
    }
  }
  vn_offsets_.assign(nv + 1, 0);
  vn_vertices_.clear();
  for (std::size_t v = 0; v < nv; ++v) {
    auto& list = nbrs[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    vn_vertices_.insert(vn_vertices_.end(), list.begin(), list.end());
    vn_offsets_[v + 1] = static_cast<int>(vn_vertices_.size());
  }
}

template <int Dim>
void SimplexMesh<Dim>::update_orientation() {
  inverted_.assign(elements_.size(), 0);
  degenerate_.assign(elements_.size(), 0);
  inverted_count_ = 0;
  inverted_interior_count_ = 0;
  for (std::size_t e = 0; e < elements_.size(); ++e) {
    const double vol = signed_volume(static_cast<int>(e));
    double longest = 0.0;
    const auto& el = elements_[e];
    for (int a = 0; a <= Dim; ++a)
      for (int b = a + 1; b <= Dim; ++b)
        longest = std::max(longest, (vertex(el[static_cast<std::size_t>(a)]) - vertex(el[static_cast<std::size_t>(b)])).norm());
    const double tol = 1e-14 * std::pow(longest, Dim);
    if (std::abs(vol) <= tol) {
      degenerate_[e] = 1;
    } else if (vol < 0.0) {
      inverted_[e] = 1;
    }
    if (inverted_[e] || degenerate_[e]) {
      ++inverted_count_;
      const auto& slots = adjacency_[e];
      const bool touches_boundary = std::find(slots.begin(), slots.end(), kBoundary) != slots.end();
      if (!touches_boundary) ++inverted_interior_count_;
    }
  }
}

template <int Dim>
int SimplexMesh<Dim>::shared_face(int e, int other) const {
  const auto& slots = adjacency_[static_cast<std::size_t>(e)];
  for (int lf = 0; lf <= Dim; ++lf)
    if (slots[static_cast<std::size_t>(lf)] == other) return lf;
  return -1;
}

template <int Dim>
typename SimplexMesh<Dim>::Face SimplexMesh<Dim>::face_vertices(int e, int local_face) const {
  const auto& lf = local_faces<Dim>()[static_cast<std::size_t>(local_face)];
  const auto& el = element(e);
  Face f{};
  for (int k = 0; k < Dim; ++k) f[static_cast<std::size_t>(k)] = el[static_cast<std::size_t>(lf[static_cast<std::size_t>(k)])];
  return f;
}

template <int Dim>
double SimplexMesh<Dim>::signed_volume(int e) const {
  const auto& el = element(e);
  std::array<Point, Dim + 1> p;
  for (int k = 0; k <= Dim; ++k) p[static_cast<std::size_t>(k)] = vertex(el[static_cast<std::size_t>(k)]);
  return simplex_volume(p);
}

template <int Dim>
std::span<const int> SimplexMesh<Dim>::boundary_faces_around(int v) const {
  const auto b = static_cast<std::size_t>(vf_offsets_[static_cast<std::size_t>(v)]);
  const auto e = static_cast<std::size_t>(vf_offsets_[static_cast<std::size_t>(v) + 1]);
  return {vf_faces_.data() + b, e - b};
}

template <int Dim>
std::span<const int> SimplexMesh<Dim>::boundary_neighbors(int v) const {
  const auto b = static_cast<std::size_t>(vn_offsets_[static_cast<std::size_t>(v)]);
  const auto e = static_cast<std::size_t>(vn_offsets_[static_cast<std::size_t>(v) + 1]);
  return {vn_vertices_.data() + b, e - b};
}

template <int Dim>
void SimplexMesh<Dim>::set_positions(std::vector<Point> positions) {
  if (positions.size() != vertices_.size()) {
    throw Error(ErrorCode::InvalidArgument, "set_positions: vertex count mismatch");
  }
  vertices_ = std::move(positions);
  update_orientation();
}

template class SimplexMesh<2>;
template class SimplexMesh<3>;

}  // namespace boundpath
