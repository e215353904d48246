#include "boundpath/generators.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace boundpath::gen {

namespace {

template <int Dim>
void orient_positive(const std::vector<Vec<Dim>>& verts, std::vector<std::array<int, Dim + 1>>& elements) {
  for (auto& el : elements) {
    std::array<Vec<Dim>, Dim + 1> p;
    for (int k = 0; k <= Dim; ++k) p[k] = verts[el[k]];
    if (simplex_volume(p) < 0.0) std::swap(el[0], el[1]);
  }
}

}  // namespace

TetMesh single_tet() {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  return TetMesh(std::move(v), {{0, 1, 2, 3}});
}

TetMesh cube_5tet(double size) {
  std::vector<Vec3> v;
  for (int k = 0; k < 8; ++k) v.emplace_back(size * (k & 1), size * ((k >> 1) & 1), size * ((k >> 2) & 1));
  std::vector<std::array<int, 4>> el{{0, 1, 2, 4}, {3, 1, 2, 7}, {5, 1, 4, 7}, {6, 2, 4, 7}, {1, 2, 4, 7}};
  orient_positive<3>(v, el);
  return TetMesh(std::move(v), std::move(el));
}

TetMesh tet_grid(int nx, int ny, int nz, const Vec3& origin, const Vec3& cell) {
  std::vector<Vec3> v;
  v.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1) * (nz + 1)));
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i) v.push_back(origin + Vec3(i * cell.x(), j * cell.y(), k * cell.z()));

  static constexpr std::array<std::array<int, 3>, 6> kPerms{
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  std::vector<std::array<int, 4>> el;
  el.reserve(static_cast<std::size_t>(6 * nx * ny * nz));
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        for (const auto& perm : kPerms) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> tet{};
          tet[0] = grid_vertex(nx, ny, c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[perm[s]];
            tet[s + 1] = grid_vertex(nx, ny, c[0], c[1], c[2]);
          }
          el.push_back(tet);
        }
      }
  orient_positive<3>(v, el);
  return TetMesh(std::move(v), std::move(el));
}

TriMesh2 tri_grid(int nx, int ny, const Vec2& origin, const Vec2& cell) {
  std::vector<Vec2> v;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) v.push_back(origin + Vec2(i * cell.x(), j * cell.y()));
  std::vector<std::array<int, 3>> el;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = grid_vertex(nx, i, j);
      const int b = grid_vertex(nx, i + 1, j);
      const int c = grid_vertex(nx, i + 1, j + 1);
      const int d = grid_vertex(nx, i, j + 1);
      el.push_back({a, b, c});
      el.push_back({a, c, d});
    }
  return TriMesh2(std::move(v), std::move(el));
}

Vec2 CoilMap::operator()(const Vec2& p) const {
  const double theta = total_angle * p.x() / length;
  const double r = radius - p.y() + pitch * theta;
  return {r * std::sin(theta), radius - r * std::cos(theta)};
}

Vec3 CoilMap::operator()(const Vec3& p) const {
  const Vec2 q = (*this)(Vec2(p.x(), p.y()));
  return {q.x(), q.y(), p.z()};
}

template <int Dim>
SimplexMesh<Dim> deformed(const SimplexMesh<Dim>& mesh, const std::function<Vec<Dim>(const Vec<Dim>&)>& map) {
  std::vector<Vec<Dim>> v;
  v.reserve(mesh.num_vertices());
  for (const auto& p : mesh.vertices()) v.push_back(map(p));
  SimplexMesh<Dim> out(std::move(v), mesh.elements());
  out.names = mesh.names;
  return out;
}

template TriMesh2 deformed<2>(const TriMesh2&, const std::function<Vec2(const Vec2&)>&);
template TetMesh deformed<3>(const TetMesh&, const std::function<Vec3(const Vec3&)>&);

namespace {

template <int Dim>
SimplexMesh<Dim> fold(const SimplexMesh<Dim>& rest, const FoldedBarParams& prm) {
  const double length = prm.nx * prm.cell;
  const double thickness = prm.ny * prm.cell;
  const double angle = 2.0 * std::numbers::pi + prm.extra_angle;
  CoilMap coil;
  coil.length = length;
  coil.total_angle = angle;
  coil.pitch = prm.overlap * thickness / (2.0 * std::numbers::pi);
  coil.radius = std::max(length / angle, 1.25 * thickness);

  std::mt19937_64 rng(prm.seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::array<double, 3> phi{phase(rng), phase(rng), phase(rng)};
  const double k = 2.0 * std::numbers::pi / (4.0 * prm.cell);

  double amp = prm.wobble * prm.cell;
  for (int attempt = 0; attempt < 12; ++attempt) {
    const double a = amp;
    auto map = [&](const Vec<Dim>& p) {
      Vec<Dim> q = p;
      q[0] += a * std::sin(k * p[0] + phi[0]);
      q[1] += a * std::sin(k * p[0] + phi[1]);
      if constexpr (Dim == 3) q[2] += a * std::sin(k * p[0] + phi[2]);
      return coil(q);
    };
    auto mesh = deformed<Dim>(rest, map);
    if (mesh.inverted_count() == 0) return mesh;
    amp *= 0.5;
  }
  return deformed<Dim>(rest, [&](const Vec<Dim>& p) { return coil(p); });
}

}  // namespace

TetMesh folded_bar_3d(const FoldedBarParams& p) {
  const double h = p.ny * p.cell;
  const auto rest = tet_grid(p.nx, p.ny, p.nz, Vec3(0.0, -0.5 * h, 0.0), Vec3::Constant(p.cell));
  return fold<3>(rest, p);
}

TriMesh2 folded_bar_2d(const FoldedBarParams& p) {
  const double h = p.ny * p.cell;
  const auto rest = tri_grid(p.nx, p.ny, Vec2(0.0, -0.5 * h), Vec2::Constant(p.cell));
  return fold<2>(rest, p);
}

FoldedBarParams random_folded_params(std::mt19937_64& rng, int min_elements, int max_elements) {
  FoldedBarParams p;
  std::uniform_int_distribution<int> cross(2, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  p.ny = cross(rng);
  p.nz = cross(rng);
  const int per_slice = 6 * p.ny * p.nz;
  const int lo = std::max(8, (min_elements + per_slice - 1) / per_slice);
  const int hi = std::max(lo, max_elements / per_slice);
  p.nx = std::uniform_int_distribution<int>(lo, hi)(rng);
  p.cell = 0.2 + 0.3 * unit(rng);
  p.extra_angle = (0.2 + 0.5 * unit(rng)) * std::numbers::pi;
  p.overlap = 0.25 + 0.55 * unit(rng);
  p.wobble = 0.05 + 0.15 * unit(rng);
  p.seed = static_cast<unsigned>(rng());
  return p;
}

TriMesh2 inverted_interior_grid() {
  auto mesh = tri_grid(6, 4);
  auto v = mesh.vertices();
  v[grid_vertex(6, 3, 2)] = Vec2(4.2, 2.5);
  return TriMesh2(std::move(v), mesh.elements());
}

TriMesh2 inverted_boundary_grid() {
  auto mesh = tri_grid(6, 4);
  auto v = mesh.vertices();
  v[grid_vertex(6, 4, 0)] = Vec2(3.6, 0.8);
  return TriMesh2(std::move(v), mesh.elements());
}

namespace {

template <int N>
std::array<double, N> random_simplex_weights(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1e-12, 1.0);
  std::array<double, N> w{};
  double sum = 0.0;
  for (auto& x : w) {
    x = -std::log(u(rng));
    sum += x;
  }
  for (auto& x : w) x /= sum;
  return w;
}

}  // namespace

template <int Dim>
Vec<Dim> random_point_in_element(const SimplexMesh<Dim>& mesh, int e, std::mt19937_64& rng) {
  const auto w = random_simplex_weights<Dim + 1>(rng);
  Vec<Dim> p = Vec<Dim>::Zero();
  for (int k = 0; k <= Dim; ++k) p += w[k] * mesh.vertex(mesh.element(e)[k]);
  return p;
}

template Vec2 random_point_in_element<2>(const TriMesh2&, int, std::mt19937_64&);
template Vec3 random_point_in_element<3>(const TetMesh&, int, std::mt19937_64&);

template <int Dim>
Vec<Dim> random_point_on_face(const SimplexMesh<Dim>& mesh, int f, std::mt19937_64& rng) {
  const auto w = random_simplex_weights<Dim>(rng);
  Vec<Dim> p = Vec<Dim>::Zero();
  for (int k = 0; k < Dim; ++k) p += w[k] * mesh.vertex(mesh.boundary_face(f).vertices[k]);
  return p;
}

template Vec2 random_point_on_face<2>(const TriMesh2&, int, std::mt19937_64&);
template Vec3 random_point_on_face<3>(const TetMesh&, int, std::mt19937_64&);

TetMesh holed_grid(int n, int lo, int hi) {
  const TetMesh full = tet_grid(n, n, n);
  std::vector<std::array<int, 4>> kept;
  for (int e = 0; e < static_cast<int>(full.num_elements()); ++e) {
    Vec3 c = Vec3::Zero();
    for (int v : full.element(e)) c += full.vertex(v);
    c /= 4.0;
    if (c.x() > lo && c.x() < hi && c.y() > lo && c.y() < hi) continue;
    kept.push_back(full.element(e));
  }
  return TetMesh(full.vertices(), kept);
}

std::vector<ThreadedRay> threaded_rays(const TetMesh& mesh, int count, std::mt19937_64& rng) {
  std::vector<std::pair<Vec3, int>> starts;
  for (int f = 0; f < static_cast<int>(mesh.boundary_faces().size()); ++f) {
    const auto& v = mesh.boundary_face(f).vertices;
    const Vec3 a = mesh.vertex(v[0]), b = mesh.vertex(v[1]), c = mesh.vertex(v[2]);
    starts.emplace_back(a, f);
    starts.emplace_back(0.5 * (a + b), f);
    starts.emplace_back((a + b + c) / 3.0, f);
  }
  std::vector<Vec3> through;
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v)
    if (!mesh.is_boundary_vertex(v)) through.push_back(mesh.vertex(v));
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
    const auto& el = mesh.element(e);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (!mesh.is_boundary_vertex(el[i]) && !mesh.is_boundary_vertex(el[j]))
          through.push_back(0.5 * (mesh.vertex(el[i]) + mesh.vertex(el[j])));
  }
  std::vector<ThreadedRay> rays;
  if (starts.empty() || through.empty() || count <= 0) return rays;
  std::uniform_int_distribution<std::size_t> pick_start(0, starts.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_through(0, through.size() - 1);
  std::uniform_int_distribution<int> pick_beta(1, 4);

  rays.reserve(static_cast<std::size_t>(count));
  for (int attempt = 0; static_cast<int>(rays.size()) < count && attempt < 100 * count; ++attempt) {
    const auto& [s, f] = starts[pick_start(rng)];
    const Vec3 m = through[pick_through(rng)];
    const Vec3 p = m + (pick_beta(rng) / 4.0) * (m - s);
    if ((p - s).norm() < 1e-9) continue;
    int pe = -1;
    for (int e = 0; e < static_cast<int>(mesh.num_elements()) && pe < 0; ++e) {
      const auto& el = mesh.element(e);
      const Vec3 o = mesh.vertex(el[0]);
      Eigen::Matrix3d a;
      for (int k = 0; k < 3; ++k) a.col(k) = mesh.vertex(el[k + 1]) - o;
      const Vec3 w = a.fullPivLu().solve(p - o);
      if (w.minCoeff() >= 0.0 && w.sum() <= 1.0) pe = e;
    }
    if (pe < 0) continue;
    rays.push_back({s, f, p, pe});
  }
  return rays;
}

}  // namespace boundpath::gen
