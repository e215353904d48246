#include "boundpath/oracle.hpp"

#include "boundpath/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace boundpath {

const char* to_string(CandidateVerdict verdict) {
  switch (verdict) {
    case CandidateVerdict::Valid: return "valid";
    case CandidateVerdict::Invalid: return "invalid";
    case CandidateVerdict::InvertedOwner: return "inverted_owner";
    case CandidateVerdict::Excluded: return "excluded";
    case CandidateVerdict::ZeroLength: return "zero_length";
    case CandidateVerdict::DegenerateFace: return "degenerate_face";
    case CandidateVerdict::NotEvaluated: return "not_evaluated";
  }
  return "unknown";
}

namespace {

struct Crossing {
  bool hit = false;
  double t_lo = 0.0;
  double t_hi = 0.0;
};

// The line runs inside the triangle's plane. Drop the dominant normal axis
// and intersect the 2D line with each edge; the hits bound the span.
Crossing coplanar_span(const Vec3& s, const Vec3& d, const std::array<Vec3, 3>& v, double tol) {
  Crossing x;
  const Vec3 n = (v[1] - v[0]).cross(v[2] - v[0]);
  const double nn = n.norm();
  if (nn == 0.0 || std::abs(n.dot(v[0] - s)) > tol * nn) return x;
  int drop = 0;
  n.cwiseAbs().maxCoeff(&drop);
  const int i0 = (drop + 1) % 3, i1 = (drop + 2) % 3;
  auto flat = [&](const Vec3& a) { return Vec2(a[i0], a[i1]); };
  const Vec2 o = flat(s);
  const Vec2 dir = flat(d);
  auto cross2 = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int k = 0; k < 3; ++k) {
    const Vec2 a = flat(v[k]) - o;
    const Vec2 e = flat(v[(k + 1) % 3]) - flat(v[k]);
    const double den = cross2(dir, e);
    const double scale = dir.norm() * e.norm();
    if (std::abs(den) <= 1e-12 * scale) {
      if (std::abs(cross2(a, dir)) > tol * dir.norm()) continue;
      const double dd = dir.squaredNorm();
      for (const Vec2& w : {a, Vec2(a + e)}) {
        lo = std::min(lo, w.dot(dir) / dd);
        hi = std::max(hi, w.dot(dir) / dd);
      }
      continue;
    }
    const double u = cross2(a, dir) / den;
    const double slack = tol / std::max(e.norm(), 1e-300);
    if (u < -slack || u > 1.0 + slack) continue;
    const double t = cross2(a, e) / den;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  if (lo > hi) return x;
  x.hit = true;
  x.t_lo = lo;
  x.t_hi = hi;
  return x;
}

// Line s + t*d against triangle (a, b, c). The weights are unnormalized
// barycentric coordinates of the piercing point.
Crossing cross_face(const Vec3& s, const Vec3& d, const std::array<Vec3, 3>& v, double eps, double tol) {
  const Vec3 a = v[0] - s;
  const Vec3 b = v[1] - s;
  const Vec3 c = v[2] - s;
  const double wa = d.dot(b.cross(c));
  const double wb = d.dot(c.cross(a));
  const double wc = d.dot(a.cross(b));
  const double sum = wa + wb + wc;
  if (std::abs(sum) <= 4.0 * eps) return coplanar_span(s, d, v, tol);
  Crossing x;
  x.hit = (wa >= -eps && wb >= -eps && wc >= -eps) || (wa <= eps && wb <= eps && wc <= eps);
  if (!x.hit) return x;
  const Vec3 q = (wa * a + wb * b + wc * c) / sum;
  x.t_lo = x.t_hi = q.dot(d);
  return x;
}

Crossing cross_face(const Vec2& s, const Vec2& d, const std::array<Vec2, 2>& v, double eps, double tol) {
  const Vec2 a = v[0] - s;
  const Vec2 b = v[1] - s;
  const double sa = d.x() * a.y() - d.y() * a.x();
  const double sb = d.x() * b.y() - d.y() * b.x();
  Crossing x;
  if (std::abs(sa - sb) <= 2.0 * eps) {
    const double len = (b - a).norm();
    x.hit = len > 0.0 && std::abs(sa) <= tol && std::abs(sb) <= tol;
    x.t_lo = std::min(a.dot(d), b.dot(d));
    x.t_hi = std::max(a.dot(d), b.dot(d));
    return x;
  }
  x.hit = (sa >= -eps && sb <= eps) || (sa <= eps && sb >= -eps);
  if (!x.hit) return x;
  const double lambda = std::clamp(sa / (sa - sb), 0.0, 1.0);
  x.t_lo = x.t_hi = (a + lambda * (b - a)).dot(d);
  return x;
}

double volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return (b - a).dot((c - a).cross(d - a)) / 6.0;
}

double volume(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 u = b - a;
  const Vec2 w = c - a;
  return 0.5 * (u.x() * w.y() - u.y() * w.x());
}

template <int Dim>
bool inside(const SimplexMesh<Dim>& mesh, int e, const Vec<Dim>& p, double eps) {
  const auto& el = mesh.element(e);
  std::array<Vec<Dim>, Dim + 1> v;
  for (int k = 0; k <= Dim; ++k) v[k] = mesh.vertex(el[k]);
  double total;
  if constexpr (Dim == 3) total = volume(v[0], v[1], v[2], v[3]);
  else total = volume(v[0], v[1], v[2]);
  if (total == 0.0) return false;
  for (int k = 0; k <= Dim; ++k) {
    auto w = v;
    w[k] = p;
    double sub;
    if constexpr (Dim == 3) sub = volume(w[0], w[1], w[2], w[3]);
    else sub = volume(w[0], w[1], w[2]);
    if (sub / total < -eps) return false;
  }
  return true;
}

}  // namespace

template <int Dim>
bool oracle_valid_path(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, int start_face, const Vec<Dim>& p,
                       bool allow_backward, std::optional<int> p_element, const OracleConfig& config) {
  const double length = (p - s).norm();
  if (!(length > 1e-14)) return false;
  const Vec<Dim> d = (p - s) / length;
  const double eps = config.epsilon_i;
  const double tol = config.parameter_tolerance * length;

  auto reached = [&](int e) { return (!p_element || *p_element == e) && inside(mesh, e, p, eps); };

  struct State {
    int element;
    int entry;
    double t;
  };
  std::vector<char> seen(mesh.num_elements() * (Dim + 1), 0);
  std::deque<State> queue;
  const auto& bf = mesh.boundary_face(start_face);
  queue.push_back({bf.element, bf.local_face, 0.0});
  seen[static_cast<std::size_t>(bf.element) * (Dim + 1) + bf.local_face] = 1;

  while (!queue.empty()) {
    const State cur = queue.front();
    queue.pop_front();
    if (reached(cur.element)) return true;
    if (allow_backward && std::abs(cur.t) > config.cutoff_factor * length) continue;
    const auto& el = mesh.element(cur.element);
    for (int f = 0; f <= Dim; ++f) {
      if (f == cur.entry) continue;
      std::array<Vec<Dim>, Dim> verts;
      int k = 0;
      for (int j = 0; j <= Dim; ++j)
        if (j != f) verts[k++] = mesh.vertex(el[j]);
      const Crossing x = cross_face(s, d, verts, eps, tol);
      if (!x.hit) continue;
      double t = x.t_lo;
      if (!allow_backward) {
        if (x.t_hi < cur.t - tol) continue;
        t = std::clamp(cur.t, x.t_lo, x.t_hi);
      }
      const int next = mesh.neighbor(cur.element, f);
      if (next == kBoundary) continue;
      int entry = -1;
      for (int j = 0; j <= Dim; ++j)
        if (mesh.neighbor(next, j) == cur.element) entry = j;
      const std::size_t key = static_cast<std::size_t>(next) * (Dim + 1) + static_cast<std::size_t>(entry);
      if (seen[key]) continue;
      seen[key] = 1;
      queue.push_back({next, entry, t});
    }
  }
  return false;
}

template bool oracle_valid_path<2>(const TriMesh2&, const Vec2&, int, const Vec2&, bool, std::optional<int>,
                                   const OracleConfig&);
template bool oracle_valid_path<3>(const TetMesh&, const Vec3&, int, const Vec3&, bool, std::optional<int>,
                                   const OracleConfig&);

template <int Dim>
OracleReport<Dim> oracle_closest_boundary(const SimplexMesh<Dim>& mesh, const Vec<Dim>& p, int p_element,
                                          std::optional<int> exclude_vertex, bool allow_backward,
                                          const OracleConfig& config) {
  OracleReport<Dim> report;
  const bool query_defined = !mesh.flipped_or_flat(p_element);
  const auto& faces = mesh.boundary_faces();
  report.candidates.reserve(faces.size());
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    OracleCandidate<Dim> c{f, Vec<Dim>::Zero(), std::numeric_limits<double>::infinity(),
                           CandidateVerdict::NotEvaluated};
    try {
      c.point = closest_point_on_face(mesh, f, p).point;
      c.distance = (c.point - p).norm();
    } catch (const Error&) {
      c.verdict = CandidateVerdict::DegenerateFace;
    }
    const auto& verts = faces[static_cast<std::size_t>(f)].vertices;
    if (c.verdict == CandidateVerdict::NotEvaluated) {
      if (mesh.flipped_or_flat(faces[static_cast<std::size_t>(f)].element)) {
        c.verdict = CandidateVerdict::InvertedOwner;
      } else if (exclude_vertex && std::find(verts.begin(), verts.end(), *exclude_vertex) != verts.end()) {
        c.verdict = CandidateVerdict::Excluded;
      } else if (c.distance <= 1e-14) {
        c.verdict = CandidateVerdict::ZeroLength;
      }
    }
    report.candidates.push_back(c);
  }
  std::sort(report.candidates.begin(), report.candidates.end(), [](const auto& a, const auto& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.face < b.face);
  });
  if (!query_defined) return report;

  for (auto& c : report.candidates) {
    if (c.verdict != CandidateVerdict::NotEvaluated) continue;
    if (report.best && !config.full_report) break;
    const bool ok = oracle_valid_path(mesh, c.point, c.face, p, allow_backward, std::optional<int>(p_element), config);
    c.verdict = ok ? CandidateVerdict::Valid : CandidateVerdict::Invalid;
    if (ok && !report.best) report.best = c;
  }
  return report;
}

template OracleReport<2> oracle_closest_boundary<2>(const TriMesh2&, const Vec2&, int, std::optional<int>, bool,
                                                    const OracleConfig&);
template OracleReport<3> oracle_closest_boundary<3>(const TetMesh&, const Vec3&, int, std::optional<int>, bool,
                                                    const OracleConfig&);

template <int Dim>
nlohmann::json to_json(const OracleReport<Dim>& report) {
  auto point = [](const Vec<Dim>& v) {
    nlohmann::json a = nlohmann::json::array();
    for (int k = 0; k < Dim; ++k) a.push_back(v[k]);
    return a;
  };
  auto candidate = [&](const OracleCandidate<Dim>& c) {
    return nlohmann::json{{"face", c.face},
                          {"point", point(c.point)},
                          {"distance", std::isfinite(c.distance) ? nlohmann::json(c.distance) : nlohmann::json()},
                          {"verdict", to_string(c.verdict)}};
  };
  nlohmann::json j;
  j["best"] = report.best ? candidate(*report.best) : nlohmann::json();
  j["candidates"] = nlohmann::json::array();
  for (const auto& c : report.candidates) j["candidates"].push_back(candidate(c));
  return j;
}

template nlohmann::json to_json<2>(const OracleReport<2>&);
template nlohmann::json to_json<3>(const OracleReport<3>&);

}  // namespace boundpath
