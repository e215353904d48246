#include "boundpath/traversal.hpp"

#include "boundpath/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace boundpath {

const char* to_string(PathVerdict verdict) {
  switch (verdict) {
    case PathVerdict::Valid: return "valid";
    case PathVerdict::HitBoundary: return "hit_boundary";
    case PathVerdict::Exhausted: return "exhausted";
    case PathVerdict::StepBudget: return "step_budget";
  }
  return "unknown";
}

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records) {
  for (const auto& r : records) {
    out << r.element << ' ' << r.entry_face << ' ' << r.ray_parameter << ' ' << r.depth << '\n';
  }
}

template <>
RayFrame<3> make_ray_frame<3>(const Vec3& origin, const Vec3& target) {
  const Vec3 d = target - origin;
  const double len = d.norm();
  if (!(len > 1e-14)) throw Error(ErrorCode::ZeroLengthSegment, "ray origin coincides with target");
  const Vec3 n = d / len;
  // Branchless orthonormal basis (Duff et al. 2017).
  const double sign = std::copysign(1.0, n.z());
  const double a = -1.0 / (sign + n.z());
  const double b = n.x() * n.y() * a;
  RayFrame<3> f;
  f.origin = origin;
  f.direction = n;
  f.u = Vec3(1.0 + sign * n.x() * n.x() * a, sign * b, -sign * n.x());
  f.v = Vec3(b, sign + n.y() * n.y() * a, -n.y());
  return f;
}

template <>
RayFrame<2> make_ray_frame<2>(const Vec2& origin, const Vec2& target) {
  const Vec2 d = target - origin;
  const double len = d.norm();
  if (!(len > 1e-14)) throw Error(ErrorCode::ZeroLengthSegment, "ray origin coincides with target");
  RayFrame<2> f;
  f.origin = origin;
  f.direction = d / len;
  f.u = Vec2(-f.direction.y(), f.direction.x());
  f.v = Vec2::Zero();
  return f;
}

namespace {

inline double det2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
inline double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// Ray parameter of the point of triangle (a, b, c) that the projected
// origin maps to; barycentric weights are clamped onto the triangle.
double crossing_parameter(const std::array<Vec3, 3>& pts, std::array<double, 3> w, const RayFrame<3>& frame) {
  const double total = w[0] + w[1] + w[2];
  if (total < 0.0)
    for (auto& x : w) x = -x;
  for (auto& x : w) x = std::max(x, 0.0);
  double sum = w[0] + w[1] + w[2];
  if (!(sum > 0.0)) {
    w = {1.0, 1.0, 1.0};
    sum = 3.0;
  }
  const Vec3 c = (w[0] * pts[0] + w[1] * pts[1] + w[2] * pts[2]) / sum;
  return (c - frame.origin).dot(frame.direction);
}

}  // namespace

template <>
int exit_face_selection<3>(const TetMesh& mesh, int element, int in_local_face, const RayFrame<3>& frame,
                           double eps, std::array<ExitCandidate, 3>& out) {
  const auto& el = mesh.element(element);
  const auto& lf = local_faces<3>()[in_local_face];
  // p0..p2: entry face in its outward order; p3: opposite vertex.
  std::array<Vec3, 4> p;
  std::array<Vec2, 4> q;
  for (int k = 0; k < 3; ++k) p[k] = mesh.vertex(el[lf[k]]);
  p[3] = mesh.vertex(el[in_local_face]);
  for (int k = 0; k < 4; ++k) {
    const Vec3 r = p[k] - frame.origin;
    q[k] = Vec2(r.dot(frame.u), r.dot(frame.v));
  }
  // A projected in_face thinner than eps means the ray runs within eps of
  // its plane. The orientation is then meaningless and every wedge test
  // passes (sign 0).
  const double area = det2(q[1] - q[0], q[2] - q[0]);
  const double sign = std::abs(area) <= eps ? 0.0 : sign_of(area);
  const std::array<double, 3> d{det2(q[3], q[0]), det2(q[3], q[1]), det2(q[3], q[2])};

  int count = 0;
  for (int k = 0; k < 3; ++k) {
    // Face opposite p_k is (p3, p_{k+1}, p_{k+2}); the projected origin must
    // lie in the wedge at q3 spanned by q_{k+1} and q_{k+2}.
    const int a = (k + 1) % 3;
    const int b = (k + 2) % 3;
    if (sign * d[a] >= -eps && sign * d[b] <= eps) {
      // Barycentric weights of the origin in (q3, qa, qb).
      const std::array<double, 3> w{det2(q[a], q[b]), -d[b], d[a]};
      out[count++] = {lf[k], crossing_parameter({p[3], p[a], p[b]}, w, frame)};
    }
  }
  return count;
}

template <>
int exit_face_selection<2>(const TriMesh2& mesh, int element, int in_local_face, const RayFrame<2>& frame,
                           double eps, std::array<ExitCandidate, 2>& out) {
  const auto& el = mesh.element(element);
  const auto& lf = local_faces<2>()[in_local_face];
  const Vec2 p0 = mesh.vertex(el[lf[0]]);
  const Vec2 p1 = mesh.vertex(el[lf[1]]);
  const Vec2 p2 = mesh.vertex(el[in_local_face]);
  // Signed distances from the ray line.
  const double s0 = (p0 - frame.origin).dot(frame.u);
  const double s1 = (p1 - frame.origin).dot(frame.u);
  const double s2 = (p2 - frame.origin).dot(frame.u);
  const double sign = std::abs(s1 - s0) <= eps ? 0.0 : sign_of(s1 - s0);

  auto crossing = [&](const Vec2& a, double sa, const Vec2& b, double sb) {
    double lambda = (sa != sb) ? sa / (sa - sb) : 0.5;
    lambda = std::clamp(lambda, 0.0, 1.0);
    const Vec2 c = a + lambda * (b - a);
    return (c - frame.origin).dot(frame.direction);
  };

  int count = 0;
  if (sign * s2 <= eps) out[count++] = {lf[0], crossing(p1, s1, p2, s2)};   // edge (p1, p2)
  if (sign * s2 >= -eps) out[count++] = {lf[1], crossing(p2, s2, p0, s0)};  // edge (p2, p0)
  return count;
}

namespace {

using Candidate = TraversalScratch::Candidate;

class FixedStorage {
 public:
  FixedStorage(TraversalScratch& s, const TraversalConfig& cfg)
      : s_(s),
        stack_cap_(std::clamp(cfg.static_stack_capacity, 4, kMaxStaticStack)),
        ring_cap_(std::clamp(cfg.visited_capacity, 4, kMaxVisitedRing)) {
    s_.fixed_size = 0;
    s_.ring_size = 0;
    s_.ring_next = 0;
  }
  bool push(const Candidate& c) {
    if (s_.fixed_size >= stack_cap_) return false;
    s_.fixed_stack[s_.fixed_size++] = c;
    return true;
  }
  bool pop(Candidate& c) {
    if (s_.fixed_size == 0) return false;
    c = s_.fixed_stack[--s_.fixed_size];
    return true;
  }
  int size() const { return s_.fixed_size; }
  bool visited(int e) const {
    for (int i = 0; i < s_.ring_size; ++i)
      if (s_.ring[i] == e) return true;
    return false;
  }
  void mark(int e) {
    s_.ring[s_.ring_next] = e;
    s_.ring_next = (s_.ring_next + 1) % ring_cap_;
    s_.ring_size = std::min(s_.ring_size + 1, ring_cap_);
  }

 private:
  TraversalScratch& s_;
  int stack_cap_;
  int ring_cap_;
};

class GrowableStorage {
 public:
  GrowableStorage(TraversalScratch& s, std::size_t num_elements) : s_(s) {
    s_.stack.clear();
    if (s_.visited.size() != num_elements) {
      s_.visited.assign(num_elements, 0);
      s_.touched.clear();
    }
    for (int e : s_.touched) s_.visited[e] = 0;
    s_.touched.clear();
  }
  bool push(const Candidate& c) {
    s_.stack.push_back(c);
    return true;
  }
  bool pop(Candidate& c) {
    if (s_.stack.empty()) return false;
    c = s_.stack.back();
    s_.stack.pop_back();
    return true;
  }
  int size() const { return static_cast<int>(s_.stack.size()); }
  bool visited(int e) const { return s_.visited[e] != 0; }
  void mark(int e) {
    s_.visited[e] = 1;
    s_.touched.push_back(e);
  }

 private:
  TraversalScratch& s_;
};

enum class RunStatus { Done, Overflow, Budget };

template <int Dim>
struct Traversal {
  const SimplexMesh<Dim>& mesh;
  const RayFrame<Dim>& frame;
  const Vec<Dim>& p;
  std::optional<int> p_element;
  const TraversalConfig& cfg;
  bool backward;
  double length;
  std::vector<TraceRecord>* trace;

  bool reaches_target(int e) const {
    if (p_element && *p_element != e) return false;
    return element_contains(mesh, e, p, cfg.epsilon_i);
  }

  enum class Along { No, Miss, Span };

  // A face whose plane contains the line has no single crossing parameter.
  // Clip the line against it in-plane and report the covered span.
  Along along_face(int element, int local_face, double& lo, double& hi) const {
    const auto f = mesh.face_vertices(element, local_face);
    std::array<Vec<Dim>, Dim> q;
    for (int k = 0; k < Dim; ++k) q[k] = mesh.vertex(f[k]) - frame.origin;
    const Vec<Dim>& d = frame.direction;
    const double tol = cfg.parameter_tolerance * length;
    if constexpr (Dim == 3) {
      const Vec3 n = (q[1] - q[0]).cross(q[2] - q[0]);
      if (std::abs(d.dot(n)) > 4.0 * cfg.epsilon_i) return Along::No;
      const double nn = n.norm();
      if (nn == 0.0 || std::abs(n.dot(q[0])) > tol * nn) return Along::Miss;
      lo = -std::numeric_limits<double>::infinity();
      hi = std::numeric_limits<double>::infinity();
      for (int i = 0; i < 3; ++i) {
        const Vec3& a = q[i];
        const Vec3& b = q[(i + 1) % 3];
        Vec3 m = n.cross(b - a);
        if (m.dot(q[(i + 2) % 3] - a) < 0.0) m = -m;
        m.normalize();
        const double c0 = -m.dot(a);
        const double c1 = m.dot(d);
        if (std::abs(c1) < 1e-300) {
          if (c0 < -tol) return Along::Miss;
        } else if (c1 > 0.0) {
          lo = std::max(lo, (-tol - c0) / c1);
        } else {
          hi = std::min(hi, (-tol - c0) / c1);
        }
      }
      return lo <= hi ? Along::Span : Along::Miss;
    } else {
      const Vec2 e = q[1] - q[0];
      if (std::abs(d.x() * e.y() - d.y() * e.x()) > 2.0 * cfg.epsilon_i) return Along::No;
      const double en = e.norm();
      if (en == 0.0 || std::abs(e.x() * q[0].y() - e.y() * q[0].x()) > tol * en) return Along::Miss;
      lo = std::min(q[0].dot(d), q[1].dot(d));
      hi = std::max(q[0].dot(d), q[1].dot(d));
      return Along::Span;
    }
  }

  // Pushes the exits of `element` entered through `local_face` at parameter t.
  template <class Storage>
  bool expand(Storage& st, int element, int local_face, double t, int depth, TraversalStats& stats) const {
    std::array<ExitCandidate, Dim> exits;
    const int n = exit_face_selection<Dim>(mesh, element, local_face, frame, cfg.epsilon_i, exits);
    const double slack = cfg.parameter_tolerance * length;
    int pushed = 0;
    for (int g = 0; g <= Dim; ++g) {
      if (g == local_face) continue;
      double t_exit = 0.0, lo = 0.0, hi = 0.0;
      const Along along = along_face(element, g, lo, hi);
      if (along == Along::Miss) continue;
      if (along == Along::Span) {
        if (!backward && hi < t - slack) continue;
        t_exit = std::clamp(t, lo, hi);
      } else {
        int k = 0;
        while (k < n && exits[k].local_face != g) ++k;
        if (k == n) continue;
        t_exit = exits[k].t;
        if (!backward && t_exit < t - slack) continue;
      }
      const int next = mesh.neighbor(element, g);
      Candidate c{kBoundary, -1, t_exit, depth + 1};
      if (next != kBoundary) {
        c.element = next;
        c.local_face = mesh.shared_face(next, element);
      }
      if (!st.push(c)) return false;
      ++pushed;
    }
    // The entry point can sit on an edge or vertex of this element, in which
    // case the line may continue into any element around that feature
    // without passing through this one. Fan out across every other face that
    // contains the entry point.
    const Vec<Dim> entry = frame.origin + t * frame.direction;
    if (const auto w = barycentric(mesh, element, entry)) {
      for (int g = 0; g <= Dim; ++g) {
        if (g == local_face || std::abs((*w)[g]) > cfg.epsilon_i) continue;
        const int next = mesh.neighbor(element, g);
        if (next == kBoundary) continue;
        if (!st.push(Candidate{next, mesh.shared_face(next, element), t, depth + 1})) return false;
        ++pushed;
      }
    }
    if (pushed == 0) ++stats.starvation_events;
    stats.max_stack = std::max(stats.max_stack, st.size());
    return true;
  }

  template <class Storage>
  RunStatus run(Storage& st, int start_element, int start_local_face, long budget, TraversalStats& stats,
                PathResult& result) const {
    if (trace) trace->clear();
    st.mark(start_element);
    stats.elements_visited = 1;
    if (trace) trace->push_back({start_element, start_local_face, 0.0, 0});
    if (reaches_target(start_element)) {
      result = {PathVerdict::Valid, start_element, stats};
      return RunStatus::Done;
    }
    if (!expand(st, start_element, start_local_face, 0.0, 0, stats)) return RunStatus::Overflow;

    // The start face is on the boundary, so a segment pointing out through
    // it leaves the mesh immediately.
    bool hit_boundary = false;
    const auto w0 = barycentric(mesh, start_element, frame.origin);
    const auto w1 = barycentric(mesh, start_element, Vec<Dim>(frame.origin + frame.direction));
    if (!backward && w0 && w1 && (*w1)[start_local_face] - (*w0)[start_local_face] < -cfg.epsilon_i)
      hit_boundary = true;
    Candidate c{};
    while (st.pop(c)) {
      if (++stats.pops > budget) return RunStatus::Budget;
      if (c.element == kBoundary) {
        hit_boundary = true;
        continue;
      }
      if (st.visited(c.element)) {
        ++stats.loop_events;
        continue;
      }
      st.mark(c.element);
      ++stats.elements_visited;
      if (trace) trace->push_back({c.element, c.local_face, c.t, c.depth});
      if (reaches_target(c.element)) {
        result = {PathVerdict::Valid, c.element, stats};
        return RunStatus::Done;
      }
      if (backward) {
        if (std::abs(c.t) > cfg.cutoff_factor * length) continue;
      } else if (cfg.intersection_free_early_out && c.t > length * (1.0 + cfg.parameter_tolerance)) {
        continue;
      }
      if (!expand(st, c.element, c.local_face, c.t, c.depth, stats)) return RunStatus::Overflow;
    }
    result = {hit_boundary ? PathVerdict::HitBoundary : PathVerdict::Exhausted, -1, stats};
    return RunStatus::Done;
  }
};

template <int Dim>
PathResult traverse(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, int start_face, const Vec<Dim>& p,
                    std::optional<int> p_element, const TraversalConfig& cfg, bool backward,
                    TraversalScratch& scratch) {
  const auto frame = make_ray_frame<Dim>(s, p);
  const auto& face = mesh.boundary_face(start_face);
  if (mesh.flipped_or_flat(face.element)) {
    throw Error(ErrorCode::InvalidArgument,
                "traversal may not start from inverted boundary element " + std::to_string(face.element));
  }
  const Traversal<Dim> tr{mesh, frame, p, p_element, cfg, backward, (p - s).norm(),
                          cfg.trace ? &scratch.trace : nullptr};
  const long budget = static_cast<long>(Dim + 1) * static_cast<long>(mesh.num_elements()) + 16;

  PathResult result;
  {
    TraversalStats stats;
    FixedStorage fixed(scratch, cfg);
    if (tr.run(fixed, face.element, face.local_face, budget, stats, result) == RunStatus::Done) return result;
  }
  TraversalStats stats;
  stats.used_fallback = true;
  GrowableStorage growable(scratch, mesh.num_elements());
  if (tr.run(growable, face.element, face.local_face, budget, stats, result) == RunStatus::Done) return result;
  return {PathVerdict::StepBudget, -1, stats};
}

}  // namespace

template <int Dim>
PathResult is_valid_path(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, int start_face, const Vec<Dim>& p,
                         std::optional<int> p_element, const TraversalConfig& config, TraversalScratch& scratch) {
  return traverse(mesh, s, start_face, p, p_element, config, config.allow_backward, scratch);
}

template <int Dim>
PathResult is_valid_path_inverted(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, int start_face, const Vec<Dim>& p,
                                  std::optional<int> p_element, const TraversalConfig& config,
                                  TraversalScratch& scratch) {
  return traverse(mesh, s, start_face, p, p_element, config, true, scratch);
}

template PathResult is_valid_path<2>(const TriMesh2&, const Vec2&, int, const Vec2&, std::optional<int>,
                                     const TraversalConfig&, TraversalScratch&);
template PathResult is_valid_path<3>(const TetMesh&, const Vec3&, int, const Vec3&, std::optional<int>,
                                     const TraversalConfig&, TraversalScratch&);
template PathResult is_valid_path_inverted<2>(const TriMesh2&, const Vec2&, int, const Vec2&, std::optional<int>,
                                              const TraversalConfig&, TraversalScratch&);
template PathResult is_valid_path_inverted<3>(const TetMesh&, const Vec3&, int, const Vec3&, std::optional<int>,
                                              const TraversalConfig&, TraversalScratch&);

}  // namespace boundpath
