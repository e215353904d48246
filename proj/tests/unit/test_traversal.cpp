#include "support.hpp"

#include "boundpath/geometry.hpp"
#include "boundpath/oracle.hpp"
#include "boundpath/traversal.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace boundpath {
namespace {

int boundary_face_at(const TetMesh& m, int e, int local) { return m.boundary_face_of(e, local); }

std::set<int> exit_set(const TetMesh& m, int e, int in, const RayFrame<3>& frame, double eps) {
  std::array<ExitCandidate, 3> out{};
  const int n = exit_face_selection<3>(m, e, in, frame, eps, out);
  std::set<int> faces;
  for (int k = 0; k < n; ++k) faces.insert(out[static_cast<std::size_t>(k)].local_face);
  return faces;
}

Vec3 face_centroid(const TetMesh& m, int e, int local) {
  Vec3 c = Vec3::Zero();
  for (int v : m.face_vertices(e, local)) c += m.vertex(v);
  return c / 3.0;
}

TEST(RayFrame, AxisExample) {
  const auto f = make_ray_frame<3>(Vec3::Zero(), Vec3(0, 0, 1));
  EXPECT_NEAR((f.direction - Vec3(0, 0, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(f.u.dot(f.direction), 0.0, 1e-12);
  EXPECT_NEAR(f.v.dot(f.direction), 0.0, 1e-12);
  EXPECT_NEAR(f.u.dot(f.v), 0.0, 1e-12);
}

TEST(RayFrame, OrthonormalOnRandomDirections) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 5000; ++i) {
    const Vec3 o(g(rng), g(rng), g(rng));
    Vec3 d(g(rng), g(rng), g(rng));
    // Include near-axis directions, where naive frame constructions break.
    if (i % 5 == 0) d = Vec3(1e-9 * g(rng), 1e-9 * g(rng), (i % 10 == 0) ? -1.0 : 1.0);
    const auto f = make_ray_frame<3>(o, o + d);
    EXPECT_NEAR(f.direction.norm(), 1.0, 1e-12);
    EXPECT_NEAR(f.u.norm(), 1.0, 1e-12);
    EXPECT_NEAR(f.v.norm(), 1.0, 1e-12);
    EXPECT_NEAR(f.u.dot(f.direction), 0.0, 1e-12);
    EXPECT_NEAR(f.v.dot(f.direction), 0.0, 1e-12);
    EXPECT_NEAR(f.u.dot(f.v), 0.0, 1e-12);
    EXPECT_NEAR((f.u.cross(f.v) - f.direction).norm(), 0.0, 1e-12);
  }
  const auto f2 = make_ray_frame<2>(Vec2(1, 1), Vec2(4, 5));
  EXPECT_NEAR((f2.direction - Vec2(0.6, 0.8)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(f2.u.dot(f2.direction), 0.0, 1e-15);
}

TEST(RayFrame, ZeroLength) {
  try {
    make_ray_frame<3>(Vec3(1, 2, 3), Vec3(1, 2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroLengthSegment);
  }
  EXPECT_THROW(make_ray_frame<2>(Vec2(0, 0), Vec2(0, 1e-15)), Error);
}

TEST(ExitFaces, ThroughOppositeVertexReturnsAllThree) {
  const TetMesh m = testing::regular_tet();
  for (int in = 0; in < 4; ++in) {
    const Vec3 s = face_centroid(m, 0, in);
    const Vec3 apex = m.vertex(m.element(0)[static_cast<std::size_t>(in)]);
    const auto frame = make_ray_frame<3>(s, apex);
    std::set<int> expected;
    for (int g = 0; g < 4; ++g)
      if (g != in) expected.insert(g);
    EXPECT_EQ(exit_set(m, 0, in, frame, 1e-10), expected) << "in face " << in;
  }
}

TEST(ExitFaces, ThroughOtherFaceCentroidReturnsThatFace) {
  const TetMesh m = testing::regular_tet();
  for (int in = 0; in < 4; ++in) {
    for (int g = 0; g < 4; ++g) {
      if (g == in) continue;
      const Vec3 s = face_centroid(m, 0, in);
      const auto frame = make_ray_frame<3>(s, face_centroid(m, 0, g));
      EXPECT_EQ(exit_set(m, 0, in, frame, 1e-10), std::set<int>{g});
      EXPECT_EQ(exit_set(m, 0, in, frame, 0.0), std::set<int>{g});
    }
  }
}

TEST(ExitFaces, PlanarEdge) {
  const TriMesh2 m({{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  // Enter through the edge opposite vertex 2 (the x axis) and leave through
  // the hypotenuse, opposite vertex 0.
  const auto frame = make_ray_frame<2>(Vec2(0.3, 0.0), Vec2(0.4, 0.7));
  std::array<ExitCandidate, 2> out{};
  const int n = exit_face_selection<2>(m, 0, 2, frame, 0.0, out);
  ASSERT_EQ(n, 1);
  EXPECT_EQ(out[0].local_face, 0);
  // The crossing parameter lands on the hypotenuse x + y = 1.
  const Vec2 c = frame.origin + out[0].t * frame.direction;
  EXPECT_NEAR(c.x() + c.y(), 1.0, 1e-12);
}

TEST(ExitFaces, MonotoneInEpsilon) {
  const TetMesh m = gen::tet_grid(3, 3, 3);
  std::mt19937_64 rng(21);
  const double eps[] = {0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
  for (int trial = 0; trial < 3000; ++trial) {
    const int e = std::uniform_int_distribution<int>(0, static_cast<int>(m.num_elements()) - 1)(rng);
    const int in = std::uniform_int_distribution<int>(0, 3)(rng);
    // Rays from a face point, often snapped to a face vertex or edge, aimed
    // at random targets or exactly at element vertices.
    const auto fv = m.face_vertices(e, in);
    std::array<double, 3> w{};
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& x : w) x = u(rng);
    if (trial % 3 == 0) w[static_cast<std::size_t>(trial % 9 / 3)] = 0.0;
    const double sum = w[0] + w[1] + w[2];
    Vec3 s = Vec3::Zero();
    for (int k = 0; k < 3; ++k) s += (w[static_cast<std::size_t>(k)] / sum) * m.vertex(fv[static_cast<std::size_t>(k)]);
    Vec3 target = trial % 4 == 0 ? m.vertex(m.element(e)[static_cast<std::size_t>(in)])
                                 : gen::random_point_in_element(m, e, rng);
    if ((target - s).norm() < 1e-9) continue;
    const auto frame = make_ray_frame<3>(s, target);
    std::set<int> prev;
    for (double x : eps) {
      const auto cur = exit_set(m, e, in, frame, x);
      EXPECT_TRUE(std::includes(cur.begin(), cur.end(), prev.begin(), prev.end()))
          << "trial " << trial << " eps " << x;
      prev = cur;
    }
  }
}

TEST(IsValidPath, SingleTetInteriorPoint) {
  const TetMesh m = gen::single_tet();
  const Vec3 p(0.2, 0.2, 0.2);
  for (int f = 0; f < 4; ++f) {
    const auto cp = closest_point_on_face(m, f, p);
    TraversalScratch scratch;
    const auto r = is_valid_path(m, cp.point, f, p, std::optional<int>(0), {}, scratch);
    EXPECT_TRUE(r.valid());
    EXPECT_EQ(r.end_element, 0);
    EXPECT_EQ(r.stats.elements_visited, 1);
  }
}

TEST(IsValidPath, HelixBarAxisVisitsEveryElement) {
  const int n = 12;
  const TetMesh m = testing::helix_bar(n);
  ASSERT_EQ(m.inverted_count(), 0u);
  const Vec3 s(0, 0, 1);  // centroid of the first cap (q0, q1, q2)
  const Vec3 p(0, 0, n + 0.5);
  int cap = -1;
  for (int f = 0; f < 4; ++f)
    if (m.neighbor(0, f) == kBoundary && element_contains(m, 0, s, 1e-12) &&
        std::abs(face_centroid(m, 0, f).z() - 1.0) < 1e-12)
      cap = boundary_face_at(m, 0, f);
  ASSERT_GE(cap, 0);
  TraversalConfig cfg;
  cfg.trace = true;
  TraversalScratch scratch;
  const auto r = is_valid_path(m, s, cap, p, std::optional<int>(n - 1), cfg, scratch);
  ASSERT_TRUE(r.valid());
  EXPECT_EQ(r.stats.elements_visited, n);
  std::set<int> seen;
  for (const auto& t : scratch.trace) seen.insert(t.element);
  EXPECT_EQ(static_cast<int>(seen.size()), n);
  EXPECT_TRUE(oracle_valid_path(m, s, cap, p, false, std::optional<int>(n - 1)));
}

TEST(IsValidPath, FoldedStripNearestFlapIsRejected) {
  const TriMesh2 m = testing::small_folded_strip();
  std::mt19937_64 rng(4);
  int rejected = 0, checked = 0;
  for (int e = 0; e < static_cast<int>(m.num_elements()) && rejected < 5; ++e) {
    const Vec2 p = element_centroid(m, e);
    int best = -1;
    double bd = 1e300;
    Vec2 bs;
    for (int f = 0; f < static_cast<int>(m.boundary_faces().size()); ++f) {
      const auto cp = closest_point_on_face(m, f, p);
      const double d = (cp.point - p).norm();
      if (d < bd) {
        bd = d;
        best = f;
        bs = cp.point;
      }
    }
    TraversalScratch scratch;
    const auto r = is_valid_path(m, bs, best, p, std::optional<int>(e), {}, scratch);
    const bool oracle = oracle_valid_path(m, bs, best, p, false, std::optional<int>(e));
    EXPECT_EQ(r.valid(), oracle) << "element " << e;
    ++checked;
    if (!r.valid()) {
      ++rejected;
      EXPECT_EQ(r.verdict, PathVerdict::HitBoundary);
    }
  }
  EXPECT_GT(rejected, 0) << "the fold should hide the nearest boundary of some interior points";
}

TEST(IsValidPath, InvertedInteriorNeedsBackwardTravel) {
  const TriMesh2 m = gen::inverted_interior_grid();
  ASSERT_TRUE(m.has_inverted_interior());
  const Vec2 s(6, 2.4), p(1, 2.4);
  int start = -1;
  for (int f = 0; f < static_cast<int>(m.boundary_faces().size()); ++f) {
    const auto& v = m.boundary_face(f).vertices;
    const Vec2 a = m.vertex(v[0]), b = m.vertex(v[1]);
    if (a.x() == 6 && b.x() == 6 && std::min(a.y(), b.y()) <= 2.4 && std::max(a.y(), b.y()) >= 2.4) start = f;
  }
  ASSERT_GE(start, 0);
  const auto pe = testing::containing_element(m, p);
  ASSERT_TRUE(pe);
  TraversalScratch scratch;
  EXPECT_FALSE(is_valid_path(m, s, start, p, pe, {}, scratch).valid());
  EXPECT_TRUE(is_valid_path_inverted(m, s, start, p, pe, {}, scratch).valid());
  EXPECT_FALSE(oracle_valid_path(m, s, start, p, false, pe));
  EXPECT_TRUE(oracle_valid_path(m, s, start, p, true, pe));
}

TEST(IsValidPath, InvertedStartOwnerIsRejected) {
  const TriMesh2 m = gen::inverted_boundary_grid();
  int face = -1;
  for (int f = 0; f < static_cast<int>(m.boundary_faces().size()); ++f)
    if (m.flipped_or_flat(m.boundary_face(f).element)) face = f;
  ASSERT_GE(face, 0);
  const auto& v = m.boundary_face(face).vertices;
  const Vec2 s = 0.5 * (m.vertex(v[0]) + m.vertex(v[1]));
  TraversalScratch scratch;
  try {
    is_valid_path(m, s, face, Vec2(3, 2), std::nullopt, {}, scratch);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
}

TEST(IsValidPath, ZeroLengthSegmentThrows) {
  const TetMesh m = gen::single_tet();
  const Vec3 s = closest_point_on_face(m, 0, Vec3(0.2, 0.2, 0.2)).point;
  TraversalScratch scratch;
  EXPECT_THROW(is_valid_path(m, s, 0, s, std::nullopt, {}, scratch), Error);
}

TEST(IsValidPath, ThreadedRaysAgreeWithOracleAndTerminate) {
  const TetMesh m = gen::holed_grid(5, 2, 3);
  std::mt19937_64 rng(17);
  const auto rays = gen::threaded_rays(m, 600, rng);
  ASSERT_GE(rays.size(), 500u);
  TraversalConfig cfg;
  TraversalScratch scratch;
  int valid = 0;
  for (const auto& ray : rays) {
    const auto r = is_valid_path(m, ray.s, ray.face, ray.p, std::optional<int>(ray.p_element), cfg, scratch);
    ASSERT_NE(r.verdict, PathVerdict::StepBudget);
    const bool oracle = oracle_valid_path(m, ray.s, ray.face, ray.p, false, std::optional<int>(ray.p_element));
    EXPECT_EQ(r.valid(), oracle);
    EXPECT_LE(r.stats.elements_visited, static_cast<int>(m.num_elements()) * 4);
    valid += r.valid();
  }
  EXPECT_GT(valid, 0);
}

TEST(IsValidPath, VerdictStableUnderEpsilonTimesTen) {
  const TetMesh m = testing::small_folded_bar();
  std::mt19937_64 rng(8);
  TraversalConfig base, wide;
  wide.epsilon_i = 10 * base.epsilon_i;
  TraversalScratch scratch;
  for (int i = 0; i < 400; ++i) {
    const int e = std::uniform_int_distribution<int>(0, static_cast<int>(m.num_elements()) - 1)(rng);
    const int f = std::uniform_int_distribution<int>(0, static_cast<int>(m.boundary_faces().size()) - 1)(rng);
    const Vec3 p = gen::random_point_in_element(m, e, rng);
    const Vec3 s = closest_point_on_face(m, f, p).point;
    const auto a = is_valid_path(m, s, f, p, std::optional<int>(e), base, scratch);
    const auto b = is_valid_path(m, s, f, p, std::optional<int>(e), wide, scratch);
    EXPECT_EQ(a.valid(), b.valid());
  }
}

TEST(IsValidPath, ScratchReuseMatchesFreshScratch) {
  const TetMesh m = gen::holed_grid(5, 2, 3);
  std::mt19937_64 rng(2);
  const auto rays = gen::threaded_rays(m, 300, rng);
  TraversalConfig small;
  small.visited_capacity = 4;
  small.static_stack_capacity = 4;
  TraversalScratch reused;
  for (const auto& cfg : {TraversalConfig{}, small}) {
    for (const auto& ray : rays) {
      TraversalScratch fresh;
      const auto a = is_valid_path(m, ray.s, ray.face, ray.p, std::optional<int>(ray.p_element), cfg, reused);
      const auto b = is_valid_path(m, ray.s, ray.face, ray.p, std::optional<int>(ray.p_element), cfg, fresh);
      EXPECT_EQ(a.verdict, b.verdict);
      EXPECT_EQ(a.end_element, b.end_element);
      EXPECT_EQ(a.stats.elements_visited, b.stats.elements_visited);
      EXPECT_EQ(a.stats.pops, b.stats.pops);
    }
  }
}

TEST(IsValidPath, TinyBuffersFallBackWithoutChangingVerdicts) {
  const TetMesh m = gen::holed_grid(5, 2, 3);
  std::mt19937_64 rng(6);
  const auto rays = gen::threaded_rays(m, 300, rng);
  TraversalConfig tiny;
  tiny.visited_capacity = 1;
  tiny.static_stack_capacity = 1;
  TraversalScratch scratch;
  int fallbacks = 0;
  for (const auto& ray : rays) {
    const auto a = is_valid_path(m, ray.s, ray.face, ray.p, std::optional<int>(ray.p_element), {}, scratch);
    const auto b = is_valid_path(m, ray.s, ray.face, ray.p, std::optional<int>(ray.p_element), tiny, scratch);
    EXPECT_EQ(a.valid(), b.valid());
    fallbacks += b.stats.used_fallback;
  }
  EXPECT_GT(fallbacks, 0);
}

TEST(IsValidPath, BackwardModeMatchesForwardWithoutInversions) {
  const TetMesh m = testing::small_folded_bar(5);
  ASSERT_EQ(m.inverted_count(), 0u);
  std::mt19937_64 rng(12);
  TraversalScratch scratch;
  for (int i = 0; i < 400; ++i) {
    const int e = std::uniform_int_distribution<int>(0, static_cast<int>(m.num_elements()) - 1)(rng);
    const int f = std::uniform_int_distribution<int>(0, static_cast<int>(m.boundary_faces().size()) - 1)(rng);
    const Vec3 p = gen::random_point_in_element(m, e, rng);
    const Vec3 s = closest_point_on_face(m, f, p).point;
    const bool fwd = is_valid_path(m, s, f, p, std::optional<int>(e), {}, scratch).valid();
    const bool bwd = is_valid_path_inverted(m, s, f, p, std::optional<int>(e), {}, scratch).valid();
    EXPECT_EQ(fwd, bwd);
  }
}

}  // namespace
}  // namespace boundpath
