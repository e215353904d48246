#include "support.hpp"

#include "boundpath/collision_sim.hpp"
#include "boundpath/geometry.hpp"

#include <gtest/gtest.h>

#include <filesystem>

namespace boundpath {
namespace {

/// Unit tet plus a separate small tet with vertex 4 at `probe`.
TetMesh tet_with_probe(const Vec3& probe) {
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  v.push_back(probe);
  v.push_back(probe + Vec3(-0.05, -0.05, -0.3));
  v.push_back(probe + Vec3(0.05, -0.05, -0.3));
  v.push_back(probe + Vec3(0.0, 0.05, -0.3));
  std::array<int, 4> small{4, 5, 6, 7};
  if (simplex_volume(std::array<Vec3, 4>{v[4], v[5], v[6], v[7]}) < 0) std::swap(small[1], small[2]);
  return TetMesh(v, {{0, 1, 2, 3}, small});
}

TEST(DcdVertexTet, InsideOutsideAndIncident) {
  const TetMesh in = tet_with_probe(Vec3(0.1, 0.1, 0.1));
  const auto hits = dcd_vertex_tet(in, ElementBvh(in));
  ASSERT_EQ(hits.size(), 1u);
  EXPECT_EQ(hits[0].vertex, 4);
  EXPECT_EQ(hits[0].element, 0);

  const TetMesh out = tet_with_probe(Vec3(2, 2, 2));
  EXPECT_TRUE(dcd_vertex_tet(out, ElementBvh(out)).empty());

  // Element vertices sit on their own element and must never report it.
  const TetMesh single = gen::single_tet();
  EXPECT_TRUE(dcd_vertex_tet(single, ElementBvh(single)).empty());
}

TEST(DcdEdgeTet, SymmetricPierceAndNearestChord) {
  // A thin tet whose boundary edge pierces the unit cube's tets.
  const TetMesh cube = gen::cube_5tet(2.0);
  std::vector<Vec3> v = cube.vertices();
  auto els = cube.elements();
  const int a = static_cast<int>(v.size());
  v.push_back(Vec3(-1.0, 1.0, 1.0));
  v.push_back(Vec3(3.0, 1.0, 1.0));
  v.push_back(Vec3(1.0, 5.0, 1.0));
  v.push_back(Vec3(1.0, 5.0, 1.5));
  std::array<int, 4> thin{a, a + 1, a + 2, a + 3};
  if (simplex_volume(std::array<Vec3, 4>{v[a], v[a + 1], v[a + 2], v[a + 3]}) < 0) std::swap(thin[2], thin[3]);
  els.push_back(thin);
  const TetMesh m(v, els);
  const auto hits = dcd_edge_tet(m, ElementBvh(m));
  bool found = false;
  for (const auto& h : hits) {
    if (!((h.edge[0] == a && h.edge[1] == a + 1) || (h.edge[0] == a + 1 && h.edge[1] == a))) continue;
    found = true;
    // Brute force: clip the edge against every cube tet by dense sampling
    // and take the chord center nearest the edge midpoint.
    const Vec3 p0 = m.vertex(h.edge[0]), p1 = m.vertex(h.edge[1]);
    const Vec3 mid = 0.5 * (p0 + p1);
    double best = 1e300;
    Vec3 best_center;
    for (int e = 0; e < 5; ++e) {
      double lo = 2, hi = -1;
      for (int k = 0; k <= 20000; ++k) {
        const double t = k / 20000.0;
        if (element_contains(m, e, Vec3(p0 + t * (p1 - p0)), 0.0)) {
          lo = std::min(lo, t);
          hi = std::max(hi, t);
        }
      }
      if (hi < lo) continue;
      const Vec3 c = p0 + 0.5 * (lo + hi) * (p1 - p0);
      if ((c - mid).norm() < best) {
        best = (c - mid).norm();
        best_center = c;
      }
    }
    EXPECT_NEAR((h.center - best_center).norm(), 0.0, 1e-3);
    EXPECT_NEAR((h.center - (m.vertex(h.edge[0]) + h.weight * (m.vertex(h.edge[1]) - m.vertex(h.edge[0])))).norm(),
                0.0, 1e-12);
  }
  EXPECT_TRUE(found);

  const TetMesh apart = tet_with_probe(Vec3(3, 3, 3));
  EXPECT_TRUE(dcd_edge_tet(apart, ElementBvh(apart)).empty());
}

TEST(DcdEdgeTet, SingleTetChordMidpoint) {
  // Edge from (-1, .2, .2) to (1.4, .2, .2) through the unit tet: the chord
  // inside runs from x = 0 to x = 0.6, center (0.3, .2, .2).
  std::vector<Vec3> v{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
                      {-1, 0.2, 0.2}, {1.4, 0.2, 0.2}, {0.2, 3, 0.2}, {0.2, 3, 0.6}};
  std::array<int, 4> probe{4, 5, 6, 7};
  if (simplex_volume(std::array<Vec3, 4>{v[4], v[5], v[6], v[7]}) < 0) std::swap(probe[2], probe[3]);
  const TetMesh m(v, {{0, 1, 2, 3}, probe});
  for (const auto& h : dcd_edge_tet(m, ElementBvh(m))) {
    if (std::min(h.edge[0], h.edge[1]) == 4 && std::max(h.edge[0], h.edge[1]) == 5) {
      EXPECT_EQ(h.element, 0);
      EXPECT_NEAR((h.center - Vec3(0.3, 0.2, 0.2)).norm(), 0.0, 1e-12);
      return;
    }
  }
  FAIL() << "edge 4-5 not reported";
}

CollisionConstraint plane_constraint(int vertex) {
  CollisionConstraint c;
  c.vertices[0] = vertex;
  c.weights[0] = 1.0;
  c.count = 1;
  c.target = Vec3::Zero();
  c.normal = Vec3::UnitY();
  return c;
}

TEST(Constraint, ValuesAtAndAroundTarget) {
  const TetMesh m = gen::cube_5tet();
  const Vec3 s(0.5, 1.0, 0.5);
  int face = -1;
  for (int f = 0; f < 12 && face < 0; ++f)
    if ((closest_point_on_face(m, f, s).point - s).norm() < 1e-12 && face_area_vector(m, f).normalized().y() > 0.5) face = f;
  ASSERT_GE(face, 0);
  ClosestBoundaryResult<3> r;
  r.point = s;
  r.face = face;
  r.feature = BoundaryFeature::face();
  const CollisionConstraint c = build_collision_constraint(0, r, m);
  EXPECT_NEAR(c.normal.norm(), 1.0, 1e-15);
  const Vec3 n = c.normal;
  std::vector<Vec3> x = m.vertices();
  x[0] = s;
  EXPECT_NEAR(c.value(x), 0.0, 1e-15);
  x[0] = s - 0.1 * n;
  EXPECT_NEAR(c.value(x), -0.1, 1e-15);
  x[0] = s + 0.2 * n;
  EXPECT_NEAR(c.value(x), 0.2, 1e-15);

  CollisionConstraint copy = c;
  std::vector<double> w(x.size(), 1.0);
  const Vec3 before = x[0];
  project_constraint(copy, x, w, 0.01);
  EXPECT_EQ(x[0], before);
}

TEST(Constraint, ProjectionNeverLeavesViolation) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int i = 0; i < 1000; ++i) {
    CollisionConstraint c;
    c.count = 1 + i % 4;
    std::vector<Vec3> x;
    std::vector<double> w;
    double wsum = 0;
    for (int k = 0; k < c.count; ++k) {
      c.vertices[static_cast<std::size_t>(k)] = k;
      c.weights[static_cast<std::size_t>(k)] = u(rng);
      wsum += c.weights[static_cast<std::size_t>(k)];
      x.emplace_back(g(rng), g(rng), g(rng));
      w.push_back(i % 7 == 0 && k == 0 && c.count > 1 ? 0.0 : u(rng));  // one pinned vertex, never all
    }
    for (int k = 0; k < c.count; ++k) c.weights[static_cast<std::size_t>(k)] /= wsum;
    c.normal = Vec3(g(rng), g(rng), g(rng)).normalized();
    c.target = Vec3(g(rng), g(rng), g(rng));
    project_constraint(c, x, w, 1.0 / 60.0);
    EXPECT_GE(c.value(x), -1e-9);
  }
}

TEST(Constraint, ZeroComplianceReachesPlaneInOneIteration) {
  SimState st = SimState::from_bodies({gen::single_tet()});
  SimConfig cfg;
  cfg.gravity = Vec3::Zero();
  std::vector<Vec3> x = st.mesh.vertices();
  x[2].y() = -0.3;
  CollisionConstraint c = plane_constraint(2);
  c.target = Vec3(0, 0, 0);
  project_constraint(c, x, st.inverse_mass, cfg.dt);
  EXPECT_NEAR(x[2].y(), 0.0, 1e-15);
}

TEST(PenaltyEnergy, ExamplesAndFiniteDifferences) {
  const Vec3 s(0.3, -0.2, 1.0);
  const Vec3 n = Vec3(1, 2, 2).normalized();
  EXPECT_NEAR(penalty_energy(s - 0.1 * n, s, n, 100.0), 0.5, 1e-12);
  EXPECT_EQ(penalty_energy(s, s, n, 100.0), 0.0);

  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  for (int i = 0; i < 500; ++i) {
    const Vec3 x(g(rng), g(rng), g(rng));
    const Vec3 t(g(rng), g(rng), g(rng));
    const Vec3 nn = Vec3(g(rng), g(rng), g(rng)).normalized();
    const double k = std::exp(g(rng)) * 100;
    const Vec3 grad = penalty_gradient(x, t, nn, k);
    Vec3 fd;
    const double h = 1e-5;
    for (int a = 0; a < 3; ++a) {
      Vec3 xp = x, xm = x;
      xp[a] += h;
      xm[a] -= h;
      fd[a] = (penalty_energy(xp, t, nn, k) - penalty_energy(xm, t, nn, k)) / (2 * h);
    }
    EXPECT_LE((fd - grad).norm(), 1e-6 * std::max(1.0, grad.norm())) << i;
    EXPECT_NEAR((grad - k * (x - t).dot(nn) * nn).norm(), 0.0, 1e-12 * std::max(1.0, grad.norm()));
  }
}

TEST(Substep, RestSpringsWithoutForcesLeaveStateAlone) {
  const TetMesh bar = gen::tet_grid(3, 1, 1);
  SimConfig cfg;
  cfg.gravity = Vec3::Zero();
  Simulator sim(SimState::from_bodies({bar}), cfg);
  for (int i = 0; i < 10; ++i) {
    const auto r = sim.substep();
    EXPECT_EQ(r.constraints, 0);
  }
  for (int v = 0; v < static_cast<int>(bar.num_vertices()); ++v) {
    EXPECT_NEAR((sim.state().mesh.vertex(v) - bar.vertex(v)).norm(), 0.0, 1e-14);
    EXPECT_NEAR(sim.state().velocity[static_cast<std::size_t>(v)].norm(), 0.0, 1e-12);
  }
}

TEST(Substep, GravityMovesEverythingDown) {
  SimConfig cfg;
  cfg.gravity = Vec3(0, -9.81, 0);
  SimState st = SimState::from_bodies({gen::single_tet()});
  const Vec3 before = st.mesh.vertex(0);
  const SubstepReport r = xpbd_substep(st, cfg);
  EXPECT_EQ(r.penetrating_vertices, 0);
  EXPECT_LT(st.mesh.vertex(0).y(), before.y());
}

TEST(Substep, MomentumConservedWithInternalSpringsOnly) {
  TetMesh bar = gen::tet_grid(3, 2, 1, Vec3::Zero(), Vec3::Constant(0.5));
  SimState st = SimState::from_bodies({bar});
  // Squash the bar so the springs have work to do, and give it some spin.
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 0.02);
  auto x = st.mesh.vertices();
  for (auto& p : x) p += Vec3(g(rng), g(rng), g(rng));
  st.mesh.set_positions(x);
  for (std::size_t v = 0; v < st.velocity.size(); ++v) st.velocity[v] = Vec3(-x[v].y(), x[v].x(), 0.0);
  SimConfig cfg;
  cfg.gravity = Vec3::Zero();
  cfg.dt = 1e-3;
  Simulator sim(std::move(st), cfg);
  auto momentum = [&] {
    Vec3 p = Vec3::Zero();
    const auto& s = sim.state();
    for (std::size_t v = 0; v < s.velocity.size(); ++v)
      if (s.inverse_mass[v] > 0) p += s.velocity[v] / s.inverse_mass[v];
    return p;
  };
  const Vec3 p0 = momentum();
  for (int i = 0; i < 20; ++i) {
    const Vec3 before = momentum();
    const auto r = sim.substep();
    ASSERT_EQ(r.constraints, 0);
    EXPECT_LE((momentum() - before).norm(), 1e-8);
  }
  EXPECT_LE((momentum() - p0).norm(), 1e-8);
}

TEST(Substep, FoldedBarRecovers) {
  gen::FoldedBarParams p;
  p.nx = 10;
  p.ny = 2;
  p.nz = 2;
  p.cell = 0.25;
  p.overlap = 0.9;
  p.wobble = 0.1;
  p.extra_angle = 0.2;
  const TetMesh bar = gen::folded_bar_3d(p);
  SimConfig cfg;
  cfg.gravity = Vec3::Zero();
  cfg.dt = 0.01;
  cfg.collision_compliance = 1e-4;
  cfg.spring_compliance = 1e-3;
  Simulator sim(SimState::from_bodies({bar}), cfg);
  ASSERT_GT(sim.penetration_count(), 0);
  int first_clear = -1;
  for (int step = 1; step <= 150; ++step) {
    sim.substep();
    const int count = sim.penetration_count();
    if (first_clear < 0 && count == 0) first_clear = step;
    if (first_clear > 0) EXPECT_EQ(count, 0) << "substep " << step;
  }
  ASSERT_GT(first_clear, 0);
  EXPECT_LE(first_clear, 50);
}

TEST(Substep, NonFiniteStateThrows) {
  SimState st = SimState::from_bodies({gen::single_tet()});
  st.velocity[1] = Vec3(std::numeric_limits<double>::infinity(), 0, 0);
  SimConfig cfg;
  cfg.gravity = Vec3::Zero();
  try {
    xpbd_substep(st, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NumericalBlowup);
  }
}

TEST(Scene, ParsesBundledScene) {
  const auto path = std::filesystem::path(BOUNDPATH_SOURCE_DIR) / "data" / "scenes" / "two_blocks.json";
  const Scene s = load_scene(path);
  EXPECT_EQ(s.bodies.size(), 2u);
  EXPECT_EQ(s.config.iterations, 3);
  EXPECT_EQ(instantiate_body(s.bodies[0]).num_elements(), 384u);
  EXPECT_THROW(parse_scene("{\"bodies\": 3", "."), Error);
  EXPECT_THROW(load_scene("/nonexistent/scene.json"), Error);
}

}  // namespace
}  // namespace boundpath
