#include "support.hpp"

#include "boundpath/geometry.hpp"
#include "boundpath/oracle.hpp"

#include <gtest/gtest.h>

#include <numeric>
#include <set>

namespace boundpath {
namespace {

TEST(OracleValidPath, SingleTet) {
  const TetMesh m = gen::single_tet();
  const Vec3 p(0.1, 0.2, 0.3);
  for (int f = 0; f < 4; ++f) EXPECT_TRUE(oracle_valid_path(m, closest_point_on_face(m, f, p).point, f, p, false));
}

TEST(OracleValidPath, HelixBarAxis) {
  const TetMesh m = testing::helix_bar(9);
  int cap = -1;
  for (int local = 0; local < 4; ++local) {
    if (m.neighbor(0, local) != kBoundary) continue;
    Vec3 c = Vec3::Zero();
    for (int v : m.face_vertices(0, local)) c += m.vertex(v) / 3.0;
    if (std::abs(c.z() - 1.0) < 1e-12) cap = m.boundary_face_of(0, local);
  }
  ASSERT_GE(cap, 0);
  EXPECT_TRUE(oracle_valid_path(m, Vec3(0, 0, 1), cap, Vec3(0, 0, 9.5), false, std::optional<int>(8)));
  // The far element is required, so stopping one short is not enough.
  EXPECT_FALSE(oracle_valid_path(m, Vec3(0, 0, 1), cap, Vec3(0, 0, 9.5), false, std::optional<int>(3)));
}

TEST(OracleValidPath, SegmentLeavingTheMeshFails) {
  // Two cubes joined only along an edge: the straight segment between their
  // centers crosses empty space.
  const TetMesh a = gen::tet_grid(1, 1, 1);
  std::vector<Vec3> v = a.vertices();
  auto els = a.elements();
  const int off = static_cast<int>(v.size());
  for (const auto& x : a.vertices()) v.push_back(x + Vec3(1.0, 1.0, 0.0));
  for (auto el : a.elements()) {
    for (int& i : el) i += off;
    els.push_back(el);
  }
  const TetMesh m(v, els);
  const Vec3 p(1.5, 1.5, 0.5);
  const auto pe = testing::containing_element(m, p, 1e-12);
  ASSERT_TRUE(pe);
  for (int f = 0; f < static_cast<int>(m.boundary_faces().size()); ++f) {
    const Vec3 s = closest_point_on_face(m, f, Vec3(0.5, 0.5, 0.5)).point;
    if (s.x() > 0.9 || s.y() > 0.9) continue;
    EXPECT_FALSE(oracle_valid_path(m, s, f, p, false, pe));
  }
}

TEST(OracleClosest, CubeCenter) {
  const TetMesh m = gen::cube_5tet();
  const Vec3 p(0.5, 0.5, 0.5);
  const auto r = oracle_closest_boundary(m, p, *testing::containing_element(m, p, 1e-12), std::nullopt, false);
  ASSERT_TRUE(r.best);
  EXPECT_NEAR(r.best->distance, 0.5, 1e-12);
}

TEST(OracleClosest, CandidatesCoverEveryFaceOnce) {
  const TetMesh m = testing::small_folded_bar();
  OracleConfig cfg;
  cfg.full_report = true;
  const Vec3 p = element_centroid(m, 17);
  const auto r = oracle_closest_boundary(m, p, 17, std::nullopt, false, cfg);
  ASSERT_EQ(r.candidates.size(), m.boundary_faces().size());
  std::set<int> faces;
  for (std::size_t k = 0; k < r.candidates.size(); ++k) {
    faces.insert(r.candidates[k].face);
    EXPECT_NE(r.candidates[k].verdict, CandidateVerdict::NotEvaluated);
    if (k) EXPECT_LE(r.candidates[k - 1].distance, r.candidates[k].distance);
  }
  EXPECT_EQ(faces.size(), m.boundary_faces().size());
}

TEST(OracleClosest, SelfExclusionPicksFirstNonSelfValidCandidate) {
  const TetMesh m = testing::small_folded_bar();
  OracleConfig cfg;
  cfg.full_report = true;
  int checked = 0;
  for (int v = 0; v < static_cast<int>(m.num_vertices()) && checked < 20; v += 7) {
    if (!m.is_boundary_vertex(v)) continue;
    int host = -1;
    for (int e = 0; e < static_cast<int>(m.num_elements()) && host < 0; ++e) {
      const auto& el = m.element(e);
      if (std::find(el.begin(), el.end(), v) != el.end()) host = e;
    }
    const auto r = oracle_closest_boundary(m, m.vertex(v), host, v, false, cfg);
    // Exhaustive scan over the report: the first Valid in distance order.
    std::optional<OracleCandidate<3>> first;
    for (const auto& c : r.candidates) {
      const auto& fv = m.boundary_face(c.face).vertices;
      if (std::find(fv.begin(), fv.end(), v) != fv.end()) {
        EXPECT_EQ(c.verdict, CandidateVerdict::Excluded);
        continue;
      }
      if (c.verdict == CandidateVerdict::Valid && !first) first = c;
    }
    ASSERT_EQ(bool(first), bool(r.best));
    if (first) {
      EXPECT_EQ(first->face, r.best->face);
      EXPECT_GT(r.best->distance, 0.0);
    }
    ++checked;
  }
  EXPECT_GT(checked, 5);
}

TEST(OracleClosest, InsensitiveToElementOrder) {
  const TetMesh m = testing::small_folded_bar(2);
  std::vector<int> perm(m.num_elements());
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(19);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::array<int, 4>> els;
  for (int e : perm) els.push_back(m.element(e));
  const TetMesh shuffled(m.vertices(), els);
  std::vector<int> where(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) where[static_cast<std::size_t>(perm[k])] = static_cast<int>(k);

  for (int i = 0; i < 30; ++i) {
    const int e = std::uniform_int_distribution<int>(0, static_cast<int>(m.num_elements()) - 1)(rng);
    const Vec3 p = gen::random_point_in_element(m, e, rng);
    const auto a = oracle_closest_boundary(m, p, e, std::nullopt, false);
    const auto b = oracle_closest_boundary(shuffled, p, where[static_cast<std::size_t>(e)], std::nullopt, false);
    ASSERT_EQ(bool(a.best), bool(b.best));
    if (a.best) EXPECT_NEAR(a.best->distance, b.best->distance, 1e-12);
  }
}

TEST(OracleClosest, InvertedOwnersAreMarked) {
  const TriMesh2 m = gen::inverted_boundary_grid();
  OracleConfig cfg;
  cfg.full_report = true;
  const auto pe = testing::containing_element(m, Vec2(3.5, 2.5));
  ASSERT_TRUE(pe);
  const auto r = oracle_closest_boundary(m, Vec2(3.5, 2.5), *pe, std::nullopt, false, cfg);
  int marked = 0;
  for (const auto& c : r.candidates) {
    const bool inverted = m.flipped_or_flat(m.boundary_face(c.face).element);
    EXPECT_EQ(inverted, c.verdict == CandidateVerdict::InvertedOwner);
    marked += inverted;
  }
  EXPECT_GT(marked, 0);
  ASSERT_TRUE(r.best);
  EXPECT_FALSE(m.flipped_or_flat(m.boundary_face(r.best->face).element));
}

}  // namespace
}  // namespace boundpath
