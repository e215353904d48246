#pragma once

#include "boundpath/closest_query.hpp"
#include "boundpath/generators.hpp"
#include "boundpath/mesh.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <random>
#include <vector>

namespace boundpath::cli {

template <int Dim>
struct Sample {
  Vec<Dim> point;
  int element;
  std::optional<int> exclude_vertex;
};

/// Up to `count` query points: self-queries at penetrating vertices first
/// (at most half), the rest uniform inside random non-inverted elements.
template <int Dim>
std::vector<Sample<Dim>> draw_samples(const SimplexMesh<Dim>& mesh, int count, std::mt19937_64& rng);

/// Deliberately broken engines for checking that the harness catches them.
enum class Mutant { None, SkipValidity };

struct Comparison {
  bool match = true;
  nlohmann::json record;
};

/// Engine answer against oracle_closest_boundary. Distances must agree to
/// 1e-9 and the engine's face must be valid and co-minimal.
template <int Dim>
Comparison compare_with_oracle(const SimplexMesh<Dim>& mesh, const BoundaryBvh<Dim>& bvh, const Sample<Dim>& sample,
                               const QueryConfig& config, Mutant mutant = Mutant::None);

/// Engine validity verdict on a threaded ray against oracle_valid_path. A
/// step-budget breach is always a finding.
Comparison compare_ray(const TetMesh& mesh, const gen::ThreadedRay& ray, const TraversalConfig& config);

}  // namespace boundpath::cli
