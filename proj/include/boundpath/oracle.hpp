#pragma once

// Brute-force reference answers for validity and closest-boundary queries.
// Test and validation use only: every query touches every boundary face and
// a search over the element graph.

#include "boundpath/mesh.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <vector>

namespace boundpath {

struct OracleConfig {
  double epsilon_i = 1e-10;
  double cutoff_factor = 2.0;
  double parameter_tolerance = 1e-7;
  /// Evaluate every candidate instead of stopping at the first valid one.
  bool full_report = false;
};

/// Search over (element, entry face) states whose faces the line through s
/// and p crosses. Forward mode requires a non-decreasing crossing parameter;
/// backward mode drops that and stops at cutoff_factor * |p - s|.
template <int Dim>
bool oracle_valid_path(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, int start_face, const Vec<Dim>& p,
                       bool allow_backward, std::optional<int> p_element = std::nullopt,
                       const OracleConfig& config = {});

enum class CandidateVerdict { Valid, Invalid, InvertedOwner, Excluded, ZeroLength, DegenerateFace, NotEvaluated };

const char* to_string(CandidateVerdict verdict);

template <int Dim>
struct OracleCandidate {
  int face;
  Vec<Dim> point;
  double distance;
  CandidateVerdict verdict;
};

template <int Dim>
struct OracleReport {
  std::optional<OracleCandidate<Dim>> best;
  std::vector<OracleCandidate<Dim>> candidates;  // every boundary face, by (distance, face)
};

template <int Dim>
OracleReport<Dim> oracle_closest_boundary(const SimplexMesh<Dim>& mesh, const Vec<Dim>& p, int p_element,
                                          std::optional<int> exclude_vertex, bool allow_backward,
                                          const OracleConfig& config = {});

template <int Dim>
nlohmann::json to_json(const OracleReport<Dim>& report);

}  // namespace boundpath
