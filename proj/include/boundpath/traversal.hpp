#pragma once

#include "boundpath/mesh.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace boundpath {

/// Ray origin, unit direction and a perpendicular basis. In 3D (u, v,
/// direction) is right handed; in 2D u is direction rotated by +90 degrees
/// and v is unused.
template <int Dim>
struct RayFrame {
  Vec<Dim> origin;
  Vec<Dim> direction;
  Vec<Dim> u;
  Vec<Dim> v;
};

/// Throws Error(ZeroLengthSegment) if |target - origin| <= 1e-14.
template <int Dim>
RayFrame<Dim> make_ray_frame(const Vec<Dim>& origin, const Vec<Dim>& target);

struct TraversalConfig {
  /// Face-extension tolerance of the exit test (an area in 3D: it bounds
  /// projected 2x-triangle areas; a distance in 2D). Also the barycentric
  /// slack of the point-in-element test.
  double epsilon_i = 1e-10;
  int visited_capacity = 16;
  int static_stack_capacity = 32;
  bool allow_backward = false;
  double cutoff_factor = 2.0;
  bool intersection_free_early_out = false;
  /// Slack for forward monotonicity of the ray parameter, relative to |p - s|.
  double parameter_tolerance = 1e-7;
  bool trace = false;
};

inline constexpr int kMaxStaticStack = 256;
inline constexpr int kMaxVisitedRing = 256;

enum class PathVerdict { Valid, HitBoundary, Exhausted, StepBudget };

const char* to_string(PathVerdict verdict);

struct TraversalStats {
  int elements_visited = 0;
  int pops = 0;
  int loop_events = 0;
  int starvation_events = 0;
  int max_stack = 0;
  bool used_fallback = false;
};

struct TraceRecord {
  int element;
  int entry_face;  // local face of `element` the ray entered through
  double ray_parameter;
  int depth;
};

void write_trace(std::ostream& out, const std::vector<TraceRecord>& records);

struct PathResult {
  PathVerdict verdict = PathVerdict::Exhausted;
  int end_element = -1;
  TraversalStats stats;

  bool valid() const { return verdict == PathVerdict::Valid; }
};

struct ExitCandidate {
  int local_face;
  double t;  // ray parameter of the crossing point, clamped onto the face
};

/// Exit faces of `element` for a ray that entered through `in_local_face`.
/// Returns how many entries of `out` were filled (0..Dim). The test is
/// orientation aware, so it holds for inverted elements and rays running
/// backward through an element.
template <int Dim>
int exit_face_selection(const SimplexMesh<Dim>& mesh, int element, int in_local_face, const RayFrame<Dim>& frame,
                        double epsilon_i, std::array<ExitCandidate, Dim>& out);

/// Caller-owned buffers for one in-flight traversal. A fixed-capacity stack
/// and a circular list of recently entered elements serve the common case;
/// growable variants take over when the fixed ones would overflow.
class TraversalScratch {
 public:
  struct Candidate {
    int element;     // kBoundary when the crossed face is a boundary face
    int local_face;  // entry face in `element`
    double t;
    int depth;
  };

  // fixed-capacity path
  std::array<Candidate, kMaxStaticStack> fixed_stack{};
  int fixed_size = 0;
  std::array<int, kMaxVisitedRing> ring{};
  int ring_size = 0;
  int ring_next = 0;

  // growable fallback
  std::vector<Candidate> stack;
  std::vector<char> visited;
  std::vector<int> touched;

  std::vector<TraceRecord> trace;
};

/// Decide whether the segment from boundary point s (on boundary face
/// `start_face`) to p is covered by an element traversal. With `p_element`
/// the traversal must end in that element (p's topological identity);
/// otherwise any element containing p ends it.
///
/// Throws Error(ZeroLengthSegment) when s == p, and Error(InvalidArgument)
/// when the owner of `start_face` is inverted or degenerate.
template <int Dim>
PathResult is_valid_path(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, int start_face, const Vec<Dim>& p,
                         std::optional<int> p_element, const TraversalConfig& config, TraversalScratch& scratch);

/// is_valid_path with backward travel enabled: the ray may move against its
/// direction inside inverted elements and behind s; branches stop at
/// cutoff_factor * |p - s| instead of at p.
template <int Dim>
PathResult is_valid_path_inverted(const SimplexMesh<Dim>& mesh, const Vec<Dim>& s, int start_face, const Vec<Dim>& p,
                                  std::optional<int> p_element, const TraversalConfig& config,
                                  TraversalScratch& scratch);

}  // namespace boundpath
