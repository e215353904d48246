#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <stdexcept>
#include <string>

namespace boundpath {

template <int Dim>
using Vec = Eigen::Matrix<double, Dim, 1>;
using Vec2 = Vec<2>;
using Vec3 = Vec<3>;

/// Neighbor slot value for a face with a single owning element.
inline constexpr int kBoundary = -1;

enum class ErrorCode {
  NonManifold,
  DegenerateFace,
  ZeroNormal,
  ParseError,
  IndexOutOfRange,
  EmptyBoundary,
  ZeroLengthSegment,
  NumericalBlowup,
  InvalidArgument,
  Io,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class FeatureKind { FaceInterior, Edge, Vertex };

const char* to_string(FeatureKind kind);

/// Location of a closest point on a boundary face. `vertices` holds global
/// vertex ids: both entries for Edge, the first for Vertex, unused otherwise.
struct BoundaryFeature {
  FeatureKind kind = FeatureKind::FaceInterior;
  std::array<int, 2> vertices{-1, -1};

  static BoundaryFeature face() { return {}; }
  static BoundaryFeature edge(int a, int b) { return {FeatureKind::Edge, {a, b}}; }
  static BoundaryFeature vertex(int v) { return {FeatureKind::Vertex, {v, -1}}; }

  friend bool operator==(const BoundaryFeature&, const BoundaryFeature&) = default;
};

}  // namespace boundpath
