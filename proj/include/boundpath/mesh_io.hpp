#pragma once

#include "boundpath/mesh.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

namespace boundpath {

using AnyMesh = std::variant<TriMesh2, TetMesh>;

/// Native JSON document:
///   {"dimension": 2|3, "vertices": [x0, y0, (z0), ...],
///    "elements": [i0, i1, i2, (i3), ...], "names": [...]}
/// Indices are 0-based. Throws Error(ParseError) with line/column on
/// malformed input and Error(IndexOutOfRange) for bad element indices.
AnyMesh parse_native_mesh(const std::string& text);

template <int Dim>
std::string to_native_json(const SimplexMesh<Dim>& mesh);

/// Dispatches on extension: .node / .ele load a TetGen pair (the sibling file
/// with the other extension is located automatically), anything else is
/// parsed as the native format.
AnyMesh load_mesh(const std::filesystem::path& path);

template <int Dim>
void save_mesh(const SimplexMesh<Dim>& mesh, const std::filesystem::path& path);
void save_mesh(const AnyMesh& mesh, const std::filesystem::path& path);

/// TetGen-style ASCII .node/.ele pair. Node dimension 2 yields a triangle
/// mesh. Indices may be 0- or 1-based; the base is taken from the first
/// node id.
AnyMesh load_tetgen(const std::filesystem::path& node_path, const std::filesystem::path& ele_path);
AnyMesh parse_tetgen(const std::string& node_text, const std::string& ele_text);

/// Wavefront OBJ of the boundary: triangles in 3D, line segments in 2D.
template <int Dim>
void write_boundary_obj(const SimplexMesh<Dim>& mesh, std::ostream& out);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace boundpath
