#include "boundpath/mesh_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace boundpath {

using nlohmann::json;

namespace {

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

template <int Dim>
SimplexMesh<Dim> mesh_from_arrays(const std::vector<double>& coords, const std::vector<long long>& indices,
                                  int base) {
  if (coords.size() % Dim != 0) {
    throw Error(ErrorCode::ParseError, "vertex array length is not a multiple of " + std::to_string(Dim));
  }
  if (indices.size() % (Dim + 1) != 0) {
    throw Error(ErrorCode::ParseError, "element array length is not a multiple of " + std::to_string(Dim + 1));
  }
  std::vector<Vec<Dim>> vertices(coords.size() / Dim);
  for (std::size_t v = 0; v < vertices.size(); ++v)
    for (int k = 0; k < Dim; ++k) vertices[v][k] = coords[v * Dim + k];
  std::vector<std::array<int, Dim + 1>> elements(indices.size() / (Dim + 1));
  const auto n = static_cast<long long>(vertices.size());
  for (std::size_t e = 0; e < elements.size(); ++e) {
    for (int k = 0; k <= Dim; ++k) {
      const long long idx = indices[e * (Dim + 1) + k] - base;
      if (idx < 0 || idx >= n) {
        throw Error(ErrorCode::IndexOutOfRange, "element " + std::to_string(e) + " references vertex " +
                                                    std::to_string(idx) + " of " + std::to_string(n));
      }
      elements[e][k] = static_cast<int>(idx);
    }
  }
  return SimplexMesh<Dim>(std::move(vertices), std::move(elements));
}

}  // namespace

AnyMesh parse_native_mesh(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, line_column(text, e.byte) + ": " + e.what());
  }
  try {
    const int dim = doc.at("dimension").get<int>();
    const auto coords = doc.at("vertices").get<std::vector<double>>();
    const auto indices = doc.at("elements").get<std::vector<long long>>();
    std::vector<std::string> names;
    if (doc.contains("names")) names = doc["names"].get<std::vector<std::string>>();
    if (dim == 3) {
      auto mesh = mesh_from_arrays<3>(coords, indices, 0);
      mesh.names = std::move(names);
      return mesh;
    }
    if (dim == 2) {
      auto mesh = mesh_from_arrays<2>(coords, indices, 0);
      mesh.names = std::move(names);
      return mesh;
    }
    throw Error(ErrorCode::ParseError, "dimension must be 2 or 3, got " + std::to_string(dim));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("native mesh: ") + e.what());
  }
}

template <int Dim>
std::string to_native_json(const SimplexMesh<Dim>& mesh) {
  json doc;
  doc["dimension"] = Dim;
  std::vector<double> coords;
  coords.reserve(mesh.num_vertices() * Dim);
  for (const auto& v : mesh.vertices())
    for (int k = 0; k < Dim; ++k) coords.push_back(v[k]);
  std::vector<int> indices;
  indices.reserve(mesh.num_elements() * (Dim + 1));
  for (const auto& el : mesh.elements()) indices.insert(indices.end(), el.begin(), el.end());
  doc["vertices"] = coords;
  doc["elements"] = indices;
  if (!mesh.names.empty()) doc["names"] = mesh.names;
  return doc.dump() + "\n";
}

template std::string to_native_json<2>(const TriMesh2&);
template std::string to_native_json<3>(const TetMesh&);

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

AnyMesh load_mesh(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".node" || ext == ".ele") {
    auto node = path;
    auto ele = path;
    node.replace_extension(".node");
    ele.replace_extension(".ele");
    return load_tetgen(node, ele);
  }
  return parse_native_mesh(read_text_file(path));
}

template <int Dim>
void save_mesh(const SimplexMesh<Dim>& mesh, const std::filesystem::path& path) {
  write_text_file(path, to_native_json(mesh));
}

template void save_mesh<2>(const TriMesh2&, const std::filesystem::path&);
template void save_mesh<3>(const TetMesh&, const std::filesystem::path&);

void save_mesh(const AnyMesh& mesh, const std::filesystem::path& path) {
  std::visit([&](const auto& m) { save_mesh(m, path); }, mesh);
}

namespace {

/// Whitespace tokenizer over a TetGen file that tracks line numbers and skips
/// '#' comments.
class TetgenReader {
 public:
  TetgenReader(const std::string& text, std::string name) : name_(std::move(name)) {
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
      std::istringstream ls(line);
      std::vector<std::string> tokens;
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
      if (!tokens.empty()) lines_.push_back({number, std::move(tokens)});
    }
  }

  const std::vector<std::string>& next_line() {
    if (cursor_ >= lines_.size()) throw Error(ErrorCode::ParseError, name_ + ": unexpected end of file");
    current_line_ = lines_[cursor_].first;
    return lines_[cursor_++].second;
  }

  double to_double(const std::string& tok) const {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, where() + ": expected a number, got '" + tok + "'");
    }
  }

  long long to_int(const std::string& tok) const {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, where() + ": expected an integer, got '" + tok + "'");
    }
  }

  std::string where() const { return name_ + " line " + std::to_string(current_line_); }

 private:
  std::string name_;
  std::vector<std::pair<int, std::vector<std::string>>> lines_;
  std::size_t cursor_ = 0;
  int current_line_ = 0;
};

}  // namespace

AnyMesh parse_tetgen(const std::string& node_text, const std::string& ele_text) {
  TetgenReader nodes(node_text, ".node");
  const auto& header = nodes.next_line();
  if (header.size() < 2) throw Error(ErrorCode::ParseError, nodes.where() + ": header needs <count> <dim>");
  const long long count = nodes.to_int(header[0]);
  const int dim = static_cast<int>(nodes.to_int(header[1]));
  if (dim != 2 && dim != 3) throw Error(ErrorCode::ParseError, nodes.where() + ": dimension must be 2 or 3");
  if (count < 0) throw Error(ErrorCode::ParseError, nodes.where() + ": negative node count");

  std::vector<double> coords;
  coords.reserve(static_cast<std::size_t>(count * dim));
  std::optional<long long> base;
  for (long long i = 0; i < count; ++i) {
    const auto& row = nodes.next_line();
    if (static_cast<int>(row.size()) < dim + 1) throw Error(ErrorCode::ParseError, nodes.where() + ": short node row");
    const long long id = nodes.to_int(row[0]);
    if (!base) base = id;
    if (id != *base + i) throw Error(ErrorCode::ParseError, nodes.where() + ": node ids must be consecutive");
    for (int k = 0; k < dim; ++k) coords.push_back(nodes.to_double(row[static_cast<std::size_t>(k) + 1]));
  }
  const long long index_base = base.value_or(0);
  if (index_base != 0 && index_base != 1) throw Error(ErrorCode::ParseError, ".node: ids must start at 0 or 1");

  TetgenReader eles(ele_text, ".ele");
  const auto& eh = eles.next_line();
  if (eh.size() < 2) throw Error(ErrorCode::ParseError, eles.where() + ": header needs <count> <nodes-per-element>");
  const long long ecount = eles.to_int(eh[0]);
  const int per = static_cast<int>(eles.to_int(eh[1]));
  if (per != dim + 1) {
    throw Error(ErrorCode::ParseError, eles.where() + ": expected " + std::to_string(dim + 1) + " nodes per element");
  }
  std::vector<long long> indices;
  indices.reserve(static_cast<std::size_t>(ecount * per));
  for (long long i = 0; i < ecount; ++i) {
    const auto& row = eles.next_line();
    if (static_cast<int>(row.size()) < per + 1) throw Error(ErrorCode::ParseError, eles.where() + ": short element row");
    for (int k = 0; k < per; ++k) indices.push_back(eles.to_int(row[static_cast<std::size_t>(k) + 1]));
  }

  if (dim == 3) return mesh_from_arrays<3>(coords, indices, static_cast<int>(index_base));
  return mesh_from_arrays<2>(coords, indices, static_cast<int>(index_base));
}

AnyMesh load_tetgen(const std::filesystem::path& node_path, const std::filesystem::path& ele_path) {
  return parse_tetgen(read_text_file(node_path), read_text_file(ele_path));
}

template <int Dim>
void write_boundary_obj(const SimplexMesh<Dim>& mesh, std::ostream& out) {
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices()) {
    out << "v " << v[0] << ' ' << v[1] << ' ' << (Dim == 3 ? v[Dim - 1] : 0.0) << '\n';
  }
  for (const auto& f : mesh.boundary_faces()) {
    out << (Dim == 3 ? "f" : "l");
    for (int v : f.vertices) out << ' ' << v + 1;
    out << '\n';
  }
}

template void write_boundary_obj<2>(const TriMesh2&, std::ostream&);
template void write_boundary_obj<3>(const TetMesh&, std::ostream&);

}  // namespace boundpath
