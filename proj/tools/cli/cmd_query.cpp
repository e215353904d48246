#include "commands.hpp"
#include "common.hpp"

#include "boundpath/geometry.hpp"
#include "boundpath/traversal.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace boundpath::cli {

namespace {

struct QueryArgs {
  CommonOptions common;
  std::string mesh;
  std::vector<std::string> points;
  std::string points_file;
  std::vector<int> vertices;
  std::optional<int> element;
  std::optional<int> exclude_vertex;
  std::string out;
};

template <int Dim>
struct Job {
  Vec<Dim> point;
  int element;
  std::optional<int> exclude;
};

template <int Dim>
void write_obj_vertex(std::ostream& out, const Vec<Dim>& v) {
  out << "v " << v[0] << ' ' << v[1] << ' ' << (Dim == 3 ? v[Dim - 1] : 0.0) << '\n';
}

template <int Dim>
int run_query(const SimplexMesh<Dim>& mesh, const QueryArgs& a) {
  std::vector<std::string> texts = a.points;
  if (!a.points_file.empty()) {
    std::istringstream in(read_text_file(a.points_file));
    std::string line;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos || line[0] == '#') continue;
      texts.push_back(line);
    }
  }
  std::vector<Job<Dim>> jobs;
  for (const auto& t : texts) {
    const Vec<Dim> p = parse_point<Dim>(t);
    const int e = a.element ? *a.element : locate_element(mesh, p);
    jobs.push_back({p, e, a.exclude_vertex});
  }
  const auto inside = a.vertices.empty() ? std::vector<std::pair<int, int>>{} : penetrating_vertices(mesh);
  for (int v : a.vertices) {
    if (v < 0 || v >= static_cast<int>(mesh.num_vertices()))
      throw Error(ErrorCode::IndexOutOfRange, "vertex " + std::to_string(v) + " out of range");
    int e = -1;
    for (const auto& [pv, pe] : inside)
      if (pv == v) e = pe;
    jobs.push_back({mesh.vertex(v), e, v});
  }
  if (jobs.empty()) throw CLI::ValidationError("query", "no points given (use --point, --points or --vertex)");
  if (a.element && *a.element >= static_cast<int>(mesh.num_elements()))
    throw Error(ErrorCode::IndexOutOfRange, "element out of range");

  const BoundaryBvh<Dim> bvh(mesh);
  const QueryConfig base = a.common.query_config();
  std::vector<std::optional<ClosestBoundaryResult<Dim>>> results(jobs.size());
  std::vector<nlohmann::json> records(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), a.common.threads, [&](int i) {
    const auto& job = jobs[static_cast<std::size_t>(i)];
    nlohmann::json rec;
    if (job.element < 0) {
      rec = to_json<Dim>(job.point, std::nullopt, QueryStats{});
      rec["status"] = job.exclude ? "vertex_not_penetrating" : "outside_mesh";
    } else {
      QueryConfig qc = base;
      qc.exclude_vertex = job.exclude;
      QueryScratch scratch;
      results[static_cast<std::size_t>(i)] = shortest_path_to_boundary(mesh, bvh, job.point, job.element, qc, scratch);
      rec = to_json<Dim>(job.point, results[static_cast<std::size_t>(i)], scratch.last_stats);
      rec["status"] = to_string(scratch.status);
    }
    rec["element"] = job.element;
    records[static_cast<std::size_t>(i)] = std::move(rec);
  });

  nlohmann::json doc{{"mesh", a.mesh}, {"results", records}};
  if (a.out.empty()) {
    std::cout << doc.dump(2) << "\n";
  } else {
    write_text_file(a.out, doc.dump(2) + "\n");
  }

  if (!a.common.path_obj.empty()) {
    std::ofstream obj(a.common.path_obj);
    if (!obj) throw Error(ErrorCode::Io, "cannot write " + a.common.path_obj);
    int base_index = 1;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!results[i]) continue;
      obj << "o path_" << i << '\n';
      write_obj_vertex<Dim>(obj, jobs[i].point);
      write_obj_vertex<Dim>(obj, results[i]->point);
      obj << "l " << base_index << ' ' << base_index + 1 << '\n';
      base_index += 2;
    }
  }

  if (!a.common.trace.empty()) {
    std::ofstream trace(a.common.trace);
    if (!trace) throw Error(ErrorCode::Io, "cannot write " + a.common.trace);
    TraversalConfig tc = base.traversal;
    tc.allow_backward = base.backward_override.value_or(mesh.has_inverted_interior());
    tc.trace = true;
    TraversalScratch scratch;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (!results[i]) continue;
      trace << "# query " << i << " face " << results[i]->face << '\n';
      is_valid_path(mesh, results[i]->point, results[i]->face, jobs[i].point, std::optional<int>(jobs[i].element), tc,
                    scratch);
      write_trace(trace, scratch.trace);
    }
  }
  return kExitOk;
}

}  // namespace

void add_query(CLI::App& app, Command& selected) {
  auto a = std::make_shared<QueryArgs>();
  auto* sub = app.add_subcommand("query", "Shortest interior path to the boundary for one or more points");
  sub->add_option("mesh", a->mesh, "Mesh file")->required();
  sub->add_option("--point,-p", a->points, "Query point as \"x y [z]\"; repeatable");
  sub->add_option("--points", a->points_file, "File with one point per line");
  sub->add_option("--vertex", a->vertices, "Self-query at a mesh vertex, excluding its own faces; repeatable");
  sub->add_option("--element", a->element, "Element containing the point(s), instead of locating it");
  sub->add_option("--exclude-vertex", a->exclude_vertex, "Skip boundary faces incident to this vertex");
  sub->add_option("--out,-o", a->out, "Write JSON here instead of stdout");
  a->common.add_to(*sub, true);
  sub->callback([a, &selected] {
    selected = [a] { return std::visit([&](const auto& m) { return run_query(m, *a); }, load_mesh(a->mesh)); };
  });
}

}  // namespace boundpath::cli
