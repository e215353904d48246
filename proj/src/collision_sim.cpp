#include "boundpath/collision_sim.hpp"

#include "boundpath/generators.hpp"
#include "boundpath/geometry.hpp"
#include "boundpath/mesh_io.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace boundpath {

SimState SimState::from_bodies(const std::vector<TetMesh>& bodies, double density) {
  std::vector<Vec3> verts;
  std::vector<std::array<int, 4>> elements;
  SimState st;
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    const int offset = static_cast<int>(verts.size());
    verts.insert(verts.end(), bodies[b].vertices().begin(), bodies[b].vertices().end());
    for (auto el : bodies[b].elements()) {
      for (int& v : el) v += offset;
      elements.push_back(el);
    }
    st.body.insert(st.body.end(), bodies[b].num_vertices(), static_cast<int>(b));
  }
  st.mesh = TetMesh(verts, elements);

  std::vector<double> mass(verts.size(), 0.0);
  std::set<std::pair<int, int>> edges;
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const double share = density * std::abs(st.mesh.signed_volume(static_cast<int>(e))) / 4.0;
    const auto& el = elements[e];
    for (int i = 0; i < 4; ++i) {
      mass[static_cast<std::size_t>(el[i])] += share;
      for (int j = i + 1; j < 4; ++j) edges.insert(std::minmax(el[i], el[j]));
    }
  }
  st.inverse_mass.resize(verts.size());
  for (std::size_t v = 0; v < verts.size(); ++v) st.inverse_mass[v] = mass[v] > 0.0 ? 1.0 / mass[v] : 0.0;
  for (const auto& [a, b] : edges) {
    st.springs.push_back({a, b});
    st.rest_length.push_back((verts[static_cast<std::size_t>(a)] - verts[static_cast<std::size_t>(b)]).norm());
  }
  st.previous = verts;
  st.velocity.assign(verts.size(), Vec3::Zero());
  return st;
}

ElementBvh::ElementBvh(const TetMesh& mesh) {
  compute_boxes(mesh);
  tree_.build(boxes_);
}

void ElementBvh::compute_boxes(const TetMesh& mesh) {
  boxes_.resize(mesh.num_elements());
  for (std::size_t e = 0; e < mesh.num_elements(); ++e) {
    Aabb<3> box;
    for (int v : mesh.element(static_cast<int>(e))) box.extend(mesh.vertex(v));
    boxes_[e] = box;
  }
}

void ElementBvh::refit(const TetMesh& mesh) {
  compute_boxes(mesh);
  tree_.refit(boxes_);
}

namespace {

bool incident(const std::array<int, 4>& el, int v) { return std::find(el.begin(), el.end(), v) != el.end(); }

bool strictly_inside(const TetMesh& mesh, int e, const Vec3& p) {
  const auto w = barycentric(mesh, e, p);
  if (!w) return false;
  return std::all_of(w->begin(), w->end(), [](double x) { return x > 0.0; });
}

Aabb<3> point_box(const Vec3& p) {
  Aabb<3> b;
  b.extend(p);
  return b;
}

// Parameter interval of segment a + t (b - a), t in [0, 1], inside element e.
std::optional<std::pair<double, double>> clip_segment(const TetMesh& mesh, int e, const Vec3& a, const Vec3& b) {
  double t0 = 0.0, t1 = 1.0;
  const Vec3 d = b - a;
  for (int f = 0; f < 4; ++f) {
    const auto fv = mesh.face_vertices(e, f);
    const Vec3& q = mesh.vertex(fv[0]);
    const Vec3 n = (mesh.vertex(fv[1]) - q).cross(mesh.vertex(fv[2]) - q);
    const double num = n.dot(a - q);
    const double den = n.dot(d);
    if (den == 0.0) {
      if (num >= 0.0) return std::nullopt;
      continue;
    }
    const double t = -num / den;
    if (den < 0.0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
    if (t1 - t0 <= 1e-12) return std::nullopt;
  }
  return std::make_pair(t0, t1);
}

}  // namespace

std::vector<VertexContact> dcd_vertex_tet(const TetMesh& mesh, const ElementBvh& bvh) {
  std::vector<VertexContact> out;
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
    const Vec3& x = mesh.vertex(v);
    std::vector<int> hits;
    bvh.tree().query_overlap(point_box(x), [&](int e) {
      if (mesh.flipped_or_flat(e) || incident(mesh.element(e), v)) return;
      if (strictly_inside(mesh, e, x)) hits.push_back(e);
    });
    std::sort(hits.begin(), hits.end());
    for (int e : hits) out.push_back({v, e});
  }
  return out;
}

std::vector<EdgeContact> dcd_edge_tet(const TetMesh& mesh, const ElementBvh& bvh) {
  std::set<std::pair<int, int>> edges;
  for (const auto& f : mesh.boundary_faces())
    for (int k = 0; k < 3; ++k) edges.insert(std::minmax(f.vertices[k], f.vertices[(k + 1) % 3]));

  std::vector<EdgeContact> out;
  for (const auto& [a, b] : edges) {
    const Vec3& xa = mesh.vertex(a);
    const Vec3& xb = mesh.vertex(b);
    Aabb<3> box;
    box.extend(xa);
    box.extend(xb);
    std::vector<int> candidates;
    bvh.tree().query_overlap(box, [&](int e) { candidates.push_back(e); });
    std::sort(candidates.begin(), candidates.end());
    std::optional<EdgeContact> best;
    for (int e : candidates) {
      const auto& el = mesh.element(e);
      if (mesh.flipped_or_flat(e) || incident(el, a) || incident(el, b)) continue;
      const auto chord = clip_segment(mesh, e, xa, xb);
      if (!chord) continue;
      const double t = 0.5 * (chord->first + chord->second);
      if (!best || std::abs(t - 0.5) < std::abs(best->weight - 0.5)) {
        best = EdgeContact{{a, b}, e, xa + t * (xb - xa), t};
      }
    }
    if (best) out.push_back(*best);
  }
  return out;
}

std::vector<CentroidContact> dcd_centroid_tet(const TetMesh& mesh, const ElementBvh& bvh) {
  std::vector<CentroidContact> out;
  for (int src = 0; src < static_cast<int>(mesh.num_elements()); ++src) {
    if (mesh.flipped_or_flat(src)) continue;
    const Vec3 c = element_centroid(mesh, src);
    const auto& sel = mesh.element(src);
    int found = -1;
    bvh.tree().query_overlap(point_box(c), [&](int e) {
      if (mesh.flipped_or_flat(e)) return;
      const auto& el = mesh.element(e);
      for (int v : sel)
        if (incident(el, v)) return;
      if (strictly_inside(mesh, e, c) && (found < 0 || e < found)) found = e;
    });
    if (found >= 0) out.push_back({src, found, c});
  }
  return out;
}

int count_penetrating_vertices(const std::vector<VertexContact>& contacts) {
  std::set<int> verts;
  for (const auto& c : contacts) verts.insert(c.vertex);
  return static_cast<int>(verts.size());
}

Vec3 CollisionConstraint::subject_point(const std::vector<Vec3>& x) const {
  Vec3 q = Vec3::Zero();
  for (int k = 0; k < count; ++k) q += weights[k] * x[static_cast<std::size_t>(vertices[k])];
  return q;
}

double CollisionConstraint::value(const std::vector<Vec3>& x) const { return (subject_point(x) - target).dot(normal); }

CollisionConstraint build_collision_constraint(int vertex, const ClosestBoundaryResult<3>& result, const TetMesh& mesh,
                                               double compliance) {
  CollisionConstraint c;
  c.subject = CollisionConstraint::Subject::Vertex;
  c.vertices[0] = vertex;
  c.weights[0] = 1.0;
  c.count = 1;
  c.target = result.point;
  c.normal = pseudo_normal(mesh, result.face, result.feature);
  c.compliance = compliance;
  return c;
}

double project_constraint(CollisionConstraint& c, std::vector<Vec3>& x, const std::vector<double>& inverse_mass,
                          double dt, double margin) {
  const double value = c.value(x) - margin;
  if (value >= 0.0) return 0.0;
  double denom = 0.0;
  for (int k = 0; k < c.count; ++k) denom += inverse_mass[static_cast<std::size_t>(c.vertices[k])] * c.weights[k] * c.weights[k];
  const double alpha = c.compliance / (dt * dt);
  if (denom + alpha <= 0.0) return 0.0;
  const double dlambda = (-value - alpha * c.lambda) / (denom + alpha);
  c.lambda += dlambda;
  for (int k = 0; k < c.count; ++k) {
    const auto v = static_cast<std::size_t>(c.vertices[k]);
    x[v] += inverse_mass[v] * c.weights[k] * dlambda * c.normal;
  }
  return dlambda;
}

double penalty_energy(const Vec3& x, const Vec3& s, const Vec3& n, double k) {
  const double c = (x - s).dot(n);
  return 0.5 * k * c * c;
}

Vec3 penalty_gradient(const Vec3& x, const Vec3& s, const Vec3& n, double k) { return k * (x - s).dot(n) * n; }

nlohmann::json to_json(const SubstepReport& r) {
  return {{"penetrating_vertices", r.penetrating_vertices},
          {"vertex_contacts", r.vertex_contacts},
          {"edge_contacts", r.edge_contacts},
          {"centroid_contacts", r.centroid_contacts},
          {"constraints", r.constraints},
          {"failed_queries", r.failed_queries},
          {"max_penetration", r.max_penetration},
          {"query_stats", to_json(r.query_totals)}};
}

Simulator::Simulator(SimState state, SimConfig config)
    : state_(std::move(state)),
      config_(std::move(config)),
      boundary_bvh_(state_.mesh),
      element_bvh_(state_.mesh),
      spring_lambda_(state_.springs.size(), 0.0) {
  if (!(config_.dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
  if (config_.iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be at least 1");
  if (config_.substeps < 1) throw Error(ErrorCode::InvalidArgument, "substeps must be at least 1");
}

int Simulator::penetration_count() const {
  const ElementBvh bvh(state_.mesh);
  return count_penetrating_vertices(dcd_vertex_tet(state_.mesh, bvh));
}

namespace {

void accumulate(QueryStats& total, const QueryStats& s) {
  total.bvh_candidates_tested += s.bvh_candidates_tested;
  total.culled += s.culled;
  total.traversals_run += s.traversals_run;
  total.elements_visited += s.elements_visited;
  total.loop_events += s.loop_events;
  total.starvation_events += s.starvation_events;
  total.fallbacks += s.fallbacks;
}

}  // namespace

SubstepReport Simulator::substep() {
  const double h = config_.dt / config_.substeps;
  std::vector<Vec3> x = state_.mesh.vertices();
  state_.previous = x;
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (state_.inverse_mass[v] <= 0.0) continue;
    state_.velocity[v] += h * config_.gravity;
    state_.velocity[v] *= (1.0 - config_.damping);
    x[v] += h * state_.velocity[v];
  }
  state_.mesh.set_positions(x);
  boundary_bvh_.refit(state_.mesh);
  element_bvh_.refit(state_.mesh);

  SubstepReport report;
  const auto vertex_hits = dcd_vertex_tet(state_.mesh, element_bvh_);
  const auto edge_hits = dcd_edge_tet(state_.mesh, element_bvh_);
  const auto centroid_hits = dcd_centroid_tet(state_.mesh, element_bvh_);
  report.vertex_contacts = static_cast<int>(vertex_hits.size());
  report.edge_contacts = static_cast<int>(edge_hits.size());
  report.centroid_contacts = static_cast<int>(centroid_hits.size());
  report.penetrating_vertices = count_penetrating_vertices(vertex_hits);

  std::vector<CollisionConstraint> constraints;
  auto make = [&](const Vec3& point, int element, std::optional<int> self_vertex) -> std::optional<CollisionConstraint> {
    QueryConfig qc = config_.query;
    qc.exclude_vertex = self_vertex;
    const auto r = shortest_path_to_boundary<3>(state_.mesh, boundary_bvh_, point, element, qc, scratch_);
    accumulate(report.query_totals, scratch_.last_stats);
    if (!r) {
      ++report.failed_queries;
      return std::nullopt;
    }
    report.max_penetration = std::max(report.max_penetration, r->distance);
    CollisionConstraint c;
    c.target = r->point;
    try {
      c.normal = pseudo_normal(state_.mesh, r->face, r->feature);
    } catch (const Error&) {
      ++report.failed_queries;
      return std::nullopt;
    }
    c.compliance = config_.collision_compliance;
    return c;
  };

  int last_vertex = -1;
  for (const auto& hit : vertex_hits) {
    if (hit.vertex == last_vertex) continue;
    last_vertex = hit.vertex;
    if (auto c = make(state_.mesh.vertex(hit.vertex), hit.element, hit.vertex)) {
      c->subject = CollisionConstraint::Subject::Vertex;
      c->vertices[0] = hit.vertex;
      c->weights[0] = 1.0;
      c->count = 1;
      constraints.push_back(*c);
    }
  }
  for (const auto& hit : edge_hits) {
    if (auto c = make(hit.center, hit.element, std::nullopt)) {
      c->subject = CollisionConstraint::Subject::Edge;
      c->vertices = {hit.edge[0], hit.edge[1], -1, -1};
      c->weights = {1.0 - hit.weight, hit.weight, 0.0, 0.0};
      c->count = 2;
      constraints.push_back(*c);
    }
  }
  for (const auto& hit : centroid_hits) {
    if (auto c = make(hit.centroid, hit.element, std::nullopt)) {
      c->subject = CollisionConstraint::Subject::Centroid;
      const auto& el = state_.mesh.element(hit.source_element);
      c->vertices = el;
      c->weights = {0.25, 0.25, 0.25, 0.25};
      c->count = 4;
      constraints.push_back(*c);
    }
  }
  report.constraints = static_cast<int>(constraints.size());

  std::fill(spring_lambda_.begin(), spring_lambda_.end(), 0.0);
  const double spring_alpha = config_.spring_compliance / (h * h);
  const auto& w = state_.inverse_mass;
  for (int it = 0; it < config_.iterations; ++it) {
    for (std::size_t s = 0; s < state_.springs.size(); ++s) {
      const auto i = static_cast<std::size_t>(state_.springs[s][0]);
      const auto j = static_cast<std::size_t>(state_.springs[s][1]);
      const Vec3 d = x[i] - x[j];
      const double len = d.norm();
      const double wsum = w[i] + w[j] + spring_alpha;
      if (len <= 0.0 || wsum <= 0.0) continue;
      const Vec3 n = d / len;
      const double c = len - state_.rest_length[s];
      const double dlambda = (-c - spring_alpha * spring_lambda_[s]) / wsum;
      spring_lambda_[s] += dlambda;
      x[i] += w[i] * dlambda * n;
      x[j] -= w[j] * dlambda * n;
    }
    for (auto& c : constraints) project_constraint(c, x, w, h, config_.collision_margin);
  }

  for (std::size_t v = 0; v < x.size(); ++v) {
    if (!x[v].allFinite()) {
      throw Error(ErrorCode::NumericalBlowup, "vertex " + std::to_string(v) + " became non-finite (previous " +
                                                  std::to_string(state_.previous[v].x()) + ", " +
                                                  std::to_string(state_.previous[v].y()) + ", " +
                                                  std::to_string(state_.previous[v].z()) + ")");
    }
    state_.velocity[v] = (x[v] - state_.previous[v]) / h;
  }
  state_.mesh.set_positions(std::move(x));
  return report;
}

SubstepReport xpbd_substep(SimState& state, const SimConfig& config) {
  Simulator sim(std::move(state), config);
  const SubstepReport r = sim.substep();
  state = std::move(sim.state());
  return r;
}

namespace {

Vec3 vec3_field(const nlohmann::json& j, const char* key, const Vec3& fallback) {
  if (!j.contains(key)) return fallback;
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3) throw Error(ErrorCode::ParseError, std::string(key) + ": expected [x, y, z]");
  return {a[0].get<double>(), a[1].get<double>(), a[2].get<double>()};
}

SimConfig parse_sim_config(const nlohmann::json& j) {
  SimConfig c;
  c.dt = j.value("dt", c.dt);
  c.substeps = j.value("substeps", c.substeps);
  c.iterations = j.value("iterations", c.iterations);
  c.gravity = vec3_field(j, "gravity", c.gravity);
  c.collision_compliance = j.value("collision_compliance", c.collision_compliance);
  c.spring_compliance = j.value("spring_compliance", c.spring_compliance);
  c.stiffness = j.value("stiffness", c.stiffness);
  c.collision_margin = j.value("collision_margin", c.collision_margin);
  c.damping = j.value("damping", c.damping);
  c.friction = j.value("friction", c.friction);
  c.query.epsilon_r = j.value("eps_r", c.query.epsilon_r);
  c.query.enable_culling = j.value("culling", c.query.enable_culling);
  c.query.traversal.epsilon_i = j.value("eps_i", c.query.traversal.epsilon_i);
  if (!(c.dt > 0.0)) throw Error(ErrorCode::ParseError, "config.dt must be positive");
  if (c.iterations < 1) throw Error(ErrorCode::ParseError, "config.iterations must be at least 1");
  if (c.substeps < 1) throw Error(ErrorCode::ParseError, "config.substeps must be at least 1");
  return c;
}

}  // namespace

Scene parse_scene(const std::string& text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("scene: ") + e.what());
  }
  Scene scene;
  try {
    scene.density = j.value("density", scene.density);
    scene.frames = j.value("frames", scene.frames);
    scene.seed = j.value("seed", scene.seed);
    if (j.contains("config")) scene.config = parse_sim_config(j.at("config"));
    for (const auto& b : j.at("bodies")) {
      BodySpec spec;
      if (b.contains("mesh")) {
        std::filesystem::path p = b.at("mesh").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        spec.path = p.string();
      } else if (b.contains("generator")) {
        spec.generator = b.at("generator");
      } else {
        throw Error(ErrorCode::ParseError, "scene body needs \"mesh\" or \"generator\"");
      }
      spec.translate = vec3_field(b, "translate", spec.translate);
      spec.velocity = vec3_field(b, "velocity", spec.velocity);
      spec.scale = b.value("scale", spec.scale);
      if (spec.generator.is_object() && !spec.generator.contains("seed")) spec.generator["seed"] = scene.seed;
      scene.bodies.push_back(std::move(spec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("scene: ") + e.what());
  }
  if (scene.bodies.empty()) throw Error(ErrorCode::ParseError, "scene has no bodies");
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  return parse_scene(read_text_file(path), path.parent_path());
}

TetMesh instantiate_body(const BodySpec& body) {
  TetMesh mesh;
  if (body.path) {
    auto any = load_mesh(*body.path);
    auto* tets = std::get_if<TetMesh>(&any);
    if (!tets) throw Error(ErrorCode::InvalidArgument, "simulation bodies must be tetrahedral: " + *body.path);
    mesh = std::move(*tets);
  } else {
    const auto& g = body.generator;
    const std::string type = g.value("type", std::string());
    try {
      if (type == "tet_grid") {
        const auto cells = g.value("cells", std::vector<int>{4, 4, 4});
        if (cells.size() != 3) throw Error(ErrorCode::ParseError, "tet_grid.cells: expected [nx, ny, nz]");
        const double h = g.value("cell", 0.25);
        mesh = gen::tet_grid(cells[0], cells[1], cells[2], Vec3::Zero(), Vec3::Constant(h));
      } else if (type == "cube_5tet") {
        mesh = gen::cube_5tet(g.value("size", 1.0));
      } else if (type == "folded_bar") {
        gen::FoldedBarParams p;
        p.nx = g.value("nx", p.nx);
        p.ny = g.value("ny", p.ny);
        p.nz = g.value("nz", p.nz);
        p.cell = g.value("cell", p.cell);
        p.extra_angle = g.value("extra_angle", p.extra_angle);
        p.overlap = g.value("overlap", p.overlap);
        p.wobble = g.value("wobble", p.wobble);
        p.seed = g.value("seed", p.seed);
        mesh = gen::folded_bar_3d(p);
      } else {
        throw Error(ErrorCode::ParseError, "unknown generator type '" + type + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("generator: ") + e.what());
    }
  }
  std::vector<Vec3> v = mesh.vertices();
  for (auto& x : v) x = body.scale * x + body.translate;
  mesh.set_positions(std::move(v));
  return mesh;
}

}  // namespace boundpath
