#include "commands.hpp"
#include "common.hpp"
#include "harness.hpp"

#include "boundpath/collision_sim.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

namespace boundpath::cli {

namespace {

struct SimulateArgs {
  CommonOptions common;
  std::string scene;
  std::optional<int> frames;
  std::string out = "sim_out";
  bool no_frames = false;
  bool obj = false;
};

int run_simulate(const SimulateArgs& a) {
  Scene scene = load_scene(a.scene);
  if (a.frames) scene.frames = *a.frames;
  QueryConfig& q = scene.config.query;
  if (a.common.eps_i) q.traversal.epsilon_i = *a.common.eps_i;
  if (a.common.eps_r) q.epsilon_r = *a.common.eps_r;
  if (a.common.no_culling) q.enable_culling = false;
  if (a.common.allow_backward) q.backward_override = true;

  std::vector<TetMesh> bodies;
  for (const auto& b : scene.bodies) bodies.push_back(instantiate_body(b));
  SimState state = SimState::from_bodies(bodies, scene.density);
  std::size_t offset = 0;
  for (std::size_t b = 0; b < bodies.size(); ++b) {
    for (std::size_t v = 0; v < bodies[b].num_vertices(); ++v) state.velocity[offset + v] = scene.bodies[b].velocity;
    offset += bodies[b].num_vertices();
  }
  Simulator sim(std::move(state), scene.config);

  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir / "frames");
  std::ofstream log(dir / "contacts.jsonl");
  if (!log) throw Error(ErrorCode::Io, "cannot write " + (dir / "contacts.jsonl").string());

  auto write_frame = [&](int frame) {
    if (a.no_frames) return;
    std::ostringstream stem;
    stem << "frame_" << std::setw(4) << std::setfill('0') << frame;
    save_mesh(sim.state().mesh, dir / "frames" / (stem.str() + ".json"));
    if (a.obj) {
      std::ofstream obj(dir / "frames" / (stem.str() + ".obj"));
      write_boundary_obj(sim.state().mesh, obj);
    }
  };

  const auto start = std::chrono::steady_clock::now();
  nlohmann::json counts = nlohmann::json::array();
  const int initial = sim.penetration_count();
  write_frame(0);
  int substep = 0;
  for (int frame = 1; frame <= scene.frames; ++frame) {
    for (int k = 0; k < scene.config.substeps; ++k) {
      const SubstepReport r = sim.substep();
      nlohmann::json line = to_json(r);
      line["frame"] = frame;
      line["substep"] = substep++;
      log << line.dump() << '\n';
    }
    counts.push_back(sim.penetration_count());
    write_frame(frame);
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  nlohmann::json summary{{"scene", a.scene},
                         {"frames", scene.frames},
                         {"substeps", substep},
                         {"vertices", sim.state().mesh.num_vertices()},
                         {"elements", sim.state().mesh.num_elements()},
                         {"initial_penetrations", initial},
                         {"penetrations_per_frame", counts},
                         {"final_penetrations", counts.empty() ? initial : counts.back().get<int>()}};
  write_text_file(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << "penetrating vertices: " << initial << " before, " << summary["final_penetrations"] << " after "
            << substep << " substeps\n";
  std::cerr << "simulation wall time " << seconds << " s\n";

  RunManifest manifest;
  manifest.command = "simulate";
  manifest.inputs = {a.scene};
  manifest.overrides = a.common.overrides();
  if (a.frames) manifest.overrides["frames"] = *a.frames;
  manifest.seed = scene.seed;
  manifest.output_dir = a.out;
  manifest.argv = invocation();
  write_manifest(manifest);
  return kExitOk;
}

struct BenchArgs {
  CommonOptions common;
  std::string mesh;
  int count = 200;
  std::string out;
};

struct Row {
  int queries = 0;
  double sum[3] = {0, 0, 0};
  long max[3] = {0, 0, 0};
};

template <int Dim>
int run_bench(const SimplexMesh<Dim>& mesh, const BenchArgs& a) {
  std::mt19937_64 rng(a.common.seed);
  std::vector<Sample<Dim>> samples;
  for (const auto& [v, e] : penetrating_vertices(mesh)) samples.push_back({mesh.vertex(v), e, v});
  std::vector<int> usable;
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e)
    if (!mesh.flipped_or_flat(e)) usable.push_back(e);
  if (!usable.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, usable.size() - 1);
    for (int i = 0; i < a.count; ++i) {
      const int e = usable[pick(rng)];
      samples.push_back({gen::random_point_in_element(mesh, e, rng), e, std::nullopt});
    }
  }
  const BoundaryBvh<Dim> bvh(mesh);

  std::ostringstream csv;
  csv << "culling,queries,self_queries,mean_bvh_candidates,max_bvh_candidates,mean_traversals,max_traversals,"
         "mean_elements_visited,max_elements_visited\n";
  const int self = static_cast<int>(std::count_if(samples.begin(), samples.end(),
                                                  [](const auto& s) { return s.exclude_vertex.has_value(); }));
  for (const bool culling : {true, false}) {
    QueryConfig qc = a.common.query_config();
    qc.enable_culling = culling;
    std::vector<QueryStats> stats(samples.size());
    const auto start = std::chrono::steady_clock::now();
    parallel_for(static_cast<int>(samples.size()), a.common.threads, [&](int i) {
      const auto& s = samples[static_cast<std::size_t>(i)];
      QueryConfig local = qc;
      local.exclude_vertex = s.exclude_vertex;
      QueryScratch scratch;
      shortest_path_to_boundary(mesh, bvh, s.point, s.element, local, scratch);
      stats[static_cast<std::size_t>(i)] = scratch.last_stats;
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    Row row;
    for (const auto& st : stats) {
      const long v[3] = {st.bvh_candidates_tested, st.traversals_run, st.elements_visited};
      for (int k = 0; k < 3; ++k) {
        row.sum[k] += static_cast<double>(v[k]);
        row.max[k] = std::max(row.max[k], v[k]);
      }
      ++row.queries;
    }
    const double n = std::max(1, row.queries);
    csv << (culling ? "on" : "off") << ',' << row.queries << ',' << self;
    for (int k = 0; k < 3; ++k) csv << ',' << row.sum[k] / n << ',' << row.max[k];
    csv << '\n';
    std::cerr << "culling " << (culling ? "on" : "off") << ": " << seconds << " s for " << row.queries
              << " queries\n";
  }
  if (a.out.empty()) std::cout << csv.str();
  else write_text_file(a.out, csv.str());
  return kExitOk;
}

}  // namespace

void add_simulate(CLI::App& app, Command& selected) {
  auto a = std::make_shared<SimulateArgs>();
  auto* sub = app.add_subcommand("simulate", "Run a soft-body scene with shortest-path collision response");
  sub->add_option("scene", a->scene, "Scene JSON file")->required();
  sub->add_option("--frames", a->frames, "Override the scene's frame count")->check(CLI::NonNegativeNumber);
  sub->add_option("--out,-o", a->out, "Output directory for frames/, contacts.jsonl, summary.json and manifest.json");
  sub->add_flag("--no-frames", a->no_frames, "Skip per-frame mesh snapshots");
  sub->add_flag("--obj", a->obj, "Also write each frame's boundary as OBJ");
  a->common.add_to(*sub, false);
  sub->callback([a, &selected] { selected = [a] { return run_simulate(*a); }; });
}

void add_bench(CLI::App& app, Command& selected) {
  auto a = std::make_shared<BenchArgs>();
  auto* sub = app.add_subcommand("bench", "Per-query work statistics with and without culling, as CSV");
  sub->add_option("mesh", a->mesh, "Mesh file")->required();
  sub->add_option("--count,-n", a->count, "Random interior points, in addition to all penetrating vertices")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--out,-o", a->out, "Write CSV here instead of stdout");
  a->common.add_to(*sub, false);
  sub->callback([a, &selected] {
    selected = [a] { return std::visit([&](const auto& m) { return run_bench(m, *a); }, load_mesh(a->mesh)); };
  });
}

}  // namespace boundpath::cli
