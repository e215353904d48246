#include "commands.hpp"
#include "common.hpp"
#include "harness.hpp"

#include "boundpath/generators.hpp"

#include <chrono>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

namespace boundpath::cli {

namespace {

struct FuzzArgs {
  CommonOptions common;
  double budget = 60.0;
  int cases = std::numeric_limits<int>::max();
  int queries = 24;
  int rays = 200;
  std::vector<std::string> kinds{"folded", "threaded", "inverted"};
  std::string out = "fuzz_out";
};

struct CaseResult {
  nlohmann::json description;
  std::string mesh;  // native format, only kept when there are findings
  std::vector<nlohmann::json> findings;
  int checks = 0;
};

nlohmann::json params_json(const gen::FoldedBarParams& p) {
  return {{"nx", p.nx},         {"ny", p.ny},           {"nz", p.nz},         {"cell", p.cell},
          {"extra_angle", p.extra_angle}, {"overlap", p.overlap}, {"wobble", p.wobble}, {"seed", p.seed}};
}

template <int Dim>
void check_samples(const SimplexMesh<Dim>& mesh, int count, std::mt19937_64& rng, const QueryConfig& qc,
                   CaseResult& out) {
  const BoundaryBvh<Dim> bvh(mesh);
  for (const auto& s : draw_samples(mesh, count, rng)) {
    auto c = compare_with_oracle(mesh, bvh, s, qc);
    ++out.checks;
    if (!c.match) out.findings.push_back(std::move(c.record));
  }
}

// Interior vertex of a triangle grid pushed across the far edge of one of
// its triangles. Returns false when the fold also flips a triangle that
// touches the boundary.
bool fold_interior_vertex(TriMesh2& mesh, std::mt19937_64& rng, nlohmann::json& desc) {
  std::vector<int> candidates;
  for (int v = 0; v < static_cast<int>(mesh.num_vertices()); ++v) {
    if (mesh.is_boundary_vertex(v)) continue;
    bool deep = true;
    for (int e = 0; e < static_cast<int>(mesh.num_elements()) && deep; ++e) {
      const auto& el = mesh.element(e);
      if (std::find(el.begin(), el.end(), v) == el.end()) continue;
      for (int u : el)
        if (mesh.is_boundary_vertex(u)) deep = false;
    }
    if (deep) candidates.push_back(v);
  }
  if (candidates.empty()) return false;
  const int v = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  std::vector<int> ring;
  for (int e = 0; e < static_cast<int>(mesh.num_elements()); ++e) {
    const auto& el = mesh.element(e);
    if (std::find(el.begin(), el.end(), v) != el.end()) ring.push_back(e);
  }
  const int e = ring[std::uniform_int_distribution<std::size_t>(0, ring.size() - 1)(rng)];
  const auto& el = mesh.element(e);
  std::array<int, 2> edge{};
  int k = 0;
  for (int u : el)
    if (u != v) edge[static_cast<std::size_t>(k++)] = u;
  const Vec2 a = mesh.vertex(edge[0]);
  const Vec2 b = mesh.vertex(edge[1]);
  const Vec2 x = mesh.vertex(v);
  const double lambda = std::clamp((x - a).dot(b - a) / (b - a).squaredNorm(), 0.2, 0.8);
  const Vec2 foot = a + lambda * (b - a);
  const double depth = std::uniform_real_distribution<double>(1.1, 1.6)(rng);
  std::vector<Vec2> pos = mesh.vertices();
  pos[static_cast<std::size_t>(v)] = x + depth * (foot - x);
  mesh.set_positions(pos);
  desc["folded_vertex"] = v;
  desc["depth"] = depth;
  bool any = false;
  for (int t = 0; t < static_cast<int>(mesh.num_elements()); ++t) {
    if (!mesh.flipped_or_flat(t)) continue;
    any = true;
    for (int f = 0; f < 3; ++f)
      if (mesh.neighbor(t, f) == kBoundary) return false;
  }
  return any;
}

CaseResult run_case(const std::string& kind, const FuzzArgs& a, int index) {
  std::seed_seq seq{a.common.seed, static_cast<unsigned>(index)};
  std::mt19937_64 rng(seq);
  CaseResult r;
  r.description = {{"case", index}, {"kind", kind}, {"seed", a.common.seed}};
  const QueryConfig qc = a.common.query_config();
  if (kind == "folded") {
    const bool planar = std::bernoulli_distribution(0.3)(rng);
    const gen::FoldedBarParams params = gen::random_folded_params(rng, 200, 1200);
    r.description["dimension"] = planar ? 2 : 3;
    r.description["params"] = params_json(params);
    if (planar) {
      const TriMesh2 mesh = gen::folded_bar_2d(params);
      check_samples(mesh, a.queries, rng, qc, r);
      if (!r.findings.empty()) r.mesh = to_native_json(mesh);
    } else {
      const TetMesh mesh = gen::folded_bar_3d(params);
      check_samples(mesh, a.queries, rng, qc, r);
      if (!r.findings.empty()) r.mesh = to_native_json(mesh);
    }
  } else if (kind == "threaded") {
    const int n = std::uniform_int_distribution<int>(4, 7)(rng);
    const int lo = std::uniform_int_distribution<int>(1, n / 2)(rng);
    const int hi = std::uniform_int_distribution<int>(lo + 1, n - 1)(rng);
    const TetMesh mesh = gen::holed_grid(n, lo, hi);
    r.description["grid"] = {{"n", n}, {"hole_lo", lo}, {"hole_hi", hi}};
    TraversalConfig tc = qc.traversal;
    tc.allow_backward = false;
    for (const auto& ray : gen::threaded_rays(mesh, a.rays, rng)) {
      auto c = compare_ray(mesh, ray, tc);
      ++r.checks;
      if (!c.match) r.findings.push_back(std::move(c.record));
    }
    if (!r.findings.empty()) r.mesh = to_native_json(mesh);
  } else {
    const int nx = std::uniform_int_distribution<int>(5, 9)(rng);
    const int ny = std::uniform_int_distribution<int>(5, 9)(rng);
    TriMesh2 mesh = gen::tri_grid(nx, ny);
    r.description["grid"] = {{"nx", nx}, {"ny", ny}};
    const bool usable = fold_interior_vertex(mesh, rng, r.description);
    r.description["usable"] = usable;
    if (usable) {
      check_samples(mesh, a.queries, rng, qc, r);
      if (!r.findings.empty()) r.mesh = to_native_json(mesh);
    }
  }
  r.description["checks"] = r.checks;
  r.description["findings"] = r.findings.size();
  return r;
}

std::string replay_hint(const std::string& mesh, const nlohmann::json& rec) {
  std::ostringstream cmd;
  cmd << std::setprecision(17) << "boundpath query " << mesh << " --point \"";
  for (std::size_t k = 0; k < rec["point"].size(); ++k) cmd << (k ? " " : "") << rec["point"][k].get<double>();
  cmd << "\" --element " << rec["element"].get<int>();
  if (!rec["exclude_vertex"].is_null()) cmd << " --exclude-vertex " << rec["exclude_vertex"].get<int>();
  return cmd.str();
}

std::string numbered(const std::string& stem, int k) {
  std::ostringstream s;
  s << stem << '_' << std::setw(5) << std::setfill('0') << k << ".json";
  return s.str();
}

int run_fuzz(const FuzzArgs& a) {
  const std::filesystem::path dir(a.out);
  std::filesystem::create_directories(dir / "corpus");
  std::filesystem::create_directories(dir / "findings");
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  int cases = 0, checks = 0, findings = 0;
  while (cases < a.cases && elapsed() < a.budget) {
    const std::string& kind = a.kinds[static_cast<std::size_t>(cases) % a.kinds.size()];
    CaseResult r = run_case(kind, a, cases);
    write_text_file(dir / "corpus" / numbered("case", cases), r.description.dump(2) + "\n");
    if (!r.findings.empty()) {
      const std::string mesh_name = numbered("case", cases).replace(4, 1, "_mesh_");
      write_text_file(dir / "findings" / mesh_name, r.mesh);
      for (auto& f : r.findings) {
        nlohmann::json doc{{"case", r.description}, {"mesh", mesh_name}, {"record", f}};
        if (f.contains("element")) doc["replay"] = replay_hint(mesh_name, f);
        write_text_file(dir / "findings" / numbered("finding", findings++), doc.dump(2) + "\n");
      }
    }
    checks += r.checks;
    ++cases;
  }
  std::cout << cases << " cases, " << checks << " checks, " << findings << " findings\n";
  std::cerr << "fuzz wall time " << elapsed() << " s\n";

  RunManifest manifest;
  manifest.command = "fuzz";
  manifest.overrides = a.common.overrides();
  manifest.overrides["budget_seconds"] = a.budget;
  if (a.cases != std::numeric_limits<int>::max()) manifest.overrides["cases"] = a.cases;
  manifest.overrides["queries"] = a.queries;
  manifest.overrides["rays"] = a.rays;
  manifest.overrides["kinds"] = a.kinds;
  manifest.seed = a.common.seed;
  manifest.output_dir = a.out;
  manifest.argv = invocation();
  write_manifest(manifest);
  return findings == 0 ? kExitOk : kExitFindings;
}

}  // namespace

void add_fuzz(CLI::App& app, Command& selected) {
  auto a = std::make_shared<FuzzArgs>();
  auto* sub = app.add_subcommand("fuzz", "Random folded meshes and vertex-threaded rays checked against the oracle");
  sub->add_option("--budget", a->budget, "Wall-clock budget in seconds")->check(CLI::NonNegativeNumber);
  sub->add_option("--cases", a->cases, "Stop after this many cases")->check(CLI::NonNegativeNumber);
  sub->add_option("--queries", a->queries, "Closest-boundary queries per mesh case")->check(CLI::NonNegativeNumber);
  sub->add_option("--rays", a->rays, "Rays per threaded-grid case")->check(CLI::NonNegativeNumber);
  sub->add_option("--kinds", a->kinds, "Case families to cycle through")
      ->check(CLI::IsMember({"folded", "threaded", "inverted"}));
  sub->add_option("--out,-o", a->out, "Output directory for corpus/, findings/ and manifest.json");
  a->common.add_to(*sub, false);
  sub->callback([a, &selected] { selected = [a] { return run_fuzz(*a); }; });
}

}  // namespace boundpath::cli
