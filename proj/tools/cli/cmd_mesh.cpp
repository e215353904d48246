#include "commands.hpp"
#include "common.hpp"

#include "boundpath/generators.hpp"
#include "boundpath/mesh_io.hpp"

#include <fstream>
#include <iostream>
#include <memory>

namespace boundpath::cli {

void add_convert(CLI::App& app, Command& selected) {
  struct Args {
    std::string input, output;
  };
  auto args = std::make_shared<Args>();
  auto* sub = app.add_subcommand("convert", "Convert a TetGen .node/.ele pair or native mesh to native JSON or boundary OBJ");
  sub->add_option("input", args->input, "Input mesh (.node, .ele or native .json)")->required();
  sub->add_option("output", args->output, "Output path; .obj writes the boundary surface")->required();
  sub->callback([args, &selected] {
    selected = [args] {
      const AnyMesh mesh = load_mesh(args->input);
      const std::filesystem::path out(args->output);
      if (out.extension() == ".obj") {
        std::ofstream f(out);
        if (!f) throw Error(ErrorCode::Io, "cannot write " + out.string());
        std::visit([&](const auto& m) { write_boundary_obj(m, f); }, mesh);
      } else {
        save_mesh(mesh, out);
      }
      std::visit(
          [&](const auto& m) {
            std::cout << "wrote " << out.string() << ": " << m.num_vertices() << " vertices, " << m.num_elements()
                      << " elements, " << m.boundary_faces().size() << " boundary faces\n";
          },
          mesh);
      return kExitOk;
    };
  });
}

void add_generate(CLI::App& app, Command& selected) {
  struct Args {
    std::string kind, output;
    int nx = 4, ny = 4, nz = 4;
    double cell = 1.0;
    gen::FoldedBarParams bar;
  };
  auto args = std::make_shared<Args>();
  const std::vector<std::string> kinds{"tet-grid",      "tri-grid",   "cube",
                                       "folded-bar",    "folded-bar-2d", "holed-grid",
                                       "inverted-interior-2d", "inverted-boundary-2d"};
  auto* sub = app.add_subcommand("generate", "Write a procedural test mesh as native JSON");
  sub->add_option("kind", args->kind, "Mesh family")->required()->check(CLI::IsMember(kinds));
  sub->add_option("output", args->output, "Output .json path")->required();
  sub->add_option("--nx", args->nx, "Cells along x")->check(CLI::PositiveNumber);
  sub->add_option("--ny", args->ny, "Cells along y")->check(CLI::PositiveNumber);
  sub->add_option("--nz", args->nz, "Cells along z")->check(CLI::PositiveNumber);
  sub->add_option("--cell", args->cell, "Cell size")->check(CLI::PositiveNumber);
  sub->add_option("--extra-angle", args->bar.extra_angle, "Folded bar: coil angle beyond one turn, radians");
  sub->add_option("--overlap", args->bar.overlap, "Folded bar: radial offset of the returning layer");
  sub->add_option("--wobble", args->bar.wobble, "Folded bar: perturbation amplitude in cells");
  sub->add_option("--seed", args->bar.seed, "Folded bar: perturbation seed");
  sub->callback([args, &selected] {
    selected = [args] {
      const std::string& k = args->kind;
      gen::FoldedBarParams bar = args->bar;
      bar.nx = args->nx;
      bar.ny = args->ny;
      bar.nz = args->nz;
      bar.cell = args->cell;
      const Vec3 cell3 = Vec3::Constant(args->cell);
      AnyMesh mesh = gen::single_tet();
      if (k == "tet-grid") mesh = gen::tet_grid(args->nx, args->ny, args->nz, Vec3::Zero(), cell3);
      else if (k == "tri-grid") mesh = gen::tri_grid(args->nx, args->ny, Vec2::Zero(), Vec2::Constant(args->cell));
      else if (k == "cube") mesh = gen::cube_5tet(args->cell);
      else if (k == "folded-bar") mesh = gen::folded_bar_3d(bar);
      else if (k == "folded-bar-2d") mesh = gen::folded_bar_2d(bar);
      else if (k == "holed-grid") mesh = gen::holed_grid(args->nx, args->nx / 3, args->nx - args->nx / 3);
      else if (k == "inverted-interior-2d") mesh = gen::inverted_interior_grid();
      else if (k == "inverted-boundary-2d") mesh = gen::inverted_boundary_grid();
      save_mesh(mesh, args->output);
      std::visit(
          [&](const auto& m) {
            std::cout << "wrote " << args->output << ": " << m.num_elements() << " elements, "
                      << m.boundary_faces().size() << " boundary faces\n";
          },
          mesh);
      return kExitOk;
    };
  });
}

}  // namespace boundpath::cli
