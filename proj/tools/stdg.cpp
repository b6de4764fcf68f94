// Command-line driver: run, convergence, slivers, genmesh.

#include "stdg/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace stdg;
namespace fs = std::filesystem;

namespace {

void set_threads(int threads, bool reproducible) {
#ifdef _OPENMP
  if (reproducible)
    omp_set_num_threads(1);
  else if (threads > 0)
    omp_set_num_threads(threads);
#else
  (void)threads;
  (void)reproducible;
#endif
}

void print_convergence(const std::vector<ConvergenceRow>& rows) {
  std::printf("%3s %8s %12s", "p", "N", "h");
  for (const char* c : {"u", "v", "sxx", "syy", "sxy"}) std::printf(" %11s %6s", c, "ord");
  std::printf(" %9s\n", "wall[s]");
  for (const auto& r : rows) {
    std::printf("%3d %8d %12.5e", r.p, r.n_elements, r.h);
    for (int c = 0; c < 5; ++c) std::printf(" %11.4e %6.2f", r.error[c], r.order[c]);
    std::printf(" %9.2f\n", r.wall_time);
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t end = s.find(',', start);
    const std::string tok = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
    if (!tok.empty()) out.push_back(tok);
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staggered space-time DG solver for 2D elastic waves"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  bool reproducible = false;
  std::string output_dir;
  app.add_option("--threads", threads, "OpenMP threads (0: runtime default)")->check(CLI::NonNegativeNumber);
  app.add_flag("--reproducible", reproducible, "single thread, fixed summation order");
  app.add_option("--output-dir", output_dir, "overrides output.directory of the config");

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "run a configuration");
  run_cmd->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);

  std::string meshes;
  auto* conv_cmd = app.add_subcommand("convergence", "error table over a sequence of meshes");
  conv_cmd->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  conv_cmd->add_option("--meshes", meshes, "comma separated mesh files or box:N tokens")->required();

  auto* sliver_cmd = app.add_subcommand("slivers", "iteration counts on the regular and sliver meshes");
  sliver_cmd->add_option("config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);

  std::string scenario_name, mesh_out, config_out;
  auto* gen_cmd = app.add_subcommand("genmesh", "write the mesh and default config of a built-in scenario");
  gen_cmd->add_option("scenario", scenario_name, "scenario kind")->required();
  gen_cmd->add_option("--mesh", mesh_out, "native mesh output path");
  gen_cmd->add_option("--config", config_out, "config output path");

  CLI11_PARSE(app, argc, argv);
  set_threads(threads, reproducible);

  try {
    if (*gen_cmd) {
      const RunConfig cfg = default_config(scenario_kind_from_string(scenario_name));
      if (!mesh_out.empty()) write_native_mesh(build_mesh(cfg.mesh), fs::path(mesh_out));
      if (!config_out.empty()) save_config(cfg, config_out);
      if (mesh_out.empty() && config_out.empty()) std::cout << to_json(cfg).dump(2) << "\n";
      return 0;
    }

    const RunConfig cfg = load_config(config_path);
    const fs::path base_dir = fs::path(config_path).parent_path();
    const fs::path out_dir = output_dir.empty() ? fs::path(cfg.output.directory) : fs::path(output_dir);

    if (*run_cmd) {
      RunOptions opts;
      opts.output_dir = out_dir;
      opts.base_dir = base_dir;
      run(cfg, opts);
      return 0;
    }

    fs::create_directories(out_dir);
    if (*conv_cmd) {
      std::vector<MeshSpec> specs;
      for (const auto& tok : split_list(meshes)) {
        MeshSpec m = parse_mesh_token(tok, cfg.mesh);
        if (!m.path.empty() && fs::path(m.path).is_relative()) m.path = (base_dir / m.path).string();
        specs.push_back(m);
      }
      std::vector<std::string> warnings;
      const auto rows = convergence(cfg, specs, &warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      print_convergence(rows);
      const fs::path p = out_dir / (cfg.output.prefix + "_convergence.csv");
      convergence_table(rows).write(p);
      std::cout << "wrote " << p.string() << "\n";
      return 0;
    }

    if (*sliver_cmd) {
      const SliverReport rep = sliver_study(cfg);
      std::printf("incircle ratio mesh1/mesh2: %.2f\n", rep.incircle_ratio);
      std::printf("%-6s %12s %12s %8s\n", "pre", "mesh1", "mesh2", "ratio");
      const fs::path p = out_dir / (cfg.output.prefix + "_iterations.csv");
      std::ofstream csv(p);
      csv << "preconditioner,mesh1,mesh2,ratio\n";
      for (PreconditionerKind k : {PreconditionerKind::None, PreconditionerKind::Pre1, PreconditionerKind::Pre2}) {
        const double m1 = rep.mean("mesh1", k), m2 = rep.mean("mesh2", k);
        std::printf("%-6s %12.2f %12.2f %8.2f\n", to_string(k).c_str(), m1, m2, m2 / m1);
        csv << to_string(k) << ',' << format_double(m1) << ',' << format_double(m2) << ',' << format_double(m2 / m1)
            << "\n";
      }
      std::cout << "wrote " << p.string() << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
