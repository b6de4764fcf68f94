#pragma once

#include "stdg/scenarios.hpp"
#include "stdg/scheme.hpp"

#include <json.hpp>

#include <filesystem>
#include <array>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace stdg {

/// Mesh source: a file (`path`) or one of the built-in generators
/// box | cavity | lamb | layered | sliver_regular | sliver.
struct MeshSpec {
  std::string path;
  std::string generator = "box";
  double xmin = -1.5, xmax = 1.5, ymin = -1.5, ymax = 1.5;
  int nx = 10, ny = 10;
  double perturbation = 0.1;
  unsigned seed = 1;
  bool periodic = true;
  double radius = 0.25;  // cavity
  int n_radial = 8;      // cavity
  bool operator==(const MeshSpec&) const = default;
};

/// Builds the mesh; relative paths are resolved against `base_dir`.
PrimalMesh build_mesh(const MeshSpec& spec, const std::filesystem::path& base_dir = {});

struct OutputSpec {
  std::string directory = "output";
  std::string prefix = "run";
  int field_every = 0;  // 0: no field dumps
  int sampling_level = 2;
  bool operator==(const OutputSpec&) const = default;
};

struct RunConfig {
  MeshSpec mesh;
  int p = 2;
  int p_gamma = 2;
  TimeMode mode = TimeMode::SpaceTime;
  double dt = 0.0;
  double dt_over_h = 0.0;  // when > 0, dt = dt_over_h * h (h: mean longest edge)
  double t_end = 0.0;
  KrylovConfig solver;
  PreconditionerKind preconditioner = PreconditionerKind::Pre1;
  std::map<int, IsotropicMaterial> materials;
  BoundaryCondition bc = BoundaryCondition::Periodic;
  ScenarioSpec scenario;
  std::vector<Receiver> receivers;
  OutputSpec output;

  /// Throws ConfigError on the first violated invariant.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& cfg, const std::filesystem::path& path);

/// Ready-to-run configuration of a built-in scenario.
RunConfig default_config(ScenarioKind kind);

/// Time step for a mesh of characteristic size h.
double resolve_dt(const RunConfig& cfg, double h);
/// Number of slabs: floor(t_end / dt) up to rounding.
int num_steps(double t_end, double dt);

// --- field sampling and writers ---------------------------------------------

/// Each triangle is split into level^2 sub-triangles; points are not shared
/// between triangles.
struct FieldSamples {
  std::vector<Vec2> points;
  std::vector<Vec5> values;  // (u, v, sxx, syy, sxy)
  std::vector<std::array<int, 3>> cells;
  std::vector<int> cell_region;
};

FieldSamples sample_fields(const Discretization& disc, const State& s, int level);
void write_vtk(const FieldSamples& f, std::ostream& out);
void write_vtk(const FieldSamples& f, const std::filesystem::path& path);

/// Receiver resolved to its element and the dual cell of the nearest edge.
struct ReceiverProbe {
  Receiver receiver;
  int element = kNone;
  Vec2 xi = Vec2::Zero();
  int cell = kNone;
  Vec2 cell_point = Vec2::Zero();  // receiver position in the cell frame
};
/// Throws ConfigError if the receiver lies outside the mesh.
ReceiverProbe resolve_receiver(const Discretization& disc, const Receiver& r);
Vec5 probe(const Discretization& disc, const State& s, const ReceiverProbe& p);

/// "%.17g" formatting.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  void write(const std::filesystem::path& path) const;
  void write(std::ostream& out) const;
};
CsvTable read_csv(const std::filesystem::path& path);

// --- drivers ----------------------------------------------------------------

struct RunOptions {
  std::filesystem::path output_dir;  // overrides cfg.output.directory when set
  std::filesystem::path base_dir;    // for relative mesh paths
  bool quiet = false;
};

struct RunSummary {
  int steps = 0;
  double dt = 0.0;
  double mean_iterations = 0.0;
  double wall_time = 0.0;
  Energy initial_energy, final_energy;
  std::vector<std::filesystem::path> files;
};

/// A configured simulation: discretization, scheme and current state.
class Simulation {
 public:
  Simulation(const RunConfig& cfg, PrimalMesh mesh);
  const RunConfig& config() const { return cfg_; }
  const Discretization& disc() const { return *disc_; }
  Scheme& scheme() { return *scheme_; }
  const Scheme& scheme() const { return *scheme_; }
  State& state() { return state_; }
  const State& state() const { return state_; }
  double dt() const { return dt_; }
  /// Sources over the next slab (null when the scenario has none).
  const SourceVectors* sources();
  StepStats step();

 private:
  RunConfig cfg_;
  double dt_ = 0.0;
  std::unique_ptr<Discretization> disc_;
  std::unique_ptr<Scheme> scheme_;
  State state_;
  std::vector<PointSource> points_;
  std::vector<double> rho_;
  SourceVectors src_;
};

MaterialField build_material_field(const Discretization& disc, const std::map<int, IsotropicMaterial>& table);

RunSummary run(const RunConfig& cfg, const RunOptions& opts = {});

struct ConvergenceRow {
  int p = 0;
  int n_elements = 0;
  double h = 0.0;
  Vec5 error = Vec5::Zero();
  Vec5 order = Vec5::Constant(std::numeric_limits<double>::quiet_NaN());
  double wall_time = 0.0;
};

/// Runs the configuration on every mesh and reports L2 errors at t_end and
/// observed orders between consecutive meshes. dt is adjusted so that an
/// integer number of slabs ends exactly at t_end.
std::vector<ConvergenceRow> convergence(const RunConfig& base, const std::vector<MeshSpec>& meshes,
                                        std::vector<std::string>* warnings = nullptr);
CsvTable convergence_table(const std::vector<ConvergenceRow>& rows);

/// Parses a --meshes token: "box:N" (periodic box of the base spec with an
/// N x N grid) or a mesh file path.
MeshSpec parse_mesh_token(const std::string& token, const MeshSpec& base);

struct SliverRow {
  std::string mesh;  // "mesh1" or "mesh2"
  PreconditionerKind preconditioner = PreconditionerKind::None;
  double mean_iterations = 0.0;
  int steps = 0;
};

struct SliverReport {
  double incircle_ratio = 0.0;
  std::vector<SliverRow> rows;
  /// mesh2 / mesh1 mean iterations.
  double ratio(PreconditionerKind k) const;
  double mean(const std::string& mesh, PreconditionerKind k) const;
};

SliverReport sliver_study(const RunConfig& cfg, const std::vector<PreconditionerKind>& kinds = {
                                                    PreconditionerKind::None, PreconditionerKind::Pre1,
                                                    PreconditionerKind::Pre2});

}  // namespace stdg
