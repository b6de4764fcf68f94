#include "stdg/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace stdg {

using nlohmann::json;
namespace fs = std::filesystem;

// --- meshes ------------------------------------------------------------------

PrimalMesh build_mesh(const MeshSpec& spec, const fs::path& base_dir) {
  if (!spec.path.empty()) {
    fs::path p(spec.path);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return read_mesh(p);
  }
  const std::string& g = spec.generator;
  if (g == "box")
    return structured_box_mesh(spec.xmin, spec.xmax, spec.ymin, spec.ymax, spec.nx, spec.ny, spec.perturbation,
                               spec.seed, spec.periodic);
  if (g == "cavity") return cavity_mesh(0.5 * (spec.xmax - spec.xmin), spec.radius, spec.nx, spec.n_radial);
  if (g == "lamb") {
    const double tilt = std::tan(10.0 * std::numbers::pi / 180.0);
    return mapped_mesh(spec.nx, spec.ny, [tilt](double s, double t) {
      const double x = 4000.0 * s;
      return Vec2(x, t * (2000.0 + x * tilt));
    });
  }
  if (g == "layered") {
    PrimalMesh m = mapped_mesh(spec.nx, spec.ny, [](double s, double t) {
      const double x = 4000.0 * s;
      return Vec2(x, t * (2000.0 + 100.0 * (std::sin(3.0 * x / 200.0) + std::sin(2.0 * x / 200.0))));
    });
    for (int i = 0; i < m.num_triangles(); ++i) {
      const Vec2 b = m.barycenter(i);
      m.region[i] = b.y() > 1500.0 - b.x() / 2.0 ? 0 : 1;
    }
    return m;
  }
  if (g == "sliver_regular" || g == "sliver") {
    SliverMeshes s = make_sliver_meshes(spec.nx, 70.53, spec.seed);
    return g == "sliver" ? s.sliver : s.regular;
  }
  throw ConfigError("unknown mesh generator '" + g + "'");
}

// --- config ------------------------------------------------------------------

void RunConfig::validate() const {
  if (p < 1 || p > 6) throw ConfigError("p must be in [1, 6]");
  if (p_gamma < 0 || p_gamma > 4) throw ConfigError("p_gamma must be in [0, 4]");
  if (mode == TimeMode::CrankNicolson && p_gamma != 0) throw ConfigError("mode cn requires p_gamma = 0");
  if (dt_over_h > 0.0) {
    if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  } else {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    if (!(t_end >= dt)) throw ConfigError("t_end must be at least dt");
  }
  if (dt_over_h < 0.0) throw ConfigError("dt_over_h must be non-negative");
  solver.validate();
  if (materials.empty()) throw ConfigError("no materials given");
  for (const auto& [id, m] : materials) m.validate();
  if (output.sampling_level < 1) throw ConfigError("sampling_level must be >= 1");
  if (output.field_every < 0) throw ConfigError("field_every must be >= 0");
  if (mesh.path.empty() && mesh.generator.empty()) throw ConfigError("mesh needs a path or a generator");
  for (const auto& r : receivers)
    if (r.id.empty()) throw ConfigError("receiver without id");
}

namespace {

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 json_vec2(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) throw ConfigError(std::string(what) + " must be a 2-vector");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

json scenario_json(const ScenarioSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["alpha"] = s.alpha;
  j["direction"] = vec_json(s.direction);
  j["s_wave"] = s.s_wave;
  j["modes"] = json::array();
  for (const auto& m : s.modes) {
    json jm;
    jm["amplitude"] = m.amplitude;
    jm["wave_vector"] = vec_json(m.wave_vector);
    jm["vector"] = std::vector<double>(m.vector.data(), m.vector.data() + 5);
    jm["omega"] = m.omega;
    jm["phase"] = m.phase;
    j["modes"].push_back(jm);
  }
  j["sources"] = json::array();
  for (const auto& r : s.sources) {
    json jr;
    jr["position"] = vec_json(r.position);
    jr["theta_deg"] = r.theta_deg;
    jr["a1"] = r.a1;
    jr["fc"] = r.fc;
    jr["t_delay"] = r.t_delay;
    j["sources"].push_back(jr);
  }
  return j;
}

ScenarioSpec scenario_from_json(const json& j) {
  ScenarioSpec s = default_scenario(scenario_kind_from_string(j.at("kind").get<std::string>()));
  s.alpha = get_or(j, "alpha", s.alpha);
  if (j.contains("direction")) s.direction = json_vec2(j["direction"], "scenario.direction");
  s.s_wave = get_or(j, "s_wave", s.s_wave);
  if (j.contains("modes")) {
    s.modes.clear();
    for (const auto& jm : j["modes"]) {
      PlaneWaveMode m;
      m.amplitude = get_or(jm, "amplitude", 1.0);
      m.wave_vector = json_vec2(jm.at("wave_vector"), "mode.wave_vector");
      const auto v = jm.at("vector").get<std::vector<double>>();
      if (v.size() != 5) throw ConfigError("mode.vector must have 5 entries (u, v, sxx, syy, sxy)");
      for (int c = 0; c < 5; ++c) m.vector[c] = v[c];
      m.omega = get_or(jm, "omega", 0.0);
      m.phase = get_or(jm, "phase", 0.0);
      s.modes.push_back(m);
    }
  }
  if (j.contains("sources")) {
    s.sources.clear();
    for (const auto& jr : j["sources"]) {
      RickerSource r;
      r.position = json_vec2(jr.at("position"), "source.position");
      r.theta_deg = get_or(jr, "theta_deg", r.theta_deg);
      r.a1 = get_or(jr, "a1", r.a1);
      r.fc = get_or(jr, "fc", r.fc);
      r.t_delay = get_or(jr, "t_delay", r.t_delay);
      s.sources.push_back(r);
    }
  }
  return s;
}

}  // namespace

json to_json(const RunConfig& c) {
  json j;
  json m;
  if (!c.mesh.path.empty()) m["path"] = c.mesh.path;
  m["generator"] = c.mesh.generator;
  m["box"] = {c.mesh.xmin, c.mesh.xmax, c.mesh.ymin, c.mesh.ymax};
  m["nx"] = c.mesh.nx;
  m["ny"] = c.mesh.ny;
  m["perturbation"] = c.mesh.perturbation;
  m["seed"] = c.mesh.seed;
  m["periodic"] = c.mesh.periodic;
  m["radius"] = c.mesh.radius;
  m["n_radial"] = c.mesh.n_radial;
  j["mesh"] = m;
  j["p"] = c.p;
  j["p_gamma"] = c.p_gamma;
  j["mode"] = to_string(c.mode);
  j["dt"] = c.dt;
  j["dt_over_h"] = c.dt_over_h;
  j["t_end"] = c.t_end;
  j["solver"] = {{"method", to_string(c.solver.method)},
                 {"tolerance", c.solver.tolerance},
                 {"absolute_tolerance", c.solver.absolute_tolerance},
                 {"max_iterations", c.solver.max_iterations},
                 {"restart", c.solver.restart}};
  j["preconditioner"] = to_string(c.preconditioner);
  j["materials"] = json::array();
  for (const auto& [id, mat] : c.materials)
    j["materials"].push_back({{"region_id", id}, {"lambda", mat.lambda}, {"mu", mat.mu}, {"rho", mat.rho}});
  j["bc"] = to_string(c.bc);
  j["scenario"] = scenario_json(c.scenario);
  j["receivers"] = json::array();
  for (const auto& r : c.receivers) j["receivers"].push_back({{"id", r.id}, {"position", vec_json(r.position)}});
  j["output"] = {{"directory", c.output.directory},
                 {"prefix", c.output.prefix},
                 {"field_every", c.output.field_every},
                 {"sampling_level", c.output.sampling_level}};
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("mesh")) {
      const json& m = j["mesh"];
      if (m.is_string()) {
        c.mesh.path = m.get<std::string>();
      } else {
        c.mesh.path = get_or<std::string>(m, "path", "");
        c.mesh.generator = get_or<std::string>(m, "generator", c.mesh.generator);
        if (m.contains("box")) {
          const auto b = m["box"].get<std::vector<double>>();
          if (b.size() != 4) throw ConfigError("mesh.box must be [xmin, xmax, ymin, ymax]");
          c.mesh.xmin = b[0];
          c.mesh.xmax = b[1];
          c.mesh.ymin = b[2];
          c.mesh.ymax = b[3];
        }
        c.mesh.nx = get_or(m, "nx", c.mesh.nx);
        c.mesh.ny = get_or(m, "ny", c.mesh.ny);
        c.mesh.perturbation = get_or(m, "perturbation", c.mesh.perturbation);
        c.mesh.seed = get_or(m, "seed", c.mesh.seed);
        c.mesh.periodic = get_or(m, "periodic", c.mesh.periodic);
        c.mesh.radius = get_or(m, "radius", c.mesh.radius);
        c.mesh.n_radial = get_or(m, "n_radial", c.mesh.n_radial);
      }
    }
    c.p = get_or(j, "p", c.p);
    c.p_gamma = get_or(j, "p_gamma", c.p_gamma);
    if (j.contains("mode")) c.mode = time_mode_from_string(j["mode"].get<std::string>());
    c.dt = get_or(j, "dt", c.dt);
    c.dt_over_h = get_or(j, "dt_over_h", c.dt_over_h);
    c.t_end = get_or(j, "t_end", c.t_end);
    if (j.contains("solver")) {
      const json& s = j["solver"];
      if (s.contains("method")) c.solver.method = krylov_method_from_string(s["method"].get<std::string>());
      c.solver.tolerance = get_or(s, "tolerance", c.solver.tolerance);
      c.solver.absolute_tolerance = get_or(s, "absolute_tolerance", c.solver.absolute_tolerance);
      c.solver.max_iterations = get_or(s, "max_iterations", c.solver.max_iterations);
      c.solver.restart = get_or(s, "restart", c.solver.restart);
    }
    if (j.contains("preconditioner"))
      c.preconditioner = preconditioner_from_string(j["preconditioner"].get<std::string>());
    if (j.contains("materials")) {
      for (const auto& jm : j["materials"]) {
        const int id = get_or(jm, "region_id", 0);
        IsotropicMaterial mat;
        const double rho = jm.at("rho").get<double>();
        if (jm.contains("cp") || jm.contains("cs")) {
          mat = IsotropicMaterial::from_speeds(jm.at("cp").get<double>(), jm.at("cs").get<double>(), rho);
        } else {
          mat.lambda = jm.at("lambda").get<double>();
          mat.mu = jm.at("mu").get<double>();
          mat.rho = rho;
        }
        if (c.materials.count(id)) throw ConfigError("duplicate material for region " + std::to_string(id));
        c.materials[id] = mat;
      }
    }
    if (j.contains("bc")) c.bc = boundary_condition_from_string(j["bc"].get<std::string>());
    if (j.contains("scenario")) c.scenario = scenario_from_json(j["scenario"]);
    if (j.contains("receivers"))
      for (const auto& jr : j["receivers"])
        c.receivers.push_back({jr.at("id").get<std::string>(), json_vec2(jr.at("position"), "receiver.position")});
    if (j.contains("output")) {
      const json& o = j["output"];
      c.output.directory = get_or(o, "directory", c.output.directory);
      c.output.prefix = get_or(o, "prefix", c.output.prefix);
      c.output.field_every = get_or(o, "field_every", c.output.field_every);
      c.output.sampling_level = get_or(o, "sampling_level", c.output.sampling_level);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const RunConfig& cfg, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(cfg).dump(2) << "\n";
}

RunConfig default_config(ScenarioKind kind) {
  RunConfig c;
  c.scenario = default_scenario(kind);
  switch (kind) {
    case ScenarioKind::PsConvergence:
    case ScenarioKind::Custom:
      c.mesh.nx = c.mesh.ny = 14;
      c.p = c.p_gamma = 2;
      c.dt_over_h = 0.112;
      c.t_end = 3.0 * std::sqrt(2.0);
      c.materials[0] = {2.0, 1.0, 1.0};
      c.bc = BoundaryCondition::Periodic;
      c.output.prefix = to_string(kind);
      break;
    case ScenarioKind::SliverStudy:
      c.mesh.generator = "sliver";
      c.mesh.nx = c.mesh.ny = 10;
      c.mesh.seed = 7;
      c.p = 4;
      c.p_gamma = 2;
      c.dt = 0.014;
      c.t_end = 0.028;
      c.solver.tolerance = 1e-8;
      c.solver.max_iterations = 3000;
      c.materials[0] = {2.0, 1.0, 1.0};
      c.preconditioner = PreconditionerKind::Pre2;
      c.output.prefix = "sliver_study";
      break;
    case ScenarioKind::PlaneWaveCavity:
      c.mesh.generator = "cavity";
      c.mesh.xmin = c.mesh.ymin = -2.5;
      c.mesh.xmax = c.mesh.ymax = 2.5;
      c.mesh.nx = 16;
      c.mesh.n_radial = 10;
      c.mesh.radius = 0.25;
      c.p = 5;
      c.p_gamma = 1;
      c.dt = 0.01;
      c.t_end = 1.0;
      c.materials[0] = {2.0, 1.0, 1.0};
      c.bc = BoundaryCondition::FreeSurface;
      c.solver.tolerance = 1e-9;
      c.preconditioner = PreconditionerKind::Pre2;
      c.receivers = {{"x1", Vec2(0.5, 0.5)}, {"x2", Vec2(1.0, 0.0)}};
      c.output.prefix = "cavity";
      break;
    case ScenarioKind::LambTilted:
      c.mesh.generator = "lamb";
      c.mesh.nx = 40;
      c.mesh.ny = 20;
      c.p = 4;
      c.p_gamma = 2;
      c.dt = 1e-3;
      c.t_end = 1.0;
      c.materials[0] = IsotropicMaterial::from_speeds(3200.0, 1847.5, 2200.0);
      c.bc = BoundaryCondition::FreeSurface;
      c.receivers = {{"xp", Vec2(2694.96, 2475.08)}};
      c.output.prefix = "lamb";
      break;
    case ScenarioKind::LayeredComplex:
      c.mesh.generator = "layered";
      c.mesh.nx = 50;
      c.mesh.ny = 25;
      c.p = 4;
      c.p_gamma = 2;
      c.dt = 1e-3;
      c.t_end = 5.0;
      c.materials[0] = IsotropicMaterial::from_speeds(3200.0, 1847.5, 2200.0);
      c.materials[1] = IsotropicMaterial::from_speeds(2262.74, 1306.38, 2200.0);
      c.bc = BoundaryCondition::FreeSurface;
      c.receivers = {{"x1", Vec2(893.80, 1994.83)}, {"x2", Vec2(1790.0, 880.0)}, {"x3", Vec2(1000.0, 500.0)}};
      c.output.prefix = "layered";
      break;
  }
  return c;
}

double resolve_dt(const RunConfig& cfg, double h) { return cfg.dt_over_h > 0.0 ? cfg.dt_over_h * h : cfg.dt; }

int num_steps(double t_end, double dt) { return static_cast<int>(std::floor(t_end / dt * (1.0 + 1e-12) + 1e-9)); }

// --- sampling and writers ------------------------------------------------------

namespace {

bool in_reference_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  constexpr double tol = 1e-12;
  const double d = cross2(b - a, c - a);
  const double l1 = cross2(b - p, c - p) / d, l2 = cross2(c - p, a - p) / d, l3 = 1.0 - l1 - l2;
  return l1 >= -tol && l2 >= -tol && l3 >= -tol;
}

Vec5 sample_point(const Discretization& disc, const State& s, int element, const Vec2& xi, const Vec2& x) {
  const auto& ref = TriangleBasis::vertices();
  const Vec2 centroid = (ref[0] + ref[1] + ref[2]) / 3.0;
  int best = kNone;
  for (int k = 0; k < 3; ++k) {
    const int sub = disc.dual.tri_subs[element][k];
    if (!in_reference_triangle(xi, centroid, ref[k], ref[(k + 1) % 3])) continue;
    if (best == kNone || disc.dual.cells[disc.dual.subs[sub].cell].edge <
                             disc.dual.cells[disc.dual.subs[best].cell].edge)
      best = sub;
  }
  if (best == kNone) throw ContractError("sample point outside its element");
  const SubElement& se = disc.dual.subs[best];
  Vec5 out;
  out.head<2>() = evaluate_velocity(disc, s.velocity, element, xi, 1.0);
  out.tail<3>() = evaluate_stress(disc, s.stress, se.cell, x + se.shift, 1.0);
  return out;
}

}  // namespace

FieldSamples sample_fields(const Discretization& disc, const State& s, int level) {
  if (level < 1) throw ContractError("sampling level must be >= 1");
  FieldSamples f;
  const int L = level;
  for (int i = 0; i < disc.num_elements(); ++i) {
    const int base = static_cast<int>(f.points.size());
    std::vector<std::vector<int>> id(L + 1, std::vector<int>(L + 1, -1));
    for (int b = 0; b <= L; ++b)
      for (int a = 0; a + b <= L; ++a) {
        const Vec2 xi(double(a) / L, double(b) / L);
        const Vec2 x = disc.maps[i](xi).x;
        id[a][b] = static_cast<int>(f.points.size());
        f.points.push_back(x);
        f.values.push_back(sample_point(disc, s, i, xi, x));
      }
    (void)base;
    for (int b = 0; b < L; ++b)
      for (int a = 0; a + b < L; ++a) {
        f.cells.push_back({id[a][b], id[a + 1][b], id[a][b + 1]});
        f.cell_region.push_back(disc.mesh.region[i]);
        if (a + b + 1 < L) {
          f.cells.push_back({id[a + 1][b], id[a + 1][b + 1], id[a][b + 1]});
          f.cell_region.push_back(disc.mesh.region[i]);
        }
      }
  }
  return f;
}

void write_vtk(const FieldSamples& f, std::ostream& out) {
  char buf[64];
  auto num = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return std::string(buf);
  };
  out << "# vtk DataFile Version 3.0\nstdg fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << f.points.size() << " double\n";
  for (const auto& p : f.points) out << num(p.x()) << ' ' << num(p.y()) << " 0\n";
  out << "CELLS " << f.cells.size() << ' ' << 4 * f.cells.size() << "\n";
  for (const auto& c : f.cells) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << "\n";
  out << "CELL_TYPES " << f.cells.size() << "\n";
  for (std::size_t i = 0; i < f.cells.size(); ++i) out << "5\n";
  out << "CELL_DATA " << f.cells.size() << "\nSCALARS region_id int 1\nLOOKUP_TABLE default\n";
  for (int r : f.cell_region) out << r << "\n";
  out << "POINT_DATA " << f.points.size() << "\n";
  const char* names[5] = {"u", "v", "sxx", "syy", "sxy"};
  for (int c = 0; c < 5; ++c) {
    out << "SCALARS " << names[c] << " double 1\nLOOKUP_TABLE default\n";
    for (const auto& v : f.values) out << num(v[c]) << "\n";
  }
}

void write_vtk(const FieldSamples& f, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_vtk(f, out);
}

ReceiverProbe resolve_receiver(const Discretization& disc, const Receiver& r) {
  const auto loc = locate_point(disc, r.position);
  if (!loc)
    throw ConfigError("receiver '" + r.id + "' at (" + format_double(r.position.x()) + ", " +
                      format_double(r.position.y()) + ") lies outside the mesh");
  ReceiverProbe p;
  p.receiver = r;
  p.element = loc->element;
  p.xi = loc->xi;
  // nearest edge of the containing element, ties towards the lower edge index
  double best = std::numeric_limits<double>::infinity();
  int best_sub = kNone;
  for (int k = 0; k < 3; ++k) {
    const Vec2 a = disc.mesh.vertex(p.element, k), b = disc.mesh.vertex(p.element, (k + 1) % 3);
    const Vec2 ab = b - a;
    const double t = std::clamp((r.position - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
    const double d = (r.position - (a + t * ab)).norm();
    const int sub = disc.dual.tri_subs[p.element][k];
    const int edge = disc.dual.cells[disc.dual.subs[sub].cell].edge;
    if (d < best - 1e-12 * ab.norm() ||
        (std::abs(d - best) <= 1e-12 * ab.norm() && edge < disc.dual.cells[disc.dual.subs[best_sub].cell].edge)) {
      best = std::min(best, d);
      best_sub = sub;
    }
  }
  const SubElement& se = disc.dual.subs[best_sub];
  p.cell = se.cell;
  p.cell_point = r.position + se.shift;
  return p;
}

Vec5 probe(const Discretization& disc, const State& s, const ReceiverProbe& p) {
  Vec5 out;
  out.head<2>() = evaluate_velocity(disc, s.velocity, p.element, p.xi, 1.0);
  out.tail<3>() = evaluate_stress(disc, s.stress, p.cell, p.cell_point, 1.0);
  return out;
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvTable::write(std::ostream& out) const {
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) out << (c ? "," : "") << format_double(r[c]);
    out << "\n";
  }
}

void CsvTable::write(const fs::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write(out);
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& c : split(line)) row.push_back(std::strtod(c.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

// --- simulation ----------------------------------------------------------------

MaterialField build_material_field(const Discretization& disc, const std::map<int, IsotropicMaterial>& table) {
  std::vector<int> cell_region;
  cell_region.reserve(disc.num_cells());
  for (const auto& c : disc.dual.cells) cell_region.push_back(c.region);
  return make_material_field(disc.mesh.region, cell_region, table);
}

Simulation::Simulation(const RunConfig& cfg, PrimalMesh mesh) : cfg_(cfg) {
  cfg_.validate();
  dt_ = resolve_dt(cfg_, mesh.characteristic_size());
  disc_ = std::make_unique<Discretization>(std::move(mesh), cfg_.p, cfg_.p_gamma);
  MaterialField mat = build_material_field(*disc_, cfg_.materials);
  SchemeConfig sc;
  sc.mode = cfg_.mode;
  sc.dt = dt_;
  sc.krylov = cfg_.solver;
  sc.preconditioner = cfg_.preconditioner;
  sc.boundary = cfg_.bc;
  scheme_ = std::make_unique<Scheme>(*disc_, std::move(mat), sc);
  for (int i = 0; i < disc_->num_elements(); ++i) rho_.push_back(scheme_->materials().element[i].rho);

  const auto modes = scenario_modes(cfg_.scenario, scheme_->materials().element.front());
  if (modes.empty())
    state_ = zero_state(*disc_);
  else
    state_ = project_state(*disc_, scheme_->operators(), plane_wave_field(modes), 0.0);
  state_.time = 0.0;
  points_ = scenario_point_sources(cfg_.scenario);
}

const SourceVectors* Simulation::sources() {
  if (points_.empty()) return nullptr;
  src_ = assemble_sources(*disc_, points_, {}, rho_, state_.time, dt_);
  return &src_;
}

StepStats Simulation::step() {
  const SourceVectors* src = sources();
  return scheme_->advance(state_, src);
}

RunSummary run(const RunConfig& cfg, const RunOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Simulation sim(cfg, build_mesh(cfg.mesh, opts.base_dir));
  const Discretization& disc = sim.disc();
  const fs::path dir = opts.output_dir.empty() ? fs::path(cfg.output.directory) : opts.output_dir;
  fs::create_directories(dir);
  const std::string& prefix = cfg.output.prefix;

  std::vector<ReceiverProbe> probes;
  for (const auto& r : cfg.receivers) probes.push_back(resolve_receiver(disc, r));

  RunSummary sum;
  sum.dt = sim.dt();
  sum.steps = num_steps(cfg.t_end, sim.dt());
  CsvTable energy{{"t", "kinetic", "elastic", "total"}, {}};
  CsvTable stats{{"step", "t", "iterations", "residual"}, {}};
  std::vector<CsvTable> seis(probes.size(), CsvTable{{"t", "u", "v", "sxx", "syy", "sxy"}, {}});

  auto record = [&]() {
    const State& s = sim.state();
    const Energy e = sim.scheme().energy(s);
    energy.rows.push_back({s.time, e.kinetic, e.elastic, e.total()});
    for (std::size_t r = 0; r < probes.size(); ++r) {
      const Vec5 v = probe(disc, s, probes[r]);
      seis[r].rows.push_back({s.time, v[0], v[1], v[2], v[3], v[4]});
    }
    if (cfg.output.field_every > 0 && (s.step % cfg.output.field_every == 0 || s.step == sum.steps)) {
      char name[32];
      std::snprintf(name, sizeof name, "_fields_%06d.vtk", s.step);
      const fs::path p = dir / (prefix + name);
      write_vtk(sample_fields(disc, s, cfg.output.sampling_level), p);
      sum.files.push_back(p);
    }
  };

  record();
  sum.initial_energy = sim.scheme().energy(sim.state());
  long total_its = 0;
  for (int n = 0; n < sum.steps; ++n) {
    const StepStats st = sim.step();
    total_its += st.iterations;
    stats.rows.push_back({double(sim.state().step), sim.state().time, double(st.iterations), st.residual});
    record();
    if (!opts.quiet && (n + 1) % 50 == 0)
      std::cerr << "step " << n + 1 << "/" << sum.steps << " t=" << sim.state().time << " its=" << st.iterations
                << "\n";
  }
  sum.final_energy = sim.scheme().energy(sim.state());
  sum.mean_iterations = sum.steps ? double(total_its) / sum.steps : 0.0;

  const fs::path ep = dir / (prefix + "_energy.csv"), sp = dir / (prefix + "_stats.csv");
  energy.write(ep);
  stats.write(sp);
  sum.files.push_back(ep);
  sum.files.push_back(sp);
  for (std::size_t r = 0; r < probes.size(); ++r) {
    const fs::path p = dir / (prefix + "_seismogram_" + probes[r].receiver.id + ".csv");
    seis[r].write(p);
    sum.files.push_back(p);
  }
  sum.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!opts.quiet)
    std::cout << "steps " << sum.steps << "  dt " << sum.dt << "  mean iterations " << sum.mean_iterations
              << "  wall time " << sum.wall_time << " s\n";
  return sum;
}

// --- convergence -----------------------------------------------------------------

MeshSpec parse_mesh_token(const std::string& token, const MeshSpec& base) {
  MeshSpec m = base;
  if (token.rfind("box:", 0) == 0) {
    m.path.clear();
    m.generator = "box";
    try {
      m.nx = m.ny = std::stoi(token.substr(4));
    } catch (const std::exception&) {
      throw ConfigError("bad mesh token '" + token + "'");
    }
    return m;
  }
  m.path = token;
  return m;
}

std::vector<ConvergenceRow> convergence(const RunConfig& base, const std::vector<MeshSpec>& meshes,
                                        std::vector<std::string>* warnings) {
  if (meshes.size() < 2) throw ConfigError("convergence needs at least two meshes");
  const ScenarioKind k = base.scenario.kind;
  if (k != ScenarioKind::PsConvergence && k != ScenarioKind::Custom && k != ScenarioKind::SliverStudy)
    throw ConfigError("convergence needs a scenario with an analytic solution");
  std::vector<ConvergenceRow> rows;
  for (const auto& ms : meshes) {
    const auto t0 = std::chrono::steady_clock::now();
    PrimalMesh mesh = build_mesh(ms);
    RunConfig cfg = base;
    const double h = mesh.characteristic_size();
    const double dt0 = resolve_dt(cfg, h);
    const int steps = static_cast<int>(std::ceil(cfg.t_end / dt0 - 1e-9));
    cfg.dt = cfg.t_end / steps;
    cfg.dt_over_h = 0.0;
    Simulation sim(cfg, std::move(mesh));
    for (int n = 0; n < steps; ++n) sim.step();
    const auto exact = exact_solution(cfg.scenario, sim.scheme().materials().element.front());
    ConvergenceRow row;
    row.p = cfg.p;
    row.n_elements = sim.disc().num_elements();
    row.h = h;
    row.error = compute_l2_error(sim.disc(), sim.state(), exact, sim.state().time);
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!rows.empty()) {
      const auto& prev = rows.back();
      const double lh = std::log(prev.h / row.h);
      if (std::abs(lh) < 1e-12) {
        if (warnings) warnings->push_back("meshes with identical h: order undefined");
      } else {
        for (int c = 0; c < 5; ++c) row.order[c] = std::log(prev.error[c] / row.error[c]) / lh;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

CsvTable convergence_table(const std::vector<ConvergenceRow>& rows) {
  CsvTable t{{"p", "n_elements", "h", "u", "order_u", "v", "order_v", "sxx", "order_sxx", "syy", "order_syy", "sxy",
              "order_sxy", "wall_time"},
             {}};
  for (const auto& r : rows) {
    std::vector<double> v{double(r.p), double(r.n_elements), r.h};
    for (int c = 0; c < 5; ++c) {
      v.push_back(r.error[c]);
      v.push_back(r.order[c]);
    }
    v.push_back(r.wall_time);
    t.rows.push_back(std::move(v));
  }
  return t;
}

// --- sliver study ------------------------------------------------------------------

double SliverReport::mean(const std::string& mesh, PreconditionerKind k) const {
  for (const auto& r : rows)
    if (r.mesh == mesh && r.preconditioner == k) return r.mean_iterations;
  throw ContractError("sliver report has no row for " + mesh + "/" + to_string(k));
}

double SliverReport::ratio(PreconditionerKind k) const { return mean("mesh2", k) / mean("mesh1", k); }

SliverReport sliver_study(const RunConfig& cfg, const std::vector<PreconditionerKind>& kinds) {
  const SliverMeshes meshes = make_sliver_meshes(cfg.mesh.nx, 70.53, cfg.mesh.seed);
  SliverReport rep;
  rep.incircle_ratio = meshes.ratio();
  const std::pair<const char*, const PrimalMesh*> sets[2] = {{"mesh1", &meshes.regular}, {"mesh2", &meshes.sliver}};
  for (const auto& [name, mesh] : sets) {
    RunConfig c = cfg;
    Simulation sim(c, *mesh);
    const State initial = sim.state();
    const int steps = num_steps(cfg.t_end, sim.dt());
    for (PreconditionerKind k : kinds) {
      sim.scheme().set_preconditioner(k);
      sim.state() = initial;
      long its = 0;
      for (int n = 0; n < steps; ++n) its += sim.step().iterations;
      rep.rows.push_back({name, k, steps ? double(its) / steps : 0.0, steps});
    }
  }
  return rep;
}

}  // namespace stdg
