#include "femgraph/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "femgraph/dataset.hpp"
#include "femgraph/metrics.hpp"
#include "femgraph/render.hpp"
#include "femgraph/text_io.hpp"

namespace femgraph::cli {
namespace {

constexpr int kUsageError = 2;
constexpr int kPipelineError = 1;

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_seed) {
  cmd->add_option("--config", c.config_path, "plain-text key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "override one config key, KEY=VALUE (repeatable)");
  if (with_seed) {
    cmd->add_option_function<std::uint64_t>(
        "--seed", [&c](const std::uint64_t& s) { c.seed = s, c.seed_given = true; }, "master seed");
  }
  cmd->add_option("--out", c.out, "output path (stdout when omitted)");
}

DatasetConfig resolve(const Common& c) {
  DatasetConfig cfg;
  if (!c.config_path.empty()) apply_config_file(cfg, c.config_path);
  for (const std::string& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed_given) cfg.seed = c.seed;
  cfg.validate();
  return cfg;
}

void log_config(std::ostream& err, const std::string& command, const DatasetConfig& cfg,
                const nlohmann::ordered_json& args) {
  nlohmann::ordered_json j;
  j["event"] = "config";
  j["command"] = command;
  j["args"] = args;
  j["config"] = cfg.to_json();
  err << j.dump() << '\n';
}

// Writes to `path`, or to `out` when the path is empty.
void emit(const std::string& path, std::ostream& out, const std::string& text) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path + " for writing");
  f << text;
  if (!f) throw DataError("failed writing " + path);
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

TriMesh load_mesh(const std::string& path) {
  auto in = open_input(path);
  return read_mesh(in);
}

std::vector<double> read_values(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> v;
  std::string tok;
  while (in >> tok) v.push_back(parse_double(tok));
  return v;
}

Vec2 load_vector_from(double magnitude, double angle) {
  return {magnitude * std::cos(angle), magnitude * std::sin(angle)};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"femgraph: beam generation, meshing, FEA, SIMP and graph-embedding pipeline"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common common;

  // gen-design
  int family = 1;
  auto* gen = app.add_subcommand("gen-design", "sample one beam design as JSON");
  add_common(gen, common, true);
  gen->add_option("--family", family, "family id 1..9")->check(CLI::Range(1, kFamilyCount));

  // mesh
  std::string design_path;
  double size = 0.0;
  auto* mesh_cmd = app.add_subcommand("mesh", "triangulate a design");
  add_common(mesh_cmd, common, true);
  mesh_cmd->add_option("--design", design_path, "design JSON (otherwise sampled from --family/--seed)")
      ->check(CLI::ExistingFile);
  mesh_cmd->add_option("--family", family, "family id when sampling")->check(CLI::Range(1, kFamilyCount));
  mesh_cmd->add_option("--size", size, "target element size in mm (config mesh_size otherwise)");

  // solve / optimize share load flags
  std::string mesh_path;
  double load = 1000.0;
  double angle = 1.5 * std::numbers::pi;
  auto add_load = [&](CLI::App* cmd) {
    cmd->add_option("--mesh", mesh_path, "mesh file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--load", load, "load magnitude in N")->capture_default_str();
    cmd->add_option("--angle", angle, "load direction in radians from +x")->capture_default_str();
  };
  auto* solve_cmd = app.add_subcommand("solve", "solve plane elasticity on a mesh");
  add_common(solve_cmd, common, false);
  add_load(solve_cmd);
  auto* opt_cmd = app.add_subcommand("optimize", "SIMP topology optimization on a mesh");
  add_common(opt_cmd, common, false);
  add_load(opt_cmd);

  // embed
  std::string solution_path, density_path, sample_name = "sample";
  std::string mode_text = "boge";
  int max_hops = 3;
  int embed_family = 0;
  auto* embed_cmd = app.add_subcommand("embed", "convert mesh + field into one graph JSON line");
  add_common(embed_cmd, common, false);
  add_load(embed_cmd);
  auto* sol_opt = embed_cmd->add_option("--solution", solution_path, "solution file (von Mises target)")
                      ->check(CLI::ExistingFile);
  auto* den_opt = embed_cmd->add_option("--density", density_path, "density file (topology target)")
                      ->check(CLI::ExistingFile);
  sol_opt->excludes(den_opt);
  embed_cmd->add_option("--mode", mode_text, "boge or conventional")->capture_default_str();
  embed_cmd->add_option("--max-hops", max_hops, "local link depth")->capture_default_str();
  embed_cmd->add_option("--id", sample_name, "record id")->capture_default_str();
  embed_cmd->add_option("--family", embed_family, "record family");

  // dataset
  std::string families_text, target_text;
  int per_family = 0, jobs = 1;
  bool fields = false, meshes = false;
  auto* data_cmd = app.add_subcommand("dataset", "generate a graph dataset with manifest and splits");
  add_common(data_cmd, common, true);
  data_cmd->add_option("--families", families_text, "e.g. 1..9 or 1,4,7");
  data_cmd->add_option("--per-family", per_family, "samples per family")->check(CLI::PositiveNumber);
  data_cmd->add_option("--target", target_text, "stress or topo");
  data_cmd->add_option("--mode", mode_text, "boge or conventional");
  data_cmd->add_option("--max-hops", max_hops, "local link depth");
  data_cmd->add_option("--size", size, "target element size in mm");
  data_cmd->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  data_cmd->add_flag("--fields", fields, "also write fields/{id}.svg");
  data_cmd->add_flag("--meshes", meshes, "also write mesh and solution/density files");

  // metrics
  std::string pred_path, truth_path;
  double eps = kMapeEpsilon;
  auto* metrics_cmd = app.add_subcommand("metrics", "MSE, MAPE and outlier report for two value files");
  metrics_cmd->add_option("--pred", pred_path, "predicted values")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--truth", truth_path, "ground-truth values")->required()->check(CLI::ExistingFile);
  metrics_cmd->add_option("--eps", eps, "MAPE and outlier epsilon")->capture_default_str();
  metrics_cmd->add_option("--out", common.out, "output path (stdout when omitted)");

  // render
  std::string values_path;
  std::vector<double> range;
  bool outline = false;
  auto* render_cmd = app.add_subcommand("render", "render a per-element field as SVG");
  add_common(render_cmd, common, false);
  render_cmd->add_option("--mesh", mesh_path, "mesh file")->required()->check(CLI::ExistingFile);
  auto* r_sol = render_cmd->add_option("--solution", solution_path, "solution file (von Mises)")->check(CLI::ExistingFile);
  auto* r_den = render_cmd->add_option("--density", density_path, "density file")->check(CLI::ExistingFile);
  auto* r_val = render_cmd->add_option("--values", values_path, "whitespace-separated values")->check(CLI::ExistingFile);
  r_sol->excludes(r_den)->excludes(r_val);
  r_den->excludes(r_val);
  render_cmd->add_option("--range", range, "color range MIN MAX")->expected(2);
  render_cmd->add_flag("--outline", outline, "draw element edges");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      out << app.help();
      return 0;
    }
    app.exit(e, out, err);
    nlohmann::ordered_json j{{"error", "usage"}, {"message", e.what()}};
    err << j.dump() << '\n';
    return kUsageError;
  }

  try {
    if (gen->parsed()) {
      DatasetConfig cfg = resolve(common);
      log_config(err, "gen-design", cfg, {{"family", family}});
      const BeamDesign d = sample_design(family, cfg.seed, cfg.ranges);
      emit(common.out, out, to_json(d).dump(2) + "\n");
    } else if (mesh_cmd->parsed()) {
      DatasetConfig cfg = resolve(common);
      if (size > 0.0) cfg.mesh_size = size;
      log_config(err, "mesh", cfg, {{"design", design_path}, {"family", family}});
      BeamDesign d;
      if (!design_path.empty()) {
        auto in = open_input(design_path);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw DataError(std::string("malformed design JSON: ") + e.what());
        }
        d = design_from_json(j);
      } else {
        d = sample_design(family, cfg.seed, cfg.ranges);
      }
      MeshOptions mopt;
      mopt.target_size = cfg.mesh_size;
      const TriMesh m = triangulate(design_to_polygon(d), mopt);
      const QualityReport q = mesh_quality(m);
      err << nlohmann::ordered_json{{"event", "mesh"},
                                    {"elements", q.element_count},
                                    {"nodes", q.node_count},
                                    {"min_angle_deg", q.min_angle_deg},
                                    {"max_edge", q.max_edge}}
                 .dump()
          << '\n';
      std::ostringstream s;
      write_mesh(s, m);
      emit(common.out, out, s.str());
    } else if (solve_cmd->parsed() || opt_cmd->parsed()) {
      const bool optimizing = opt_cmd->parsed();
      DatasetConfig cfg = resolve(common);
      log_config(err, optimizing ? "optimize" : "solve", cfg, {{"mesh", mesh_path}, {"load", load}, {"angle", angle}});
      const FeaProblem p = cantilever_problem(load_mesh(mesh_path), cfg.material, load_vector_from(load, angle));
      std::ostringstream s;
      if (optimizing) {
        write_density(s, optimize(p, cfg.simp));
      } else {
        write_solution(s, solve(p));
      }
      emit(common.out, out, s.str());
    } else if (embed_cmd->parsed()) {
      DatasetConfig cfg = resolve(common);
      log_config(err, "embed", cfg,
                 {{"mesh", mesh_path}, {"mode", mode_text}, {"max_hops", max_hops}, {"id", sample_name}});
      if (solution_path.empty() && density_path.empty()) throw ConfigError("embed needs --solution or --density");
      const TriMesh m = load_mesh(mesh_path);
      std::vector<double> target;
      if (!solution_path.empty()) {
        auto in = open_input(solution_path);
        const FeaSolution sol = read_solution(in);
        target.assign(sol.von_mises.data(), sol.von_mises.data() + sol.von_mises.size());
      } else {
        auto in = open_input(density_path);
        const DensityField f = read_density(in);
        target.assign(f.densities.data(), f.densities.data() + f.densities.size());
      }
      GraphOptions g;
      g.mode = parse_embedding_mode(mode_text);
      g.max_hops = max_hops;
      if (cfg.include_material) g.material = cfg.material;
      g.norm = cfg.norm;
      GraphSample sample = build_graph(m, load_vector_from(load, angle), target, g);
      sample.id = sample_name;
      sample.family = embed_family;
      emit(common.out, out, to_jsonl_line(sample));
    } else if (data_cmd->parsed()) {
      DatasetConfig cfg = resolve(common);
      if (!families_text.empty()) cfg.families = parse_family_list(families_text);
      if (per_family > 0) cfg.per_family = per_family;
      if (!target_text.empty()) cfg.target = parse_target_kind(target_text);
      if (data_cmd->count("--mode")) cfg.mode = parse_embedding_mode(mode_text);
      if (data_cmd->count("--max-hops")) cfg.max_hops = max_hops;
      if (size > 0.0) cfg.mesh_size = size;
      if (data_cmd->count("--jobs")) cfg.jobs = jobs;
      cfg.write_fields = cfg.write_fields || fields;
      cfg.write_meshes = cfg.write_meshes || meshes;
      cfg.validate();
      std::string dir = common.out;
      if (dir.empty()) {
        const char* env = std::getenv("FEMGRAPH_OUT");
        dir = env && *env ? env : "femgraph_dataset";
      }
      log_config(err, "dataset", cfg, {{"out", dir}, {"jobs", cfg.jobs}});
      const DatasetSummary summary = generate_dataset(cfg, dir, &err);
      nlohmann::ordered_json result{{"samples", summary.samples}, {"out", dir}};
      result["statistics"] = summary.manifest["statistics"];
      out << result.dump() << '\n';
    } else if (metrics_cmd->parsed()) {
      const std::vector<double> pred = read_values(pred_path);
      const std::vector<double> truth = read_values(truth_path);
      const MetricReport r = outlier_report(pred, truth, eps);
      nlohmann::ordered_json j{{"count", r.count},
                               {"mse", r.mse},
                               {"mape", r.mape},
                               {"outlier_fraction", r.outlier_fraction},
                               {"conditional_mape", r.conditional_mape},
                               {"conditional_count", r.conditional_count},
                               {"eps", eps}};
      emit(common.out, out, j.dump() + "\n");
    } else if (render_cmd->parsed()) {
      DatasetConfig cfg = resolve(common);
      log_config(err, "render", cfg, {{"mesh", mesh_path}});
      const TriMesh m = load_mesh(mesh_path);
      std::vector<double> field;
      RenderOptions ropt;
      if (!solution_path.empty()) {
        auto in = open_input(solution_path);
        const FeaSolution sol = read_solution(in);
        field.assign(sol.von_mises.data(), sol.von_mises.data() + sol.von_mises.size());
      } else if (!density_path.empty()) {
        auto in = open_input(density_path);
        const DensityField f = read_density(in);
        field.assign(f.densities.data(), f.densities.data() + f.densities.size());
        ropt.range = ColorRange{0.0, 1.0};
      } else if (!values_path.empty()) {
        field = read_values(values_path);
      } else {
        throw ConfigError("render needs --solution, --density or --values");
      }
      if (range.size() == 2) ropt.range = ColorRange{range[0], range[1]};
      ropt.outline = outline;
      emit(common.out, out, render_svg(m, field, ropt));
    }
  } catch (const ConfigError& e) {
    err << nlohmann::ordered_json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << nlohmann::ordered_json{{"error", e.kind()}, {"message", e.what()}}.dump() << '\n';
    return kPipelineError;
  } catch (const std::exception& e) {
    err << nlohmann::ordered_json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return kPipelineError;
  }
  return 0;
}

}  // namespace femgraph::cli
