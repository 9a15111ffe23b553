#include "femgraph/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "femgraph/mesher.hpp"
#include "femgraph/render.hpp"
#include "femgraph/text_io.hpp"

namespace femgraph {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const DataError&) {
    throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

int to_int32(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError("'" + key + "' is out of range");
  }
  return static_cast<int>(x);
}

const char* split_file(Split s) {
  switch (s) {
    case Split::Train: return "samples_train.jsonl";
    case Split::Val: return "samples_val.jsonl";
    case Split::Test: return "samples_test.jsonl";
  }
  return "";
}

}  // namespace

std::string to_string(TargetKind kind) { return kind == TargetKind::Stress ? "stress" : "topo"; }

TargetKind parse_target_kind(const std::string& text) {
  if (text == "stress") return TargetKind::Stress;
  if (text == "topo" || text == "topology") return TargetKind::Topology;
  throw ConfigError("unknown target '" + text + "' (expected stress or topo)");
}

std::string to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "";
}

std::vector<int> parse_family_list(const std::string& text) {
  std::vector<int> out;
  const std::string t = trim(text);
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    const int lo = to_int32("families", trim(t.substr(0, dots)));
    const int hi = to_int32("families", trim(t.substr(dots + 2)));
    if (hi < lo) throw ConfigError("empty family range '" + text + "'");
    for (int f = lo; f <= hi; ++f) out.push_back(f);
  } else {
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_int32("families", trim(item)));
  }
  if (out.empty()) throw ConfigError("no families given");
  for (int f : out) {
    if (f < 1 || f > kFamilyCount) throw ConfigError("family " + std::to_string(f) + " outside 1.." + std::to_string(kFamilyCount));
  }
  std::vector<int> sorted = out;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("duplicate family in '" + text + "'");
  return out;
}

void DatasetConfig::validate() const {
  if (families.empty()) throw ConfigError("no families configured");
  for (int f : families) {
    if (f < 1 || f > kFamilyCount) throw ConfigError("family " + std::to_string(f) + " out of range");
  }
  if (per_family < 1) throw ConfigError("per_family must be >= 1");
  if (max_hops < 1) throw ConfigError("max_hops must be >= 1");
  if (!(mesh_size > 0.0)) throw ConfigError("mesh_size must be positive");
  if (!(train_ratio >= 0.0 && val_ratio >= 0.0 && train_ratio + val_ratio <= 1.0)) {
    throw ConfigError("split ratios must be non-negative with train + val <= 1");
  }
  if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
  if (!(norm.length > 0.0 && norm.force > 0.0 && norm.youngs_modulus > 0.0)) {
    throw ConfigError("normalization constants must be positive");
  }
  try {
    material.validate();
    simp.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

const std::vector<std::string>& DatasetConfig::scalar_keys() {
  static const std::vector<std::string> keys = {
      "families", "per_family", "seed", "target", "mode", "max_hops", "mesh_size", "train_ratio",
      "val_ratio", "max_attempts", "include_material", "write_fields", "write_meshes", "jobs",
      "youngs_modulus", "poisson_ratio", "thickness", "idealization", "volume_fraction", "penalty",
      "max_cycles", "z_min", "filter_radius", "move_limit", "oc_damping", "change_tolerance",
      "norm_length", "norm_force", "norm_youngs_modulus"};
  return keys;
}

void DatasetConfig::apply(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string v = trim(raw_value);
  if (ParamRanges::is_range_key(key)) {
    ranges.apply(key, v);
    return;
  }
  if (key == "families") families = parse_family_list(v);
  else if (key == "per_family") per_family = to_int32(key, v);
  else if (key == "seed") seed = to_uint(key, v);
  else if (key == "target") target = parse_target_kind(v);
  else if (key == "mode") mode = parse_embedding_mode(v);
  else if (key == "max_hops") max_hops = to_int32(key, v);
  else if (key == "mesh_size") mesh_size = to_double(key, v);
  else if (key == "train_ratio") train_ratio = to_double(key, v);
  else if (key == "val_ratio") val_ratio = to_double(key, v);
  else if (key == "max_attempts") max_attempts = to_int32(key, v);
  else if (key == "include_material") include_material = to_bool(key, v);
  else if (key == "write_fields") write_fields = to_bool(key, v);
  else if (key == "write_meshes") write_meshes = to_bool(key, v);
  else if (key == "jobs") jobs = to_int32(key, v);
  else if (key == "youngs_modulus") material.youngs_modulus = to_double(key, v);
  else if (key == "poisson_ratio") material.poisson_ratio = to_double(key, v);
  else if (key == "thickness") material.thickness = to_double(key, v);
  else if (key == "idealization") {
    if (v == "plane_stress") material.idealization = Idealization::PlaneStress;
    else if (v == "plane_strain") material.idealization = Idealization::PlaneStrain;
    else throw ConfigError("idealization must be plane_stress or plane_strain");
  }
  else if (key == "volume_fraction") simp.volume_fraction = to_double(key, v);
  else if (key == "penalty") simp.penalty = to_double(key, v);
  else if (key == "max_cycles") simp.max_cycles = to_int32(key, v);
  else if (key == "z_min") simp.z_min = to_double(key, v);
  else if (key == "filter_radius") simp.filter_radius = to_double(key, v);
  else if (key == "move_limit") simp.move_limit = to_double(key, v);
  else if (key == "oc_damping") simp.damping = to_double(key, v);
  else if (key == "change_tolerance") simp.change_tolerance = to_double(key, v);
  else if (key == "norm_length") norm.length = to_double(key, v);
  else if (key == "norm_force") norm.force = to_double(key, v);
  else if (key == "norm_youngs_modulus") norm.youngs_modulus = to_double(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

nlohmann::ordered_json DatasetConfig::to_json() const {
  nlohmann::ordered_json j;
  j["families"] = families;
  j["per_family"] = per_family;
  j["seed"] = seed;
  j["target"] = to_string(target);
  j["mode"] = to_string(mode);
  j["max_hops"] = mode == EmbeddingMode::Boge ? max_hops : 1;
  j["mesh_size"] = mesh_size;
  j["train_ratio"] = train_ratio;
  j["val_ratio"] = val_ratio;
  j["max_attempts"] = max_attempts;
  j["include_material"] = include_material;
  j["write_fields"] = write_fields;
  j["write_meshes"] = write_meshes;
  j["material"] = {{"youngs_modulus", material.youngs_modulus},
                   {"poisson_ratio", material.poisson_ratio},
                   {"thickness", material.thickness},
                   {"idealization", material.idealization == Idealization::PlaneStress ? "plane_stress" : "plane_strain"}};
  if (target == TargetKind::Topology) {
    j["simp"] = {{"volume_fraction", simp.volume_fraction}, {"penalty", simp.penalty},
                 {"max_cycles", simp.max_cycles},           {"z_min", simp.z_min},
                 {"filter_radius", simp.filter_radius},     {"move_limit", simp.move_limit},
                 {"oc_damping", simp.damping},              {"change_tolerance", simp.change_tolerance}};
  }
  j["ranges"] = ranges.to_json();
  return j;
}

void apply_config_text(DatasetConfig& config, std::istream& in) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    try {
      config.apply(line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void apply_config_file(DatasetConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  apply_config_text(config, in);
}

SplitCounts split_counts(std::size_t n, double train_ratio, double val_ratio) {
  SplitCounts c;
  const double dn = static_cast<double>(n);
  c.train = std::min(n, static_cast<std::size_t>(std::llround(train_ratio * dn)));
  c.val = std::min(n - c.train, static_cast<std::size_t>(std::llround(val_ratio * dn)));
  c.test = n - c.train - c.val;
  return c;
}

std::string sample_id(int family, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "f%d-%04d", family, index);
  return buf;
}

std::vector<SampleSlot> plan_samples(const DatasetConfig& config) {
  const std::size_t n = config.families.size() * static_cast<std::size_t>(config.per_family);
  const SplitCounts counts = split_counts(n, config.train_ratio, config.val_ratio);
  std::vector<SampleSlot> slots;
  slots.reserve(n);
  for (int i = 0; i < config.per_family; ++i) {
    for (int f : config.families) {
      SampleSlot s;
      s.family = f;
      s.index = i;
      s.ordinal = slots.size();
      s.split = s.ordinal < counts.train               ? Split::Train
                : s.ordinal < counts.train + counts.val ? Split::Val
                                                        : Split::Test;
      slots.push_back(s);
    }
  }
  return slots;
}

void TargetStats::add(double v) {
  if (count == 0) {
    min = max = v;
  } else {
    min = std::min(min, v);
    max = std::max(max, v);
  }
  ++count;
  const double delta = v - mean;
  mean += delta / static_cast<double>(count);
  m2_ += delta * (v - mean);
  std = std::sqrt(m2_ / static_cast<double>(count));
}

nlohmann::ordered_json TargetStats::to_json() const {
  return {{"count", count}, {"mean", mean}, {"std", std}, {"min", min}, {"max", max}};
}

SampleResult run_sample(const DatasetConfig& config, const SampleSlot& slot) {
  SampleResult r;
  r.slot = slot;
  const std::string id = sample_id(slot.family, slot.index);
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    const std::uint64_t seed = sample_seed(config.seed, slot.family, slot.index, attempt);
    try {
      BeamDesign design = sample_design(slot.family, seed, config.ranges);
      const PlanarDomain domain = design_to_polygon(design);
      MeshOptions mopt;
      mopt.target_size = config.mesh_size;
      TriMesh mesh = triangulate(domain, mopt);
      const Vec2 load = design.load.vector();
      const FeaProblem problem = cantilever_problem(mesh, config.material, load);

      std::vector<double> target;
      std::ostringstream field_text;
      if (config.target == TargetKind::Stress) {
        const FeaSolution sol = solve(problem);
        target.assign(sol.von_mises.data(), sol.von_mises.data() + sol.von_mises.size());
        if (config.write_meshes) write_solution(field_text, sol);
      } else {
        const DensityField field = optimize(problem, config.simp);
        target.assign(field.densities.data(), field.densities.data() + field.densities.size());
        if (config.write_meshes) write_density(field_text, field);
      }

      GraphOptions gopt;
      gopt.mode = config.mode;
      gopt.max_hops = config.max_hops;
      if (config.include_material) gopt.material = config.material;
      gopt.norm = config.norm;
      GraphSample graph = build_graph(problem.mesh, load, target, gopt);
      graph.id = id;
      graph.family = slot.family;

      r.design = design;
      r.attempts = attempt + 1;
      r.line = to_jsonl_line(graph);
      r.num_vertices = graph.num_vertices();
      r.num_edges = graph.edges.size();
      const auto lowest = std::min_element(target.begin(), target.end()) - target.begin();
      r.min_location = problem.mesh.centroid(static_cast<std::size_t>(lowest));
      if (config.write_fields) {
        RenderOptions ropt;
        if (config.target == TargetKind::Topology) ropt.range = ColorRange{0.0, 1.0};
        r.svg = render_svg(problem.mesh, target, ropt);
      }
      if (config.write_meshes) {
        std::ostringstream mesh_text;
        write_mesh(mesh_text, problem.mesh);
        r.mesh_text = mesh_text.str();
        r.field_text = field_text.str();
      }
      r.target = std::move(target);
      return r;
    } catch (const Error& e) {
      r.failures.push_back("attempt " + std::to_string(attempt) + " (" + e.kind() + "): " + e.what());
    }
  }
  std::string msg = "sample " + id + " failed after " + std::to_string(config.max_attempts) + " attempts";
  if (!r.failures.empty()) msg += "; last: " + r.failures.back();
  throw DataError(msg);
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw DataError("failed writing " + path.string());
}

}  // namespace

DatasetSummary generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir,
                                std::ostream* log) {
  config.validate();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  if (config.write_fields) std::filesystem::create_directories(out_dir / "fields");
  const char* field_dir = config.target == TargetKind::Stress ? "solutions" : "densities";
  if (config.write_meshes) {
    std::filesystem::create_directories(out_dir / "meshes");
    std::filesystem::create_directories(out_dir / field_dir);
  }

  const std::vector<SampleSlot> slots = plan_samples(config);
  std::map<Split, std::ofstream> files;
  std::map<Split, std::size_t> offsets;
  for (Split s : {Split::Train, Split::Val, Split::Test}) {
    const auto path = out_dir / split_file(s);
    files[s].open(path, std::ios::binary | std::ios::trunc);
    if (!files[s]) throw DataError("cannot open " + path.string() + " for writing");
    offsets[s] = 0;
  }

  // Workers claim slots in order; the writer consumes results strictly by
  // ordinal. Claims stay within `window` of the writer to bound memory.
  const std::size_t window = static_cast<std::size_t>(config.jobs) * 4;
  std::mutex mu;
  std::condition_variable cv;
  std::map<std::size_t, SampleResult> ready;
  std::size_t next_claim = 0;
  std::size_t next_write = 0;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      std::size_t k;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return failure || next_claim >= slots.size() || next_claim < next_write + window; });
        if (failure || next_claim >= slots.size()) return;
        k = next_claim++;
      }
      try {
        SampleResult r = run_sample(config, slots[k]);
        std::lock_guard lock(mu);
        ready.emplace(k, std::move(r));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  const int nthreads = std::min<int>(config.jobs, static_cast<int>(std::max<std::size_t>(1, slots.size())));
  for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);

  TargetStats stats;
  TargetStats element_stats;
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  std::map<int, std::map<std::string, std::size_t>> family_split;
  std::map<std::string, std::size_t> split_totals{{"train", 0}, {"val", 0}, {"test", 0}};
  nlohmann::ordered_json min_location;
  try {
    while (next_write < slots.size()) {
      SampleResult r;
      {
        std::unique_lock lock(mu);
        cv.wait(lock, [&] { return failure || ready.count(next_write); });
        if (failure) std::rethrow_exception(failure);
        r = std::move(ready.at(next_write));
        ready.erase(next_write);
        ++next_write;
      }
      cv.notify_all();

      const std::string id = sample_id(r.slot.family, r.slot.index);
      if (log) {
        for (const std::string& f : r.failures) *log << "retry " << id << ": " << f << '\n';
      }
      const Split split = r.slot.split;
      files[split] << r.line;
      if (!files[split]) throw DataError(std::string("failed writing ") + split_file(split));

      for (double v : r.target) {
        const bool new_min = stats.count == 0 || v < stats.min;
        stats.add(v);
        if (new_min) {
          min_location = {{"id", id}, {"x", r.min_location.x()}, {"y", r.min_location.y()}};
        }
      }
      element_stats.add(static_cast<double>(r.num_vertices));
      ++family_split[r.slot.family][to_string(split)];
      ++split_totals[to_string(split)];

      nlohmann::ordered_json rec;
      rec["id"] = id;
      rec["family"] = r.slot.family;
      rec["index"] = r.slot.index;
      rec["seed"] = r.design.seed;
      rec["attempts"] = r.attempts;
      if (!r.failures.empty()) rec["failures"] = r.failures;
      rec["split"] = to_string(split);
      rec["file"] = split_file(split);
      rec["offset"] = offsets[split];
      rec["length"] = r.line.size();
      rec["num_vertices"] = r.num_vertices;
      rec["num_edges"] = r.num_edges;
      rec["design"] = to_json(r.design);
      records.push_back(std::move(rec));
      offsets[split] += r.line.size();

      if (config.write_fields) write_text(out_dir / "fields" / (id + ".svg"), r.svg);
      if (config.write_meshes) {
        write_text(out_dir / "meshes" / (id + ".mesh"), r.mesh_text);
        write_text(out_dir / field_dir / (id + (config.target == TargetKind::Stress ? ".sol" : ".density")), r.field_text);
      }
    }
  } catch (...) {
    {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
    }
    cv.notify_all();
    for (auto& t : pool) t.join();
    throw;
  }
  for (auto& t : pool) t.join();
  for (auto& [s, f] : files) {
    f.close();
    if (!f) throw DataError(std::string("failed closing ") + split_file(s));
  }

  nlohmann::ordered_json m;
  m["format"] = "femgraph-dataset/1";
  m["seed"] = config.seed;
  m["seed_rule"] =
      "sample_seed = h(h(h(h(seed) ^ family) ^ index) ^ attempt), h = splitmix64; "
      "samples ordered index-major, family-minor";
  m["target"] = to_string(config.target);
  m["embedding"] = {{"mode", to_string(config.mode)},
                    {"max_hops", config.mode == EmbeddingMode::Boge ? config.max_hops : 1},
                    {"channels", config.include_material ? VertexFeatures::kChannelsWithMaterial : VertexFeatures::kChannels}};
  nlohmann::ordered_json per_family = nlohmann::ordered_json::object();
  for (int f : config.families) per_family[std::to_string(f)] = config.per_family;
  m["per_family_counts"] = per_family;
  m["split_ratios"] = {{"train", config.train_ratio},
                       {"val", config.val_ratio},
                       {"test", 1.0 - config.train_ratio - config.val_ratio}};
  m["split_counts"] = split_totals;
  nlohmann::ordered_json fs = nlohmann::ordered_json::object();
  for (const auto& [f, counts] : family_split) {
    fs[std::to_string(f)] = {{"train", counts.count("train") ? counts.at("train") : 0},
                             {"val", counts.count("val") ? counts.at("val") : 0},
                             {"test", counts.count("test") ? counts.at("test") : 0}};
  }
  m["per_family_split_counts"] = fs;
  m["normalization"] = config.norm.to_json(config.include_material);
  nlohmann::ordered_json st = stats.to_json();
  st["min_location"] = min_location;
  st["mean_elements"] = element_stats.mean;
  st["min_elements"] = element_stats.min;
  st["max_elements"] = element_stats.max;
  m["statistics"] = st;
  m["config"] = config.to_json();
  m["records"] = std::move(records);
  write_text(out_dir / "manifest.json", m.dump(2) + "\n");

  if (log) {
    *log << "wrote " << slots.size() << " samples to " << out_dir.string() << " (train " << split_totals["train"]
         << ", val " << split_totals["val"] << ", test " << split_totals["test"] << ")\n";
  }
  DatasetSummary summary;
  summary.manifest = std::move(m);
  summary.stats = stats;
  summary.samples = slots.size();
  return summary;
}

}  // namespace femgraph
