#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "femgraph/beamgen.hpp"
#include "femgraph/boge.hpp"
#include "femgraph/fea.hpp"
#include "femgraph/seed.hpp"
#include "femgraph/simp.hpp"

namespace femgraph {

enum class TargetKind { Stress, Topology };

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& text);

struct DatasetConfig {
  std::vector<int> families{1, 2, 3, 4, 5, 6, 7, 8, 9};
  int per_family = 60;
  std::uint64_t seed = 1;
  TargetKind target = TargetKind::Stress;
  EmbeddingMode mode = EmbeddingMode::Boge;
  int max_hops = 3;
  double mesh_size = 1.0;  // mm
  double train_ratio = 0.7;
  double val_ratio = 0.15;  // test takes the remainder
  int max_attempts = 8;     // per sample, including the first
  bool include_material = false;
  bool write_fields = false;  // fields/{id}.svg
  bool write_meshes = false;  // meshes/{id}.mesh plus solutions/ or densities/
  int jobs = 1;               // never affects output bytes
  Material material;
  SimpConfig simp;
  ParamRanges ranges = ParamRanges::defaults();
  Normalization norm;

  // Throws ConfigError.
  void validate() const;

  // Sets one key from its text value. Range keys ("width", "3.hole_rx", ...)
  // take "min max step". Unknown keys raise ConfigError.
  void apply(const std::string& key, const std::string& value);

  // Every key accepted by apply(), in a fixed order.
  static const std::vector<std::string>& scalar_keys();

  // Resolved settings; excludes `jobs`.
  nlohmann::ordered_json to_json() const;
};

// Reads "key = value" lines; '#' starts a comment.
void apply_config_text(DatasetConfig& config, std::istream& in);
void apply_config_file(DatasetConfig& config, const std::string& path);

// Parses "1..9", "1,3,5" or "2".
std::vector<int> parse_family_list(const std::string& text);

struct SplitCounts {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

// round(train_ratio * n) and round(val_ratio * n); test takes the rest.
SplitCounts split_counts(std::size_t n, double train_ratio, double val_ratio);

enum class Split { Train, Val, Test };
std::string to_string(Split split);

// Samples are ordered index-major, family-minor, and the splits are
// consecutive runs of that order.
struct SampleSlot {
  int family = 0;
  int index = 0;
  std::size_t ordinal = 0;
  Split split = Split::Train;
};
std::vector<SampleSlot> plan_samples(const DatasetConfig& config);

std::string sample_id(int family, int index);

struct TargetStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;

  void add(double v);
  nlohmann::ordered_json to_json() const;

 private:
  double m2_ = 0.0;
};

struct SampleResult {
  SampleSlot slot;
  BeamDesign design;
  int attempts = 1;
  std::vector<std::string> failures;  // one message per failed attempt
  std::string line;                   // JSONL record including the newline
  std::size_t num_vertices = 0;
  std::size_t num_edges = 0;
  std::vector<double> target;
  Vec2 min_location = Vec2::Zero();  // centroid of the smallest target value
  std::string svg;
  std::string mesh_text;
  std::string field_text;  // solution or density file
};

// Runs design -> mesh -> solve/optimize -> embed for one slot, re-sampling
// with attempt-derived seeds on pipeline errors. Throws DataError when the
// attempt budget is exhausted.
SampleResult run_sample(const DatasetConfig& config, const SampleSlot& slot);

struct DatasetSummary {
  nlohmann::ordered_json manifest;
  TargetStats stats;
  std::size_t samples = 0;
};

// Writes samples_{train,val,test}.jsonl and manifest.json into out_dir.
// Progress and retries go to `log` when given.
DatasetSummary generate_dataset(const DatasetConfig& config, const std::filesystem::path& out_dir,
                                std::ostream* log = nullptr);

}  // namespace femgraph
