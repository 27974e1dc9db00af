#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "maner/baselines.hpp"
#include "maner/policy.hpp"
#include "maner/raster.hpp"
#include "maner/world.hpp"

namespace maner {

/// Algorithm names accepted by the harness: "maner", "greedy", "random".
const std::vector<std::string>& known_algorithms();

struct SweepSpec {
  std::vector<int> object_counts{8, 12, 16};
  std::vector<int> agent_counts{2, 3};
  int seeds = 20;
  std::uint64_t first_seed = 0;
  std::vector<std::string> algorithms{"maner", "greedy", "random"};
  /// Shares of shuffle, sort and random episodes.
  std::vector<double> task_mix{0.4, 0.3, 0.3};
  int jobs = 1;
  PolicyConfig policy;
  BaselineConfig baseline;

  void validate() const;
};

/// Task kind of the i-th of `count` seeds; the leading shares go to shuffle, then sort.
TaskKind task_for_seed(int index, int count, const std::vector<double>& task_mix);

/// The scenario one sweep cell uses for one seed; identical across algorithms.
Scenario sweep_scenario(int n_objects, int n_agents, TaskKind kind, std::uint64_t seed, int patches = 24);

EpisodeResult run_algorithm(const std::string& algorithm, const Scenario& scenario, const SweepSpec& spec);

struct EpisodeRow {
  std::string algorithm;
  int n_objects = 0;
  int n_agents = 0;
  TaskKind task_kind = TaskKind::shuffle;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

struct CellAggregate {
  std::string algorithm;
  int n_objects = 0;
  int n_agents = 0;
  int episodes = 0;
  int successes = 0;
  double SR = 0.0;
  /// Means over successful episodes only; NaN when there are none.
  double DT = 0.0;
  double CT = 0.0;
  double IT = 0.0;
};

struct SweepResult {
  std::vector<EpisodeRow> rows;  // ordered by cell, seed, algorithm
  std::vector<CellAggregate> cells;
};

/// Episodes run on `spec.jobs` threads; results do not depend on the job count.
SweepResult run_sweep(const SweepSpec& spec);

/// Ordered reduction of rows into per-(algorithm, objects, agents) cells.
std::vector<CellAggregate> aggregate(const std::vector<EpisodeRow>& rows);

std::string sweep_csv(const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> parse_sweep_csv(const std::string& text);
nlohmann::json aggregates_json(const std::vector<CellAggregate>& cells);

struct DatasetSpec {
  int environments = 1;
  /// States sampled along the oracle rollout of each environment.
  int configurations = 1;
  std::vector<int> object_counts{8, 12, 16};
  std::vector<int> agent_counts{2, 3};
  std::vector<double> task_mix{0.4, 0.3, 0.3};
  std::uint64_t seed = 0;
  bool augment = true;
  double eval_fraction = 0.2;
  RasterConfig raster;
  PolicyConfig policy;

  void validate() const;
};

struct DatasetSample {
  std::string id;
  int environment = 0;
  int configuration = 0;
  int agent_id = 0;
  int object_id = 0;
  std::string augmentation;  // "none" or a transform name
  std::string split;         // "train" or "eval"
  std::vector<std::pair<std::string, std::string>> files;  // channel -> relative path
};

struct DatasetManifest {
  std::vector<DatasetSample> samples;
  nlohmann::json to_json() const;
};

std::string to_string(GridTransform t);
/// The four augmentations: both flips and both quarter turns.
const std::vector<GridTransform>& augmentations();

/// Label heatmaps for one (scene, agent, picked object) sample.
struct SampleLabels {
  Heatmap pick;
  Heatmap feasibility;
  Heatmap quality;
};

SampleLabels sample_labels(const Scene& scene, const Scene& target, int agent_id, int object_id,
                           const std::vector<int>& other_picks, const HeatmapConfig& config, double tolerance);

/// Writes every sample under `output_dir` plus manifest.json. Throws std::runtime_error
/// when a file cannot be written.
DatasetManifest export_dataset(const DatasetSpec& spec, const std::string& output_dir);

}  // namespace maner
