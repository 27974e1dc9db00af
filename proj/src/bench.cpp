#include "maner/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

namespace maner {

const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> names{"maner", "greedy", "random"};
  return names;
}

namespace {

void check_mix(const std::vector<double>& mix) {
  if (mix.size() != 3) throw std::invalid_argument("task_mix needs three shares");
  double sum = 0.0;
  for (double v : mix) {
    if (!(v >= 0.0)) throw std::invalid_argument("task_mix shares must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("task_mix must sum to 1");
}

void check_counts(const std::vector<int>& objects, const std::vector<int>& agents) {
  if (objects.empty() || agents.empty()) throw std::invalid_argument("empty object or agent counts");
  for (int n : objects)
    if (n < 1) throw std::invalid_argument("object count must be positive");
  for (int m : agents)
    if (m < 1) throw std::invalid_argument("agent count must be positive");
  for (int n : objects)
    for (int m : agents)
      if (m >= n) throw std::invalid_argument("agents must be fewer than objects");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number in CSV: " + s);
  return v;
}

}  // namespace

void SweepSpec::validate() const {
  check_counts(object_counts, agent_counts);
  if (seeds < 1) throw std::invalid_argument("seeds must be positive");
  if (algorithms.empty()) throw std::invalid_argument("no algorithms");
  for (const auto& a : algorithms)
    if (std::find(known_algorithms().begin(), known_algorithms().end(), a) == known_algorithms().end())
      throw std::invalid_argument("unknown algorithm: " + a);
  check_mix(task_mix);
  if (jobs < 1) throw std::invalid_argument("jobs must be positive");
  policy.validate();
  baseline.validate();
}

TaskKind task_for_seed(int index, int count, const std::vector<double>& task_mix) {
  check_mix(task_mix);
  if (count < 1 || index < 0 || index >= count) throw std::invalid_argument("seed index out of range");
  const int shuffles = static_cast<int>(std::lround(task_mix[0] * count));
  const int sorts = static_cast<int>(std::lround((task_mix[0] + task_mix[1]) * count)) - shuffles;
  if (index < shuffles) return TaskKind::shuffle;
  if (index < shuffles + sorts) return TaskKind::sort;
  return TaskKind::random;
}

Scenario sweep_scenario(int n_objects, int n_agents, TaskKind kind, std::uint64_t seed, int patches) {
  RandomizationRanges r;
  r.objects = n_objects;
  r.agents = n_agents;
  return generate_scenario(kind, r, seed, patches);
}

EpisodeResult run_algorithm(const std::string& algorithm, const Scenario& scenario, const SweepSpec& spec) {
  if (algorithm == "maner") return run(scenario, spec.policy);
  BaselineConfig bc = spec.baseline;
  if (algorithm == "greedy")
    bc.variant = BaselineVariant::greedy;
  else if (algorithm == "random")
    bc.variant = BaselineVariant::random;
  else
    throw std::invalid_argument("unknown algorithm: " + algorithm);
  return run_baseline(scenario, bc);
}

SweepResult run_sweep(const SweepSpec& spec) {
  spec.validate();
  struct Job {
    int n, m;
    TaskKind kind;
    std::uint64_t seed;
    std::string algorithm;
  };
  std::vector<Job> jobs;
  for (int n : spec.object_counts)
    for (int m : spec.agent_counts)
      for (int s = 0; s < spec.seeds; ++s)
        for (const auto& a : spec.algorithms)
          jobs.push_back({n, m, task_for_seed(s, spec.seeds, spec.task_mix),
                          spec.first_seed + static_cast<std::uint64_t>(s), a});

  std::vector<EpisodeRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& j = jobs[i];
      try {
        const Scenario sc = sweep_scenario(j.n, j.m, j.kind, j.seed, spec.policy.heatmap.patches);
        rows[i] = {j.algorithm, j.n, j.m, j.kind, j.seed, run_algorithm(j.algorithm, sc, spec).metrics};
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = jobs.size();
      }
    }
  };
  const int threads = std::min<int>(spec.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  SweepResult res;
  res.rows = std::move(rows);
  res.cells = aggregate(res.rows);
  return res;
}

std::vector<CellAggregate> aggregate(const std::vector<EpisodeRow>& rows) {
  // First-appearance order of cells, so the output follows the sweep order.
  std::vector<CellAggregate> cells;
  std::map<std::tuple<std::string, int, int>, std::size_t> index;
  std::vector<double> sr_sum;
  for (const auto& r : rows) {
    const auto key = std::make_tuple(r.algorithm, r.n_objects, r.n_agents);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      CellAggregate c;
      c.algorithm = r.algorithm;
      c.n_objects = r.n_objects;
      c.n_agents = r.n_agents;
      cells.push_back(c);
      sr_sum.push_back(0.0);
    }
    CellAggregate& c = cells[it->second];
    ++c.episodes;
    sr_sum[it->second] += r.metrics.success_rate;
    if (r.metrics.succeeded) {
      ++c.successes;
      c.DT += r.metrics.distance_traveled;
      c.CT += r.metrics.completion_time;
      c.IT += r.metrics.inference_time;
    }
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    CellAggregate& c = cells[i];
    c.SR = sr_sum[i] / c.episodes;
    if (c.successes > 0) {
      c.DT /= c.successes;
      c.CT /= c.successes;
      c.IT /= c.successes;
    } else {
      c.DT = c.CT = c.IT = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return cells;
}

std::string sweep_csv(const std::vector<EpisodeRow>& rows) {
  std::ostringstream os;
  os << "algorithm,n_objects,n_agents,task_kind,seed,SR,DT_m,CT_s,IT_s,succeeded\n";
  for (const auto& r : rows)
    os << r.algorithm << ',' << r.n_objects << ',' << r.n_agents << ',' << to_string(r.task_kind) << ','
       << r.seed << ',' << fmt(r.metrics.success_rate) << ',' << fmt(r.metrics.distance_traveled) << ','
       << fmt(r.metrics.completion_time) << ',' << fmt(r.metrics.inference_time) << ','
       << (r.metrics.succeeded ? 1 : 0) << '\n';
  return os.str();
}

std::vector<EpisodeRow> parse_sweep_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "algorithm,n_objects,n_agents,task_kind,seed,SR,DT_m,CT_s,IT_s,succeeded")
    throw std::runtime_error("unexpected CSV header");
  std::vector<EpisodeRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw std::runtime_error("CSV row needs 10 fields: " + line);
    EpisodeRow r;
    r.algorithm = f[0];
    r.n_objects = std::stoi(f[1]);
    r.n_agents = std::stoi(f[2]);
    r.task_kind = task_kind_from_string(f[3]);
    r.seed = std::stoull(f[4]);
    r.metrics.success_rate = parse_double(f[5]);
    r.metrics.distance_traveled = parse_double(f[6]);
    r.metrics.completion_time = parse_double(f[7]);
    r.metrics.inference_time = parse_double(f[8]);
    r.metrics.succeeded = f[9] == "1";
    r.metrics.n_objects = r.n_objects;
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json aggregates_json(const std::vector<CellAggregate>& cells) {
  auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : cells)
    out.push_back({{"algorithm", c.algorithm},
                   {"n_objects", c.n_objects},
                   {"n_agents", c.n_agents},
                   {"episodes", c.episodes},
                   {"successes", c.successes},
                   {"SR", c.SR},
                   {"DT_m", num(c.DT)},
                   {"CT_s", num(c.CT)},
                   {"IT_s", num(c.IT)}});
  return out;
}

// ---------------------------------------------------------------------------
// Dataset export

void DatasetSpec::validate() const {
  if (environments < 1 || configurations < 1) throw std::invalid_argument("environments and configurations must be positive");
  check_counts(object_counts, agent_counts);
  check_mix(task_mix);
  if (!(eval_fraction >= 0.0 && eval_fraction <= 1.0)) throw std::invalid_argument("eval_fraction must lie in [0, 1]");
  raster.validate();
  policy.validate();
  if (raster.patches() != policy.heatmap.patches)
    throw std::invalid_argument("raster patches must match heatmap patches");
}

nlohmann::json DatasetManifest::to_json() const {
  nlohmann::json samples_json = nlohmann::json::array();
  int train = 0;
  for (const auto& s : samples) {
    nlohmann::json files = nlohmann::json::object();
    for (const auto& [k, v] : s.files) files[k] = v;
    samples_json.push_back({{"id", s.id},
                            {"environment", s.environment},
                            {"configuration", s.configuration},
                            {"agent_id", s.agent_id},
                            {"object_id", s.object_id},
                            {"augmentation", s.augmentation},
                            {"split", s.split},
                            {"files", files}});
    if (s.split == "train") ++train;
  }
  return {{"samples", samples_json},
          {"counts", {{"total", samples.size()}, {"train", train}, {"eval", static_cast<int>(samples.size()) - train}}}};
}

std::string to_string(GridTransform t) {
  switch (t) {
    case GridTransform::identity: return "none";
    case GridTransform::flip_horizontal: return "flip_horizontal";
    case GridTransform::flip_vertical: return "flip_vertical";
    case GridTransform::rotate_cw: return "rotate_cw";
    case GridTransform::rotate_ccw: return "rotate_ccw";
  }
  return "none";
}

const std::vector<GridTransform>& augmentations() {
  static const std::vector<GridTransform> all{GridTransform::flip_horizontal, GridTransform::flip_vertical,
                                              GridTransform::rotate_cw, GridTransform::rotate_ccw};
  return all;
}

SampleLabels sample_labels(const Scene& scene, const Scene& target, int agent_id, int object_id,
                           const std::vector<int>& other_picks, const HeatmapConfig& config, double tolerance) {
  HeatmapConfig hc = config;
  hc.tolerance = tolerance;
  const AgentState* agent = scene.find_agent(agent_id);
  const ObjectState* obj = scene.find_object(object_id);
  if (!agent || !obj) throw std::invalid_argument("unknown agent or object");
  const int P = hc.patches;
  const PlanningGrid grid = agent_grid(scene, *agent, P, object_id);
  std::vector<Cell> others;
  for (int id : other_picks) {
    if (id == object_id) continue;
    const ObjectState* o = scene.find_object(id);
    if (!o) throw std::invalid_argument("unknown picked object");
    others.push_back(grid.cell_of(o->position));
  }
  SampleLabels out;
  out.pick = pick_heatmap(scene, target, agent_id, hc);
  out.feasibility = feasibility_heatmap(grid, grid.cell_of(obj->position), others, hc);
  out.quality = quality_heatmap(scene, target, object_id, hc);
  return out;
}

namespace {

struct Channels {
  RgbImage Z_t, Z_T, M_seg;
  GrayImage M_r, B_t, M_f;
  SampleLabels labels;
};

Channels transformed(const Channels& c, GridTransform t) {
  Channels o;
  o.Z_t = transform_grid(c.Z_t, t);
  o.Z_T = transform_grid(c.Z_T, t);
  o.M_seg = transform_grid(c.M_seg, t);
  o.M_r = transform_grid(c.M_r, t);
  o.B_t = transform_grid(c.B_t, t);
  o.M_f = transform_grid(c.M_f, t);
  o.labels.pick = transform_grid(c.labels.pick, t);
  o.labels.feasibility = transform_grid(c.labels.feasibility, t);
  o.labels.quality = transform_grid(c.labels.quality, t);
  return o;
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << j.dump() << '\n';
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

std::vector<std::pair<std::string, std::string>> write_channels(const Channels& c, const std::filesystem::path& root,
                                                                const std::string& id) {
  namespace fs = std::filesystem;
  const fs::path dir = root / id;
  fs::create_directories(dir);
  std::vector<std::pair<std::string, std::string>> files;
  auto rel = [&](const std::string& name) {
    const std::string r = id + "/" + name;
    return std::make_pair(r, (root / r).string());
  };
  auto ppm = [&](const std::string& key, const RgbImage& img) {
    auto [r, p] = rel(key + ".ppm");
    write_ppm(img, p);
    files.emplace_back(key, r);
  };
  auto pgm = [&](const std::string& key, const GrayImage& img) {
    auto [r, p] = rel(key + ".pgm");
    write_pgm(img, p);
    files.emplace_back(key, r);
  };
  auto heat = [&](const std::string& key, const Heatmap& h) {
    auto [r, p] = rel(key + ".pgm");
    write_heatmap_pgm(h, p);
    files.emplace_back(key, r);
    auto [rj, pj] = rel(key + ".json");
    write_json(heatmap_to_json(h), pj);
    files.emplace_back(key + "_json", rj);
  };
  ppm("Z_t", c.Z_t);
  ppm("Z_T", c.Z_T);
  pgm("M_r", c.M_r);
  pgm("B_t", c.B_t);
  pgm("M_f", c.M_f);
  ppm("M_seg", c.M_seg);
  heat("Q_pick", c.labels.pick);
  heat("Q_feas", c.labels.feasibility);
  heat("Q_qual", c.labels.quality);
  return files;
}

}  // namespace

DatasetManifest export_dataset(const DatasetSpec& spec, const std::string& output_dir) {
  namespace fs = std::filesystem;
  spec.validate();
  const fs::path root(output_dir);
  fs::create_directories(root);
  const int P = spec.policy.heatmap.patches;
  const double tol = spec.policy.tolerance;

  DatasetManifest manifest;
  std::mt19937_64 rng(spec.seed);
  for (int e = 0; e < spec.environments; ++e) {
    const std::uint64_t env_seed = spec.seed + static_cast<std::uint64_t>(e);
    const int n = spec.object_counts[rng() % spec.object_counts.size()];
    const int m = spec.agent_counts[rng() % spec.agent_counts.size()];
    RandomizationRanges ranges;
    ranges.objects = n;
    ranges.agents = m;
    const Scenario sc = generate_scenario(task_for_seed(e % 10, 10, spec.task_mix), ranges, env_seed, P);
    const RgbImage Z_T = rasterize(sc.target, spec.raster, env_seed ^ 0x5a5a5a5aULL);

    // Configurations are successive states of the oracle rollout.
    EpisodeState state;
    state.scene = snap_agents(sc.start, P);
    for (int c = 0; c < spec.configurations; ++c) {
      if (c > 0) {
        if (placed_object_count(state.scene, sc.target, tol) == n) break;
        const auto plan = step(state, sc.target, spec.policy);
        if (!plan) break;
        state = execute(state, *plan);
      }
      const Scene& scene = state.scene;
      std::vector<std::pair<int, Heatmap>> maps;
      HeatmapConfig hc = spec.policy.heatmap;
      hc.tolerance = tol;
      for (const auto& a : scene.agents) maps.emplace_back(a.id, pick_heatmap(scene, sc.target, a.id, hc));
      const auto picks = assign_picks(maps, scene.objects, scene.arena_size);
      std::vector<int> picked;
      for (const auto& p : picks) picked.push_back(p.object_id);

      const RgbImage Z_t = rasterize(scene, spec.raster, env_seed * 1000003ULL + static_cast<std::uint64_t>(c));
      const GrayImage B_t = binary_occupancy(scene, spec.raster);
      for (const auto& p : picks) {
        Channels ch;
        ch.Z_t = Z_t;
        ch.Z_T = Z_T;
        ch.B_t = B_t;
        ch.M_r = signed_map_to_gray(encode_agent_map(scene, p.agent_id, spec.raster));
        ch.M_f = signed_map_to_gray(encode_object_map(scene, picked, p.object_id, spec.raster));
        ch.M_seg = segmentation_mask(scene, p.object_id, spec.raster);
        ch.labels = sample_labels(scene, sc.target, p.agent_id, p.object_id, picked, spec.policy.heatmap, tol);

        std::vector<GridTransform> variants{GridTransform::identity};
        if (spec.augment) variants.insert(variants.end(), augmentations().begin(), augmentations().end());
        for (GridTransform t : variants) {
          DatasetSample s;
          s.environment = e;
          s.configuration = c;
          s.agent_id = p.agent_id;
          s.object_id = p.object_id;
          s.augmentation = to_string(t);
          std::ostringstream id;
          id << "env" << e << "_cfg" << c << "_a" << p.agent_id << "_o" << p.object_id << '_' << s.augmentation;
          s.id = id.str();
          s.files = write_channels(t == GridTransform::identity ? ch : transformed(ch, t), root, s.id);
          manifest.samples.push_back(std::move(s));
        }
      }
    }
  }

  // Seeded shuffle; the first round(0.8 N) samples train.
  std::vector<std::size_t> order(manifest.samples.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(spec.seed ^ 0x9e3779b97f4a7c15ULL));
  const auto n_train =
      static_cast<std::size_t>(std::lround((1.0 - spec.eval_fraction) * static_cast<double>(order.size())));
  for (std::size_t i = 0; i < order.size(); ++i) manifest.samples[order[i]].split = i < n_train ? "train" : "eval";

  write_json(manifest.to_json(), root / "manifest.json");
  return manifest;
}

}  // namespace maner
