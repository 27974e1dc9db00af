#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "maner/baselines.hpp"
#include "maner/bench.hpp"
#include "maner/policy.hpp"
#include "maner/raster.hpp"
#include "maner/world.hpp"

namespace maner::cli {

namespace fs = std::filesystem;

std::string default_output_dir() {
  const char* env = std::getenv("MANER_OUTPUT_DIR");
  return env && *env ? std::string(env) : std::string(".");
}

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct CliConfig {
  std::string subcommand;
  std::string input;
  std::string output;
  std::uint64_t seed = 0;

  // gen
  std::string task = "random";
  int objects = 8;
  int agents = 2;
  int obstacles = -1;
  double arena = 0.0;
  std::string render;

  // plan / render
  std::string algo = "maner";
  std::string render_frames;
  std::string which = "start";

  // bench / export
  std::vector<int> object_counts{8, 12, 16};
  std::vector<int> agent_counts{2, 3};
  int seeds = 20;
  std::vector<std::string> algos{"maner", "greedy", "random"};
  std::vector<double> task_mix{0.4, 0.3, 0.3};
  int jobs = 1;
  int environments = 1;
  int configurations = 1;
  bool no_augment = false;
  double eval_fraction = 0.2;

  // model constants
  double w_f = 0.2;
  double w_q = 0.8;
  int k = 3;
  double alpha = 0.8;
  int image_size = 480;
  int patch_size = 20;
  double budget = 120.0;
  int horizon = 0;
  double tolerance = 0.1;
  int resample_attempts = 20;

  RasterConfig raster() const { return {image_size, patch_size}; }

  PolicyConfig policy() const {
    PolicyConfig p;
    p.horizon = horizon;
    p.tolerance = tolerance;
    p.time_budget = budget;
    p.fusion = {w_f, w_q};
    p.proposal.k = k;
    p.proposal.alpha = alpha;
    p.proposal.seed = seed;
    p.heatmap.patches = raster().patches();
    p.heatmap.tolerance = tolerance;
    p.mapf.patches = raster().patches();
    p.mapf.tolerance = tolerance;
    return p;
  }

  BaselineConfig baseline() const {
    BaselineConfig b;
    b.resample_attempts = resample_attempts;
    b.time_budget = budget;
    b.horizon = horizon;
    b.tolerance = tolerance;
    b.mapf.patches = raster().patches();
    b.mapf.tolerance = tolerance;
    return b;
  }

  void validate() const {
    try {
      raster().validate();
      policy().validate();
      baseline().validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (std::abs(w_f + w_q - 1.0) > 1e-9) throw UsageError("--w-f and --w-q must sum to 1");
    if (subcommand == "gen" && objects <= agents) throw UsageError("--objects must exceed --agents");
    if ((subcommand == "plan" || subcommand == "render") && input.empty()) throw UsageError("--input is required");
    if (subcommand == "plan" &&
        std::find(known_algorithms().begin(), known_algorithms().end(), algo) == known_algorithms().end())
      throw UsageError("unknown --algo " + algo);
    if (subcommand == "render" && which != "start" && which != "target")
      throw UsageError("--which must be start or target");
    if (jobs < 1) throw UsageError("--jobs must be positive");
    if (jobs > 1 && subcommand != "bench") throw UsageError("--jobs applies to bench only");
  }
};

void write_text(const std::string& path, const std::string& text) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

nlohmann::json metrics_json(const RunMetrics& m, const std::string& algo) {
  return {{"algorithm", algo},
          {"SR", m.success_rate},
          {"DT_m", m.distance_traveled},
          {"CT_s", m.completion_time},
          {"IT_s", m.inference_time},
          {"F_s", m.total_time},
          {"succeeded", m.succeeded},
          {"steps", m.steps},
          {"placed", m.placed},
          {"n_objects", m.n_objects}};
}

int cmd_gen(const CliConfig& c, std::ostream& out, std::ostream& err) {
  RandomizationRanges r;
  r.objects = c.objects;
  r.agents = c.agents;
  if (c.obstacles >= 0) r.obstacles = c.obstacles;
  if (c.arena > 0) r.arena_size = c.arena;
  TaskKind kind;
  try {
    kind = task_kind_from_string(c.task);
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const Scenario sc = generate_scenario(kind, r, c.seed, c.raster().patches());
  const std::string path = c.output.empty() ? (fs::path(default_output_dir()) / "scenario.json").string() : c.output;
  nlohmann::json j = sc;
  write_text(path, j.dump(2) + "\n");
  err << "wrote " << path << " (" << sc.start.objects.size() << " objects, " << sc.start.agents.size()
      << " agents)\n";
  if (!c.render.empty()) {
    const fs::path rp(c.render);
    if (rp.has_parent_path()) fs::create_directories(rp.parent_path());
    write_ppm(rasterize(sc.start, c.raster(), c.seed), c.render);
    err << "wrote " << c.render << "\n";
  }
  out << path << "\n";
  return kOk;
}

int cmd_plan(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const Scenario sc = load_scenario(c.input);
  SweepSpec spec;
  spec.policy = c.policy();
  spec.baseline = c.baseline();
  err << "planning " << c.input << " with " << c.algo << "\n";
  const EpisodeResult res = run_algorithm(c.algo, sc, spec);

  const fs::path dir(c.output.empty() ? default_output_dir() : c.output);
  write_text((dir / "trajectory.jsonl").string(), trajectory_log(res.log));
  const nlohmann::json m = metrics_json(res.metrics, c.algo);
  write_text((dir / "metrics.json").string(), m.dump(2) + "\n");
  err << "wrote " << (dir / "trajectory.jsonl").string() << " and metrics.json\n";

  if (!c.render_frames.empty()) {
    fs::create_directories(c.render_frames);
    std::vector<StepRecord> prefix;
    for (std::size_t i = 0; i < res.log.size(); ++i) {
      prefix.push_back(res.log[i]);
      const Scene s = replay(sc.start, prefix, c.raster().patches());
      std::ostringstream name;
      name << "step_" << std::setw(3) << std::setfill('0') << (i + 1) << ".ppm";
      write_ppm(rasterize(s, c.raster(), c.seed), (fs::path(c.render_frames) / name.str()).string());
    }
    err << "wrote " << res.log.size() << " frames to " << c.render_frames << "\n";
  }
  out << m.dump() << "\n";
  if (!res.metrics.succeeded) {
    err << "episode ended with " << res.metrics.placed << "/" << res.metrics.n_objects << " objects placed\n";
    return kPlannerFailure;
  }
  return kOk;
}

int cmd_bench(const CliConfig& c, std::ostream& out, std::ostream& err) {
  SweepSpec spec;
  spec.object_counts = c.object_counts;
  spec.agent_counts = c.agent_counts;
  spec.seeds = c.seeds;
  spec.first_seed = c.seed;
  spec.algorithms = c.algos;
  spec.task_mix = c.task_mix;
  spec.jobs = c.jobs;
  spec.policy = c.policy();
  spec.baseline = c.baseline();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  err << "sweep: " << spec.object_counts.size() * spec.agent_counts.size() * spec.algorithms.size() * spec.seeds
      << " episodes on " << spec.jobs << " job(s)\n";
  const SweepResult res = run_sweep(spec);
  const std::string csv = sweep_csv(res.rows);
  const fs::path dir(c.output.empty() ? default_output_dir() : c.output);
  write_text((dir / "sweep.csv").string(), csv);
  write_text((dir / "aggregates.json").string(), aggregates_json(res.cells).dump(2) + "\n");
  for (const auto& cell : res.cells)
    err << cell.algorithm << " n=" << cell.n_objects << " m=" << cell.n_agents << " SR=" << cell.SR
        << " DT=" << cell.DT << " CT=" << cell.CT << " IT=" << cell.IT << "\n";
  out << csv;
  return kOk;
}

int cmd_export(const CliConfig& c, std::ostream& out, std::ostream& err) {
  DatasetSpec spec;
  spec.environments = c.environments;
  spec.configurations = c.configurations;
  spec.object_counts = c.object_counts;
  spec.agent_counts = c.agent_counts;
  spec.task_mix = c.task_mix;
  spec.seed = c.seed;
  spec.augment = !c.no_augment;
  spec.eval_fraction = c.eval_fraction;
  spec.raster = c.raster();
  spec.policy = c.policy();
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string dir = c.output.empty() ? (fs::path(default_output_dir()) / "dataset").string() : c.output;
  const DatasetManifest m = export_dataset(spec, dir);
  err << "wrote " << m.samples.size() << " samples to " << dir << "\n";
  out << m.to_json()["counts"].dump() << "\n";
  return kOk;
}

int cmd_render(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const Scenario sc = load_scenario(c.input);
  const std::string path = c.output.empty() ? (fs::path(default_output_dir()) / "render.ppm").string() : c.output;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  write_ppm(rasterize(c.which == "start" ? sc.start : sc.target, c.raster(), c.seed), path);
  err << "wrote " << path << "\n";
  out << path << "\n";
  return kOk;
}

void add_model_flags(CLI::App* app, CliConfig& c) {
  app->add_option("--w-f", c.w_f, "Feasibility weight in the placement fusion")->capture_default_str();
  app->add_option("--w-q", c.w_q, "Quality weight in the placement fusion")->capture_default_str();
  app->add_option("--k", c.k, "Regions proposed per object (k-means clusters)")->capture_default_str();
  app->add_option("--alpha", c.alpha, "Placement heatmap threshold")->capture_default_str();
  app->add_option("--image-size", c.image_size, "Raster side in pixels")->capture_default_str();
  app->add_option("--patch-size", c.patch_size, "Patch side in pixels")->capture_default_str();
  app->add_option("--budget", c.budget, "Planning budget per episode, seconds")->capture_default_str();
  app->add_option("--horizon", c.horizon, "Step limit (0: 2n for maner, 4n for baselines)")->capture_default_str();
  app->add_option("--tolerance", c.tolerance, "Placement tolerance, meters")->capture_default_str();
  app->add_option("--resample-attempts", c.resample_attempts, "Baseline relocation spots per obstruction")
      ->capture_default_str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CliConfig c;
  CLI::App app{"Multi-agent object rearrangement planner"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a scenario");
  gen->add_option("--task", c.task, "shuffle, sort or random")->capture_default_str();
  gen->add_option("--objects", c.objects, "Number of objects")->capture_default_str();
  gen->add_option("--agents", c.agents, "Number of agents")->capture_default_str();
  gen->add_option("--obstacles", c.obstacles, "Number of obstacles (default: random)");
  gen->add_option("--arena", c.arena, "Arena side in meters (default: random)");
  gen->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  gen->add_option("-o,--output", c.output, "Scenario JSON path");
  gen->add_option("--render", c.render, "Also write a PPM preview of the start scene");
  gen->add_option("--image-size", c.image_size)->capture_default_str();
  gen->add_option("--patch-size", c.patch_size)->capture_default_str();

  auto* plan = app.add_subcommand("plan", "Run one episode");
  plan->add_option("-i,--input", c.input, "Scenario JSON")->required();
  plan->add_option("--algo", c.algo, "maner, greedy or random")->capture_default_str();
  plan->add_option("--seed", c.seed, "Seed for region proposals and rendering noise")->capture_default_str();
  plan->add_option("-o,--output", c.output, "Directory for trajectory.jsonl and metrics.json");
  plan->add_option("--render-frames", c.render_frames, "Directory for one PPM per step");
  add_model_flags(plan, c);

  auto* bench = app.add_subcommand("bench", "Benchmark sweep");
  bench->add_option("--objects", c.object_counts, "Object counts")->capture_default_str();
  bench->add_option("--agents", c.agent_counts, "Agent counts")->capture_default_str();
  bench->add_option("--seeds", c.seeds, "Seeds per cell")->capture_default_str();
  bench->add_option("--seed", c.seed, "First seed")->capture_default_str();
  bench->add_option("--algos", c.algos, "Algorithms")->capture_default_str();
  bench->add_option("--task-mix", c.task_mix, "Shuffle, sort and random shares")->expected(3)->capture_default_str();
  bench->add_option("--jobs", c.jobs, "Parallel episodes")->capture_default_str();
  bench->add_option("-o,--output", c.output, "Directory for sweep.csv and aggregates.json");
  add_model_flags(bench, c);

  auto* exp = app.add_subcommand("export", "Export a training dataset");
  exp->add_option("--environments", c.environments, "Generated environments")->capture_default_str();
  exp->add_option("--configurations", c.configurations, "Rollout states per environment")->capture_default_str();
  exp->add_option("--objects", c.object_counts, "Object counts to draw from")->capture_default_str();
  exp->add_option("--agents", c.agent_counts, "Agent counts to draw from")->capture_default_str();
  exp->add_option("--task-mix", c.task_mix, "Shuffle, sort and random shares")->expected(3)->capture_default_str();
  exp->add_option("--seed", c.seed, "Random seed")->capture_default_str();
  exp->add_flag("--no-augment", c.no_augment, "Skip flips and rotations");
  exp->add_option("--eval-fraction", c.eval_fraction, "Share of samples tagged eval")->capture_default_str();
  exp->add_option("-o,--output", c.output, "Dataset directory");
  add_model_flags(exp, c);

  auto* ren = app.add_subcommand("render", "Rasterize a scenario");
  ren->add_option("-i,--input", c.input, "Scenario JSON")->required();
  ren->add_option("--which", c.which, "start or target")->capture_default_str();
  ren->add_option("--seed", c.seed, "Color noise seed")->capture_default_str();
  ren->add_option("-o,--output", c.output, "PPM path");
  ren->add_option("--image-size", c.image_size)->capture_default_str();
  ren->add_option("--patch-size", c.patch_size)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return kUsageError;
  }

  for (auto* sub : {gen, plan, bench, exp, ren})
    if (sub->parsed()) c.subcommand = sub->get_name();

  try {
    c.validate();
    if (c.subcommand == "gen") return cmd_gen(c, out, err);
    if (c.subcommand == "plan") return cmd_plan(c, out, err);
    if (c.subcommand == "bench") return cmd_bench(c, out, err);
    if (c.subcommand == "export") return cmd_export(c, out, err);
    return cmd_render(c, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kPlannerFailure;
  }
}

}  // namespace maner::cli
