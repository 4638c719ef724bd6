// Copyright 2026 The crashgen Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end for the collision-scenario toolkit. Subcommands:
// generate, filter, cluster, score, train, eval, eval-realism, render.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "crashgen/distill.hpp"
#include "crashgen/filter.hpp"
#include "crashgen/realism.hpp"
#include "crashgen/svg.hpp"
#include "crashgen/synth.hpp"

namespace fs = std::filesystem;
using namespace crashgen;

namespace
{

// ---------------------------------------------------------------------------
// Flat sectioned key=value config file ('#' comments). CLI flags that were
// given explicitly override config values; config values override defaults.

struct ConfigFile
{
  std::map<std::string, std::map<std::string, std::string>> sections;

  static ConfigFile load(const fs::path & path)
  {
    ConfigFile cfg;
    std::string section;
    const std::string text = read_text_file(path);
    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
      const size_t eol = text.find('\n', pos);
      std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
      pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
      ++line_no;
      const size_t comment = line.find('#');
      if (comment != std::string::npos) line = line.substr(0, comment);
      const auto strip = [](std::string s) {
        const size_t b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const size_t e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
      };
      line = strip(line);
      if (line.empty()) continue;
      if (line.front() == '[' && line.back() == ']') {
        section = strip(line.substr(1, line.size() - 2));
        continue;
      }
      const size_t eq = line.find('=');
      if (eq == std::string::npos) {
        throw parse_error(path.string() + ":" + std::to_string(line_no) +
                          ": expected key = value");
      }
      cfg.sections[section][strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
    }
    return cfg;
  }

  template <typename T>
  void apply(const CLI::Option * cli_opt, const std::string & section, const std::string & key,
             T & value) const
  {
    if (cli_opt != nullptr && cli_opt->count() > 0) return;  // explicit flag wins
    const auto sit = sections.find(section);
    if (sit == sections.end()) return;
    const auto kit = sit->second.find(key);
    if (kit == sit->second.end()) return;
    if constexpr (std::is_same_v<T, std::string>) {
      value = kit->second;
    } else if constexpr (std::is_same_v<T, bool>) {
      value = kit->second == "true" || kit->second == "1" || kit->second == "yes";
    } else if constexpr (std::is_integral_v<T>) {
      value = static_cast<T>(std::stoll(kit->second));
    } else {
      value = static_cast<T>(std::stod(kit->second));
    }
  }
};

std::string zero_pad(int value, int width)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*d", width, value);
  return buf;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs
{
  std::string templates;
  std::string map;
  std::string out;
  int count = 10;
  uint64_t seed = 0;
  double test_fraction = 0.2;
  double turn_rate = 0.35;
  double accel_rate = 2.5;
  double jitter = 0.0;
  bool use_llm = false;
  std::string config;
};

int run_generate(const GenerateArgs & a)
{
  if (a.use_llm) {
    throw data_error(
      "the network LLM backend is interface-only in this build; omit --use-llm and "
      "generate from the template catalog");
  }
  const std::vector<PromptTemplate> catalog = load_catalog(a.templates);
  if (catalog.empty()) throw data_error("template catalog is empty");

  // --map may be one map file, or a directory of <name>.map.json resolved per
  // template via its preferred map hint.
  std::map<std::string, MapRegion> maps;
  std::string single_map;
  if (fs::is_directory(a.map)) {
    for (const auto & entry : fs::directory_iterator(a.map)) {
      const std::string name = entry.path().filename().string();
      const std::string suffix = ".map.json";
      if (name.size() > suffix.size() && name.substr(name.size() - suffix.size()) == suffix) {
        maps[name.substr(0, name.size() - suffix.size())] = load_map(entry.path());
      }
    }
    if (maps.empty()) throw data_error("no *.map.json files in " + a.map);
  } else {
    single_map = fs::path(a.map).filename().string();
    const std::string suffix = ".map.json";
    if (single_map.size() > suffix.size() &&
        single_map.substr(single_map.size() - suffix.size()) == suffix) {
      single_map = single_map.substr(0, single_map.size() - suffix.size());
    }
    maps[single_map] = load_map(a.map);
  }

  struct Expansion
  {
    const PromptTemplate * tpl;
    Bindings bindings;
    TemplateExpansion expanded;
  };
  std::vector<Expansion> expansions;
  for (const PromptTemplate & t : catalog) {
    for (const Bindings & b : enumerate_bindings(t)) {
      expansions.push_back({&t, b, expand_template(t, b)});
    }
  }

  fs::create_directories(a.out);
  DatasetManifest manifest;
  json log = json::array();
  Rng split_rng = Rng(a.seed).fork(0x73706C69);
  int produced = 0;
  for (int i = 0; i < a.count; ++i) {
    const Expansion & e = expansions[static_cast<size_t>(i) % expansions.size()];
    const std::string id = zero_pad(i, 5) + "_" + e.tpl->name;
    const std::string split = split_rng.uniform() < a.test_fraction ? "test" : "train";

    std::string map_name = e.tpl->preferred_map;
    if (!single_map.empty()) map_name = single_map;
    const auto mit = maps.find(map_name);
    if (mit == maps.end()) {
      log.push_back({{"id", id}, {"template", e.tpl->name}, {"error", "no map named '" + map_name + "'"}});
      std::cerr << "warning: " << id << ": no map named '" << map_name << "'\n";
      continue;
    }

    SynthesisConfig synth_cfg;
    synth_cfg.turn_rate = a.turn_rate;
    synth_cfg.accel_rate = a.accel_rate;
    synth_cfg.position_jitter = a.jitter;
    synth_cfg.rng_seed = Rng(a.seed).fork(static_cast<uint64_t>(i)).next();
    try {
      const Scenario scenario = synthesize(e.expanded.scene, mit->second, synth_cfg);
      save_scenario(scenario, scenario_path(a.out, id));
      manifest.scenarios.push_back({id, split});
      json jb = json::object();
      for (const auto & [k, v] : e.bindings) jb[k] = v;
      log.push_back({{"id", id},
                     {"template", e.tpl->name},
                     {"bindings", jb},
                     {"prompt", e.expanded.prompt},
                     {"map", map_name}});
      ++produced;
    } catch (const std::exception & ex) {
      log.push_back({{"id", id}, {"template", e.tpl->name}, {"error", ex.what()}});
      std::cerr << "warning: " << id << ": " << ex.what() << "\n";
    }
  }
  save_manifest(manifest, a.out);
  save_json_file(fs::path(a.out) / "generation_log.json", log);
  std::cout << "generated " << produced << "/" << a.count << " scenarios into " << a.out << "\n";
  if (produced == 0) throw data_error("every synthesis attempt failed");
  return 0;
}

// ---------------------------------------------------------------------------
// filter

struct FilterArgs
{
  std::string in;
  std::string out;
  std::string config;
  std::string vocab;
  double d_thres = 3.0;
  double theta_thres_deg = 10.0;
  bool check_ego = false;
};

int run_filter(const FilterArgs & a)
{
  if (a.vocab.empty()) {
    throw data_error("filter needs a trajectory vocabulary (--vocab or [filtering] vocab=...)");
  }
  const TrajectoryVocabulary vocab = load_vocabulary(a.vocab);
  FilterConfig cfg;
  cfg.d_thres = a.d_thres;
  cfg.theta_thres = a.theta_thres_deg * kPi / 180.0;
  cfg.check_ego_compliance = a.check_ego;
  cfg.vocab = &vocab;

  const auto dataset = load_dataset(a.in);
  fs::create_directories(a.out);
  DatasetManifest in_manifest = load_manifest(a.in);
  std::map<std::string, std::string> splits;
  for (const ManifestEntry & e : in_manifest.scenarios) splits[e.id] = e.split;

  DatasetManifest out_manifest;
  json verdicts = json::array();
  std::map<std::string, int> stage_counts;
  int after_step1 = 0;
  int after_step2 = 0;
  for (const auto & [id, scenario] : dataset) {
    const FilterVerdict v = filter_scenario(scenario, cfg);
    ++stage_counts[to_string(v.stage)];
    const bool step1 = v.stage == FilterStage::NoFeasibleAvoidance || v.passed;
    if (step1) ++after_step1;
    if (v.passed) {
      ++after_step2;
      save_scenario(scenario, scenario_path(a.out, id));
      out_manifest.scenarios.push_back({id, splits[id]});
    }
    verdicts.push_back({{"id", id},
                        {"passed", v.passed},
                        {"stage", to_string(v.stage)},
                        {"agent_id", v.agent_id},
                        {"step", v.step},
                        {"details", v.details}});
  }
  save_manifest(out_manifest, a.out);
  json stages = json::object();
  for (const auto & [name, count] : stage_counts) stages[name] = count;
  save_json_file(fs::path(a.out) / "filter_report.json",
                 json{{"total", dataset.size()},
                      {"after_step1", after_step1},
                      {"after_step2", after_step2},
                      {"stages", stages},
                      {"verdicts", verdicts}});
  std::cout << "filter: " << dataset.size() << " in, " << after_step1 << " after step 1, "
            << after_step2 << " after step 2\n";
  return 0;
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterArgs
{
  std::string in;
  std::string out;
  std::string config;
  int k = 256;
  int n = 10000;
  int max_iters = 100;
  uint64_t seed = 0;
};

int run_cluster(const ClusterArgs & a)
{
  std::vector<Scenario> corpus;
  for (auto & [id, scenario] : load_dataset(a.in)) corpus.push_back(std::move(scenario));
  const std::vector<EgoTrajectory> samples = sample_ego_trajectories(corpus, a.n, a.seed);
  const TrajectoryVocabulary vocab = kmeans_cluster(samples, a.k, a.seed, a.max_iters);
  save_vocabulary(vocab, a.out);
  std::cout << "clustered " << samples.size() << " samples into k=" << vocab.k << " ("
            << vocab.build_meta.iterations << " iterations)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// score

struct ScoreArgs
{
  std::string in;
  std::string vocab;
  std::string out;
  std::string config;
};

int run_score(const ScoreArgs & a)
{
  const TrajectoryVocabulary vocab = load_vocabulary(a.vocab);
  const auto dataset = load_dataset(a.in);
  if (dataset.empty()) throw data_error("score: dataset is empty");
  const ScoreTable table = build_score_table(dataset, vocab, SimConfig{});
  save_score_table(table, a.out);
  std::cout << "scored " << dataset.size() << " scenarios x " << vocab.k << " entries\n";
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs
{
  std::string regular;
  std::string collision;
  std::vector<std::string> tables;  // regular table, collision table
  std::string ratio = "10:1";
  std::string out;
  std::string log;
  std::string vocab;
  std::string config;
  std::string split = "train";
  int steps = 500;
  int batch = 32;
  double lr = 2e-4;
  double w_regular = 1.0;
  double w_collision = 1.0;
  uint64_t seed = 0;
};

int run_train(const TrainArgs & a)
{
  if (a.tables.size() != 2) {
    throw data_error("train expects --tables <regular-table> <collision-table>");
  }
  const TrajectoryVocabulary vocab = load_vocabulary(a.vocab);
  const TrainingSet regular =
    make_training_set(load_dataset(a.regular, a.split), load_score_table(a.tables[0]));
  const TrainingSet collision =
    make_training_set(load_dataset(a.collision, a.split), load_score_table(a.tables[1]));

  const MixConfig mix = mix_from_ratio(a.ratio, a.w_regular, a.w_collision);
  TrainConfig cfg;
  cfg.steps = a.steps;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  const TrainResult result = train(regular, collision, mix, cfg);

  save_checkpoint({result.model, vocab}, a.out);
  std::string csv = "step,source,loss\n";
  for (const TrainStepLog & s : result.log) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%s,%.17g\n", s.step, s.source == 0 ? "regular" : "collision",
                  s.loss);
    csv += buf;
  }
  const std::string log_path = a.log.empty() ? a.out + ".log.csv" : a.log;
  write_text_file_atomic(log_path, csv);
  std::cout << "trained " << a.steps << " steps (ratio " << a.ratio << "); first loss "
            << result.log.front().loss << ", last loss " << result.log.back().loss << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs
{
  std::string model;
  std::string testset;
  std::string out;
  std::string split = "test";
  std::string config;
};

int run_eval(const EvalArgs & a)
{
  const ModelCheckpoint ckpt = load_checkpoint(a.model);
  const auto dataset = load_dataset(a.testset, a.split);
  if (dataset.empty()) {
    throw data_error("eval: no scenarios in split '" + a.split + "' of " + a.testset);
  }
  const SimConfig sim;
  ScoreVector mean;
  mean = {0, 0, 0, 0, 0, 0};
  double mean_total = 0.0;
  for (const auto & [id, scenario] : dataset) {
    const PlanResult p = plan(scenario, ckpt.model, ckpt.vocab);
    const AgentPose ego0 = scenario.ego_track().poses.front();
    const EgoTrajectory driven = make_feasible(p.trajectory, ego0, sim);
    const double reference = reference_progress_for(scenario, ckpt.vocab, sim);
    const ScoreVector v = evaluate(scenario, driven, sim, reference);
    mean.nc += v.nc;
    mean.dac += v.dac;
    mean.ddc += v.ddc;
    mean.ttc += v.ttc;
    mean.comfort += v.comfort;
    mean.ep += v.ep;
    mean_total += pdm_score(v);
  }
  const double n = static_cast<double>(dataset.size());
  mean.nc /= n;
  mean.dac /= n;
  mean.ddc /= n;
  mean.ttc /= n;
  mean.comfort /= n;
  mean.ep /= n;
  mean_total /= n;

  std::printf("%-8s%-8s%-8s%-8s%-8s%-8s%-8s\n", "NC", "DAC", "DDC", "EP", "TTC", "COMF", "Total");
  std::printf("%-8.3f%-8.3f%-8.3f%-8.3f%-8.3f%-8.3f%-8.3f\n", mean.nc, mean.dac, mean.ddc,
              mean.ep, mean.ttc, mean.comfort, mean_total);
  if (!a.out.empty()) {
    save_json_file(a.out, json{{"count", dataset.size()},
                               {"nc", mean.nc},
                               {"dac", mean.dac},
                               {"ddc", mean.ddc},
                               {"ep", mean.ep},
                               {"ttc", mean.ttc},
                               {"comfort", mean.comfort},
                               {"total", mean_total}});
  }
  return 0;
}

// ---------------------------------------------------------------------------
// eval-realism

struct RealismArgs
{
  std::string real;
  std::string generated;
  std::string out;
  std::string csv;
  std::string config;
  MmdSigmas sigmas;
};

int run_eval_realism(const RealismArgs & a)
{
  std::vector<Scenario> real;
  std::vector<Scenario> generated;
  for (auto & [id, s] : load_dataset(a.real)) real.push_back(std::move(s));
  for (auto & [id, s] : load_dataset(a.generated)) generated.push_back(std::move(s));
  const RealismReport report = realism_report(real, generated, a.sigmas);
  std::cout << realism_report_to_csv(report);
  if (!a.out.empty()) save_json_file(a.out, realism_report_to_json(report));
  if (!a.csv.empty()) write_text_file_atomic(a.csv, realism_report_to_csv(report));
  return 0;
}

// ---------------------------------------------------------------------------
// render

struct RenderArgs
{
  std::string scenario;
  std::string out;
  std::string model;
  std::string config;
};

int run_render(const RenderArgs & a)
{
  const Scenario scenario = load_scenario(a.scenario);
  std::optional<EgoTrajectory> planned;
  if (!a.model.empty()) {
    const ModelCheckpoint ckpt = load_checkpoint(a.model);
    const PlanResult p = plan(scenario, ckpt.model, ckpt.vocab);
    planned = make_feasible(p.trajectory, scenario.ego_track().poses.front(), SimConfig{});
  }
  write_text_file_atomic(a.out, render_scenario_svg(scenario, planned));
  std::cout << "rendered " << a.scenario << " -> " << a.out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"collision scenario generation, filtering, scoring and distillation toolkit"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App * cmd_gen = app.add_subcommand("generate", "synthesize scenarios from the template catalog");
  auto * gen_templates = cmd_gen->add_option("--templates", gen.templates, "template catalog JSON");
  auto * gen_map = cmd_gen->add_option("--map", gen.map, "map file or directory of *.map.json");
  cmd_gen->add_option("--out", gen.out, "output dataset directory")->required();
  auto * gen_count = cmd_gen->add_option("--count", gen.count, "number of scenarios");
  auto * gen_seed = cmd_gen->add_option("--seed", gen.seed, "generation seed");
  auto * gen_tf = cmd_gen->add_option("--test-fraction", gen.test_fraction, "test split fraction");
  auto * gen_turn = cmd_gen->add_option("--turn-rate", gen.turn_rate, "rollout turn rate, rad/s");
  auto * gen_accel = cmd_gen->add_option("--accel-rate", gen.accel_rate, "rollout accel rate, m/s^2");
  auto * gen_jitter = cmd_gen->add_option("--jitter", gen.jitter, "placement target jitter, m");
  cmd_gen->add_flag("--use-llm", gen.use_llm, "use the network LLM interpreter (not wired)");
  cmd_gen->add_option("--config", gen.config, "toolkit config file");

  FilterArgs flt;
  CLI::App * cmd_flt = app.add_subcommand("filter", "two-step collision scenario filter");
  cmd_flt->add_option("--in", flt.in, "input dataset directory")->required();
  cmd_flt->add_option("--out", flt.out, "output dataset directory")->required();
  cmd_flt->add_option("--config", flt.config, "toolkit config file");
  auto * flt_vocab = cmd_flt->add_option("--vocab", flt.vocab, "trajectory vocabulary JSON");
  auto * flt_d = cmd_flt->add_option("--d-thres", flt.d_thres, "lane adherence threshold, m");
  auto * flt_t = cmd_flt->add_option("--theta-thres-deg", flt.theta_thres_deg,
                                     "alignment threshold, degrees");
  auto * flt_e = cmd_flt->add_flag("--check-ego", flt.check_ego, "apply lane checks to the ego track");

  ClusterArgs clu;
  CLI::App * cmd_clu = app.add_subcommand("cluster", "build the trajectory vocabulary by k-means");
  cmd_clu->add_option("--in", clu.in, "input dataset directory")->required();
  auto * clu_k = cmd_clu->add_option("--k", clu.k, "number of clusters");
  cmd_clu->add_option("--out", clu.out, "output vocabulary JSON")->required();
  auto * clu_n = cmd_clu->add_option("--n", clu.n, "number of sampled trajectories");
  auto * clu_seed = cmd_clu->add_option("--seed", clu.seed, "sampling/seeding seed");
  auto * clu_mi = cmd_clu->add_option("--max-iters", clu.max_iters, "Lloyd iteration cap");
  cmd_clu->add_option("--config", clu.config, "toolkit config file");

  ScoreArgs sco;
  CLI::App * cmd_sco = app.add_subcommand("score", "build ground-truth score tables");
  cmd_sco->add_option("--in", sco.in, "input dataset directory")->required();
  cmd_sco->add_option("--vocab", sco.vocab, "trajectory vocabulary JSON")->required();
  cmd_sco->add_option("--out", sco.out, "output score table JSON")->required();
  cmd_sco->add_option("--config", sco.config, "toolkit config file");

  TrainArgs trn;
  CLI::App * cmd_trn = app.add_subcommand("train", "distill simulator scores into a score head");
  cmd_trn->add_option("--regular", trn.regular, "regular dataset directory")->required();
  cmd_trn->add_option("--collision", trn.collision, "collision dataset directory")->required();
  cmd_trn->add_option("--tables", trn.tables, "score tables: regular, collision")
    ->expected(2)
    ->required();
  auto * trn_ratio = cmd_trn->add_option("--ratio", trn.ratio, "regular:collision batch ratio");
  cmd_trn->add_option("--out", trn.out, "output model checkpoint")->required();
  cmd_trn->add_option("--log", trn.log, "training log CSV (default <out>.log.csv)");
  cmd_trn->add_option("--vocab", trn.vocab, "trajectory vocabulary JSON")->required();
  auto * trn_steps = cmd_trn->add_option("--steps", trn.steps, "optimizer steps");
  auto * trn_batch = cmd_trn->add_option("--batch", trn.batch, "batch size");
  auto * trn_lr = cmd_trn->add_option("--lr", trn.lr, "learning rate");
  auto * trn_wr = cmd_trn->add_option("--w-regular", trn.w_regular, "regular loss weight");
  auto * trn_wc = cmd_trn->add_option("--w-collision", trn.w_collision, "collision loss weight");
  auto * trn_seed = cmd_trn->add_option("--seed", trn.seed, "training seed");
  cmd_trn->add_option("--split", trn.split, "manifest split to train on (default train)");
  cmd_trn->add_option("--config", trn.config, "toolkit config file");

  EvalArgs evl;
  CLI::App * cmd_evl = app.add_subcommand("eval", "closed-loop evaluation of a trained score head");
  cmd_evl->add_option("--model", evl.model, "model checkpoint")->required();
  cmd_evl->add_option("--testset", evl.testset, "dataset directory")->required();
  cmd_evl->add_option("--out", evl.out, "write metric means JSON here");
  cmd_evl->add_option("--split", evl.split, "manifest split to evaluate (default test)");
  cmd_evl->add_option("--config", evl.config, "toolkit config file");

  RealismArgs rea;
  CLI::App * cmd_rea = app.add_subcommand("eval-realism", "distribution-distance realism report");
  cmd_rea->add_option("--real", rea.real, "reference dataset directory")->required();
  cmd_rea->add_option("--generated", rea.generated, "generated dataset directory")->required();
  cmd_rea->add_option("--out", rea.out, "report JSON path");
  cmd_rea->add_option("--csv", rea.csv, "report CSV path");
  cmd_rea->add_option("--sigma-position", rea.sigmas.position, "position kernel bandwidth, m");
  cmd_rea->add_option("--sigma-heading", rea.sigmas.heading, "heading kernel bandwidth");
  cmd_rea->add_option("--sigma-speed", rea.sigmas.speed, "speed kernel bandwidth, m/s");
  cmd_rea->add_option("--sigma-size", rea.sigmas.size, "size kernel bandwidth, m");
  cmd_rea->add_option("--config", rea.config, "toolkit config file");

  RenderArgs ren;
  CLI::App * cmd_ren = app.add_subcommand("render", "render a scenario to SVG");
  cmd_ren->add_option("--scenario", ren.scenario, "scenario JSON file")->required();
  cmd_ren->add_option("--out", ren.out, "output SVG path")->required();
  cmd_ren->add_option("--model", ren.model, "overlay the checkpoint's planned trajectory");
  cmd_ren->add_option("--config", ren.config, "toolkit config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cmd_gen->parsed()) {
      if (!gen.config.empty()) {
        const ConfigFile cfg = ConfigFile::load(gen.config);
        cfg.apply(gen_templates, "paths", "templates", gen.templates);
        cfg.apply(gen_map, "paths", "map", gen.map);
        cfg.apply(gen_count, "synthesis", "count", gen.count);
        cfg.apply(gen_seed, "synthesis", "seed", gen.seed);
        cfg.apply(gen_tf, "synthesis", "test_fraction", gen.test_fraction);
        cfg.apply(gen_turn, "synthesis", "turn_rate", gen.turn_rate);
        cfg.apply(gen_accel, "synthesis", "accel_rate", gen.accel_rate);
        cfg.apply(gen_jitter, "synthesis", "position_jitter", gen.jitter);
      }
      if (gen.templates.empty() || gen.map.empty()) {
        throw data_error("generate needs --templates and --map (flags or config [paths])");
      }
      return run_generate(gen);
    }
    if (cmd_flt->parsed()) {
      if (!flt.config.empty()) {
        const ConfigFile cfg = ConfigFile::load(flt.config);
        cfg.apply(flt_vocab, "filtering", "vocab", flt.vocab);
        cfg.apply(flt_d, "filtering", "d_thres", flt.d_thres);
        cfg.apply(flt_t, "filtering", "theta_thres_deg", flt.theta_thres_deg);
        cfg.apply(flt_e, "filtering", "check_ego_compliance", flt.check_ego);
      }
      return run_filter(flt);
    }
    if (cmd_clu->parsed()) {
      if (!clu.config.empty()) {
        const ConfigFile cfg = ConfigFile::load(clu.config);
        cfg.apply(clu_k, "vocabulary", "k", clu.k);
        cfg.apply(clu_n, "vocabulary", "n", clu.n);
        cfg.apply(clu_seed, "vocabulary", "seed", clu.seed);
        cfg.apply(clu_mi, "vocabulary", "max_iters", clu.max_iters);
      }
      return run_cluster(clu);
    }
    if (cmd_sco->parsed()) return run_score(sco);
    if (cmd_trn->parsed()) {
      if (!trn.config.empty()) {
        const ConfigFile cfg = ConfigFile::load(trn.config);
        cfg.apply(trn_ratio, "training", "ratio", trn.ratio);
        cfg.apply(trn_steps, "training", "steps", trn.steps);
        cfg.apply(trn_batch, "training", "batch", trn.batch);
        cfg.apply(trn_lr, "training", "lr", trn.lr);
        cfg.apply(trn_wr, "training", "w_regular", trn.w_regular);
        cfg.apply(trn_wc, "training", "w_collision", trn.w_collision);
        cfg.apply(trn_seed, "training", "seed", trn.seed);
      }
      return run_train(trn);
    }
    if (cmd_evl->parsed()) return run_eval(evl);
    if (cmd_rea->parsed()) return run_eval_realism(rea);
    if (cmd_ren->parsed()) return run_render(ren);
  } catch (const parse_error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const validation_error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const data_error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception & e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 4;
}
