/*
 * Copyright 2026 The navpred Authors. All rights reserved.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "navpred/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "navpred/dataset.hpp"
#include "navpred/distill.hpp"
#include "navpred/error.hpp"
#include "navpred/eval.hpp"
#include "navpred/geo.hpp"
#include "navpred/model.hpp"
#include "navpred/nav_graph.hpp"
#include "navpred/osm.hpp"
#include "navpred/random.hpp"
#include "navpred/road_graph.hpp"
#include "navpred/scenario.hpp"

namespace navpred::cli
{
namespace
{

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Globals
{
  std::uint64_t seed = 1;
  int threads = 1;
};

struct Manifest
{
  std::string command;
  std::vector<std::string> argv;
  json config = json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
};

void write_manifest(const fs::path& path, const Manifest& m, const Globals& g, double seconds)
{
  json j;
  j["tool"] = "navpred";
  j["version"] = tool_version;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["seed"] = g.seed;
  j["threads"] = g.threads;
  j["config"] = m.config;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["duration_seconds"] = seconds;
  write_atomically(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

std::string default_data_dir()
{
  const char* env = std::getenv(data_dir_env);
  return env != nullptr ? env : "";
}

std::string require_data_dir(const std::string& value, const char* flag)
{
  if (!value.empty())
  {
    return value;
  }
  throw Error(ErrorCode::usage, fmt::format("{} is required (or set {})", flag, data_dir_env));
}

std::vector<geo::CityFrame> extra_frames(const std::string& path)
{
  return path.empty() ? std::vector<geo::CityFrame>{} : geo::load_frames(path);
}

geo::CityFrame frame_by_name(const std::string& name, const std::vector<geo::CityFrame>& extra)
{
  try
  {
    return geo::find_frame(name, extra);
  }
  catch (const Error& e)
  {
    if (e.code() == ErrorCode::not_found)
    {
      throw Error(ErrorCode::usage, e.message());
    }
    throw;
  }
}

json frame_json(const geo::CityFrame& f)
{
  return {{"name", f.name}, {"zone", f.zone}, {"origin_easting", f.origin_easting},
          {"origin_northing", f.origin_northing}};
}

// ---------------------------------------------------------------------------

struct IngestOptions
{
  std::string osm;
  std::string frame;
  std::string frames_file;
  std::vector<std::string> road_types;
  std::string out;
};

void cmd_ingest(const IngestOptions& o, Manifest& m, std::ostream& out, std::ostream& err)
{
  const auto frame = frame_by_name(o.frame, extra_frames(o.frames_file));
  const osm::RoadTypeWhitelist whitelist =
    o.road_types.empty() ? osm::RoadTypeWhitelist{}
                         : osm::RoadTypeWhitelist{std::set<std::string, std::less<>>(o.road_types.begin(),
                                                                                     o.road_types.end())};
  const auto doc = osm::parse_osm_file(o.osm);
  const auto built = osm::build_nav_graph(doc, whitelist);
  for (const auto& w : built.warnings)
  {
    err << "warning: " << w << '\n';
  }
  try
  {
    const LocalNavGraph local = localize(built.graph, frame);
    (void)local;
  }
  catch (const Error& e)
  {
    throw Error(e.code(), fmt::format("{}: {}", o.osm, e.message()));
  }
  write_atomically(o.out, [&](std::ostream& s) { write_graph(s, built.graph, frame); });

  m.config = {{"osm", o.osm},
              {"frame", frame_json(frame)},
              {"road_types", std::vector<std::string>(whitelist.types().begin(), whitelist.types().end())},
              {"out", o.out}};
  m.inputs = {o.osm};
  m.outputs = {o.out};
  out << fmt::format("nodes {} edges {} ways retained {} skipped {}\n", built.graph.nodes().size(),
                     built.graph.edges().size(), built.retained_ways, built.skipped_ways);
}

// ---------------------------------------------------------------------------

struct GenOptions
{
  std::string out;
  std::size_t n = 1000;
  double val_fraction = 0.2;
  std::string frame = "pittsburgh";
  std::string frames_file;
  scenario::WorldSpec world;
  scenario::ScenarioConfig scenes;
};

void cmd_gen(GenOptions o, const Globals& g, Manifest& m, std::ostream& out)
{
  const fs::path dir = require_data_dir(o.out, "--out");
  if (!(o.val_fraction >= 0.0 && o.val_fraction <= 1.0))
  {
    throw Error(ErrorCode::usage, fmt::format("--val-fraction must lie in [0, 1], got {}", o.val_fraction));
  }
  const auto frame = frame_by_name(o.frame, extra_frames(o.frames_file));
  o.world.seed = Rng::derive(g.seed, 0);
  try
  {
    o.world.validate();
  }
  catch (const Error& e)
  {
    throw Error(ErrorCode::usage, e.message());
  }
  const auto world = scenario::generate_world(o.world);
  std::vector<scenario::Scene> scenes;
  if (o.n > 0 && world.hd_lanes.empty())
  {
    throw Error(ErrorCode::usage, "the world has no lanes to place agents on");
  }
  if (o.n > 0)
  {
    scenes = scenario::generate_scenes(world, o.n, Rng::derive(g.seed, 1), o.scenes);
  }
  std::vector<scenario::Scene> train;
  std::vector<scenario::Scene> val;
  split_scenes(scenes, o.val_fraction, train, val);

  fs::create_directories(dir);
  const auto nav = scenario::nav_graph(world, frame);
  write_atomically(dir / dataset_files::world, [&](std::ostream& s) { scenario::write_world(s, world); });
  write_atomically(dir / dataset_files::nav, [&](std::ostream& s) { write_graph(s, nav, frame); });
  write_atomically(dir / dataset_files::train, [&](std::ostream& s) { scenario::write_scenes(s, train); });
  write_atomically(dir / dataset_files::val, [&](std::ostream& s) { scenario::write_scenes(s, val); });

  const auto& w = o.world;
  m.config = {{"out", dir.string()},
              {"n", o.n},
              {"val_fraction", o.val_fraction},
              {"frame", frame_json(frame)},
              {"world",
               {{"seed", w.seed},
                {"roads", w.num_roads},
                {"min_lanes", w.min_lanes},
                {"max_lanes", w.max_lanes},
                {"lane_width", w.lane_width},
                {"min_curvature", w.min_curvature},
                {"max_curvature", w.max_curvature},
                {"intersections", w.intersection_count},
                {"extent", w.extent},
                {"vertex_spacing", w.vertex_spacing}}},
              {"scenes",
               {{"seed", Rng::derive(g.seed, 1)},
                {"min_speed", o.scenes.min_speed},
                {"max_speed", o.scenes.max_speed},
                {"noise_sigma", o.scenes.noise_sigma},
                {"lane_change_probability", o.scenes.lane_change_probability},
                {"max_background_agents", o.scenes.max_background_agents}}}};
  for (const char* f : {dataset_files::world, dataset_files::nav, dataset_files::train, dataset_files::val})
  {
    m.outputs.push_back((dir / f).string());
  }
  out << fmt::format("lanes {} roads {} scenes train {} val {}\n", world.hd_lanes.size(), world.nav_roads.size(),
                     train.size(), val.size());
}

// ---------------------------------------------------------------------------

struct TrainOptions
{
  std::string data = default_data_dir();
  std::string map = "nav";
  model::ModelConfig model;
  distill::TrainConfig train;
  std::string teacher;
  std::string variant = "shared";
  double alpha = 1.0;
  double beta = 1.0;
  bool cache_teacher = false;
  std::string out;
  bool d_given = false;
  bool distill_flags_given = false;
};

json model_json(const model::ModelConfig& c)
{
  return {{"d", c.d},
          {"k", c.k},
          {"hidden", c.hidden},
          {"map_radius", c.map_radius},
          {"map_step", c.map_step},
          {"map_source", model::to_string(c.source)}};
}

void cmd_train(TrainOptions o, const Globals& g, Manifest& m, std::ostream& out, std::ostream& err)
{
  o.model.source = model::parse_map_source(o.map);
  const bool distilling = !o.teacher.empty();
  if (distilling && o.model.source != model::MapSource::nav)
  {
    throw Error(ErrorCode::usage, fmt::format("--distill trains a nav student; it cannot be combined with --map {}",
                                              o.map));
  }
  if (!distilling && o.distill_flags_given)
  {
    throw Error(ErrorCode::usage, "--variant, --alpha, --beta and --cache-teacher need --distill");
  }
  const fs::path dir = require_data_dir(o.data, "--data");
  o.train.seed = g.seed;
  o.train.threads = g.threads;

  std::optional<model::ModelParams> teacher;
  distill::DistillConfig dc;
  if (distilling)
  {
    teacher = model::load_checkpoint(o.teacher);
    dc.alpha = o.alpha;
    dc.beta = o.beta;
    dc.variant = distill::parse_variant(o.variant);
    dc.teacher = o.teacher;
    dc.cache_teacher = o.cache_teacher;
    dc.validate();
    if (teacher->config().source != model::MapSource::hd)
    {
      throw Error(ErrorCode::config, fmt::format("teacher '{}' was trained with map source {}, expected hd", o.teacher,
                                                 model::to_string(teacher->config().source)));
    }
    if (!o.d_given)
    {
      o.model.d = distill::student_width(dc.variant, teacher->config().d);
    }
  }

  const Dataset data = load_dataset(dir);
  if (data.train.empty())
  {
    throw Error(ErrorCode::empty_split, fmt::format("'{}' has no training scenes", dir.string()));
  }
  const fs::path ckpt = o.out;
  std::vector<distill::EpochLog> log;
  auto progress = [&](const distill::EpochLog& e) {
    log.push_back(e);
    err << fmt::format("epoch {:>3} loss {:.4f} model {:.4f} distill {:.4f}\n", e.epoch + 1, e.loss, e.model_loss,
                       e.distill_loss);
  };
  distill::TrainResult result;
  if (distilling)
  {
    result = distill::train_student(data.train, data.hd, data.nav, *teacher, o.model, dc, o.train, progress);
  }
  else
  {
    const auto views = distill::map_views(data.train, data.graph(o.model.source), o.model);
    result = distill::train(data.train, views, o.model, o.train, nullptr, progress);
  }

  const fs::path loss_csv = ckpt.string() + ".loss.csv";
  write_atomically(ckpt, [&](std::ostream& s) { model::write_checkpoint(s, result.params); });
  write_atomically(loss_csv, [&](std::ostream& s) {
    s << "epoch,loss,model_loss,distill_loss\n";
    for (const auto& e : log)
    {
      s << fmt::format("{},{},{},{}\n", e.epoch + 1, e.loss, e.model_loss, e.distill_loss);
    }
  });

  m.config = {{"data", dir.string()},
              {"model", model_json(result.params.config())},
              {"training",
               {{"epochs", o.train.epochs},
                {"batch_size", o.train.batch_size},
                {"learning_rate", o.train.learning_rate},
                {"momentum", o.train.momentum},
                {"clip_norm", o.train.clip_norm}}},
              {"out", ckpt.string()}};
  m.inputs = {(dir / dataset_files::world).string(), (dir / dataset_files::nav).string(),
              (dir / dataset_files::train).string()};
  if (distilling)
  {
    m.config["distill"] = {{"teacher", o.teacher},
                           {"teacher_checksum", fmt::format("{:016x}", model::checksum(*teacher))},
                           {"teacher_d", teacher->config().d},
                           {"variant", distill::to_string(dc.variant)},
                           {"alpha", dc.alpha},
                           {"beta", dc.beta},
                           {"cache_teacher", dc.cache_teacher}};
    m.inputs.push_back(o.teacher);
  }
  m.outputs = {ckpt.string(), loss_csv.string()};
  out << fmt::format("checkpoint {} checksum {:016x}\n", ckpt.string(), model::checksum(result.params));
}

// ---------------------------------------------------------------------------

struct EvalOptions
{
  std::string data = default_data_dir();
  std::string ckpt;
  std::string split = "val";
  std::string map;
  std::string name;
  std::string out;
  double bin_width = 1.0;
  std::optional<double> bandwidth;
};

void cmd_eval(const EvalOptions& o, Manifest& m, std::ostream& out)
{
  const fs::path dir = require_data_dir(o.data, "--data");
  const auto params = model::load_checkpoint(o.ckpt);
  if (!o.map.empty() && model::parse_map_source(o.map) != params.config().source)
  {
    throw Error(ErrorCode::config, fmt::format("checkpoint '{}' uses map source {}, not {}", o.ckpt,
                                               model::to_string(params.config().source), o.map));
  }
  const Dataset data = load_dataset(dir);
  const auto& scenes = o.split == "train" ? data.train : data.val;
  if (scenes.empty())
  {
    throw Error(ErrorCode::empty_split, fmt::format("the {} split of '{}' is empty", o.split, dir.string()));
  }
  const auto views = distill::map_views(scenes, data.graph(params.config().source), params.config());
  const auto result = eval::evaluate(params, scenes, views);
  std::vector<double> fde6;
  for (const auto& s : result.per_scene)
  {
    fde6.push_back(s.min_fde_6);
  }
  const auto hist = eval::fde_histogram(fde6, o.bin_width, o.bandwidth);
  const std::string name = o.name.empty() ? std::string(model::to_string(params.config().source)) : o.name;

  std::ostringstream table;
  eval::write_table(table, {{name, result.report}});
  out << table.str();

  m.config = {{"data", dir.string()},
              {"checkpoint", o.ckpt},
              {"checkpoint_checksum", fmt::format("{:016x}", model::checksum(params))},
              {"split", o.split},
              {"name", name},
              {"bin_width", o.bin_width},
              {"bandwidth", hist.bandwidth},
              {"out", o.out}};
  m.inputs = {o.ckpt, (dir / (o.split == "train" ? dataset_files::train : dataset_files::val)).string()};
  if (o.out.empty())
  {
    return;
  }
  const std::string prefix = o.out;
  const std::vector<std::pair<std::string, std::function<void(std::ostream&)>>> files = {
    {prefix + ".txt", [&](std::ostream& s) { s << table.str(); }},
    {prefix + ".json", [&](std::ostream& s) { eval::write_json(s, result.report); }},
    {prefix + ".scenes.csv", [&](std::ostream& s) { eval::write_scene_csv(s, result.per_scene); }},
    {prefix + ".hist.csv", [&](std::ostream& s) { eval::write_histogram_csv(s, hist); }},
    {prefix + ".hist.svg",
     [&](std::ostream& s) { eval::write_histogram_svg(s, hist, fmt::format("minFDE above 2 m: {}", name)); }},
  };
  for (const auto& [path, write] : files)
  {
    if (const auto parent = fs::path(path).parent_path(); !parent.empty())
    {
      fs::create_directories(parent);
    }
    write_atomically(path, write);
    m.outputs.push_back(path);
  }
}

// ---------------------------------------------------------------------------

struct QueryOptions
{
  std::string graph;
  std::string frame;
  std::string frames_file;
  double x = 0.0;
  double y = 0.0;
  double radius = 0.0;
  double step = LocalNavGraph::default_step;
};

void cmd_query(const QueryOptions& o, std::ostream& out)
{
  const GraphFile file = load_graph(o.graph);
  std::optional<geo::CityFrame> frame = file.frame;
  if (!o.frame.empty())
  {
    const auto named = frame_by_name(o.frame, extra_frames(o.frames_file));
    if (file.frame && !(file.frame->zone == named.zone && file.frame->origin_easting == named.origin_easting &&
                        file.frame->origin_northing == named.origin_northing))
    {
      throw Error(ErrorCode::frame_mismatch,
                  fmt::format("'{}' was ingested in frame {}, not {}", o.graph, file.frame->name, named.name));
    }
    frame = named;
  }
  if (!frame)
  {
    throw Error(ErrorCode::usage, fmt::format("'{}' names no city frame; pass --frame", o.graph));
  }
  if (!(o.radius >= 0.0) || !(o.step > 0.0))
  {
    throw Error(ErrorCode::usage, "--radius must be non-negative and --step positive");
  }
  const LocalNavGraph g = localize(file.graph, *frame);
  out << "edge_id,src,dst,index,x,y\n";
  for (const auto& seg : g.segments_in_radius({o.x, o.y}, o.radius, o.step))
  {
    for (std::size_t i = 0; i < seg.polyline.size(); ++i)
    {
      out << fmt::format("{},{},{},{},{:.3f},{:.3f}\n", seg.edge_id.value, seg.src, seg.dst, i, seg.polyline[i].x,
                         seg.polyline[i].y);
    }
  }
}

// ---------------------------------------------------------------------------

struct ReportOptions
{
  std::vector<std::string> reports;
  std::string out;
};

eval::MetricReport read_report(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw Error(ErrorCode::io, fmt::format("cannot open '{}'", path));
  }
  try
  {
    const auto j = nlohmann::json::parse(in);
    eval::MetricReport r;
    r.scenes = j.at("scenes").get<std::size_t>();
    for (auto [key, target] : {std::pair{"k1", &r.k1}, std::pair{"k6", &r.k6}})
    {
      const auto& k = j.at(key);
      target->min_ade = k.at("minADE").get<double>();
      target->min_fde = k.at("minFDE").get<double>();
      target->miss_rate = k.at("MR").get<double>();
    }
    return r;
  }
  catch (const nlohmann::json::exception& e)
  {
    throw Error(ErrorCode::parse, fmt::format("{}: {}", path, e.what()));
  }
}

void cmd_report(const ReportOptions& o, Manifest& m, std::ostream& out)
{
  std::vector<std::pair<std::string, eval::MetricReport>> rows;
  for (const auto& spec : o.reports)
  {
    const auto eq = spec.find('=');
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    std::string name = eq == std::string::npos ? fs::path(path).stem().string() : spec.substr(0, eq);
    rows.emplace_back(name, read_report(path));
    m.inputs.push_back(path);
  }
  std::ostringstream table;
  eval::write_table(table, rows);
  out << table.str();
  m.config = {{"reports", o.reports}, {"out", o.out}};
  if (!o.out.empty())
  {
    write_atomically(o.out, [&](std::ostream& s) { s << table.str(); });
    m.outputs.push_back(o.out);
  }
}

}  // namespace

void write_atomically(const std::filesystem::path& path, const std::function<void(std::ostream&)>& write)
{
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
    {
      throw Error(ErrorCode::io, fmt::format("cannot write '{}'", path.string()));
    }
    write(out);
    out.flush();
    if (!out)
    {
      throw Error(ErrorCode::io, fmt::format("failed writing '{}'", path.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
  {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::io, fmt::format("cannot move output into place at '{}'", path.string()));
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Navigation-map road graphs and map-aware trajectory prediction", "navpred"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option defaults (command-line flags take precedence)");
  app.set_version_flag("--version", tool_version);

  Globals g;
  app.add_option("--seed", g.seed, "Seed for every random choice")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for training (1 is the reproducibility reference)")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Convert an OSM XML extract into a road graph file");
  ingest_cmd->add_option("--osm", ingest.osm, "OSM XML file")->required();
  ingest_cmd->add_option("--frame", ingest.frame, "City frame (miami, pittsburgh or one from --frames)")->required();
  ingest_cmd->add_option("--frames", ingest.frames_file, "Extra frame definitions: 'name zone easting northing'");
  ingest_cmd->add_option("--road-types", ingest.road_types, "Highway values to keep (default: car roads)")
    ->delimiter(',');
  ingest_cmd->add_option("--out", ingest.out, "Output graph file")->required();

  GenOptions gen;
  gen.out = default_data_dir();
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic world and scene dataset");
  gen_cmd->add_option("--out", gen.out, "Dataset directory (default: $NAVPRED_DATA_DIR)");
  gen_cmd->add_option("-n,--scenes", gen.n, "Number of scenes")->capture_default_str();
  gen_cmd->add_option("--val-fraction", gen.val_fraction, "Validation share of the scene-id hash split")
    ->capture_default_str();
  gen_cmd->add_option("--frame", gen.frame, "City frame of the nav graph file")->capture_default_str();
  gen_cmd->add_option("--frames", gen.frames_file, "Extra frame definitions");
  gen_cmd->add_option("--roads", gen.world.num_roads, "Number of roads")->capture_default_str();
  gen_cmd->add_option("--min-lanes", gen.world.min_lanes, "Fewest lanes per road")->capture_default_str();
  gen_cmd->add_option("--max-lanes", gen.world.max_lanes, "Most lanes per road")->capture_default_str();
  gen_cmd->add_option("--lane-width", gen.world.lane_width, "Lane width (m)")->capture_default_str();
  gen_cmd->add_option("--min-curvature", gen.world.min_curvature, "Smallest |curvature| (1/m)")->capture_default_str();
  gen_cmd->add_option("--max-curvature", gen.world.max_curvature, "Largest |curvature| (1/m)")->capture_default_str();
  gen_cmd->add_option("--intersections", gen.world.intersection_count, "Number of intersections")
    ->capture_default_str();
  gen_cmd->add_option("--extent", gen.world.extent, "Half-width of the area road starts fall in (m)")
    ->capture_default_str();
  gen_cmd->add_option("--vertex-spacing", gen.world.vertex_spacing, "Polyline vertex spacing (m)")
    ->capture_default_str();
  gen_cmd->add_option("--noise", gen.scenes.noise_sigma, "Positional noise sigma (m)")->capture_default_str();
  gen_cmd->add_option("--lane-change-probability", gen.scenes.lane_change_probability, "Lane change probability")
    ->capture_default_str();

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a predictor, optionally distilled from an HD-map teacher");
  train_cmd->add_option("--data", train.data, "Dataset directory (default: $NAVPRED_DATA_DIR)");
  train_cmd->add_option("--map", train.map, "Map source: hd, nav or none")
    ->check(CLI::IsMember({"hd", "nav", "none"}))
    ->capture_default_str();
  auto* d_opt = train_cmd->add_option("--d", train.model.d, "Fusion embedding width")->capture_default_str();
  train_cmd->add_option("--k", train.model.k, "Number of modes")->capture_default_str();
  train_cmd->add_option("--hidden", train.model.hidden, "Agent encoder hidden width")->capture_default_str();
  train_cmd->add_option("--radius", train.model.map_radius, "Map query radius (m)")->capture_default_str();
  train_cmd->add_option("--step", train.model.map_step, "Map resampling step (m)")->capture_default_str();
  train_cmd->add_option("--epochs", train.train.epochs, "Epochs")->capture_default_str();
  train_cmd->add_option("--batch", train.train.batch_size, "Mini-batch size")->capture_default_str();
  train_cmd->add_option("--lr", train.train.learning_rate, "Learning rate")->capture_default_str();
  train_cmd->add_option("--momentum", train.train.momentum, "Momentum")->capture_default_str();
  train_cmd->add_option("--clip", train.train.clip_norm, "Gradient norm cap (0 disables)")->capture_default_str();
  train_cmd->add_option("--distill", train.teacher, "Teacher checkpoint (HD map) guiding a nav student");
  std::vector<CLI::Option*> distill_opts = {
    train_cmd->add_option("--variant", train.variant, "matched (d = d_t) or shared (d = 1.5 d_t)")
      ->check(CLI::IsMember({"matched", "shared"}))
      ->capture_default_str(),
    train_cmd->add_option("--alpha", train.alpha, "Weight of the model loss")->capture_default_str(),
    train_cmd->add_option("--beta", train.beta, "Weight of the distillation loss")->capture_default_str(),
    train_cmd->add_flag("--cache-teacher", train.cache_teacher, "Compute teacher embeddings once per scene"),
  };
  train_cmd->add_option("--out", train.out, "Output checkpoint")->required();

  EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
  eval_cmd->add_option("--data", ev.data, "Dataset directory (default: $NAVPRED_DATA_DIR)");
  eval_cmd->add_option("--ckpt", ev.ckpt, "Checkpoint")->required();
  eval_cmd->add_option("--split", ev.split, "val or train")->check(CLI::IsMember({"val", "train"}))->capture_default_str();
  eval_cmd->add_option("--map", ev.map, "Expected map source of the checkpoint")
    ->check(CLI::IsMember({"hd", "nav", "none"}));
  eval_cmd->add_option("--name", ev.name, "Row label in the table (default: map source)");
  eval_cmd->add_option("--out", ev.out, "Output prefix for .txt/.json/.scenes.csv/.hist.csv/.hist.svg");
  eval_cmd->add_option("--bin-width", ev.bin_width, "Histogram bin width (m)")->capture_default_str();
  eval_cmd->add_option("--bandwidth", ev.bandwidth, "KDE bandwidth (m; default Silverman's rule)");

  QueryOptions query;
  auto* query_cmd = app.add_subcommand("query", "List road segments near a local point as CSV");
  query_cmd->add_option("--graph", query.graph, "Graph file")->required();
  query_cmd->add_option("--frame", query.frame, "City frame (default: the one stored in the graph file)");
  query_cmd->add_option("--frames", query.frames_file, "Extra frame definitions");
  query_cmd->add_option("--x", query.x, "Local x (m)")->required();
  query_cmd->add_option("--y", query.y, "Local y (m)")->required();
  query_cmd->add_option("--radius", query.radius, "Radius (m)")->required();
  query_cmd->add_option("--step", query.step, "Resampling step (m)")->capture_default_str();

  ReportOptions report;
  auto* report_cmd = app.add_subcommand("report", "Combine eval JSON reports into one table");
  report_cmd->add_option("reports", report.reports, "name=report.json (or report.json)")->required();
  report_cmd->add_option("--out", report.out, "Also write the table to this file");

  const auto start = std::chrono::steady_clock::now();
  Manifest manifest;
  manifest.argv = args;
  try
  {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp&)
  {
    out << app.help();
    return 0;
  }
  catch (const CLI::CallForAllHelp&)
  {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  }
  catch (const CLI::CallForVersion&)
  {
    out << tool_version << '\n';
    return 0;
  }
  catch (const CLI::ParseError& e)
  {
    std::string message = e.what();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "error: " << error_token(ErrorCode::usage) << ": " << message << '\n';
    return 2;
  }

  try
  {
    fs::path manifest_path;
    if (ingest_cmd->parsed())
    {
      manifest.command = "ingest";
      cmd_ingest(ingest, manifest, out, err);
      manifest_path = ingest.out + ".manifest.json";
    }
    else if (gen_cmd->parsed())
    {
      manifest.command = "gen";
      cmd_gen(gen, g, manifest, out);
      manifest_path = fs::path(gen.out) / "manifest.json";
    }
    else if (train_cmd->parsed())
    {
      manifest.command = "train";
      train.d_given = d_opt->count() > 0;
      for (const auto* o : distill_opts)
      {
        train.distill_flags_given = train.distill_flags_given || o->count() > 0;
      }
      cmd_train(train, g, manifest, out, err);
      manifest_path = train.out + ".manifest.json";
    }
    else if (eval_cmd->parsed())
    {
      manifest.command = "eval";
      cmd_eval(ev, manifest, out);
      if (!ev.out.empty())
      {
        manifest_path = ev.out + ".manifest.json";
      }
    }
    else if (query_cmd->parsed())
    {
      cmd_query(query, out);
    }
    else if (report_cmd->parsed())
    {
      manifest.command = "report";
      cmd_report(report, manifest, out);
      if (!report.out.empty())
      {
        manifest_path = report.out + ".manifest.json";
      }
    }
    if (!manifest_path.empty())
    {
      const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      write_manifest(manifest_path, manifest, g, seconds);
    }
    return 0;
  }
  catch (const Error& e)
  {
    std::string message = e.message();
    std::replace(message.begin(), message.end(), '\n', ' ');
    err << "error: " << error_token(e.code()) << ": " << message << '\n';
    return e.code() == ErrorCode::usage ? 2 : 1;
  }
  catch (const fs::filesystem_error& e)
  {
    err << "error: " << error_token(ErrorCode::io) << ": " << e.what() << '\n';
    return 1;
  }
  catch (const std::exception& e)
  {
    err << "error: E_INTERNAL: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace navpred::cli
