#include "tgf/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "tgf/desk_assets.hpp"
#include "tgf/error.hpp"
#include "tgf/parallel.hpp"
#include "tgf/rng.hpp"

namespace tgf {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kAssetStream = 0xA55E7;

std::string scene_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "scene_%05zu", i);
  return buf;
}

std::string cloud_file(const std::string& scene_id, int camera) {
  return scene_id + "_c" + std::to_string(camera) + ".cloud";
}

struct SceneIndex {
  std::vector<std::string> ids;
  std::uint32_t checksum = 0;  // identifies this generation run downstream
};

SceneIndex read_scene_index(const Workspace& ws) {
  if (!ws.exists("scenes/index.json"))
    throw Error(ErrorCode::MissingDependency, "no scenes (run `gen-scenes` first)");
  const Json payload = ws.read_json("scenes/index.json", "scene_index");
  SceneIndex idx;
  try {
    idx.ids = payload.at("scene_ids").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, std::string("scene index: ") + e.what());
  }
  idx.checksum = crc32_of(payload.dump());
  return idx;
}

// Loads a downstream index and checks that it was built from the current scenes.
Json read_current_index(const Workspace& ws, const fs::path& rel, std::string_view kind,
                        const SceneIndex& scenes, std::string_view producer) {
  if (!ws.exists(rel))
    throw Error(ErrorCode::MissingDependency,
                "missing " + rel.string() + " (run `" + std::string(producer) + "` first)");
  Json payload = ws.read_json(rel, kind);
  if (payload.value("scenes_checksum", std::uint64_t{0}) != scenes.checksum)
    throw Error(ErrorCode::MissingDependency,
                rel.string() + " is stale (rerun `" + std::string(producer) + "`)");
  return payload;
}

std::vector<ObjectModel> read_base_catalog(const Workspace& ws) {
  if (!ws.exists("catalog/catalog.json"))
    throw Error(ErrorCode::MissingDependency, "no catalog (run `ingest` first)");
  return catalog_from_json(ws.read_json("catalog/catalog.json", "catalog"));
}

// Restricts propagated task sets to the tasks still effective in `catalog`.
PropagatedGrasps apply_current_verdicts(PropagatedGrasps grasps,
                                        const std::vector<ObjectModel>& catalog) {
  for (auto& [object_id, list] : grasps) {
    const ObjectModel& obj = find_object(catalog, object_id);
    std::vector<AnnotatedGrasp> kept;
    for (AnnotatedGrasp& g : list) {
      const AnnotatedGrasp* source = obj.find_grasp(g.grasp_id);
      if (!source) continue;
      const std::set<TaskLabel> allowed = source->effective_tasks();
      std::set<TaskLabel> tasks;
      for (TaskLabel t : g.tasks)
        if (allowed.count(t)) tasks.insert(t);
      if (tasks.empty()) continue;
      g.tasks = tasks;
      g.verdicts.clear();
      for (const auto& [t, v] : source->verdicts)
        if (tasks.count(t)) g.verdicts[t] = v;
      kept.push_back(std::move(g));
    }
    list = std::move(kept);
  }
  return grasps;
}

}  // namespace

IngestResult stage_ingest(const Workspace& ws, const std::optional<fs::path>& assets_dir) {
  fs::path dir;
  if (assets_dir) {
    dir = *assets_dir;
  } else {
    ws.reset_dir("assets");
    write_desk_assets(ws.path("assets"), build_desk_assets(ws.manifest().gripper,
                                                           derive_seed(ws.manifest().master_seed,
                                                                       kAssetStream)));
    dir = ws.path("assets");
  }
  if (!fs::exists(dir / "index.json"))
    throw Error(ErrorCode::MissingDependency, "no index.json in " + dir.string());

  Json index;
  try {
    std::ifstream in(dir / "index.json");
    index = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, "asset index: " + std::string(e.what()));
  }
  std::vector<ObjectModel> catalog;
  IngestResult result;
  try {
    if (index.at("format_version") != 1)
      throw Error(ErrorCode::ParseError, "asset index: unsupported format_version");
    for (const auto& e : index.at("objects")) {
      ObjectModel obj = load_object(e.at("id").get<std::string>(), dir / e.at("mesh").get<std::string>(),
                                    e.at("category").get<std::string>(),
                                    dir / e.at("affordances").get<std::string>(),
                                    dir / e.at("grasps").get<std::string>(), e.value("scale", 1.0));
      for (const auto& other : catalog)
        if (other.id == obj.id) throw Error(ErrorCode::ParseError, "duplicate object id " + obj.id);
      obj = assign_task_labels(obj, ws.manifest().gripper);
      result.grasps += obj.grasps.size();
      for (const auto& g : obj.grasps) result.labeled_grasps += !g.tasks.empty();
      catalog.push_back(std::move(obj));
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseError, "asset index: " + std::string(e.what()));
  }
  result.objects = catalog.size();
  ws.reset_dir("catalog");
  ws.write_json("catalog/catalog.json", "catalog", catalog_to_json(catalog));
  return result;
}

std::vector<ObjectModel> load_catalog(const Workspace& ws) {
  return replay_verdicts(read_base_catalog(ws), ws.read_verdicts());
}

GenScenesResult stage_gen_scenes(const Workspace& ws, const GenScenesOptions& options) {
  const std::vector<ObjectModel> catalog = read_base_catalog(ws);
  SceneConfig config = ws.manifest().scene;
  if (options.sigma) config.placement.sigma = *options.sigma;

  std::vector<Scene> scenes(options.count);
  std::vector<int> retries(options.count, 0);
  parallel_for(options.count, options.threads, [&](std::size_t i) {
    const std::uint64_t base = derive_seed(options.seed, i);
    for (int attempt = 0;; ++attempt) {
      try {
        const std::uint64_t seed = attempt == 0 ? base : derive_seed(base, static_cast<std::uint64_t>(attempt));
        scenes[i] = make_scene(catalog, config, scene_name(i), seed);
        retries[i] = attempt;
        return;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::PlacementFailed || attempt == kPlacementRetries) throw;
      }
    }
  });

  ws.reset_dir("scenes");
  Json ids = Json::array();
  GenScenesResult result;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    ws.write_json("scenes/" + scenes[i].scene_id + ".json", "scene", scene_to_json(scenes[i]));
    ids.push_back(scenes[i].scene_id);
    result.retried += retries[i] > 0;
  }
  result.scenes = scenes.size();
  ws.write_json("scenes/index.json", "scene_index",
                {{"seed", options.seed},
                 {"count", options.count},
                 {"sigma", config.placement.sigma},
                 {"retried", result.retried},
                 {"scene_ids", ids}});
  return result;
}

std::vector<std::string> scene_ids(const Workspace& ws) { return read_scene_index(ws).ids; }

Scene load_scene(const Workspace& ws, const std::string& scene_id) {
  return scene_from_json(ws.read_json("scenes/" + scene_id + ".json", "scene"));
}

std::size_t stage_render(const Workspace& ws, std::size_t threads) {
  const SceneIndex index = read_scene_index(ws);
  const std::vector<ObjectModel> catalog = read_base_catalog(ws);
  std::vector<Scene> scenes;
  for (const auto& id : index.ids) scenes.push_back(load_scene(ws, id));

  struct Job {
    std::size_t scene;
    int camera;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < scenes.size(); ++s)
    for (int c = 0; c < static_cast<int>(scenes[s].cameras.size()); ++c) jobs.push_back({s, c});

  ws.reset_dir("clouds");
  std::vector<std::size_t> counts(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t j) {
    const Scene& scene = scenes[jobs[j].scene];
    const LabeledCloud cloud = render_cloud(scene, jobs[j].camera, catalog);
    counts[j] = cloud.size();
    ws.write_text("clouds/" + cloud_file(scene.scene_id, jobs[j].camera), encode_cloud(cloud));
  });

  Json clouds = Json::array();
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const std::string& id = scenes[jobs[j].scene].scene_id;
    clouds.push_back({{"scene_id", id},
                      {"camera_index", jobs[j].camera},
                      {"file", cloud_file(id, jobs[j].camera)},
                      {"point_count", counts[j]}});
  }
  ws.write_json("clouds/index.json", "cloud_index",
                {{"scenes_checksum", index.checksum}, {"clouds", clouds}});
  return jobs.size();
}

LabeledCloud load_cloud(const Workspace& ws, const std::string& scene_id, int camera_index) {
  const fs::path rel = fs::path("clouds") / cloud_file(scene_id, camera_index);
  try {
    return decode_cloud(ws.read_text(rel));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::MissingDependency) throw;
    throw Error(e.code(), rel.string() + ": " + e.detail());
  }
}

std::size_t stage_propagate(const Workspace& ws, std::size_t threads) {
  const SceneIndex index = read_scene_index(ws);
  const std::vector<ObjectModel> catalog = load_catalog(ws);
  const GripperSpec spec = ws.manifest().gripper;

  std::vector<std::size_t> kept(index.ids.size());
  parallel_for(index.ids.size(), threads, [&](std::size_t i) {
    const Scene scene = load_scene(ws, index.ids[i]);
    const PropagatedGrasps grasps = propagate_grasps(scene, catalog, spec);
    for (const auto& [id, list] : grasps) kept[i] += list.size();
    ws.write_json("scenes/" + scene.scene_id + ".grasps.json", "scene_grasps", grasps_to_json(grasps));
  });
  std::size_t total = 0;
  Json counts = Json::array();
  for (std::size_t i = 0; i < kept.size(); ++i) {
    total += kept[i];
    counts.push_back({{"scene_id", index.ids[i]}, {"grasps", kept[i]}});
  }
  ws.write_json("scenes/propagation.json", "propagation_index",
                {{"scenes_checksum", index.checksum}, {"scenes", counts}});
  return total;
}

PropagatedGrasps load_scene_grasps(const Workspace& ws, const std::string& scene_id) {
  return grasps_from_json(ws.read_json("scenes/" + scene_id + ".grasps.json", "scene_grasps"));
}

std::size_t stage_triplets(const Workspace& ws) {
  const SceneIndex index = read_scene_index(ws);
  read_current_index(ws, "clouds/index.json", "cloud_index", index, "render");
  read_current_index(ws, "scenes/propagation.json", "propagation_index", index, "propagate");
  const std::vector<ObjectModel> catalog = load_catalog(ws);

  std::vector<Scene> scenes;
  std::vector<PropagatedGrasps> grasps;
  for (const auto& id : index.ids) {
    scenes.push_back(load_scene(ws, id));
    grasps.push_back(apply_current_verdicts(load_scene_grasps(ws, id), catalog));
  }
  std::vector<SceneRecord> records;
  for (std::size_t i = 0; i < scenes.size(); ++i) records.push_back({&scenes[i], &grasps[i]});
  const std::vector<Triplet> trips = generate_triplets(records, catalog);

  ws.reset_dir("triplets");
  Json payload = triplets_to_json(trips);
  payload["scenes_checksum"] = index.checksum;
  ws.write_json("triplets/triplets.json", "triplets", payload);
  return trips.size();
}

std::vector<Triplet> load_triplets(const Workspace& ws) {
  if (!ws.exists("triplets/triplets.json"))
    throw Error(ErrorCode::MissingDependency, "no triplets (run `triplets` first)");
  return triplets_from_json(ws.read_json("triplets/triplets.json", "triplets"));
}

EvalReport stage_eval(const Workspace& ws, const fs::path& prediction_file, const Thresholds& th,
                      std::size_t threads) {
  const std::vector<Triplet> trips = load_triplets(ws);
  std::ifstream in(prediction_file, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingDependency, "cannot read " + prediction_file.string());
  std::ostringstream text;
  text << in.rdbuf();
  std::vector<PredictionSet> preds;
  try {
    preds = predictions_from_json(decode_envelope(text.str(), "predictions", false));
  } catch (const Error& e) {
    throw Error(e.code(), prediction_file.string() + ": " + e.detail());
  }
  const EvalReport report = evaluate(preds, trips, th, threads);
  Json payload = report_to_json(report);
  payload["predictions"] = prediction_file.filename().string();
  ws.write_json(fs::path("reports") / (prediction_file.stem().string() + ".report.json"), "report",
                payload);
  return report;
}

RandomBaselineResult stage_baseline_random(const Workspace& ws, std::uint64_t seed) {
  const SceneIndex index = read_scene_index(ws);
  read_current_index(ws, "scenes/propagation.json", "propagation_index", index, "propagate");
  const std::vector<ObjectModel> catalog = load_catalog(ws);
  std::vector<std::set<TaskLabel>> sets;
  for (const auto& id : index.ids)
    for (const auto& [object_id, list] : apply_current_verdicts(load_scene_grasps(ws, id), catalog))
      for (const auto& g : list) sets.push_back(g.tasks);

  RandomBaselineResult r;
  r.grasps = sets.size();
  r.precision = random_task_baseline(sets, seed);
  double total = 0.0;
  for (const auto& s : sets) total += static_cast<double>(s.size());
  r.expected = total / static_cast<double>(sets.size()) / static_cast<double>(kTaskCount);
  ws.write_json("reports/baseline_random.json", "baseline_report",
                {{"baseline", "random"},
                 {"seed", seed},
                 {"grasps", r.grasps},
                 {"precision", r.precision},
                 {"expected_precision", r.expected}});
  return r;
}

fs::path stage_baseline_perfect(const Workspace& ws) {
  std::vector<PredictionSet> preds;
  for (const Triplet& t : load_triplets(ws)) {
    PredictionSet p{t.triplet_id, {}};
    for (const auto& g : t.gt_grasps) p.grasps.push_back({g, 1.0});
    preds.push_back(std::move(p));
  }
  ws.write_json("predictions/perfect.json", "predictions", predictions_to_json(preds));
  return ws.path("predictions/perfect.json");
}

Json export_ground_truth(const std::vector<ObjectModel>& catalog) {
  Json objects = Json::array();
  for (const ObjectModel& obj : catalog) {
    Json grasps = Json::array();
    for (const AnnotatedGrasp& g : obj.grasps) {
      Json jg = pose_to_json(g.pose);
      jg["grasp_id"] = g.grasp_id;
      Json tasks = Json::array();
      for (TaskLabel t : g.effective_tasks()) tasks.push_back(std::string(to_string(t)));
      jg["tasks"] = tasks;
      grasps.push_back(jg);
    }
    objects.push_back(
        {{"object_id", obj.id}, {"category", std::string(to_string(obj.category))}, {"grasps", grasps}});
  }
  return {{"objects", objects}};
}

}  // namespace tgf
