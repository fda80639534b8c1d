#pragma once

// Workspace stage drivers behind the CLI. Every stage reads its inputs from
// the workspace, checks that they exist and are current (MissingDependency
// otherwise), and replaces its own output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tgf/benchmark.hpp"
#include "tgf/store.hpp"

namespace tgf {

struct IngestResult {
  std::size_t objects = 0;
  std::size_t grasps = 0;
  std::size_t labeled_grasps = 0;
};

/// Builds the catalog from `assets_dir` (index.json listing mesh, category,
/// affordance and grasp files per object) or, when absent, from the
/// procedural desk set written to assets/. Assigns task labels.
IngestResult stage_ingest(const Workspace& ws,
                          const std::optional<std::filesystem::path>& assets_dir = std::nullopt);

/// Base catalog with the verdict log applied.
std::vector<ObjectModel> load_catalog(const Workspace& ws);

struct GenScenesOptions {
  std::size_t count = 10;
  std::uint64_t seed = 0;
  std::optional<double> sigma;  // meters; manifest default when unset
  std::size_t threads = 0;
};

struct GenScenesResult {
  std::size_t scenes = 0;
  std::size_t retried = 0;  // scenes that needed a fallback seed
};

/// Scene i uses seed derive_seed(seed, i); when placement fails it retries
/// with up to three seeds derived from that one.
GenScenesResult stage_gen_scenes(const Workspace& ws, const GenScenesOptions& options);

inline constexpr int kPlacementRetries = 3;

std::vector<std::string> scene_ids(const Workspace& ws);
Scene load_scene(const Workspace& ws, const std::string& scene_id);

/// Returns the number of clouds written.
std::size_t stage_render(const Workspace& ws, std::size_t threads = 0);
LabeledCloud load_cloud(const Workspace& ws, const std::string& scene_id, int camera_index);

/// Returns the number of retained scene grasps.
std::size_t stage_propagate(const Workspace& ws, std::size_t threads = 0);
PropagatedGrasps load_scene_grasps(const Workspace& ws, const std::string& scene_id);

/// Returns the number of triplets.
std::size_t stage_triplets(const Workspace& ws);
std::vector<Triplet> load_triplets(const Workspace& ws);

/// Scores a prediction file and stores the report under reports/.
EvalReport stage_eval(const Workspace& ws, const std::filesystem::path& prediction_file,
                      const Thresholds& th, std::size_t threads = 0);

struct RandomBaselineResult {
  std::size_t grasps = 0;
  double precision = 0.0;
  double expected = 0.0;  // mean |gt set| / 7
};

/// Random task classification over all propagated scene grasps.
RandomBaselineResult stage_baseline_random(const Workspace& ws, std::uint64_t seed);

/// Writes predictions/perfect.json holding every triplet's ground truth.
std::filesystem::path stage_baseline_perfect(const Workspace& ws);

/// Current ground truth: every object's grasps with their non-rejected tasks.
Json export_ground_truth(const std::vector<ObjectModel>& catalog);

}  // namespace tgf
