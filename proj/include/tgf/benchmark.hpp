#pragma once

// Benchmark cases and metrics: triplet enumeration, coverage / success
// scoring, baseline precisions and the reference training losses.

#include <cstdint>
#include <numbers>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tgf/catalog.hpp"
#include "tgf/render.hpp"
#include "tgf/scene.hpp"

namespace tgf {

struct Triplet {
  std::string triplet_id;
  std::string scene_id;
  int camera_index = 0;
  Category o = Category::Mug;
  TaskLabel t = TaskLabel::Grasp;
  std::vector<GraspPose> gt_grasps;  // scene frame
  bool operator==(const Triplet&) const = default;
};

struct ScoredGrasp {
  GraspPose pose;
  double confidence = 1.0;
  bool operator==(const ScoredGrasp&) const = default;
};

struct PredictionSet {
  std::string triplet_id;
  std::vector<ScoredGrasp> grasps;
  bool operator==(const PredictionSet&) const = default;
};

struct Thresholds {
  double th_d = 0.03;                            // meters
  double th_alpha = 30.0 * std::numbers::pi / 180.0;  // radians
  bool operator==(const Thresholds&) const = default;
};

struct TripletScore {
  std::string triplet_id;
  double coverage = 0.0;
  int success = 0;
  bool operator==(const TripletScore&) const = default;
};

struct EvalReport {
  std::vector<TripletScore> rows;
  double coverage_rate = 0.0;  // percent
  double success_rate = 0.0;   // percent
  Thresholds thresholds;
  bool operator==(const EvalReport&) const = default;
};

/// One scene's inputs to triplet generation.
struct SceneRecord {
  const Scene* scene = nullptr;
  const PropagatedGrasps* grasps = nullptr;
};

/// "<scene_id>/c<camera>/<Category>/<Task>".
std::string make_triplet_id(const std::string& scene_id, int camera, Category o, TaskLabel t);

/// One triplet per (camera, category present, allowed task) that has at least
/// one surviving ground-truth grasp carrying the task. Ordered by scene, then
/// camera, category and task enumeration order.
std::vector<Triplet> generate_triplets(std::span<const SceneRecord> scenes,
                                       std::span<const ObjectModel> catalog);

/// 1 iff some prediction is strictly within both thresholds of some ground truth.
int success(const PredictionSet& pred, const Triplet& trip, const Thresholds& th = {});

/// Fraction of ground-truth grasps with a prediction whose translation lies
/// within th_d (inclusive). Rotation is ignored.
double coverage(const PredictionSet& pred, const Triplet& trip, const Thresholds& th = {});

/// Per-triplet scores averaged over all triplets; a triplet without a
/// prediction set scores 0. Prediction sets sharing a triplet id are merged.
/// Throws UnknownTriplet.
EvalReport evaluate(std::span<const PredictionSet> preds, std::span<const Triplet> trips,
                    const Thresholds& th = {}, std::size_t threads = 1);

/// Draws one task uniformly from all seven per grasp; fraction of draws that
/// land in the grasp's ground-truth set. Throws EmptyInput.
double random_task_baseline(std::span<const std::set<TaskLabel>> gt_sets, std::uint64_t seed);

/// Fraction of (predicted task, ground-truth set) entries that match.
/// Throws EmptyInput.
double two_stage_precision(std::span<const std::pair<TaskLabel, std::set<TaskLabel>>> outputs);

inline constexpr double kProbabilityClamp = 1e-7;

struct PointLosses {
  double l_o = 0.0;
  double l_to = 0.0;
  double l_task = 0.0;
  double l_point = 0.0;
};

/// Mean binary cross-entropy per head (probabilities clamped to
/// [1e-7, 1 - 1e-7]) and their sum. Throws LengthMismatch.
PointLosses point_selection_loss(std::span<const double> p_objectness,
                                 std::span<const double> p_target,
                                 std::span<const double> p_task, const PointLabels& labels);

struct TotalLosses {
  double l_grasp = 0.0;
  double l_overall = 0.0;
};

/// Throws NonFinite for NaN/inf inputs and InvalidArgument for negatives.
TotalLosses total_losses(double l_g_task, double l_g_stable, double l_point);

/// Set loss with each prediction weighted 1 iff its translation lies within
/// th_d of some ground-truth translation.
double task_grasp_loss(std::span<const GraspPose> preds, std::span<const GraspPose> gts,
                       const GripperSpec& spec, double th_d = 0.03);

}  // namespace tgf
