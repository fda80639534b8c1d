#include "tgf/benchmark.hpp"

#include <cmath>
#include <map>

#include "tgf/error.hpp"
#include "tgf/parallel.hpp"
#include "tgf/rng.hpp"

namespace tgf {

std::string make_triplet_id(const std::string& scene_id, int camera, Category o, TaskLabel t) {
  return scene_id + "/c" + std::to_string(camera) + "/" + std::string(to_string(o)) + "/" +
         std::string(to_string(t));
}

std::vector<Triplet> generate_triplets(std::span<const SceneRecord> scenes,
                                       std::span<const ObjectModel> catalog) {
  std::vector<Triplet> out;
  for (const SceneRecord& rec : scenes) {
    const Scene& scene = *rec.scene;
    std::set<Category> present;
    for (const auto& p : scene.placements) present.insert(find_object(catalog, p.object_id).category);

    // Ground truth per (category, task), collected in placement order.
    std::map<std::pair<Category, TaskLabel>, std::vector<GraspPose>> gt;
    for (const auto& p : scene.placements) {
      const Category c = find_object(catalog, p.object_id).category;
      const auto it = rec.grasps->find(p.object_id);
      if (it == rec.grasps->end()) continue;
      for (const AnnotatedGrasp& g : it->second)
        for (TaskLabel t : g.effective_tasks()) gt[{c, t}].push_back(g.pose);
    }

    for (int cam = 0; cam < static_cast<int>(scene.cameras.size()); ++cam)
      for (Category c : kAllCategories) {
        if (!present.count(c)) continue;
        for (TaskLabel t : allowed_tasks(c)) {
          const auto it = gt.find({c, t});
          if (it == gt.end() || it->second.empty()) continue;
          out.push_back({make_triplet_id(scene.scene_id, cam, c, t), scene.scene_id, cam, c, t,
                         it->second});
        }
      }
  }
  return out;
}

int success(const PredictionSet& pred, const Triplet& trip, const Thresholds& th) {
  for (const ScoredGrasp& p : pred.grasps)
    for (const GraspPose& g : trip.gt_grasps) {
      const GraspDistance d = grasp_distance(p.pose, g);
      if (d.d_t < th.th_d && d.d_alpha < th.th_alpha) return 1;
    }
  return 0;
}

double coverage(const PredictionSet& pred, const Triplet& trip, const Thresholds& th) {
  if (pred.grasps.empty() || trip.gt_grasps.empty()) return 0.0;
  std::size_t covered = 0;
  for (const GraspPose& g : trip.gt_grasps)
    for (const ScoredGrasp& p : pred.grasps)
      if (euclidean(p.pose.translation, g.translation) <= th.th_d) {
        ++covered;
        break;
      }
  return static_cast<double>(covered) / static_cast<double>(trip.gt_grasps.size());
}

EvalReport evaluate(std::span<const PredictionSet> preds, std::span<const Triplet> trips,
                    const Thresholds& th, std::size_t threads) {
  if (!(th.th_d > 0) || !(th.th_alpha > 0))
    throw Error(ErrorCode::InvalidArgument, "thresholds must be positive");
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < trips.size(); ++i) index.emplace(trips[i].triplet_id, i);

  std::vector<PredictionSet> merged(trips.size());
  for (const PredictionSet& p : preds) {
    const auto it = index.find(p.triplet_id);
    if (it == index.end()) throw Error(ErrorCode::UnknownTriplet, p.triplet_id);
    auto& dst = merged[it->second].grasps;
    dst.insert(dst.end(), p.grasps.begin(), p.grasps.end());
  }

  EvalReport report;
  report.thresholds = th;
  report.rows.resize(trips.size());
  parallel_for(trips.size(), threads, [&](std::size_t i) {
    report.rows[i] = {trips[i].triplet_id, coverage(merged[i], trips[i], th),
                      success(merged[i], trips[i], th)};
  });
  if (trips.empty()) return report;
  double cov = 0.0, suc = 0.0;
  for (const TripletScore& r : report.rows) {
    cov += r.coverage;
    suc += r.success;
  }
  const auto n = static_cast<double>(trips.size());
  report.coverage_rate = 100.0 * (cov / n);
  report.success_rate = 100.0 * (suc / n);
  return report;
}

double random_task_baseline(std::span<const std::set<TaskLabel>> gt_sets, std::uint64_t seed) {
  if (gt_sets.empty()) throw Error(ErrorCode::EmptyInput, "no grasps to classify");
  Rng rng(seed);
  std::size_t hits = 0;
  for (const auto& gt : gt_sets)
    if (gt.count(kAllTasks[rng.below(kTaskCount)])) ++hits;
  return static_cast<double>(hits) / static_cast<double>(gt_sets.size());
}

double two_stage_precision(std::span<const std::pair<TaskLabel, std::set<TaskLabel>>> outputs) {
  if (outputs.empty()) throw Error(ErrorCode::EmptyInput, "no classifier outputs");
  std::size_t hits = 0;
  for (const auto& [pred, gt] : outputs)
    if (gt.count(pred)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(outputs.size());
}

namespace {

double mean_bce(std::span<const double> p, const std::vector<std::uint8_t>& y) {
  if (p.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    sum += y[i] ? -std::log(q) : -std::log(1.0 - q);
  }
  return sum / static_cast<double>(p.size());
}

}  // namespace

PointLosses point_selection_loss(std::span<const double> p_objectness,
                                 std::span<const double> p_target,
                                 std::span<const double> p_task, const PointLabels& labels) {
  const std::size_t n = labels.objectness.size();
  if (labels.target_objectness.size() != n || labels.taskness.size() != n ||
      p_objectness.size() != n || p_target.size() != n || p_task.size() != n)
    throw Error(ErrorCode::LengthMismatch, "probability and label arrays differ in length");
  PointLosses out;
  out.l_o = mean_bce(p_objectness, labels.objectness);
  out.l_to = mean_bce(p_target, labels.target_objectness);
  out.l_task = mean_bce(p_task, labels.taskness);
  out.l_point = out.l_o + out.l_to + out.l_task;
  return out;
}

TotalLosses total_losses(double l_g_task, double l_g_stable, double l_point) {
  for (double v : {l_g_task, l_g_stable, l_point}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "loss term is not finite");
    if (v < 0) throw Error(ErrorCode::InvalidArgument, "loss term is negative");
  }
  const double l_grasp = l_g_task + l_g_stable;
  return {l_grasp, l_point + l_grasp};
}

double task_grasp_loss(std::span<const GraspPose> preds, std::span<const GraspPose> gts,
                       const GripperSpec& spec, double th_d) {
  std::vector<WeightedPrediction> weighted;
  weighted.reserve(preds.size());
  for (const GraspPose& p : preds) {
    bool near = false;
    for (const GraspPose& g : gts)
      if (euclidean(p.translation, g.translation) <= th_d) {
        near = true;
        break;
      }
    weighted.push_back({p, near});
  }
  return grasp_set_loss(weighted, gts, spec);
}

}  // namespace tgf
