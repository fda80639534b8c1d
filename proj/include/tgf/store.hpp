#pragma once

// Workspace layout and file formats.
//
// Every structured file is a JSON envelope
//   {"format_version": 1, "kind": "...", "checksum": <crc32 of payload>, "payload": {...}}
// where the checksum covers the compact serialization of the payload. Reals
// are written in shortest round-trip decimal form, so reading a file gives
// back bit-identical doubles. Point clouds use a one-line JSON header
// followed by little-endian binary arrays.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tgf/benchmark.hpp"
#include "tgf/catalog.hpp"
#include "tgf/render.hpp"
#include "tgf/scene.hpp"

namespace tgf {

using Json = nlohmann::json;

std::uint32_t crc32_of(std::string_view bytes);

/// Serialized envelope text (pretty-printed, trailing newline).
std::string encode_envelope(std::string_view kind, const Json& payload);
/// Throws SchemaMismatch (version/kind/shape) or CorruptFile (checksum).
/// With require_checksum = false a missing checksum is accepted, a wrong one
/// still is not.
Json decode_envelope(const std::string& text, std::string_view kind, bool require_checksum = true);

// Payload codecs. Readers throw SchemaMismatch on missing or mistyped fields.
Json pose_to_json(const GraspPose& g);
GraspPose pose_from_json(const Json& j);
Json transform_to_json(const RigidTransform& t);
RigidTransform transform_from_json(const Json& j);

Json scene_to_json(const Scene& s);
Scene scene_from_json(const Json& j);

Json catalog_to_json(const std::vector<ObjectModel>& catalog);
std::vector<ObjectModel> catalog_from_json(const Json& j);

Json grasps_to_json(const PropagatedGrasps& grasps);
PropagatedGrasps grasps_from_json(const Json& j);

Json triplets_to_json(const std::vector<Triplet>& trips);
std::vector<Triplet> triplets_from_json(const Json& j);

Json predictions_to_json(const std::vector<PredictionSet>& preds);
std::vector<PredictionSet> predictions_from_json(const Json& j);

Json report_to_json(const EvalReport& r);
EvalReport report_from_json(const Json& j);

/// Binary cloud: JSON header line, then points (f64le, N x 3), object_ids
/// (i32le, N) and triangle_ids (i32le, N). Throws SchemaMismatch for header
/// problems (including array counts that disagree) and CorruptFile for
/// truncated data or checksum failures.
std::string encode_cloud(const LabeledCloud& cloud);
LabeledCloud decode_cloud(const std::string& bytes);

struct VerdictRecord {
  std::string object_id;
  std::string grasp_id;
  TaskLabel task = TaskLabel::Grasp;
  Verdict verdict = Verdict::Accepted;
  std::string reviewer;
  std::int64_t timestamp = 0;  // seconds since epoch
  bool operator==(const VerdictRecord&) const = default;
};

Json verdict_to_json(const VerdictRecord& v);
/// Throws SchemaMismatch for malformed records.
VerdictRecord verdict_from_json(const Json& j);

/// Applies records in order; records naming objects, grasps or tasks that no
/// longer exist are skipped.
std::vector<ObjectModel> replay_verdicts(std::vector<ObjectModel> catalog,
                                         const std::vector<VerdictRecord>& log);

struct Manifest {
  std::uint64_t master_seed = 0;
  GripperSpec gripper;
  SceneConfig scene;
  bool operator==(const Manifest& o) const;
};

Json manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const Json& j);

/// Exclusive writer lock on a workspace (a `.lock` file holding the owner
/// pid). Locks left by dead processes are taken over.
class WorkspaceLock {
 public:
  /// Throws WorkspaceLocked when another live process holds the lock after
  /// waiting up to `wait_ms`.
  explicit WorkspaceLock(const std::filesystem::path& root, int wait_ms = 0);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  std::filesystem::path path_;
};

class Workspace {
 public:
  static constexpr const char* kSubdirs[] = {"assets",      "catalog", "scenes",  "clouds",
                                             "triplets",    "predictions", "reports", "verdicts"};

  /// Creates the directory tree and manifest. Re-initializing an existing
  /// workspace is an InvalidArgument error.
  static Workspace init(const std::filesystem::path& root, const Manifest& manifest);
  /// Throws MissingDependency when there is no manifest.
  static Workspace open(const std::filesystem::path& root);

  const std::filesystem::path& root() const { return root_; }
  const Manifest& manifest() const { return manifest_; }
  std::filesystem::path path(const std::filesystem::path& rel) const { return root_ / rel; }
  bool exists(const std::filesystem::path& rel) const;

  /// Atomic (temp file + rename) writes.
  void write_text(const std::filesystem::path& rel, const std::string& text) const;
  void write_json(const std::filesystem::path& rel, std::string_view kind, const Json& payload) const;
  std::string read_text(const std::filesystem::path& rel) const;  // MissingDependency if absent
  Json read_json(const std::filesystem::path& rel, std::string_view kind,
                 bool require_checksum = true) const;

  /// Removes and recreates a subdirectory.
  void reset_dir(const std::filesystem::path& rel) const;

  std::filesystem::path verdict_log() const { return path("verdicts/verdicts.jsonl"); }
  void append_verdict(const VerdictRecord& v) const;
  /// Throws CorruptFile / SchemaMismatch naming the offending line.
  std::vector<VerdictRecord> read_verdicts() const;

 private:
  std::filesystem::path root_;
  Manifest manifest_;
};

/// Workspace root from TGF_WORKSPACE, falling back to `fallback`.
std::filesystem::path default_workspace_root(const std::filesystem::path& fallback = "workspace");

}  // namespace tgf
