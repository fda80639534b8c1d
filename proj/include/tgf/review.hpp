#pragma once

// HTTP API for human verification of grasp-task labels.
//
//   GET  /api/objects                 object list with label review counts
//   GET  /api/objects/{id}            decimated mesh, affordances, grasps, object cloud
//   POST /api/objects/{id}/verdicts   {grasp_id, task, verdict, reviewer} -> 201
//   GET  /api/export                  ground truth after verdicts
//
// Every JSON body carries "format_version". Files under the static directory
// are served at "/".

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "tgf/render.hpp"
#include "tgf/store.hpp"

namespace httplib {
class Server;
}

namespace tgf {

struct ReviewOptions {
  std::filesystem::path static_dir;  // empty: <workspace>/ui
  std::size_t max_mesh_triangles = 4000;
  int cloud_width = 160;
  int cloud_height = 120;
  int lock_wait_ms = 10000;
};

struct HttpResult {
  int status = 200;
  Json body;
};

class ReviewService {
 public:
  /// Loads the ingested catalog and replays the verdict log.
  explicit ReviewService(Workspace ws, ReviewOptions options = {});
  ~ReviewService();

  HttpResult list_objects() const;
  HttpResult get_object(const std::string& id) const;
  HttpResult post_verdict(const std::string& id, const std::string& body);
  HttpResult export_ground_truth() const;

  /// Binds to `port` (0 = any free port) and returns the bound port, or -1.
  int bind(const std::string& host, int port);
  /// Serves requests until stop(); call after bind().
  bool serve();
  void stop();

 private:
  void install_routes();
  Json object_cloud(const ObjectModel& obj) const;

  Workspace ws_;
  ReviewOptions options_;
  GripperSpec spec_;
  mutable std::shared_mutex state_mutex_;
  std::vector<ObjectModel> catalog_;
  std::mutex append_mutex_;
  mutable std::mutex cloud_mutex_;
  mutable std::map<std::string, Json> cloud_cache_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tgf
