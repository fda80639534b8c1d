#include "tgf/cli.hpp"

#include <cstdio>
#include <fstream>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tgf/error.hpp"
#include "tgf/pipeline.hpp"
#include "tgf/review.hpp"

namespace tgf {

namespace {

std::string fixed(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"tgforge: task-oriented grasp dataset forge and benchmark", "tgforge"};
  app.require_subcommand(1);

  std::string workspace;
  std::size_t threads = 0;
  app.add_option("-w,--workspace", workspace, "Workspace root (default: $TGF_WORKSPACE or ./workspace)");
  app.add_option("-j,--threads", threads, "Worker threads (0 = all cores)");

  std::uint64_t init_seed = 0;
  auto* init = app.add_subcommand("init", "Create a workspace");
  init->add_option("--seed", init_seed, "Master seed (catalog grasp sampling)");

  std::string assets;
  auto* ingest = app.add_subcommand("ingest", "Build the object catalog and assign task labels");
  ingest->add_option("--assets", assets, "Asset directory with index.json (default: built-in desk set)")
      ->check(CLI::ExistingDirectory);

  std::size_t count = 10;
  std::uint64_t scene_seed = 0;
  std::optional<double> sigma_cm;
  auto* gen = app.add_subcommand("gen-scenes", "Generate cluttered tabletop scenes");
  gen->add_option("--count", count, "Number of scenes")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", scene_seed, "Scene seed")->required();
  gen->add_option("--sigma", sigma_cm, "Placement standard deviation in cm")
      ->check(CLI::NonNegativeNumber);

  auto* render = app.add_subcommand("render", "Render labeled point clouds for every scene camera");
  auto* propagate = app.add_subcommand("propagate", "Move task grasps into scenes, dropping collisions");
  auto* triplets = app.add_subcommand("triplets", "Enumerate (cloud, category, task) benchmark cases");

  std::string pred_file;
  double th_d_cm = 3.0, th_alpha_deg = 30.0;
  auto* eval = app.add_subcommand("eval", "Score a prediction file");
  eval->add_option("--pred", pred_file, "Prediction file")->required();
  eval->add_option("--th-d-cm", th_d_cm, "Translation threshold in cm")->check(CLI::PositiveNumber);
  eval->add_option("--th-alpha-deg", th_alpha_deg, "Rotation threshold in degrees")
      ->check(CLI::PositiveNumber);

  auto* baseline = app.add_subcommand("baseline", "Baseline policies");
  baseline->require_subcommand(1);
  std::uint64_t baseline_seed = 0;
  auto* random = baseline->add_subcommand("random", "Random task classification precision");
  random->add_option("--seed", baseline_seed, "Seed")->required();
  auto* perfect = baseline->add_subcommand("perfect", "Write ground truth as a prediction file");

  std::string export_out;
  auto* exp = app.add_subcommand("export", "Print the verified ground truth");
  exp->add_option("--out", export_out, "Write to a file instead of stdout");

  int port = 8080;
  std::string host = "127.0.0.1";
  std::string static_dir;
  auto* serve = app.add_subcommand("serve", "Run the review service");
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--static", static_dir, "Review UI bundle directory (default: <workspace>/ui)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 2;
  }

  try {
    const std::filesystem::path root =
        workspace.empty() ? default_workspace_root() : std::filesystem::path(workspace);

    if (init->parsed()) {
      Manifest m;
      m.master_seed = init_seed;
      Workspace::init(root, m);
      out << "initialized " << root.string() << " (seed " << init_seed << ")\n";
      return 0;
    }

    const Workspace ws = Workspace::open(root);
    if (serve->parsed()) {
      ReviewOptions options;
      if (!static_dir.empty()) options.static_dir = static_dir;
      ReviewService service(ws, options);
      const int bound = service.bind(host, port);
      if (bound < 0) throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
      out << "serving " << root.string() << " on http://" << host << ":" << bound << std::endl;
      return service.serve() ? 0 : 1;
    }
    if (exp->parsed()) {
      Json body = export_ground_truth(load_catalog(ws));
      body["format_version"] = 1;
      const std::string text = body.dump(1) + "\n";
      if (export_out.empty()) {
        out << text;
      } else {
        std::ofstream f(export_out, std::ios::binary);
        if (!(f << text)) throw Error(ErrorCode::IoError, "cannot write " + export_out);
      }
      return 0;
    }

    const WorkspaceLock lock(ws.root());
    if (ingest->parsed()) {
      const IngestResult r =
          stage_ingest(ws, assets.empty() ? std::nullopt : std::optional<std::filesystem::path>(assets));
      out << "ingested " << r.objects << " objects, " << r.grasps << " grasps (" << r.labeled_grasps
          << " with task labels)\n";
    } else if (gen->parsed()) {
      GenScenesOptions o;
      o.count = count;
      o.seed = scene_seed;
      if (sigma_cm) o.sigma = *sigma_cm / 100.0;
      o.threads = threads;
      const GenScenesResult r = stage_gen_scenes(ws, o);
      out << "generated " << r.scenes << " scenes (" << r.retried << " needed a fallback seed)\n";
    } else if (render->parsed()) {
      const std::size_t n = stage_render(ws, threads);
      out << "rendered " << n << " clouds\n";
    } else if (propagate->parsed()) {
      const std::size_t n = stage_propagate(ws, threads);
      out << "propagated " << n << " collision-free scene grasps\n";
    } else if (triplets->parsed()) {
      const std::size_t n = stage_triplets(ws);
      out << "generated " << n << " triplets\n";
    } else if (eval->parsed()) {
      const Thresholds th{th_d_cm / 100.0, th_alpha_deg * std::numbers::pi / 180.0};
      const EvalReport r = stage_eval(ws, pred_file, th, threads);
      out << "triplets " << r.rows.size() << "\n"
          << "coverage_rate " << fixed(r.coverage_rate) << "\n"
          << "success_rate " << fixed(r.success_rate) << "\n"
          << "thresholds th_d=" << th_d_cm << "cm th_alpha=" << th_alpha_deg << "deg\n";
    } else if (random->parsed()) {
      const RandomBaselineResult r = stage_baseline_random(ws, baseline_seed);
      out << "grasps " << r.grasps << "\n"
          << "precision " << fixed(100.0 * r.precision) << "\n"
          << "expected " << fixed(100.0 * r.expected) << "\n";
    } else if (perfect->parsed()) {
      const std::filesystem::path p = stage_baseline_perfect(ws);
      out << "wrote " << p.string() << "\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: IoError: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tgf
