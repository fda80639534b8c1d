#include <gtest/gtest.h>

#include <bit>
#include <cstdlib>
#include <random>
#include <sys/wait.h>
#include <unistd.h>

#include "oracles.hpp"
#include "support.hpp"
#include "tgf/store.hpp"

using namespace tgf;
using testing_support::desk_catalog;
using testing_support::TempDir;

namespace {

std::vector<Triplet> sample_triplets() {
  std::vector<Triplet> out;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Scene s = make_scene(desk_catalog(), SceneConfig{}, "s" + std::to_string(seed), seed);
    const PropagatedGrasps pg = propagate_grasps(s, desk_catalog(), GripperSpec{});
    const SceneRecord rec{&s, &pg};
    const auto t = generate_triplets(std::span(&rec, 1), desk_catalog());
    out.insert(out.end(), t.begin(), t.end());
  }
  return out;
}

// A pid that is guaranteed dead: a reaped child.
pid_t dead_pid() {
  const pid_t child = ::fork();
  if (child == 0) ::_exit(0);
  int status = 0;
  ::waitpid(child, &status, 0);
  return child;
}

}  // namespace

TEST(Envelope, RoundTripAndChecksum) {
  const Json payload = {{"a", 1}, {"b", {0.1, 1e-300, -2.5}}, {"c", "text"}};
  const std::string text = encode_envelope("thing", payload);
  ASSERT_EQ(text.back(), '\n');
  EXPECT_EQ(decode_envelope(text, "thing"), payload);
  const Json parsed = Json::parse(text);
  EXPECT_EQ(parsed.at("format_version"), 1);
  EXPECT_EQ(parsed.at("kind"), "thing");
  EXPECT_EQ(parsed.at("checksum").get<std::uint32_t>(), crc32_of(payload.dump()));
}

TEST(Envelope, KnownCrc) { EXPECT_EQ(crc32_of("123456789"), 0xCBF43926u); }

TEST(Envelope, TamperingIsDetected) {
  const Json payload = {{"value", 41}};
  std::string text = encode_envelope("thing", payload);
  const auto pos = text.find("41");
  ASSERT_NE(pos, std::string::npos);
  text[pos + 1] = '2';
  EXPECT_TGF_ERROR(decode_envelope(text, "thing"), ErrorCode::CorruptFile);
  EXPECT_TGF_ERROR(decode_envelope(text, "thing", false), ErrorCode::CorruptFile);
}

TEST(Envelope, SchemaProblems) {
  const std::string good = encode_envelope("thing", Json{{"x", 1}});
  EXPECT_TGF_ERROR(decode_envelope(good, "other"), ErrorCode::SchemaMismatch);
  Json j = Json::parse(good);
  j["format_version"] = 2;
  EXPECT_TGF_ERROR(decode_envelope(j.dump(), "thing"), ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(decode_envelope("not json", "thing"), ErrorCode::CorruptFile);
  EXPECT_TGF_ERROR(decode_envelope("[1,2]", "thing"), ErrorCode::SchemaMismatch);
  Json no_sum = Json::parse(good);
  no_sum.erase("checksum");
  EXPECT_TGF_ERROR(decode_envelope(no_sum.dump(), "thing"), ErrorCode::SchemaMismatch);
  EXPECT_EQ(decode_envelope(no_sum.dump(), "thing", false), (Json{{"x", 1}}));
}

TEST(Codecs, RealsRoundTripBitExactly) {
  std::mt19937_64 gen(81);
  for (int i = 0; i < 2000; ++i) {
    const GraspPose g = oracle::random_grasp(gen, 1.0);
    const GraspPose back = pose_from_json(Json::parse(pose_to_json(g).dump()));
    ASSERT_EQ(back, g);
    ASSERT_EQ(back.width, g.width);
    const double raw = std::bit_cast<double>(gen() & 0x7FEFFFFFFFFFFFFFull);
    ASSERT_EQ(Json::parse(Json(raw).dump()).get<double>(), raw);
  }
}

TEST(Codecs, SceneRoundTrip) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Scene s = make_scene(desk_catalog(), SceneConfig{}, "scene_" + std::to_string(seed), seed);
    const std::string text = encode_envelope("scene", scene_to_json(s));
    ASSERT_EQ(scene_from_json(decode_envelope(text, "scene")), s);
  }
  EXPECT_TGF_ERROR(scene_from_json(Json{{"scene_id", "x"}}), ErrorCode::SchemaMismatch);
}

TEST(Codecs, CatalogRoundTripWithVerdicts) {
  std::vector<ObjectModel> cat = desk_catalog();
  const AnnotatedGrasp& g = cat[0].grasps[0];
  ASSERT_FALSE(g.tasks.empty());
  cat[0] = apply_verdict(cat[0], g.grasp_id, *g.tasks.begin(), Verdict::Rejected);
  const std::string text = encode_envelope("catalog", catalog_to_json(cat));
  const auto back = catalog_from_json(decode_envelope(text, "catalog"));
  ASSERT_EQ(back.size(), cat.size());
  for (std::size_t i = 0; i < cat.size(); ++i) {
    EXPECT_EQ(back[i].id, cat[i].id);
    EXPECT_EQ(back[i].category, cat[i].category);
    EXPECT_EQ(back[i].scale, cat[i].scale);
    EXPECT_EQ(back[i].mesh.vertices(), cat[i].mesh.vertices());
    EXPECT_EQ(back[i].mesh.faces(), cat[i].mesh.faces());
    EXPECT_EQ(back[i].affordances, cat[i].affordances);
    EXPECT_EQ(back[i].grasps, cat[i].grasps);
  }
}

TEST(Codecs, GraspsTripletsPredictionsReport) {
  const Scene s = make_scene(desk_catalog(), SceneConfig{}, "p", 4);
  const PropagatedGrasps pg = propagate_grasps(s, desk_catalog(), GripperSpec{});
  EXPECT_EQ(grasps_from_json(Json::parse(grasps_to_json(pg).dump())), pg);

  const auto trips = sample_triplets();
  ASSERT_FALSE(trips.empty());
  EXPECT_EQ(triplets_from_json(Json::parse(triplets_to_json(trips).dump())), trips);

  std::mt19937_64 gen(82);
  std::vector<PredictionSet> preds;
  for (const Triplet& t : trips) {
    PredictionSet p{t.triplet_id, {}};
    for (int i = 0; i < 3; ++i) p.grasps.push_back({oracle::random_grasp(gen), std::ldexp(1.0, -i) / 3});
    preds.push_back(p);
  }
  EXPECT_EQ(predictions_from_json(Json::parse(predictions_to_json(preds).dump())), preds);

  const EvalReport r = evaluate(preds, trips);
  EXPECT_EQ(report_from_json(Json::parse(report_to_json(r).dump())), r);
}

TEST(Codecs, PredictionsRejectMalformedInput) {
  EXPECT_TGF_ERROR(predictions_from_json(Json::array({Json{{"triplet_id", 3}}})), ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(pose_from_json(Json{{"rotation", {1, 0, 0}}, {"translation", {0, 0, 0}}, {"width", 0.0}}),
                   ErrorCode::SchemaMismatch);
  Json bad_rot = pose_to_json(GraspPose{});
  bad_rot["rotation"][0] = 2.0;
  EXPECT_ANY_THROW(pose_from_json(bad_rot));
}

TEST(Codecs, ManifestRoundTrip) {
  Manifest m;
  m.master_seed = 0xFFFFFFFFFFFFFFFFull;
  m.scene.placement.sigma = 0.07;
  m.scene.cameras.count = 3;
  m.gripper.max_width = 0.1;
  EXPECT_EQ(manifest_from_json(Json::parse(manifest_to_json(m).dump())), m);
}

TEST(Cloud, RoundTripBitExact) {
  const Scene s = make_scene(desk_catalog(), SceneConfig{}, "cloud", 2);
  const LabeledCloud c = render_cloud(s, 0, desk_catalog(), {.depth_noise = 0.001, .noise_seed = 1});
  const std::string bytes = encode_cloud(c);
  EXPECT_EQ(decode_cloud(bytes), c);
  EXPECT_EQ(decode_cloud(encode_cloud(LabeledCloud{})), LabeledCloud{});
  LabeledCloud bad = c;
  bad.object_ids.pop_back();
  EXPECT_TGF_ERROR(encode_cloud(bad), ErrorCode::LengthMismatch);
}

TEST(Cloud, FuzzCorpus) {
  const Scene s = make_scene(desk_catalog(), SceneConfig{}, "fuzz", 3);
  const std::string good = encode_cloud(render_cloud(s, 1, desk_catalog()));
  const std::size_t eol = good.find('\n');
  const Json header = Json::parse(good.substr(0, eol));
  const std::string body = good.substr(eol + 1);
  auto with_header = [&](const std::function<void(Json&)>& edit) {
    Json h = header;
    edit(h);
    return h.dump() + "\n" + body;
  };

  // Header-level problems.
  EXPECT_TGF_ERROR(decode_cloud(with_header([](Json& h) { h["object_id_count"] = h["point_count"].get<int>() - 1; })),
                   ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(decode_cloud(with_header([](Json& h) { h["triangle_id_count"] = 0; })), ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(decode_cloud(with_header([](Json& h) { h["format_version"] = 9; })), ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(decode_cloud(with_header([](Json& h) { h["encoding"] = "f32le"; })), ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(decode_cloud(with_header([](Json& h) { h.erase("scene_id"); })), ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(decode_cloud(with_header([](Json& h) { h["kind"] = "scene"; })), ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(decode_cloud("{broken\n" + body), ErrorCode::SchemaMismatch);
  EXPECT_TGF_ERROR(decode_cloud("no newline at all"), ErrorCode::SchemaMismatch);

  // Data-level problems.
  std::mt19937_64 gen(83);
  for (int i = 0; i < 200; ++i) {
    std::string flipped = good;
    const std::size_t at = eol + 1 + gen() % body.size();
    flipped[at] = static_cast<char>(flipped[at] ^ (1 << (gen() % 8)));
    ASSERT_THROW(
        {
          try {
            decode_cloud(flipped);
          } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::CorruptFile);
            throw;
          }
        },
        Error);
    const std::string truncated = good.substr(0, eol + 1 + gen() % body.size());
    EXPECT_TGF_ERROR(decode_cloud(truncated), ErrorCode::CorruptFile);
  }
  EXPECT_TGF_ERROR(decode_cloud(good + "x"), ErrorCode::CorruptFile);
}

TEST(Workspace, InitOpenAndAtomicWrites) {
  TempDir dir;
  Manifest m;
  m.master_seed = 17;
  const Workspace ws = Workspace::init(dir / "ws", m);
  for (const char* sub : Workspace::kSubdirs) EXPECT_TRUE(ws.exists(sub)) << sub;
  EXPECT_TGF_ERROR(Workspace::init(dir / "ws", m), ErrorCode::InvalidArgument);
  EXPECT_TGF_ERROR(Workspace::open(dir / "nothing"), ErrorCode::MissingDependency);
  const Workspace again = Workspace::open(dir / "ws");
  EXPECT_EQ(again.manifest(), m);

  ws.write_json("reports/x.json", "thing", Json{{"v", 1}});
  EXPECT_EQ(ws.read_json("reports/x.json", "thing"), (Json{{"v", 1}}));
  EXPECT_TGF_ERROR(ws.read_json("reports/missing.json", "thing"), ErrorCode::MissingDependency);
  ws.write_text("reports/x.json", "garbage");
  EXPECT_TGF_ERROR(ws.read_json("reports/x.json", "thing"), ErrorCode::CorruptFile);
  // No temp files left behind.
  for (const auto& e : std::filesystem::directory_iterator(ws.path("reports")))
    EXPECT_EQ(e.path().filename(), "x.json");

  ws.write_text("clouds/a.bin", "1");
  ws.reset_dir("clouds");
  EXPECT_FALSE(ws.exists("clouds/a.bin"));
  EXPECT_TRUE(ws.exists("clouds"));
}

TEST(Workspace, LockIsExclusiveAndStaleLocksAreTaken) {
  TempDir dir;
  {
    WorkspaceLock first(dir.path());
    EXPECT_TRUE(std::filesystem::exists(dir / ".lock"));
    EXPECT_TGF_ERROR(WorkspaceLock(dir.path()), ErrorCode::WorkspaceLocked);
    EXPECT_TGF_ERROR(WorkspaceLock(dir.path(), 30), ErrorCode::WorkspaceLocked);
  }
  EXPECT_FALSE(std::filesystem::exists(dir / ".lock"));

  testing_support::write_file(dir / ".lock", std::to_string(dead_pid()) + "\n");
  {
    WorkspaceLock taken(dir.path());
    EXPECT_EQ(std::stol(testing_support::read_file(dir / ".lock")), ::getpid());
  }
  EXPECT_FALSE(std::filesystem::exists(dir / ".lock"));
}

TEST(Workspace, VerdictLogAndReplay) {
  TempDir dir;
  const Workspace ws = Workspace::init(dir / "ws", Manifest{});
  EXPECT_TRUE(ws.read_verdicts().empty());
  const ObjectModel& obj = desk_catalog()[0];
  const AnnotatedGrasp& g = obj.grasps[0];
  const TaskLabel task = *g.tasks.begin();
  const std::vector<VerdictRecord> log{
      {obj.id, g.grasp_id, task, Verdict::Rejected, "ann", 100},
      {"ghost", "g", TaskLabel::Grasp, Verdict::Rejected, "ann", 101},
      {obj.id, "no_such_grasp", task, Verdict::Rejected, "ann", 102},
      {obj.id, g.grasp_id, TaskLabel::Wear, Verdict::Rejected, "ann", 103},
  };
  for (const auto& v : log) ws.append_verdict(v);
  ASSERT_EQ(ws.read_verdicts(), log);

  const auto replayed = replay_verdicts(desk_catalog(), log);
  ASSERT_EQ(replayed.size(), desk_catalog().size());
  const AnnotatedGrasp* rg = replayed[0].find_grasp(g.grasp_id);
  EXPECT_EQ(rg->verdicts.at(task), Verdict::Rejected);
  EXPECT_FALSE(rg->effective_tasks().count(task));
  for (std::size_t i = 1; i < replayed.size(); ++i) EXPECT_EQ(replayed[i].grasps, desk_catalog()[i].grasps);

  // Later records win.
  std::vector<VerdictRecord> flip = log;
  flip.push_back({obj.id, g.grasp_id, task, Verdict::Accepted, "ann", 104});
  EXPECT_EQ(replay_verdicts(desk_catalog(), flip)[0].find_grasp(g.grasp_id)->verdicts.at(task), Verdict::Accepted);

  std::ofstream(ws.verdict_log(), std::ios::app) << "{not json\n";
  EXPECT_ANY_THROW(ws.read_verdicts());
  try {
    ws.read_verdicts();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == ErrorCode::CorruptFile || e.code() == ErrorCode::SchemaMismatch);
    EXPECT_NE(std::string(e.what()).find("5"), std::string::npos) << e.what();
  }
}

TEST(Workspace, VerdictRecordValidation) {
  const VerdictRecord v{"o", "g", TaskLabel::Pour, Verdict::Accepted, "me", 5};
  EXPECT_EQ(verdict_from_json(verdict_to_json(v)), v);
  Json bad = verdict_to_json(v);
  bad["task"] = "Fly";
  EXPECT_TGF_ERROR(verdict_from_json(bad), ErrorCode::SchemaMismatch);
  bad = verdict_to_json(v);
  bad.erase("grasp_id");
  EXPECT_TGF_ERROR(verdict_from_json(bad), ErrorCode::SchemaMismatch);
}

TEST(Workspace, RootFromEnvironment) {
  ::unsetenv("TGF_WORKSPACE");
  EXPECT_EQ(default_workspace_root("fallback"), std::filesystem::path("fallback"));
  ::setenv("TGF_WORKSPACE", "/tmp/elsewhere", 1);
  EXPECT_EQ(default_workspace_root("fallback"), std::filesystem::path("/tmp/elsewhere"));
  ::unsetenv("TGF_WORKSPACE");
}
