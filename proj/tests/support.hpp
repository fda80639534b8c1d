#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "tgf/catalog.hpp"
#include "tgf/desk_assets.hpp"
#include "tgf/error.hpp"

namespace testing_support {

namespace fs = std::filesystem;

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("tgf_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const fs::path& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Axis-aligned cube [lo, lo + edge]^3 with outward faces.
inline tgf::TriangleMesh cube(double edge = 1.0, const tgf::Vec3& lo = tgf::Vec3::Zero()) {
  return tgf::make_box(lo, lo + tgf::Vec3::Constant(edge));
}

inline tgf::TriangleMesh centered_box(const tgf::Vec3& half) { return tgf::make_box(-half, half); }

/// Converts a procedural asset to a labeled catalog entry, as ingest does.
inline tgf::ObjectModel to_object(const tgf::DeskAsset& a, const tgf::GripperSpec& spec) {
  tgf::ObjectModel obj;
  obj.id = a.id;
  obj.category = a.category;
  obj.scale = a.scale;
  obj.mesh = a.mesh.scaled(a.scale);
  obj.affordances = a.affordances;
  obj.grasps = a.grasps;
  obj.validate();
  return tgf::assign_task_labels(obj, spec);
}

/// The procedural desk catalog (built once per process).
inline const std::vector<tgf::ObjectModel>& desk_catalog() {
  static const std::vector<tgf::ObjectModel> catalog = [] {
    const tgf::GripperSpec spec;
    std::vector<tgf::ObjectModel> out;
    for (const auto& a : tgf::build_desk_assets(spec, 0xA55E7)) out.push_back(to_object(a, spec));
    return out;
  }();
  return catalog;
}

inline const tgf::ObjectModel& desk_object(tgf::Category c, int variant = 0) {
  int seen = 0;
  for (const auto& o : desk_catalog())
    if (o.category == c && seen++ == variant) return o;
  throw tgf::Error(tgf::ErrorCode::UnknownObject, "no desk object of that category");
}

}  // namespace testing_support

#define EXPECT_TGF_ERROR(stmt, expected_code)                                  \
  do {                                                                         \
    try {                                                                      \
      stmt;                                                                    \
      ADD_FAILURE() << "expected " << tgf::to_string(expected_code);           \
    } catch (const tgf::Error& e) {                                            \
      EXPECT_EQ(e.code(), expected_code) << e.what();                          \
    }                                                                          \
  } while (0)
