#include "geogp/skill_library.hpp"

#include "geogp/error.hpp"
#include "geogp/trajectory_io.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>

namespace geogp {

namespace fs = std::filesystem;

namespace {

constexpr double kAmbiguityRatio = 0.1;

nlohmann::ordered_json config_record(const SkillModel& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["w"] = s.config.window;
  j["C"] = s.config.checkpoints;
  j["signal_variance"] = s.config.signal_variance;
  j["noise_variance"] = s.config.noise_variance;
  j["length_scales"] = s.config.length_scales;
  j["sample_rate_hz"] = s.config.sample_rate_hz;
  j["created_at"] = s.created_at;
  return j;
}

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "parse error in " + path.filename().string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

SkillModel learn_skill(const Trajectory& demo, std::string id, const GeoConfig& config,
                       std::string created_at) {
  SkillModel s;
  s.id = std::move(id);
  s.demonstration = demo;
  s.config = config;
  s.model = fit_geo_model(demo, config);
  s.created_at = created_at.empty() ? utc_timestamp() : std::move(created_at);
  return s;
}

ClassificationResult classify(const Trajectory& prompt, std::span<const SkillPtr> skills,
                              std::optional<std::size_t> k) {
  if (skills.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "classification needs a non-empty library");
  }
  ClassificationResult result;
  bool any_scaled = false;
  for (const auto& skill : skills) {
    const PromptContext ctx = make_context(skill->model, prompt, k, true);
    const Replay replay = teacher_forced_replay(skill->model, ctx);
    result.scores[skill->id] = {replay.score, ctx.lambda, ctx.rotation, ctx.scale_fallback};
    any_scaled = any_scaled || !ctx.scale_fallback;
  }
  if (!any_scaled) {
    throw Error(ErrorCode::kAmbiguousPrompt, "ambiguous prompt: insufficient length");
  }

  // std::map iterates ids in lexicographic order, so strict < keeps the
  // smaller id on ties.
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  for (const auto& [id, s] : result.scores) {
    if (s.score < best) {
      second = best;
      best = s.score;
      result.selected = id;
    } else if (s.score < second) {
      second = s.score;
    }
  }
  if (result.scores.size() > 1) {
    result.margin = second - best;
    result.ambiguous = result.margin < kAmbiguityRatio * best;
  }
  return result;
}

bool SkillLibrary::contains(const std::string& id) const {
  return static_cast<bool>(find(id));
}

SkillPtr SkillLibrary::find(const std::string& id) const {
  for (const auto& s : skills_) {
    if (s->id == id) return s;
  }
  return nullptr;
}

void SkillLibrary::add(SkillModel skill) {
  if (contains(skill.id)) {
    throw Error(ErrorCode::kIdConflict, "id conflict: '" + skill.id + "' already exists");
  }
  skills_.push_back(std::make_shared<const SkillModel>(std::move(skill)));
}

const SkillModel& SkillLibrary::learn(const Trajectory& demo, const std::string& id,
                                      const GeoConfig& config) {
  if (contains(id)) {
    throw Error(ErrorCode::kIdConflict, "id conflict: '" + id + "' already exists");
  }
  add(learn_skill(demo, id, config));
  return *skills_.back();
}

ClassificationResult SkillLibrary::classify(const Trajectory& prompt,
                                            std::optional<std::size_t> k) const {
  return geogp::classify(prompt, skills_, k);
}

void save_library(const SkillLibrary& library, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());

  nlohmann::ordered_json manifest;
  manifest["version"] = kLibraryFormatVersion;
  manifest["skills"] = nlohmann::ordered_json::array();
  std::size_t index = 0;
  for (const auto& skill : library.skills()) {
    char stem[32];
    std::snprintf(stem, sizeof(stem), "skill_%04zu", index++);
    const std::string demo_file = std::string(stem) + ".jsonl";
    const std::string config_file = std::string(stem) + ".config.json";
    write_trajectory(dir / demo_file, skill->demonstration);
    write_text(dir / config_file, config_record(*skill).dump(2) + "\n");
    manifest["skills"].push_back(
        {{"id", skill->id}, {"demonstration", demo_file}, {"config", config_file}});
  }
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

SkillLibrary load_library(const fs::path& dir) {
  const nlohmann::json manifest = read_json_file(dir / "manifest.json");
  if (!manifest.contains("version") || !manifest["version"].is_number_integer() ||
      manifest["version"].get<int>() != kLibraryFormatVersion) {
    throw Error(ErrorCode::kIncompatibleVersion, "incompatible library version");
  }
  SkillLibrary library;
  try {
    for (const auto& entry : manifest.at("skills")) {
      const auto id = entry.at("id").get<std::string>();
      const auto cfg = read_json_file(dir / entry.at("config").get<std::string>());
      GeoConfig config;
      config.window = cfg.at("w").get<int>();
      config.checkpoints = cfg.at("C").get<int>();
      config.signal_variance = cfg.at("signal_variance").get<double>();
      config.noise_variance = cfg.at("noise_variance").get<double>();
      config.length_scales = cfg.at("length_scales").get<std::vector<double>>();
      config.sample_rate_hz = cfg.at("sample_rate_hz").get<double>();
      const Trajectory demo =
          read_trajectory(dir / entry.at("demonstration").get<std::string>());
      library.add(learn_skill(demo, id, config, cfg.value("created_at", std::string{})));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("parse error in library records: ") + e.what());
  }
  return library;
}

}  // namespace geogp
