#pragma once

#include "geogp/predictor.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace geogp {

/// One demonstration and everything learned from it.
struct SkillModel {
  std::string id;
  Trajectory demonstration;
  GeoConfig config;
  GeoModel model;
  std::string created_at;  // ISO 8601, UTC

  const MultiGP& models() const { return model.gp; }
  const CheckpointSet& checkpoints() const { return model.checkpoints; }
  double r_max() const { return model.r_max; }
  int window() const { return model.window; }
};

SkillModel learn_skill(const Trajectory& demo, std::string id, const GeoConfig& config,
                       std::string created_at = {});

struct SkillScore {
  double score = 0.0;  // sum of teacher-forced position errors
  double lambda = 1.0;
  double rotation = 0.0;
  bool scale_fallback = false;
};

struct ClassificationResult {
  std::map<std::string, SkillScore> scores;
  std::string selected;
  double margin = 0.0;  // second best minus best; 0 for a single skill
  bool ambiguous = false;  // margin below 10% of the best score

  const SkillScore& best() const { return scores.at(selected); }
};

using SkillPtr = std::shared_ptr<const SkillModel>;

/// Scores every skill on the prompt prefix ending at k (default: the whole
/// prompt) and selects the minimum. Ties go to the lexicographically smaller id.
ClassificationResult classify(const Trajectory& prompt, std::span<const SkillPtr> skills,
                              std::optional<std::size_t> k = std::nullopt);

/// Insertion-ordered collection with unique ids. Not synchronized.
class SkillLibrary {
 public:
  const std::vector<SkillPtr>& skills() const { return skills_; }
  std::size_t size() const { return skills_.size(); }
  bool empty() const { return skills_.empty(); }
  bool contains(const std::string& id) const;
  SkillPtr find(const std::string& id) const;

  /// Throws kIdConflict for a duplicate id.
  void add(SkillModel skill);
  const SkillModel& learn(const Trajectory& demo, const std::string& id,
                          const GeoConfig& config);

  ClassificationResult classify(const Trajectory& prompt,
                                std::optional<std::size_t> k = std::nullopt) const;

 private:
  std::vector<SkillPtr> skills_;
};

inline constexpr int kLibraryFormatVersion = 1;

/// One directory: manifest.json plus a trajectory file and a config record per
/// skill. Models are refit on load.
void save_library(const SkillLibrary& library, const std::filesystem::path& dir);
SkillLibrary load_library(const std::filesystem::path& dir);

std::string utc_timestamp();

}  // namespace geogp
