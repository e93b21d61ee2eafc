#pragma once

#include "geogp/skill_library.hpp"

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace geogp {

enum class SessionState { kIdle, kCollectingDemo, kCollectingPrompt, kPredicting };

std::string_view to_string(SessionState state);

/// Library shared by every session: concurrent reads, exclusive writes.
class SharedLibrary {
 public:
  SharedLibrary() = default;
  explicit SharedLibrary(SkillLibrary library) : library_(std::move(library)) {}

  std::vector<SkillPtr> snapshot() const;
  std::size_t size() const;

  /// Adds the skill under `label`, or under label-2, label-3, ... if taken.
  /// Returns the id actually used.
  std::string add_unique(SkillModel skill, const std::string& label);

  void save(const std::filesystem::path& dir) const;

 private:
  mutable std::shared_mutex mutex_;
  SkillLibrary library_;
};

struct PromptStatus {
  bool classified = false;
  std::size_t samples = 0;  // resampled prompt length
  std::string detail;       // reason while still collecting
  std::optional<ClassificationResult> classification;
};

struct FinalizeResult {
  std::string skill;
  ClassificationResult classification;
  Rollout rollout;
  bool replayed = false;  // served from the cache of an earlier finalize
};

struct SessionOptions {
  GeoConfig config;
  std::size_t capacity = 64;
};

/// Demonstrate / prompt / predict sessions over a shared skill library.
/// Thread-safe; calls on one session are serialized.
class SessionManager {
 public:
  explicit SessionManager(SessionOptions options = {},
                          std::shared_ptr<SharedLibrary> library = nullptr);

  /// Fresh UUID v4. Throws kCapacity when full.
  std::string create_session();
  void close_session(const std::string& id);
  bool has_session(const std::string& id) const;
  SessionState state(const std::string& id) const;
  std::size_t session_count() const;

  /// Resamples the raw stroke, learns it and registers it. Returns the skill id.
  std::string submit_demonstration(const std::string& id, std::span<const Sample> points,
                                   const std::string& label);

  /// Appends raw pointer samples (timestamps must not go backwards) and
  /// reclassifies once the buffer allows it.
  PromptStatus stream_prompt(const std::string& id, std::span<const Sample> points);

  /// Classifies the buffered prompt and rolls out the selected skill. With an
  /// empty buffer, replays the previous result if there is one.
  FinalizeResult finalize_prompt(const std::string& id);

  const SessionOptions& options() const { return options_; }
  SharedLibrary& library() { return *library_; }

 private:
  struct Session {
    std::mutex mutex;
    SessionState state = SessionState::kIdle;
    std::vector<Sample> prompt;
    std::optional<FinalizeResult> last;
  };

  std::shared_ptr<Session> get(const std::string& id) const;
  Trajectory resampled_prompt(const Session& s) const;

  SessionOptions options_;
  std::shared_ptr<SharedLibrary> library_;
  mutable std::shared_mutex sessions_mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
};

std::string make_uuid_v4();

}  // namespace geogp
