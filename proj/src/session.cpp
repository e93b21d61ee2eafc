#include "geogp/session.hpp"

#include "geogp/error.hpp"

#include <cstdio>
#include <cmath>
#include <limits>
#include <random>

namespace geogp {

namespace {

Error not_found(const std::string& id) {
  return Error(ErrorCode::kNotFound, "unknown session '" + id + "'");
}

}  // namespace

std::string_view to_string(SessionState state) {
  switch (state) {
    case SessionState::kIdle: return "idle";
    case SessionState::kCollectingDemo: return "collecting_demo";
    case SessionState::kCollectingPrompt: return "collecting_prompt";
    case SessionState::kPredicting: return "predicting";
  }
  return "unknown";
}

std::string make_uuid_v4() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const std::uint64_t hi = (rng() & ~0xF000ull) | 0x4000ull;
  const std::uint64_t lo = (rng() & ~(0xC000ull << 48)) | (0x8000ull << 48);
  char buf[37];
  std::snprintf(buf, sizeof(buf), "%08x-%04x-%04x-%04x-%012llx",
                static_cast<unsigned>(hi >> 32), static_cast<unsigned>((hi >> 16) & 0xFFFF),
                static_cast<unsigned>(hi & 0xFFFF), static_cast<unsigned>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xFFFFFFFFFFFFull));
  return buf;
}

std::vector<SkillPtr> SharedLibrary::snapshot() const {
  std::shared_lock lock(mutex_);
  return library_.skills();
}

std::size_t SharedLibrary::size() const {
  std::shared_lock lock(mutex_);
  return library_.size();
}

std::string SharedLibrary::add_unique(SkillModel skill, const std::string& label) {
  const std::string base = label.empty() ? "skill" : label;
  std::unique_lock lock(mutex_);
  std::string id = base;
  for (int n = 2; library_.contains(id); ++n) id = base + "-" + std::to_string(n);
  skill.id = id;
  library_.add(std::move(skill));
  return id;
}

void SharedLibrary::save(const std::filesystem::path& dir) const {
  std::shared_lock lock(mutex_);
  save_library(library_, dir);
}

SessionManager::SessionManager(SessionOptions options, std::shared_ptr<SharedLibrary> library)
    : options_(std::move(options)),
      library_(library ? std::move(library) : std::make_shared<SharedLibrary>()) {
  options_.config.validate();
}

std::string SessionManager::create_session() {
  std::unique_lock lock(sessions_mutex_);
  if (sessions_.size() >= options_.capacity) {
    throw Error(ErrorCode::kCapacity,
                "capacity exceeded: " + std::to_string(options_.capacity) + " sessions open");
  }
  std::string id;
  do {
    id = make_uuid_v4();
  } while (sessions_.count(id));
  sessions_.emplace(id, std::make_shared<Session>());
  return id;
}

void SessionManager::close_session(const std::string& id) {
  std::unique_lock lock(sessions_mutex_);
  if (!sessions_.erase(id)) throw not_found(id);
}

bool SessionManager::has_session(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.count(id) > 0;
}

std::size_t SessionManager::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

std::shared_ptr<SessionManager::Session> SessionManager::get(const std::string& id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw not_found(id);
  return it->second;
}

SessionState SessionManager::state(const std::string& id) const {
  const auto s = get(id);
  std::lock_guard lock(s->mutex);
  return s->state;
}

std::string SessionManager::submit_demonstration(const std::string& id,
                                                 std::span<const Sample> points,
                                                 const std::string& label) {
  const auto s = get(id);
  std::lock_guard lock(s->mutex);
  if (s->state != SessionState::kIdle) {
    throw Error(ErrorCode::kInvalidState, "cannot submit a demonstration while " +
                                              std::string(to_string(s->state)));
  }
  s->state = SessionState::kCollectingDemo;
  try {
    const Trajectory demo = resample(points, options_.config.sample_rate_hz, label);
    SkillModel skill = learn_skill(demo, label, options_.config);
    const std::string skill_id = library_->add_unique(std::move(skill), label);
    s->state = SessionState::kIdle;
    return skill_id;
  } catch (...) {
    s->state = SessionState::kIdle;
    throw;
  }
}

Trajectory SessionManager::resampled_prompt(const Session& s) const {
  return resample(s.prompt, options_.config.sample_rate_hz, "prompt");
}

PromptStatus SessionManager::stream_prompt(const std::string& id,
                                           std::span<const Sample> points) {
  const auto s = get(id);
  std::lock_guard lock(s->mutex);
  if (s->state != SessionState::kIdle && s->state != SessionState::kCollectingPrompt) {
    throw Error(ErrorCode::kInvalidState,
                "cannot stream a prompt while " + std::string(to_string(s->state)));
  }
  double last_t = s->prompt.empty() ? -std::numeric_limits<double>::infinity()
                                    : s->prompt.back().t;
  for (const auto& p : points) {
    if (!std::isfinite(p.t) || !p.p.allFinite()) {
      throw Error(ErrorCode::kInvalidTrajectory, "invalid trajectory: non-finite prompt point");
    }
    if (p.t < last_t) {
      throw Error(ErrorCode::kInvalidTrajectory,
                  "invalid trajectory: prompt timestamps went backwards");
    }
    last_t = p.t;
  }
  if (s->state == SessionState::kIdle) {
    s->prompt.clear();
    s->last.reset();
    s->state = SessionState::kCollectingPrompt;
  }
  s->prompt.insert(s->prompt.end(), points.begin(), points.end());

  PromptStatus status;
  const std::size_t need = static_cast<std::size_t>(options_.config.window) + 1;
  if (s->prompt.size() < 2) {
    status.samples = s->prompt.size();
    status.detail = "insufficient length";
    return status;
  }
  const Trajectory prompt = resampled_prompt(*s);
  status.samples = prompt.size();
  if (prompt.size() < need) {
    status.detail = "insufficient length";
    return status;
  }
  const auto skills = library_->snapshot();
  if (skills.empty()) {
    status.detail = "library is empty";
    return status;
  }
  try {
    status.classification = classify(prompt, skills);
    status.classified = true;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kAmbiguousPrompt && e.code() != ErrorCode::kPromptTooShort &&
        e.code() != ErrorCode::kWindowUnderflow) {
      throw;
    }
    status.detail = "insufficient length";
  }
  return status;
}

FinalizeResult SessionManager::finalize_prompt(const std::string& id) {
  const auto s = get(id);
  std::lock_guard lock(s->mutex);
  if (s->state != SessionState::kCollectingPrompt) {
    if (s->state == SessionState::kIdle && s->last) {
      FinalizeResult replay = *s->last;
      replay.replayed = true;
      return replay;
    }
    throw Error(ErrorCode::kInvalidState, "cannot finalize an empty prompt");
  }
  s->state = SessionState::kPredicting;
  try {
    const Trajectory prompt = resampled_prompt(*s);
    const auto skills = library_->snapshot();
    if (skills.empty()) throw Error(ErrorCode::kInvalidState, "library is empty");
    FinalizeResult result;
    result.classification = classify(prompt, skills);
    result.skill = result.classification.selected;
    SkillPtr selected;
    for (const auto& sk : skills) {
      if (sk->id == result.skill) selected = sk;
    }
    const PromptContext ctx = make_context(selected->model, prompt);
    result.rollout = rollout(selected->model, ctx);
    s->last = result;
    s->prompt.clear();
    s->state = SessionState::kIdle;
    return result;
  } catch (...) {
    s->prompt.clear();
    s->state = SessionState::kIdle;
    throw;
  }
}

}  // namespace geogp
