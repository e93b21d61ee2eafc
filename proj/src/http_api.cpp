#include "geogp/http_api.hpp"

#include "geogp/error.hpp"

#include <httplib.h>

#include <sstream>

namespace geogp {

namespace {

using nlohmann::json;

constexpr const char* kJson = "application/json";
constexpr const char* kNdjson = "application/x-ndjson";

Sample sample_from(const json& j) {
  return {j.at("t").get<double>(), Vec2(j.at("x").get<double>(), j.at("y").get<double>())};
}

json classification_json(const ClassificationResult& c) {
  json scores = json::object();
  for (const auto& [id, s] : c.scores) {
    scores[id] = {{"score", s.score}, {"lambda", s.lambda}, {"rotation", s.rotation},
                  {"scale_fallback", s.scale_fallback}};
  }
  return {{"skill", c.selected}, {"margin", c.margin}, {"lambda", c.best().lambda},
          {"rotation", c.best().rotation}, {"ambiguous", c.ambiguous}, {"scores", scores}};
}

void send_error(httplib::Response& res, const Error& e, json detail = json::object()) {
  res.status = http_status_for(e.code());
  res.set_content(error_body(e, std::move(detail)).dump(), kJson);
}

template <typename F>
void guarded(httplib::Response& res, const std::string& session, F&& body) {
  json detail = json::object();
  if (!session.empty()) detail["session"] = session;
  try {
    body();
  } catch (const Error& e) {
    send_error(res, e, detail);
  } catch (const std::exception& e) {
    send_error(res, Error(ErrorCode::kNumeric, e.what()), detail);
  }
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kCapacity: return 503;
    case ErrorCode::kInvalidState:
    case ErrorCode::kIdConflict: return 409;
    case ErrorCode::kParse:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kIncompatibleVersion: return 400;
    case ErrorCode::kNumeric:
    case ErrorCode::kSingularGram:
    case ErrorCode::kIo: return 500;
    default: return 422;
  }
}

json error_body(const Error& e, json detail) {
  return {{"code", std::string(to_string(e.code()))}, {"message", e.what()},
          {"detail", std::move(detail)}};
}

PointBatch parse_point_batch(const std::string& body) {
  PointBatch batch;
  // A single JSON document first; otherwise one record per line.
  try {
    const json doc = json::parse(body);
    if (doc.is_object() && doc.contains("points")) {
      batch.label = doc.value("label", std::string{});
      for (const auto& p : doc.at("points")) batch.points.push_back(sample_from(p));
      return batch;
    }
    if (doc.is_array()) {
      for (const auto& p : doc) batch.points.push_back(sample_from(p));
      return batch;
    }
  } catch (const json::exception&) {
  }
  std::istringstream in(body);
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    ++record;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (!j.contains("t") && j.contains("sample_rate_hz")) {
        batch.label = j.value("label", std::string{});
        continue;
      }
      batch.points.push_back(sample_from(j));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParse,
                  "parse error at record " + std::to_string(record) + ": " + e.what());
    }
  }
  return batch;
}

json prompt_status_json(const PromptStatus& status) {
  json j = {{"status", status.classified ? "classified" : "collecting"},
            {"samples", status.samples}};
  if (!status.detail.empty()) j["detail"] = status.detail;
  if (status.classification) j["classification"] = classification_json(*status.classification);
  return j;
}

void install_routes(httplib::Server& server, SessionManager& sessions, HttpApiOptions options) {
  server.Post("/sessions", [&sessions](const httplib::Request&, httplib::Response& res) {
    guarded(res, {}, [&] {
      const std::string id = sessions.create_session();
      res.status = 201;
      res.set_content(json{{"id", id}, {"state", "idle"}}.dump(), kJson);
    });
  });

  server.Get(R"(/sessions/([^/]+))", [&sessions](const httplib::Request& req,
                                                      httplib::Response& res) {
    const std::string id = req.matches[1];
    guarded(res, id, [&] {
      res.set_content(json{{"id", id}, {"state", to_string(sessions.state(id))}}.dump(), kJson);
    });
  });

  server.Delete(R"(/sessions/([^/]+))", [&sessions](const httplib::Request& req,
                                                         httplib::Response& res) {
    const std::string id = req.matches[1];
    guarded(res, id, [&] {
      sessions.close_session(id);
      res.status = 204;
    });
  });

  server.Get("/skills", [&sessions](const httplib::Request&, httplib::Response& res) {
    guarded(res, {}, [&] {
      json skills = json::array();
      for (const auto& s : sessions.library().snapshot()) {
        skills.push_back({{"id", s->id}, {"samples", s->demonstration.size()},
                          {"r_max", s->r_max()}, {"created_at", s->created_at}});
      }
      res.set_content(json{{"skills", skills}}.dump(), kJson);
    });
  });

  server.Post(R"(/sessions/([^/]+)/demonstration)",
              [&sessions, options](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                guarded(res, id, [&] {
                  PointBatch batch = parse_point_batch(req.body);
                  if (req.has_param("label")) batch.label = req.get_param_value("label");
                  const std::string skill =
                      sessions.submit_demonstration(id, batch.points, batch.label);
                  if (options.library_dir) sessions.library().save(*options.library_dir);
                  res.status = 201;
                  res.set_content(json{{"skill_id", skill}}.dump(), kJson);
                });
              });

  server.Post(R"(/sessions/([^/]+)/prompt/points)",
              [&sessions](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                guarded(res, id, [&] {
                  const PointBatch batch = parse_point_batch(req.body);
                  const PromptStatus status = sessions.stream_prompt(id, batch.points);
                  res.set_content(prompt_status_json(status).dump(), kJson);
                });
              });

  server.Post(R"(/sessions/([^/]+)/prompt/finalize)",
              [&sessions](const httplib::Request& req, httplib::Response& res) {
                const std::string id = req.matches[1];
                guarded(res, id, [&] {
                  const FinalizeResult result = sessions.finalize_prompt(id);
                  // The rollout is computed up front; the stream only paces delivery.
                  auto lines = std::make_shared<std::vector<std::string>>();
                  for (std::size_t i = 0; i < result.rollout.positions.size(); ++i) {
                    lines->push_back(rollout_point_record(result.rollout, i).dump() + "\n");
                  }
                  json trailer = rollout_trailer(result.rollout);
                  trailer["skill"] = result.skill;
                  trailer["margin"] = result.classification.margin;
                  trailer["ambiguous"] = result.classification.ambiguous;
                  trailer["replayed"] = result.replayed;
                  lines->push_back(trailer.dump() + "\n");
                  auto next = std::make_shared<std::size_t>(0);
                  res.set_chunked_content_provider(
                      kNdjson, [lines, next](std::size_t, httplib::DataSink& sink) {
                        if (*next < lines->size()) {
                          const std::string& l = (*lines)[(*next)++];
                          if (!sink.write(l.data(), l.size())) return false;
                        }
                        if (*next == lines->size()) sink.done();
                        return true;
                      });
                });
              });
}

}  // namespace geogp
