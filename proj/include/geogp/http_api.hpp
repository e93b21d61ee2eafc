#pragma once

#include "geogp/error.hpp"
#include "geogp/session.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace httplib {
class Server;
}

namespace geogp {

struct HttpApiOptions {
  /// When set, the library is saved here after every learned skill.
  std::optional<std::filesystem::path> library_dir;
};

/// Registers the session routes on `server`:
///   POST   /sessions
///   GET    /sessions/{id}
///   DELETE /sessions/{id}
///   POST   /sessions/{id}/demonstration
///   POST   /sessions/{id}/prompt/points
///   POST   /sessions/{id}/prompt/finalize   (chunked NDJSON rollout stream)
///   GET    /skills
/// Errors come back as {"code", "message", "detail"}.
void install_routes(httplib::Server& server, SessionManager& sessions,
                    HttpApiOptions options = {});

/// Point batches: either {"label"?, "points": [{"t","x","y"}, ...]} or NDJSON
/// with one {"t","x","y"} per line and an optional {"sample_rate_hz","label"}
/// header line.
struct PointBatch {
  std::string label;
  std::vector<Sample> points;
};
PointBatch parse_point_batch(const std::string& body);

nlohmann::json prompt_status_json(const PromptStatus& status);
nlohmann::json error_body(const Error& e, nlohmann::json detail = nlohmann::json::object());
int http_status_for(ErrorCode code);

}  // namespace geogp
