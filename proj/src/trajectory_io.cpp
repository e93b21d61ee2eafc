#include "geogp/trajectory_io.hpp"

#include "geogp/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace geogp {

namespace {

Error parse_error(std::size_t record, const std::string& what) {
  return Error(ErrorCode::kParse,
               "parse error at record " + std::to_string(record) + ": " + what);
}

}  // namespace

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  nlohmann::ordered_json header;
  header["sample_rate_hz"] = traj.sample_rate_hz();
  header["label"] = traj.label();
  out << header.dump() << '\n';
  for (const auto& s : traj.samples()) {
    nlohmann::ordered_json rec;
    rec["t"] = s.t;
    rec["x"] = s.p.x();
    rec["y"] = s.p.y();
    out << rec.dump() << '\n';
  }
}

std::string trajectory_to_ndjson(const Trajectory& traj) {
  std::ostringstream out;
  write_trajectory(out, traj);
  return out.str();
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  write_trajectory(out, traj);
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

RawTrajectory parse_raw_trajectory(std::istream& in) {
  RawTrajectory raw;
  std::string line;
  std::size_t record = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++record;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      if (!have_header) {
        raw.sample_rate_hz = j.at("sample_rate_hz").get<double>();
        raw.label = j.value("label", std::string{});
        have_header = true;
        continue;
      }
      raw.samples.push_back(
          {j.at("t").get<double>(), Vec2(j.at("x").get<double>(), j.at("y").get<double>())});
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(record, e.what());
    }
  }
  if (!have_header) throw parse_error(record + 1, "missing header");
  return raw;
}

Trajectory read_trajectory(std::istream& in) {
  RawTrajectory raw = parse_raw_trajectory(in);
  return Trajectory(std::move(raw.samples), raw.sample_rate_hz, std::move(raw.label));
}

Trajectory read_trajectory(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return read_trajectory(in);
}

Trajectory trajectory_from_ndjson(const std::string& text) {
  std::istringstream in(text);
  return read_trajectory(in);
}

}  // namespace geogp
