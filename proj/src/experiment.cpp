#include "geogp/experiment.hpp"

#include "geogp/baseline.hpp"
#include "geogp/error.hpp"
#include "geogp/trajectory_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <random>
#include <numbers>
#include <thread>

namespace geogp::eval {

namespace fs = std::filesystem;

namespace {

Error spec_error(const std::string& what) {
  return Error(ErrorCode::kInvalidArgument, "spec error: " + what);
}

std::string num(double v) { return nlohmann::json(v).dump(); }

Transform parse_transform(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 1) {
    throw spec_error("transform must be an object with exactly one key");
  }
  const auto& [key, value] = *j.items().begin();
  Transform t;
  if (key == "identity") return t;
  if (key == "translate") {
    if (!value.is_array() || value.size() != 2) throw spec_error("translate expects [x, y]");
    t.steps.push_back(Translate{Vec2(value[0].get<double>(), value[1].get<double>())});
  } else if (key == "rotate") {
    t.steps.push_back(Rotate{value.get<double>()});
  } else if (key == "rotate_deg") {
    t.steps.push_back(Rotate{value.get<double>() * std::numbers::pi / 180.0});
  } else if (key == "scale") {
    const double s = value.get<double>();
    if (!(s > 0.0)) throw spec_error("scale must be positive");
    t.steps.push_back(Scale{s});
  } else if (key == "compose") {
    if (!value.is_array()) throw spec_error("compose expects a list of transforms");
    for (const auto& sub : value) {
      const Transform inner = parse_transform(sub);
      t.steps.insert(t.steps.end(), inner.steps.begin(), inner.steps.end());
    }
  } else {
    throw spec_error("unknown transform '" + key + "'");
  }
  return t;
}

nlohmann::json rollout_json(const Rollout& r) {
  nlohmann::json points = nlohmann::json::array();
  for (std::size_t i = 0; i < r.positions.size(); ++i) {
    points.push_back(rollout_point_record(r, i));
  }
  return {{"points", std::move(points)}, {"trailer", rollout_trailer(r)}};
}

Rollout rollout_from_json(const nlohmann::json& j) {
  std::string text;
  for (const auto& p : j.at("points")) text += p.dump() + "\n";
  text += j.at("trailer").dump() + "\n";
  return rollout_from_ndjson(text);
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

}  // namespace

Trajectory Transform::apply(const Trajectory& traj) const {
  Trajectory out = traj;
  for (const auto& step : steps) {
    if (const auto* t = std::get_if<Translate>(&step)) out = geogp::translate(out, t->offset);
    if (const auto* r = std::get_if<Rotate>(&step)) out = rotate_about_start(out, r->angle);
    if (const auto* s = std::get_if<Scale>(&step)) out = scale_about_start(out, s->factor);
  }
  return out;
}

std::string Transform::label() const {
  std::string out;
  for (const auto& step : steps) {
    std::string part;
    if (std::holds_alternative<Identity>(step)) part = "identity";
    if (const auto* t = std::get_if<Translate>(&step)) {
      part = "translate(" + num(t->offset.x()) + "," + num(t->offset.y()) + ")";
    }
    if (const auto* r = std::get_if<Rotate>(&step)) part = "rotate(" + num(r->angle) + ")";
    if (const auto* s = std::get_if<Scale>(&step)) part = "scale(" + num(s->factor) + ")";
    out += (out.empty() ? "" : "+") + part;
  }
  return out.empty() ? "identity" : out;
}

void ExperimentSpec::validate() const {
  if (corpus.empty()) throw spec_error("corpus must name at least one shape");
  const auto& known = corpus::shape_names();
  for (const auto& s : corpus) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw spec_error("unknown shape '" + s + "'");
    }
  }
  if (transforms.empty()) throw spec_error("at least one transform required");
  if (!(prompt_fraction > 0.0 && prompt_fraction <= 1.0)) {
    throw spec_error("prompt_fraction must lie in (0, 1]");
  }
  if (noise_sigma && !(*noise_sigma >= 0.0)) throw spec_error("noise_sigma must be >= 0");
  if (trials < 1) throw spec_error("trials must be >= 1");
  try {
    config.validate();
  } catch (const Error& e) {
    throw spec_error(std::string("config: ") + e.what());
  }
  const std::size_t k1 = prompt_length(prompt_fraction, shape.samples);
  if (k1 < static_cast<std::size_t>(config.window) + 2) {
    throw spec_error("prompt_fraction leaves " + std::to_string(k1) +
                     " samples; need at least w + 2 = " + std::to_string(config.window + 2));
  }
  if (shape.samples < static_cast<std::size_t>(config.window) + 2) {
    throw spec_error("demonstration too short for the window");
  }
}

ExperimentSpec parse_spec(const nlohmann::json& doc) {
  if (!doc.is_object()) throw spec_error("spec must be an object");
  ExperimentSpec spec;
  try {
    if (doc.contains("corpus")) spec.corpus = doc["corpus"].get<std::vector<std::string>>();
    if (doc.contains("transform") && doc.contains("transforms")) {
      throw spec_error("give either transform or transforms, not both");
    }
    if (doc.contains("transform")) spec.transforms = {parse_transform(doc["transform"])};
    if (doc.contains("transforms")) {
      spec.transforms.clear();
      for (const auto& t : doc["transforms"]) spec.transforms.push_back(parse_transform(t));
    }
    spec.prompt_fraction = doc.value("prompt_fraction", spec.prompt_fraction);
    if (doc.contains("noise_sigma") && !doc["noise_sigma"].is_null()) {
      spec.noise_sigma = doc["noise_sigma"].get<double>();
    }
    spec.seed = doc.value("seed", spec.seed);
    spec.trials = doc.value("trials", spec.trials);
    if (doc.contains("config")) {
      const auto& c = doc["config"];
      spec.config.window = c.value("w", spec.config.window);
      spec.config.checkpoints = c.value("C", spec.config.checkpoints);
      spec.config.signal_variance = c.value("signal_variance", spec.config.signal_variance);
      spec.config.noise_variance = c.value("noise_variance", spec.config.noise_variance);
      if (c.contains("length_scales")) {
        spec.config.length_scales = c["length_scales"].get<std::vector<double>>();
      }
      spec.config.sample_rate_hz = c.value("sample_rate_hz", spec.config.sample_rate_hz);
      spec.shape.sample_rate_hz = spec.config.sample_rate_hz;
      spec.shape.samples = c.value("samples", spec.shape.samples);
      spec.shape.size = c.value("size", spec.shape.size);
      if (c.contains("profile")) {
        spec.shape.profile = corpus::speed_profile_from_string(c["profile"].get<std::string>());
      }
      if (c.contains("delta_d")) spec.rollout.delta_d = c["delta_d"].get<double>();
      if (c.contains("delta_sigma")) spec.rollout.delta_sigma = c["delta_sigma"].get<double>();
      if (c.contains("max_horizon")) spec.rollout.max_horizon = c["max_horizon"].get<std::size_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw spec_error(e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidArgument) throw spec_error(e.what());
    throw;
  }
  spec.validate();
  return spec;
}

ExperimentSpec load_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open spec " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw spec_error(std::string("cannot parse ") + path.string() + ": " + e.what());
  }
  return parse_spec(doc);
}

std::size_t prompt_length(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

std::uint64_t case_seed(std::uint64_t seed, std::size_t shape_index, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(shape_index), static_cast<std::uint32_t>(trial)};
  std::uint64_t out[1];
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  out[0] = (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
  return out[0];
}

CaseInputs make_case_inputs(const ExperimentSpec& spec, const std::string& shape,
                            const Transform& transform, std::uint64_t seed) {
  CaseInputs in;
  in.demo = corpus::generate(shape, spec.shape);
  in.reference = transform.apply(in.demo);
  const std::size_t count = prompt_length(spec.prompt_fraction, in.demo.size());
  in.prompt = in.reference.prefix(count);

  const double r_max = normalize(to_polar(in.reference)).r_max;
  const double sigma = spec.noise_sigma.value_or(0.005 * r_max);
  if (sigma > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    std::vector<Sample> samples = in.prompt.samples();
    for (auto& s : samples) {
      const double dx = noise(rng);
      const double dy = noise(rng);
      s.p += Vec2(dx, dy);
    }
    in.prompt = Trajectory(std::move(samples), in.prompt.sample_rate_hz(), in.prompt.label());
  }
  return in;
}

double prediction_error(const Rollout& r, const Trajectory& reference, std::size_t first,
                        const Vec2& hold) {
  double e = 0.0;
  for (std::size_t i = first; i < reference.size(); ++i) {
    Vec2 p = hold;
    if (!r.positions.empty()) {
      const std::size_t h = i - r.first_index;
      p = h < r.positions.size() ? r.positions[h] : r.positions.back();
    }
    e += (reference.position(i) - p).norm();
  }
  return e;
}

double prediction_rmse(const Rollout& r, const Trajectory& reference, std::size_t first,
                       const Vec2& hold) {
  double se = 0.0;
  std::size_t count = 0;
  for (std::size_t i = first; i < reference.size(); ++i, ++count) {
    Vec2 p = hold;
    if (!r.positions.empty()) {
      const std::size_t h = i - r.first_index;
      p = h < r.positions.size() ? r.positions[h] : r.positions.back();
    }
    se += (reference.position(i) - p).squaredNorm();
  }
  return count == 0 ? 0.0 : std::sqrt(se / static_cast<double>(count));
}

EvalReport run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  struct Models {
    GeoModel geo;
    CartesianGPModel base;
  };
  std::vector<Models> models;
  models.reserve(spec.corpus.size());
  for (const auto& shape : spec.corpus) {
    const Trajectory demo = corpus::generate(shape, spec.shape);
    models.push_back({fit_geo_model(demo, spec.config), fit_baseline(demo, spec.config)});
  }

  struct Job {
    std::size_t shape_index;
    std::size_t transform_index;
    int trial;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < spec.corpus.size(); ++s) {
    for (std::size_t t = 0; t < spec.transforms.size(); ++t) {
      for (int trial = 0; trial < spec.trials; ++trial) jobs.push_back({s, t, trial});
    }
  }

  auto run_case = [&](const Job& job) {
    const auto& shape = spec.corpus[job.shape_index];
    const auto& transform = spec.transforms[job.transform_index];
    const auto& m = models[job.shape_index];
    const CaseInputs in = make_case_inputs(spec, shape, transform,
                                           case_seed(spec.seed, job.shape_index, job.trial));
    CaseResult c;
    c.shape = shape;
    c.transform = transform.label();
    c.trial = job.trial;
    c.prompt_length = in.prompt.size();
    c.demo_length = in.reference.size();
    c.r_max = normalize(to_polar(in.reference)).r_max;

    auto t0 = std::chrono::steady_clock::now();
    const PromptContext ctx = make_context(m.geo, in.prompt);
    c.geo = rollout(m.geo, ctx, spec.rollout);
    c.geo_ms = elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    c.base = rollout_baseline(m.base, in.prompt, in.reference.size() - in.prompt.size());
    c.base_ms = elapsed_ms(t0);

    const Vec2 hold = in.prompt.samples().back().p;
    c.e_geo = prediction_error(c.geo, in.reference, c.prompt_length, hold);
    c.e_base = prediction_error(c.base, in.reference, c.prompt_length, hold);
    c.rmse_geo = prediction_rmse(c.geo, in.reference, c.prompt_length, hold) / c.r_max;
    c.rmse_base = prediction_rmse(c.base, in.reference, c.prompt_length, hold) / c.r_max;
    return c;
  };

  EvalReport report;
  report.seed = spec.seed;
  report.cases.resize(jobs.size());
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(jobs.size(), std::thread::hardware_concurrency()));
  std::vector<std::future<void>> pending;
  for (std::size_t w = 0; w < workers; ++w) {
    pending.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < jobs.size(); i += workers) report.cases[i] = run_case(jobs[i]);
    }));
  }
  for (auto& f : pending) f.get();
  return report;
}

ReportFormat report_format_from_string(const std::string& s) {
  if (s == "table") return ReportFormat::kTable;
  if (s == "plotdata") return ReportFormat::kPlotData;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown format '" + s + "' (expected table or plotdata)");
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["seed"] = report.seed;
  doc["cases"] = nlohmann::ordered_json::array();
  for (const auto& c : report.cases) {
    nlohmann::ordered_json j;
    j["shape"] = c.shape;
    j["transform"] = c.transform;
    j["trial"] = c.trial;
    j["prompt_length"] = c.prompt_length;
    j["demo_length"] = c.demo_length;
    j["r_max"] = c.r_max;
    j["E_geo"] = c.e_geo;
    j["E_base"] = c.e_base;
    j["rmse_geo"] = c.rmse_geo;
    j["rmse_base"] = c.rmse_base;
    j["geo"] = rollout_json(c.geo);
    j["base"] = rollout_json(c.base);
    doc["cases"].push_back(std::move(j));
  }
  return doc;
}

EvalReport report_from_json(const nlohmann::json& doc) {
  EvalReport report;
  try {
    if (doc.at("version").get<int>() != 1) {
      throw Error(ErrorCode::kIncompatibleVersion, "incompatible report version");
    }
    report.seed = doc.at("seed").get<std::uint64_t>();
    for (const auto& j : doc.at("cases")) {
      CaseResult c;
      c.shape = j.at("shape").get<std::string>();
      c.transform = j.at("transform").get<std::string>();
      c.trial = j.at("trial").get<int>();
      c.prompt_length = j.at("prompt_length").get<std::size_t>();
      c.demo_length = j.at("demo_length").get<std::size_t>();
      c.r_max = j.at("r_max").get<double>();
      c.e_geo = j.at("E_geo").get<double>();
      c.e_base = j.at("E_base").get<double>();
      c.rmse_geo = j.at("rmse_geo").get<double>();
      c.rmse_base = j.at("rmse_base").get<double>();
      c.geo = rollout_from_json(j.at("geo"));
      c.base = rollout_from_json(j.at("base"));
      report.cases.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("parse error in report: ") + e.what());
  }
  return report;
}

std::string summary_table(const EvalReport& report) {
  std::string out = "case\tshape\ttransform\ttrial\tE_geo\tE_base\tl\tstop_reason\tlambda\trotation\n";
  for (std::size_t i = 0; i < report.cases.size(); ++i) {
    const auto& c = report.cases[i];
    out += std::to_string(i) + "\t" + c.shape + "\t" + c.transform + "\t" +
           std::to_string(c.trial) + "\t" + num(c.e_geo) + "\t" + num(c.e_base) + "\t" +
           std::to_string(c.geo.last_index) + "\t" + std::string(to_string(c.geo.stop_reason)) +
           "\t" + num(c.geo.lambda) + "\t" + num(c.geo.rotation) + "\n";
  }
  return out;
}

fs::path trace_file_name(const CaseResult& c, std::size_t index, const std::string& method) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "case_%03zu_%s_%s.ndjson", index, c.shape.c_str(),
                method.c_str());
  return buf;
}

std::vector<fs::path> emit_report(const EvalReport& report, ReportFormat format,
                                  const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  auto write = [](const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
  };

  std::vector<fs::path> written;
  if (format == ReportFormat::kTable) {
    written.push_back(out_dir / "summary.tsv");
    write(written.back(), summary_table(report));
    return written;
  }
  for (std::size_t i = 0; i < report.cases.size(); ++i) {
    const auto& c = report.cases[i];
    written.push_back(out_dir / trace_file_name(c, i, "geogp"));
    write(written.back(), rollout_to_ndjson(c.geo));
    written.push_back(out_dir / trace_file_name(c, i, "baseline"));
    write(written.back(), rollout_to_ndjson(c.base));
  }
  return written;
}

}  // namespace geogp::eval
