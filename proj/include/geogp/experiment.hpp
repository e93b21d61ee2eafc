#pragma once

#include "geogp/corpus.hpp"
#include "geogp/predictor.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace geogp::eval {

struct Translate { Vec2 offset = Vec2::Zero(); };
struct Rotate { double angle = 0.0; };
struct Scale { double factor = 1.0; };
struct Identity {};

/// A similarity transform, possibly a composition applied in order.
struct Transform {
  std::vector<std::variant<Identity, Translate, Rotate, Scale>> steps;

  Trajectory apply(const Trajectory& traj) const;
  std::string label() const;

  static Transform identity() { return {}; }
  static Transform translate(const Vec2& d) { return {{Translate{d}}}; }
  static Transform rotate(double a) { return {{Rotate{a}}}; }
  static Transform scale(double s) { return {{Scale{s}}}; }
};

struct ExperimentSpec {
  std::vector<std::string> corpus = corpus::shape_names();
  std::vector<Transform> transforms{Transform::identity()};
  double prompt_fraction = 0.4;
  std::optional<double> noise_sigma;  // meters; default 0.005 * r_max
  std::uint64_t seed = 0;
  int trials = 1;
  GeoConfig config;
  corpus::ShapeOptions shape;
  RolloutOptions rollout;

  /// Throws Error(kInvalidArgument) with a precise message.
  void validate() const;
};

/// Parses the structured-text (JSON) spec document.
ExperimentSpec parse_spec(const nlohmann::json& doc);
ExperimentSpec load_spec(const std::filesystem::path& path);

struct CaseResult {
  std::string shape;
  std::string transform;
  int trial = 0;
  std::size_t prompt_length = 0;  // k + 1
  std::size_t demo_length = 0;
  double r_max = 0.0;
  double e_geo = 0.0;
  double e_base = 0.0;
  double rmse_geo = 0.0;  // relative to r_max of the transformed reference
  double rmse_base = 0.0;
  Rollout geo;
  Rollout base;
  double geo_ms = 0.0;   // wall clock, not serialized
  double base_ms = 0.0;
};

struct EvalReport {
  std::uint64_t seed = 0;
  std::vector<CaseResult> cases;
};

/// Prediction error sum over reference indices first..last of
/// ||p_ref(i) - p_hat(i)||. Indices past the rollout's end use its final point
/// (or `hold` when the rollout is empty).
double prediction_error(const Rollout& r, const Trajectory& reference,
                        std::size_t first, const Vec2& hold);
double prediction_rmse(const Rollout& r, const Trajectory& reference,
                       std::size_t first, const Vec2& hold);

/// Reference trajectory and prompt for one case, before noise.
struct CaseInputs {
  Trajectory demo;
  Trajectory reference;  // transformed demonstration
  Trajectory prompt;     // noisy prefix of the reference
};
CaseInputs make_case_inputs(const ExperimentSpec& spec, const std::string& shape,
                            const Transform& transform, std::uint64_t case_seed);

/// Noise seed for (shape, trial). Independent of the transform, so every
/// transform of one shape and trial sees the same noise draws.
std::uint64_t case_seed(std::uint64_t seed, std::size_t shape_index, int trial);

/// Number of prompt samples for a demonstration of length n.
std::size_t prompt_length(double fraction, std::size_t n);

EvalReport run_experiment(const ExperimentSpec& spec);

enum class ReportFormat { kTable, kPlotData };
ReportFormat report_format_from_string(const std::string& s);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& doc);

std::string summary_table(const EvalReport& report);

/// Writes the table (summary.tsv) or one trace file per case per method.
/// Returns the written paths.
std::vector<std::filesystem::path> emit_report(const EvalReport& report, ReportFormat format,
                                               const std::filesystem::path& out_dir);

std::filesystem::path trace_file_name(const CaseResult& c, std::size_t index,
                                      const std::string& method);

}  // namespace geogp::eval
