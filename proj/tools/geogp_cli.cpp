// geogp: corpus generation, experiment runs and report emission.
#include "geogp/corpus.hpp"
#include "geogp/error.hpp"
#include "geogp/experiment.hpp"
#include "geogp/trajectory_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace geogp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitSpec = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

eval::ReportFormat parse_format(const std::string& s) {
  try {
    return eval::report_format_from_string(s);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

int cmd_demo_gen(const std::string& shape, const std::string& out, std::size_t samples,
                 const std::string& profile, double size) {
  corpus::ShapeOptions opts;
  opts.samples = samples;
  opts.size = size;
  try {
    opts.profile = corpus::speed_profile_from_string(profile);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  const auto& names = corpus::shape_names();
  std::vector<std::string> shapes;
  if (shape == "all") {
    shapes = names;
  } else if (std::find(names.begin(), names.end(), shape) != names.end()) {
    shapes = {shape};
  } else {
    throw UsageError("unknown shape '" + shape + "'");
  }
  if (shapes.size() == 1 && fs::path(out).has_extension()) {
    write_trajectory(fs::path(out), corpus::generate(shape, opts));
    return kExitOk;
  }
  fs::create_directories(out);
  for (const auto& s : shapes) {
    write_trajectory(fs::path(out) / (s + ".ndjson"), corpus::generate(s, opts));
  }
  return kExitOk;
}

int cmd_run(const std::string& spec_path, const std::string& out,
            std::optional<std::uint64_t> seed, const std::string& format) {
  const auto fmt = parse_format(format);
  eval::ExperimentSpec spec = eval::load_spec(spec_path);
  if (seed) spec.seed = *seed;

  const auto t0 = std::chrono::steady_clock::now();
  const eval::EvalReport report = eval::run_experiment(spec);
  const double total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out);
  write_text(fs::path(out) / "report.json", eval::report_to_json(report).dump(2) + "\n");
  eval::emit_report(report, fmt, out);

  // Timings vary run to run, so they stay out of the report files.
  for (std::size_t i = 0; i < report.cases.size(); ++i) {
    const auto& c = report.cases[i];
    std::cerr << "case " << i << " " << c.shape << " " << c.transform << " trial " << c.trial
              << ": geogp " << c.geo_ms << " ms, baseline " << c.base_ms << " ms\n";
  }
  std::cerr << report.cases.size() << " cases in " << total_ms << " ms\n";
  if (fmt == eval::ReportFormat::kTable) std::cout << eval::summary_table(report);
  return kExitOk;
}

int cmd_report(const std::string& out, const std::string& report_path, const std::string& format) {
  const auto fmt = parse_format(format);
  const fs::path path = report_path.empty() ? fs::path(out) / "report.json" : fs::path(report_path);
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "parse error in " + path.string() + ": " + e.what());
  }
  const eval::EvalReport report = eval::report_from_json(doc);
  for (const auto& p : eval::emit_report(report, fmt, out)) std::cout << p.string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"GeoGP trajectory completion: corpus, experiments and reports"};
  app.require_subcommand(1);

  std::string shape = "all", demo_out, profile = "ease_out";
  std::size_t samples = 80;
  double size = 1.0;
  auto* demo = app.add_subcommand("demo-gen", "Write corpus demonstrations as NDJSON");
  demo->add_option("--shape", shape, "Shape name or 'all'");
  demo->add_option("--out", demo_out, "Output file (single shape) or directory")->required();
  demo->add_option("--samples", samples, "Samples per demonstration")->check(CLI::Range(12, 100000));
  demo->add_option("--profile", profile, "Speed profile: constant, minimum_jerk, ease_out");
  demo->add_option("--size", size, "Overall extent in meters")->check(CLI::PositiveNumber);

  std::string spec_path, run_out, run_format = "table";
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "Run an experiment spec");
  run->add_option("--spec", spec_path, "Experiment spec (JSON)")->required();
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--seed", seed, "Override the spec seed");
  run->add_option("--format", run_format, "table or plotdata");

  std::string report_out, report_path, report_format = "table";
  auto* report = app.add_subcommand("report", "Re-emit a stored report");
  report->add_option("--out", report_out, "Output directory")->required();
  report->add_option("--report", report_path, "Report file (default <out>/report.json)");
  report->add_option("--format", report_format, "table or plotdata");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitSpec;
  }

  try {
    if (*demo) return cmd_demo_gen(shape, demo_out, samples, profile, size);
    if (*run) return cmd_run(spec_path, run_out, seed, run_format);
    if (*report) return cmd_report(report_out, report_path, report_format);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSpec;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool spec = e.code() == ErrorCode::kInvalidArgument ||
                      (e.code() == ErrorCode::kIo && *run && !fs::exists(spec_path));
    return spec ? kExitSpec : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
