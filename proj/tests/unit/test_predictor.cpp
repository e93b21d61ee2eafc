#include "geogp/corpus.hpp"
#include "geogp/error.hpp"
#include "geogp/predictor.hpp"
#include "oracle/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace geogp;
using std::numbers::pi;

namespace {

const GeoConfig kConfig;

struct Fixture {
  Trajectory demo;
  GeoModel model;
  explicit Fixture(const std::string& shape)
      : demo(corpus::generate(shape)), model(fit_geo_model(demo, kConfig)) {}
};

const Fixture& fixture(const std::string& shape) {
  static std::map<std::string, Fixture> cache;
  auto it = cache.find(shape);
  if (it == cache.end()) it = cache.emplace(shape, Fixture(shape)).first;
  return it->second;
}

Trajectory ray(std::size_t n) {
  std::vector<Vec2> pts;
  for (std::size_t k = 0; k < n; ++k) pts.emplace_back(0.01 * static_cast<double>(k), 0.02 * static_cast<double>(k));
  return Trajectory::from_positions(pts, 20.0);
}

double max_rel_error(const Rollout& a, const Rollout& b, auto&& map) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.positions.size(); ++i) {
    worst = std::max(worst, (map(a.positions[i]) - b.positions[i]).norm());
  }
  return worst;
}

}  // namespace

TEST_CASE("checkpoint placement") {
  const auto demo = ray(100);
  const auto polar = to_polar(demo);
  const auto trace = normalize(polar);
  const auto four = extract_checkpoints(trace, polar, 4);
  CHECK(four.times == std::vector<std::size_t>{20, 40, 60, 80});
  const auto one = extract_checkpoints(trace, polar, 1);
  CHECK(one.times == std::vector<std::size_t>{50});
  CHECK(one.radii[0] == doctest::Approx(50.0 / 99.0).epsilon(1e-12));
  CHECK(std::abs(one.radii[0] - 0.5) <= 0.01);
  CHECK(one.thetas[0] == doctest::Approx(std::atan2(2.0, 1.0)));

  const auto odd = extract_checkpoints(normalize(to_polar(ray(80))), to_polar(ray(80)), 8);
  for (std::size_t j = 1; j <= 8; ++j) {
    CHECK(odd.times[j - 1] == static_cast<std::size_t>(std::ceil(j * 80.0 / 9.0)));
  }
  CHECK_THROWS_AS(extract_checkpoints(normalize(to_polar(ray(4))), to_polar(ray(4)), 4), Error);
}

TEST_CASE("checkpoints near the origin are dropped") {
  // Out along x, back through the start, out along y.
  std::vector<Vec2> pts;
  for (int k = 0; k <= 10; ++k) pts.emplace_back(0.1 * k, 0.0);
  pts.emplace_back(1.0, 0.0);
  for (int k = 9; k >= 0; --k) pts.emplace_back(0.1 * k, 0.0);
  for (int k = 1; k <= 9; ++k) pts.emplace_back(0.0, 0.1 * k);
  const auto traj = Trajectory::from_positions(pts, 20.0);
  const auto polar = to_polar(traj);
  const auto trace = normalize(polar);
  // N = 31, C = 2: indices 11 and 21; index 21 is back on the start point.
  const auto cps = extract_checkpoints(trace, polar, 2);
  CHECK(cps.times == std::vector<std::size_t>{11});

  std::vector<Vec2> loop{{0, 0}, {1, 0}, {0.5, 0}, {0, 0}, {1, 0}};
  const auto lp = to_polar(Trajectory::from_positions(loop, 20.0));
  try {
    extract_checkpoints(normalize(lp), lp, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kCheckpointTooClose);
  }
}

TEST_CASE("scale estimate") {
  const auto& f = fixture("s_curve");
  const auto own = to_polar(f.demo);
  CHECK(std::abs(estimate_scale(own, f.model.checkpoints, f.model.r_max, 40) - 1.0) <= 1e-9);
  const auto doubled = to_polar(scale_about_start(f.demo, 2.0));
  CHECK(std::abs(estimate_scale(doubled, f.model.checkpoints, f.model.r_max, 79) - 2.0) <= 1e-9);

  CheckpointSet two;
  two.times = {2, 4};
  two.radii = {0.5, 0.5};
  two.thetas = {0, 0};
  PolarTrace p;
  p.r = {0, 0.5, 1.0, 1.0, 3.0};
  p.theta = {0, 0, 0, 0, 0};
  CHECK(estimate_scale(p, two, 2.0, 4) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(estimate_scale(p, two, 2.0, 3) == doctest::Approx(1.0).epsilon(1e-15));
  try {
    estimate_scale(p, two, 2.0, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPromptTooShort);
  }
  PolarTrace huge = p;
  huge.r[2] = 1e9;
  CHECK(estimate_scale(huge, two, 2.0, 3) == 1e3);
  PolarTrace tiny = p;
  tiny.r[2] = 1e-9;
  CHECK(estimate_scale(tiny, two, 2.0, 3) == 1e-3);
}

TEST_CASE("rotation estimate") {
  const auto& f = fixture("figure_eight");
  const auto own = to_polar(f.demo);
  CHECK(std::abs(estimate_rotation(own, f.model.demo_polar, 30)) <= 1e-9);
  for (double phi : {pi / 3, -pi / 2, 0.1, 3.0}) {
    const auto rotated = to_polar(rotate_about_start(f.demo, phi));
    CHECK(std::abs(oracle::angle_diff(estimate_rotation(rotated, f.model.demo_polar, 30), phi)) <= 1e-9);
  }
  PolarTrace still;
  still.r = {0, 0, 0, 0};
  still.theta = {0, 0, 0, 0};
  try {
    estimate_rotation(still, f.model.demo_polar, 3);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRotationUnobservable);
  }
  CHECK_THROWS_AS(estimate_rotation(own, f.model.demo_polar, 1), Error);
}

TEST_CASE("one-step prediction on the demonstration itself") {
  for (const auto& shape : corpus::shape_names()) {
    CAPTURE(shape);
    const auto& f = fixture(shape);
    const auto trace = normalize(to_polar(f.demo));
    const double tol = 3.0 * std::sqrt(kConfig.noise_variance);
    for (std::size_t k = 10; k + 1 < f.demo.size(); k += 7) {
      const auto ctx = make_context(f.model, f.demo, k);
      CHECK(std::abs(ctx.lambda - 1.0) <= 1e-9);
      CHECK(std::abs(ctx.rotation) <= 1e-9);
      const auto step = one_step(f.model, ctx);
      const Vec3 actual = trace.xi[k + 1] - trace.xi[k];
      CHECK((step.dxi_hat - actual).cwiseAbs().maxCoeff() <= tol);
      CHECK((step.p_hat - f.demo.position(k + 1)).norm() <= 0.01 * f.model.r_max);
    }
  }
}

TEST_CASE("a demonstrated pause predicts no radial motion") {
  std::vector<Vec2> pts;
  for (int k = 0; k < 20; ++k) pts.emplace_back(0.05 * k, 0.0);
  for (int k = 0; k < 15; ++k) pts.emplace_back(0.95, 0.0);
  for (int k = 1; k <= 20; ++k) pts.emplace_back(0.95, 0.05 * k);
  const auto demo = Trajectory::from_positions(pts, 20.0);
  const auto model = fit_geo_model(demo, kConfig);
  const auto ctx = make_context(model, demo, 32);
  const auto step = one_step(model, ctx);
  CHECK(std::abs(step.dxi_hat[0]) <= 3.0 * std::sqrt(kConfig.noise_variance));
}

TEST_CASE("Cartesian step length scales linearly with lambda") {
  const auto& f = fixture("circle");
  auto ctx = make_context(f.model, f.demo.prefix(30));
  ctx.lambda = 1.0;
  const auto a = one_step(f.model, ctx);
  ctx.lambda = 2.0;
  const auto b = one_step(f.model, ctx);
  const double la = (a.p_hat - ctx.last_position()).norm();
  const double lb = (b.p_hat - ctx.last_position()).norm();
  CHECK(lb == doctest::Approx(2.0 * la).epsilon(1e-12));
  CHECK(a.dxi_hat == b.dxi_hat);
}

TEST_CASE("context preconditions") {
  const auto& f = fixture("line");
  CHECK_THROWS_AS(make_context(f.model, f.demo.prefix(10)), Error);
  CHECK_THROWS_AS(make_context(f.model, f.demo, 200), Error);
  CHECK_FALSE(make_context(f.model, f.demo.prefix(11)).scale_fallback);

  GeoConfig sparse;
  sparse.checkpoints = 2;  // first checkpoint at index 27
  const auto model = fit_geo_model(f.demo, sparse);
  try {
    make_context(model, f.demo.prefix(11));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPromptTooShort);
  }
  const auto ctx = make_context(model, f.demo.prefix(11), std::nullopt, true);
  CHECK(ctx.scale_fallback);
  CHECK(ctx.lambda == 1.0);
}

TEST_CASE("in-distribution rollout stops on the trigger near the endpoint") {
  for (const auto& shape : corpus::shape_names()) {
    CAPTURE(shape);
    const auto& f = fixture(shape);
    const auto ctx = make_context(f.model, f.demo.prefix(32));
    const auto r = rollout(f.model, ctx);
    CHECK(r.stop_reason == StopReason::kTriggered);
    CHECK(r.first_index == 32);
    CHECK(r.last_index == 31 + r.positions.size());
    CHECK(r.uncertainties.size() == r.positions.size());
    const double delta_d = 0.05 * f.model.r_max;
    CHECK((r.positions.back() - f.demo.samples().back().p).norm() <= delta_d);
    CHECK(r.uncertainties.back() >= default_delta_sigma(f.model));
  }
}

TEST_CASE("degenerate thresholds") {
  const auto& f = fixture("spiral");
  const auto ctx = make_context(f.model, f.demo.prefix(32));
  RolloutOptions now;
  now.delta_sigma = 0.0;
  now.delta_d = std::numeric_limits<double>::infinity();
  const auto one = rollout(f.model, ctx, now);
  CHECK(one.positions.size() == 1);
  CHECK(one.stop_reason == StopReason::kTriggered);

  RolloutOptions none;
  none.max_horizon = 0;
  const auto empty = rollout(f.model, ctx, none);
  CHECK(empty.positions.empty());
  CHECK(empty.stop_reason == StopReason::kMaxHorizon);

  RolloutOptions never;
  never.delta_sigma = 1e9;
  never.max_horizon = 25;
  const auto capped = rollout(f.model, ctx, never);
  CHECK(capped.positions.size() == 25);
  CHECK(capped.stop_reason == StopReason::kMaxHorizon);

  RolloutOptions bad;
  bad.delta_d = 0.0;
  CHECK_THROWS_AS(rollout(f.model, ctx, bad), Error);
  CHECK(default_delta_sigma(f.model) == doctest::Approx(std::sqrt(3.0) * 0.1).epsilon(1e-15));
}

TEST_CASE("rollout equivariance under similarity transforms") {
  oracle::Gen gen(31);
  for (const auto& shape : corpus::shape_names()) {
    CAPTURE(shape);
    const auto& f = fixture(shape);
    const auto prompt = f.demo.prefix(32);
    const auto base = rollout(f.model, make_context(f.model, prompt));
    const Vec2 o = prompt.position(0);

    const Vec2 d(gen.uniform(-100, 100), gen.uniform(-100, 100));
    const auto moved = rollout(f.model, make_context(f.model, translate(prompt, d)));
    REQUIRE(moved.positions.size() == base.positions.size());
    CHECK(max_rel_error(base, moved, [&](const Vec2& p) -> Vec2 { return p + d; }) <= 1e-9);

    const double phi = gen.uniform(-pi, pi);
    const auto turned = rollout(f.model, make_context(f.model, rotate_about_start(prompt, phi)));
    REQUIRE(turned.positions.size() == base.positions.size());
    CHECK(max_rel_error(base, turned, [&](const Vec2& p) -> Vec2 { return o + rotate(p - o, phi); }) <=
          1e-6 * f.model.r_max);

    const double s = gen.uniform(0.5, 2.0);
    const auto ctx_s = make_context(f.model, scale_about_start(prompt, s));
    CHECK(std::abs(ctx_s.lambda - s) <= 1e-6);
    const auto grown = rollout(f.model, ctx_s);
    REQUIRE(grown.positions.size() == base.positions.size());
    CHECK(max_rel_error(base, grown, [&](const Vec2& p) -> Vec2 { return o + s * (p - o); }) <=
          1e-6 * s * f.model.r_max);
  }
}

TEST_CASE("stop index is monotone in the position tolerance") {
  for (const auto& shape : corpus::shape_names()) {
    CAPTURE(shape);
    const auto& f = fixture(shape);
    const auto ctx = make_context(f.model, f.demo.prefix(32));
    std::size_t previous = std::numeric_limits<std::size_t>::max();
    for (double frac = 0.005; frac <= 2.0; frac *= 1.5) {
      RolloutOptions o;
      o.delta_d = frac * f.model.r_max;
      const auto r = rollout(f.model, ctx, o);
      CHECK(r.positions.size() <= 3 * f.demo.size());
      CHECK(r.last_index <= previous);
      previous = r.last_index;
    }
  }
}

TEST_CASE("uncertainty grows past the demonstrated arc") {
  for (const auto& shape : corpus::shape_names()) {
    CAPTURE(shape);
    const auto& f = fixture(shape);
    RolloutOptions o;
    o.delta_sigma = std::numeric_limits<double>::infinity();
    o.max_horizon = 5 * f.demo.size();
    const auto r = rollout(f.model, make_context(f.model, f.demo.prefix(32)), o);
    double peak = 0.0;
    for (double u : r.uncertainties) peak = std::max(peak, u);
    CHECK(peak >= default_delta_sigma(f.model));
  }
}

TEST_CASE("teacher-forced replay is a prefix sum") {
  const auto& f = fixture("circle");
  const auto full = teacher_forced_replay(f.model, make_context(f.model, f.demo.prefix(40)));
  CHECK(full.errors.size() == 40 - 10);
  double sum = 0.0;
  for (double e : full.errors) sum += e;
  CHECK(full.score == doctest::Approx(sum).epsilon(1e-15));
  // Between checkpoints the context is unchanged, so shorter replays are
  // exact prefixes.
  for (std::size_t k = 36; k < 39; ++k) {
    const auto part = teacher_forced_replay(f.model, make_context(f.model, f.demo.prefix(40), k));
    REQUIRE(part.errors.size() == k - 9);
    for (std::size_t i = 0; i < part.errors.size(); ++i) CHECK(part.errors[i] == full.errors[i]);
  }
}

TEST_CASE("rollout export round trip") {
  const auto& f = fixture("line");
  const auto r = rollout(f.model, make_context(f.model, f.demo.prefix(32)));
  const std::string text = rollout_to_ndjson(r);
  const auto back = rollout_from_ndjson(text);
  CHECK(back.positions == r.positions);
  CHECK(back.uncertainties == r.uncertainties);
  CHECK(back.stop_reason == r.stop_reason);
  CHECK(back.last_index == r.last_index);
  CHECK(back.first_index == r.first_index);
  CHECK(back.lambda == r.lambda);
  CHECK(back.rotation == r.rotation);
  CHECK(rollout_to_ndjson(back) == text);

  const auto first = nlohmann::json::parse(text.substr(0, text.find('\n')));
  CHECK(first.contains("h"));
  CHECK(first.contains("x"));
  CHECK(first.contains("y"));
  CHECK(first.contains("sigma_norm"));

  try {
    rollout_from_ndjson(text.substr(0, text.rfind('{')));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("missing trailer") != std::string::npos);
  }
  CHECK(stop_reason_from_string("numeric_failure") == StopReason::kNumericFailure);
  CHECK_THROWS_AS(stop_reason_from_string("nope"), Error);
}
