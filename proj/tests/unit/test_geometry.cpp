#include "geogp/error.hpp"
#include "geogp/geometry.hpp"
#include "oracle/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

using namespace geogp;
using std::numbers::pi;

namespace {

Trajectory traj_of(std::vector<Vec2> pts, double rate = 20.0) {
  return Trajectory::from_positions(pts, rate);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("trajectory validation") {
  CHECK_NOTHROW(Trajectory({{0.0, Vec2(0, 0)}, {0.05, Vec2(1, 0)}}, 20.0));
  CHECK(code_of([] { Trajectory({{0.0, Vec2(0, 0)}, {0.0, Vec2(1, 0)}}, 20.0); }) ==
        ErrorCode::kInvalidTrajectory);
  CHECK(code_of([] { Trajectory({{0.0, Vec2(0, 0)}, {0.1, Vec2(1, 0)}}, 20.0); }) ==
        ErrorCode::kInvalidTrajectory);
  // Within 1% of the nominal spacing is accepted.
  CHECK_NOTHROW(Trajectory({{0.0, Vec2(0, 0)}, {0.0504, Vec2(1, 0)}}, 20.0));
  CHECK(code_of([] {
          Trajectory({{0.0, Vec2(0, 0)}, {0.05, Vec2(std::nan(""), 0)}}, 20.0);
        }) == ErrorCode::kInvalidTrajectory);
}

TEST_CASE("to_polar examples") {
  SUBCASE("positive x-axis") {
    const auto p = to_polar(traj_of({{0, 0}, {1, 0}}));
    CHECK(p.r == std::vector<double>{0.0, 1.0});
    CHECK(p.theta == std::vector<double>{0.0, 0.0});
  }
  SUBCASE("positive y-axis") {
    const auto p = to_polar(traj_of({{0, 0}, {0, 2}}));
    CHECK(p.r[1] == 2.0);
    CHECK(p.theta[1] == doctest::Approx(pi / 2).epsilon(1e-15));
  }
  SUBCASE("anchored at the first sample") {
    const auto p = to_polar(traj_of({{1, 1}, {2, 2}}));
    CHECK(p.origin == Vec2(1, 1));
    CHECK(p.r[1] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
    CHECK(p.theta[1] == doctest::Approx(pi / 4).epsilon(1e-15));
  }
  SUBCASE("a single sample is insufficient") {
    CHECK(code_of([] { to_polar(traj_of({{0, 0}})); }) == ErrorCode::kInsufficientTrajectory);
  }
  SUBCASE("return to the origin keeps the previous angle") {
    const auto p = to_polar(traj_of({{0, 0}, {0, 1}, {0, 0}, {1, 0}}));
    CHECK(p.theta[0] == 0.0);
    CHECK(p.theta[2] == p.theta[1]);
    CHECK(p.r[2] == 0.0);
  }
}

TEST_CASE("normalize examples") {
  PolarTrace polar;
  polar.r = {0.0, 1.0, 2.0};
  polar.theta = {0.0, 0.0, pi};
  const auto n = normalize(polar);
  CHECK(n.r_max == 2.0);
  CHECK(n.xi[0][0] == 0.0);
  CHECK(n.xi[1][0] == 0.5);
  CHECK(n.xi[2][0] == 1.0);
  CHECK(n.xi[1][1] == 1.0);
  CHECK(n.xi[1][2] == 0.5);
  CHECK(n.xi[2][1] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(n.xi[2][2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(n.zeta[0].isZero(0.0));
  CHECK(n.dxi[0].isZero(0.0));
  CHECK(n.dxi[2] == n.xi[2] - n.xi[1]);

  PolarTrace flat;
  flat.r = {0.0, 0.0, 0.0};
  flat.theta = {0.0, 0.0, 0.0};
  CHECK(code_of([&] { normalize(flat); }) == ErrorCode::kDegenerateTrajectory);
}

TEST_CASE("normalized traces stay on the unit square and the shifted circle") {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto n = normalize(to_polar(traj_of(gen.smooth_curve(60))));
    for (std::size_t k = 0; k < n.size(); ++k) {
      const auto& xi = n.xi[k];
      CHECK(xi.minCoeff() >= 0.0);
      CHECK(xi.maxCoeff() <= 1.0);
      const double c = 2 * xi[1] - 1;
      const double s = 2 * xi[2] - 1;
      CHECK(std::abs(c * c + s * s - 1.0) <= 1e-9);
      if (k > 0) {
        CHECK(n.zeta[k].head<3>() == xi);
        CHECK(n.zeta[k].tail<3>() == xi - n.xi[k - 1]);
      }
    }
  }
}

TEST_CASE("reconstruct_step examples") {
  CHECK(reconstruct_step(Vec2(0, 0), 1.0, 0.0) == Vec2(1, 0));
  CHECK(reconstruct_step(Vec2(1, 1), 0.0, pi / 2) == Vec2(1, 1));
  const Vec2 p = reconstruct_step(Vec2(0, 0), std::sqrt(2.0), pi / 4);
  CHECK((p - Vec2(1, 1)).norm() <= 1e-15);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(code_of([&] { reconstruct_step(Vec2(0, 0), inf, 0.0); }) == ErrorCode::kNumeric);
  CHECK(code_of([&] { reconstruct_step(Vec2(0, 0), 1.0, std::nan("")); }) ==
        ErrorCode::kNumeric);
}

TEST_CASE("denormalize_angle examples") {
  CHECK(denormalize_angle(1.0, 0.5) == 0.0);
  CHECK(denormalize_angle(0.5, 1.0) == doctest::Approx(pi / 2).epsilon(1e-15));
  CHECK(denormalize_angle(0.0, 0.5) == doctest::Approx(pi).epsilon(1e-15));
  CHECK(code_of([] { denormalize_angle(0.5, 0.5); }) == ErrorCode::kAngleUndefined);
  CHECK(code_of([] { denormalize_angle(std::nan(""), 0.5); }) == ErrorCode::kNumeric);
  // Off-circle inputs only contribute their direction.
  CHECK(denormalize_angle(0.5 + 3.0, 0.5 + 3.0) == doctest::Approx(pi / 4).epsilon(1e-15));
}

TEST_CASE("angle round trip through the embedding") {
  oracle::Gen gen(3);
  for (int i = 0; i < 2000; ++i) {
    const double theta = i == 0 ? pi : gen.uniform(-pi, pi);
    const Vec3 xi = embed(0.7, theta);
    CHECK(std::abs(oracle::angle_diff(denormalize_angle(xi[1], xi[2]), theta)) <= 1e-9);
    const Vec2 plane = feature_to_plane(xi);
    CHECK((plane - 0.7 * Vec2(std::cos(theta), std::sin(theta))).norm() <= 1e-12);
  }
  CHECK(wrap_angle(pi) == pi);
  CHECK(wrap_angle(-pi) == pi);
  CHECK(wrap_angle(3 * pi) == doctest::Approx(pi));
  CHECK(wrap_angle(0.25) == 0.25);
}

TEST_CASE("translation invariance of the polar trace is exact on dyadic coordinates") {
  oracle::Gen gen(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vec2> pts;
    for (int k = 0; k < 30; ++k) pts.emplace_back(gen.dyadic(-4096, 4096, 10), gen.dyadic(-4096, 4096, 10));
    const Vec2 d(gen.dyadic(-100000, 100000, 6), gen.dyadic(-100000, 100000, 6));
    const auto a = to_polar(traj_of(pts));
    const auto b = to_polar(translate(traj_of(pts), d));
    CHECK(a.r == b.r);
    CHECK(a.theta == b.theta);
  }
}

TEST_CASE("translation invariance of the polar trace on arbitrary coordinates") {
  oracle::Gen gen(6);
  for (int trial = 0; trial < 100; ++trial) {
    const auto pts = gen.smooth_curve(40);
    const Vec2 d(gen.uniform(-50, 50), gen.uniform(-50, 50));
    const auto a = to_polar(traj_of(pts));
    const auto b = to_polar(translate(traj_of(pts), d));
    for (std::size_t k = 1; k < a.size(); ++k) {
      CHECK(std::abs(a.r[k] - b.r[k]) <= 1e-12 * (1 + d.norm()));
      CHECK(std::abs(oracle::angle_diff(a.theta[k], b.theta[k])) <= 1e-9);
    }
  }
}

TEST_CASE("rotation covariance") {
  oracle::Gen gen(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto traj = traj_of(gen.smooth_curve(40));
    const double phi = gen.uniform(-pi, pi);
    const auto a = to_polar(traj);
    const auto b = to_polar(rotate_about_start(traj, phi));
    CHECK(b.theta[0] == 0.0);
    for (std::size_t k = 1; k < a.size(); ++k) {
      CHECK(std::abs(a.r[k] - b.r[k]) <= 1e-9);
      CHECK(std::abs(oracle::angle_diff(b.theta[k], a.theta[k] + phi)) <= 1e-9);
      CHECK(b.theta[k] > -pi);
      CHECK(b.theta[k] <= pi);
    }
  }
}

TEST_CASE("scale covariance and normalization invariance") {
  oracle::Gen gen(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto traj = traj_of(gen.smooth_curve(40));
    const double s = gen.uniform(0.05, 20.0);
    const auto a = to_polar(traj);
    const auto b = to_polar(scale_about_start(traj, s));
    const auto na = normalize(a);
    const auto nb = normalize(b);
    CHECK(std::abs(nb.r_max - s * na.r_max) <= 1e-9 * s);
    for (std::size_t k = 1; k < a.size(); ++k) {
      CHECK(std::abs(b.r[k] - s * a.r[k]) <= 1e-9 * s);
      CHECK(std::abs(oracle::angle_diff(b.theta[k], a.theta[k])) <= 1e-9);
      CHECK((na.zeta[k] - nb.zeta[k]).cwiseAbs().maxCoeff() <= 1e-9);
    }
  }
}

TEST_CASE("polar trace matches the direct formula") {
  oracle::Gen gen(9);
  const auto pts = gen.smooth_curve(50);
  const auto p = to_polar(traj_of(pts));
  for (std::size_t k = 1; k < pts.size(); ++k) {
    CHECK(p.r[k] == doctest::Approx((pts[k] - pts[0]).norm()).epsilon(1e-14));
    CHECK(std::abs(oracle::angle_diff(p.theta[k], oracle::angle_of(pts[0], pts[k]))) <= 1e-14);
  }
}

TEST_CASE("resample onto a uniform clock") {
  std::vector<Sample> raw{{0.0, Vec2(0, 0)}, {0.03, Vec2(3, 0)}, {0.03, Vec2(3, 3)},
                          {0.1, Vec2(3, 10)}, {0.12, Vec2(0, 0)}};
  const auto t = resample(raw, 20.0);
  REQUIRE(t.size() == 3);
  CHECK(t.samples()[1].t == doctest::Approx(0.05));
  // Duplicate timestamp keeps the later point, then interpolation toward (3, 10).
  CHECK((t.position(1) - Vec2(3, 3 + 7.0 * (0.02 / 0.07))).norm() <= 1e-12);
  CHECK((t.position(2) - Vec2(3, 10)).norm() <= 1e-12);

  std::vector<Sample> backwards{{0.0, Vec2(0, 0)}, {-0.1, Vec2(1, 0)}};
  CHECK(code_of([&] { resample(backwards, 20.0); }) == ErrorCode::kInvalidTrajectory);
  CHECK(resample(std::vector<Sample>{}, 20.0).empty());
}

TEST_CASE("resampling a uniform stream is the identity") {
  oracle::Gen gen(10);
  const auto traj = traj_of(gen.smooth_curve(40));
  const auto again = resample(traj.samples(), traj.sample_rate_hz());
  REQUIRE(again.size() == traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK((again.position(i) - traj.position(i)).norm() <= 1e-12);
  }
}
