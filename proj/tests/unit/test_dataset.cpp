#include "geogp/dataset.hpp"
#include "geogp/error.hpp"
#include "oracle/oracle.hpp"

#include <doctest.h>

using namespace geogp;

namespace {

NormalizedTrace trace_of(const std::vector<Vec2>& pts) {
  return normalize(to_polar(Trajectory::from_positions(pts, 20.0)));
}

std::vector<Vec2> arc(std::size_t n) {
  std::vector<Vec2> pts;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = 0.1 * static_cast<double>(k);
    pts.emplace_back(std::sin(a), 1.0 - std::cos(a));
  }
  return pts;
}

}  // namespace

TEST_CASE("dataset sizes") {
  SUBCASE("N = 12, w = 10") {
    const auto d = build_dataset(trace_of(arc(12)), 10, "arc");
    CHECK(d.size() == 2);
    CHECK(d.w == 10);
    CHECK(d.source_id == "arc");
    for (const auto& s : d.samples) CHECK(s.input.size() == 60);
  }
  SUBCASE("N = w + 2 for several w") {
    for (int w = 1; w <= 15; ++w) {
      CHECK(build_dataset(trace_of(arc(static_cast<std::size_t>(w) + 2)), w).size() == 2);
    }
  }
  SUBCASE("N - w pairs in general") {
    for (std::size_t n = 12; n <= 40; n += 7) {
      CHECK(build_dataset(trace_of(arc(n)), 10).size() == n - 10);
    }
  }
  SUBCASE("too short") {
    try {
      build_dataset(trace_of(arc(11)), 10);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kTraceTooShort);
      CHECK(std::string(e.what()).find("trace too short for window") != std::string::npos);
    }
  }
}

TEST_CASE("window_at layout") {
  const auto trace = trace_of(arc(30));
  const int w = 10;
  const auto first = window_at(trace, 10, w);
  CHECK(first.head<6>().isZero(0.0));
  const auto second = window_at(trace, 11, w);
  CHECK(second.head<6>() == trace.zeta[1]);
  for (std::size_t k = 10; k < 30; ++k) {
    const auto v = window_at(trace, k, w);
    for (int j = 0; j < w; ++j) {
      CHECK(v.segment<6>(6 * j) == trace.zeta[k - static_cast<std::size_t>(w) + static_cast<std::size_t>(j)]);
    }
  }
  try {
    window_at(trace, 9, w);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kWindowUnderflow);
  }
}

TEST_CASE("shift consistency, target identity and input range on random traces") {
  oracle::Gen gen(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = gen.integer(1, 12);
    const auto n = static_cast<std::size_t>(gen.integer(w + 2, 70));
    const auto trace = trace_of(gen.smooth_curve(n));
    for (std::size_t k = static_cast<std::size_t>(w); k + 1 < n; ++k) {
      const auto a = window_at(trace, k, w);
      const auto b = window_at(trace, k + 1, w);
      CHECK(b.head(6 * (w - 1)) == a.tail(6 * (w - 1)));
      CHECK(b.tail<6>() == trace.zeta[k]);
    }
    const auto d = build_dataset(trace, w);
    REQUIRE(d.size() == n - static_cast<std::size_t>(w));
    for (std::size_t i = 0; i < d.size(); ++i) {
      const std::size_t k = i + static_cast<std::size_t>(w);
      CHECK(d.samples[i].target == trace.xi[k] - trace.xi[k - 1]);
      CHECK(d.samples[i].input == window_at(trace, k, w));
      CHECK(d.samples[i].input.minCoeff() >= -1.0);
      CHECK(d.samples[i].input.maxCoeff() <= 1.0);
    }
  }
}

TEST_CASE("a trace that stops moving yields zero targets") {
  std::vector<Vec2> pts{{0, 0}, {1, 0}};
  for (int i = 0; i < 15; ++i) pts.emplace_back(1, 0);
  const auto d = build_dataset(trace_of(pts), 10);
  for (const auto& s : d.samples) CHECK(s.target.isZero(0.0));
}
