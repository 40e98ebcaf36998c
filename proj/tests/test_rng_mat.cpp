#include "doctest.h"
#include "tgfuse/mat.hpp"
#include "tgfuse/rng.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace tgfuse;

TEST_CASE("rng streams are deterministic and independent") {
  Rng a = Rng::stream(7, "sampling", {1, 2});
  Rng b = Rng::stream(7, "sampling", {1, 2});
  for (int i = 0; i < 16; ++i) CHECK(a.next() == b.next());

  Rng c = Rng::stream(7, "sampling", {1, 3});
  Rng d = Rng::stream(7, "dropout", {1, 2});
  CHECK(Rng::stream(7, "sampling", {1, 2}).next() != c.next());
  CHECK(Rng::stream(7, "sampling", {1, 2}).next() != d.next());
}

TEST_CASE("rng bounded draws stay in range and cover values") {
  Rng rng(3);
  std::vector<int> hits(10, 0);
  for (int i = 0; i < 10000; ++i) {
    const std::uint64_t v = rng.below(10);
    REQUIRE(v < 10);
    hits[static_cast<std::size_t>(v)]++;
  }
  for (int h : hits) CHECK(h > 800);
  CHECK_THROWS_AS(rng.below(0), std::invalid_argument);
}

TEST_CASE("rng uniform01 lies in [0,1)") {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("mat tracks live bytes and high-water mark") {
  memtrack::reset_peak();
  const std::int64_t before = memtrack::current_bytes();
  {
    Mat m(100, 100);
    CHECK(memtrack::current_bytes() == before + 100 * 100 * 8);
    Mat copy = m;
    CHECK(memtrack::current_bytes() == before + 2 * 100 * 100 * 8);
  }
  CHECK(memtrack::current_bytes() == before);
  CHECK(memtrack::peak_bytes() >= before + 2 * 100 * 100 * 8);
}

TEST_CASE("mat value semantics") {
  Mat m = Mat::full(2, 3, 1.5);
  Mat c = m;
  c.at(0, 0) = 9.0;
  CHECK(m.at(0, 0) == 1.5);
  Mat moved = std::move(m);
  CHECK(moved.rows() == 2);
  CHECK(m.empty());
  CHECK(moved.all_finite());
  moved.at(1, 2) = std::nan("");
  CHECK_FALSE(moved.all_finite());
}
