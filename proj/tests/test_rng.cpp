#include <catch2/catch_amalgamated.hpp>

#include "crl/rng.hpp"

using crl::Rng;

TEST_CASE("equal seeds give equal streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("substreams with different ids differ") {
  Rng a = Rng::substream(7, 0);
  Rng b = Rng::substream(7, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++equal;
  REQUIRE(equal == 0);
}

TEST_CASE("uniform01 stays in [0, 1)") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("uniform_int is roughly uniform") {
  Rng rng(9);
  const int n = 10;
  std::array<int, 10> counts{};
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_int(n)];
  // 5 sigma binomial bound around draws/n
  const double expect = draws / static_cast<double>(n);
  const double sigma = std::sqrt(expect * (1.0 - 1.0 / n));
  for (int c : counts) REQUIRE(std::abs(c - expect) < 5 * sigma);
}

TEST_CASE("normal moments") {
  Rng rng(11);
  const int n = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.01);
  REQUIRE(std::abs(var - 1.0) < 0.02);
}
