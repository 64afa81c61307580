#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gridforge/common/io_util.hpp"
#include "gridforge/common/linalg.hpp"
#include "gridforge/common/rng.hpp"

using namespace gridforge;

TEST_CASE("rng determinism and substreams") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng s1 = Rng::substream(7, 0);
  Rng s2 = Rng::substream(7, 1);
  CHECK(s1.next_u64() != s2.next_u64());
}

TEST_CASE("rng uniform moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum_sq += u * u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum_sq / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("rng normal moments") {
  Rng rng(7);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sum_sq += x * x;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("uniform_int covers range without bias") {
  Rng rng(99);
  int counts[5] = {0, 0, 0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[rng.uniform_int(5)];
  for (int c : counts) CHECK(std::abs(c - n / 5) < 5 * std::sqrt(n / 5.0));
}

TEST_CASE("softmax columns") {
  Mat logits(3, 2);
  logits << 1.0, 0.0, 1.0, 0.0, 1.0, 0.0;
  Mat p = softmax_columns(logits);
  for (int c = 0; c < 2; ++c) {
    CHECK(p.col(c).sum() == doctest::Approx(1.0));
    for (int r = 0; r < 3; ++r) CHECK(p(r, c) == doctest::Approx(1.0 / 3.0));
  }
}

TEST_CASE("softmax backward matches finite differences") {
  Rng rng(3);
  Vec a(6), g(6);
  for (int i = 0; i < 6; ++i) {
    a[i] = rng.normal();
    g[i] = rng.normal();
  }
  auto loss = [&](const Vec& logits) {
    Mat p = softmax_columns(logits);
    return (p.col(0).array() * g.array()).sum();
  };
  Vec y = softmax_columns(a);
  Vec analytic = softmax_backward(y, g);
  const double h = 1e-6;
  for (int i = 0; i < 6; ++i) {
    Vec ap = a, am = a;
    ap[i] += h;
    am[i] -= h;
    double fd = (loss(ap) - loss(am)) / (2 * h);
    CHECK(analytic[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("fnv1a hash is stable") {
  CHECK(fnv1a64_hex("") == "cbf29ce484222325");
  CHECK(fnv1a64_hex("a") != fnv1a64_hex("b"));
}

TEST_CASE("format_double round trips") {
  for (double v : {0.0, 1.0, -1.5, 0.1, 3.141592653589793, 1e-300, 1e300}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
