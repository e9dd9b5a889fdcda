#include <doctest.h>

#include <cmath>

#include "topictraj/rng.hpp"

using topictraj::Rng;

TEST_CASE("uniform stays in [0,1) and is reproducible") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(u == b.uniform());
  }
}

TEST_CASE("uniform_below covers the range without bias toward out-of-range") {
  Rng rng(7);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 50000; ++i) ++counts[rng.uniform_below(5)];
  for (int c : counts) CHECK(c > 9000);  // each ~10000
}

TEST_CASE("normal moments") {
  Rng rng(11);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("gamma moments match shape*scale and shape*scale^2") {
  Rng rng(13);
  for (double shape : {0.5, 2.0, 9.0}) {
    const double scale = 1.7;
    double sum = 0.0, sumsq = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(shape, scale);
      sum += x;
      sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(mean == doctest::Approx(shape * scale).epsilon(0.02));
    CHECK(var == doctest::Approx(shape * scale * scale).epsilon(0.06));
  }
}

TEST_CASE("inverse-gamma moments match the analytic posterior") {
  // Posterior parameters of a sigma^2 update with fixed residuals:
  // shape = a + n/2, scale = b + ssr/2.
  const double shape = 0.001 + 50.0, scale = 0.001 + 12.5;
  Rng rng(17);
  double sum = 0.0, sumsq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.inverse_gamma(shape, scale);
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double true_mean = scale / (shape - 1.0);
  const double true_var = scale * scale / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0));
  // Monte Carlo tolerance: 3 standard errors.
  const double se_mean = std::sqrt(true_var / n);
  CHECK(std::abs(mean - true_mean) < 3.0 * se_mean);
  CHECK(var == doctest::Approx(true_var).epsilon(0.1));
}

TEST_CASE("categorical respects weights") {
  Rng rng(19);
  const std::vector<double> w = {1.0, 3.0, 0.0, 4.0};
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 80000; ++i) ++counts[rng.categorical(w)];
  CHECK(counts[2] == 0);
  CHECK(counts[1] == doctest::Approx(30000).epsilon(0.05));
  CHECK(counts[3] == doctest::Approx(40000).epsilon(0.05));
}

TEST_CASE("child streams are independent of parent consumption") {
  Rng a(99);
  Rng b(99);
  (void)a.uniform();
  (void)a.uniform();
  CHECK(a.child(5).uniform() == b.child(5).uniform());
  CHECK(Rng::mix(99, 5) != Rng::mix(99, 6));
}

TEST_CASE("mh_accept: higher-density proposals are certain, far proposals reject") {
  Rng rng(3);
  for (int i = 0; i < 100; ++i) CHECK(topictraj::mh_accept(0.0, rng));
  for (int i = 0; i < 100; ++i) CHECK(topictraj::mh_accept(2.5, rng));
  int accepted = 0;
  for (int i = 0; i < 100; ++i) accepted += topictraj::mh_accept(-80.0, rng) ? 1 : 0;
  CHECK(accepted == 0);
  // log-ratio -0.693 accepts about half the time
  accepted = 0;
  for (int i = 0; i < 20000; ++i) accepted += topictraj::mh_accept(-0.6931471805599453, rng) ? 1 : 0;
  CHECK(accepted == doctest::Approx(10000).epsilon(0.05));
}
