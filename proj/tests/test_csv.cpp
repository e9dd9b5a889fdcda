#include <doctest.h>

#include <Eigen/Core>
#include <cmath>
#include <fstream>

#include "support/temp_dir.hpp"
#include "topictraj/csv.hpp"
#include "topictraj/rng.hpp"

using namespace topictraj;

TEST_CASE("format_double round-trips arbitrary doubles") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12, 12));
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(parse_double(format_double(0.0)) == 0.0);
  CHECK(parse_double(format_double(-1e-300)) == -1e-300);
}

TEST_CASE("labeled matrix round trip is exact") {
  testing::ScopedTempDir tmp;
  Rng rng(9);
  Eigen::MatrixXd m(7, 3);
  for (int r = 0; r < 7; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = rng.normal() * 1e-5;
  std::vector<std::string> labels = {"a", "b", "c", "d", "e", "f", "g"};
  const auto path = tmp.path() / "m.csv";
  write_labeled_matrix(path, "word", {"c1", "c2", "c3"}, labels, m);
  const LabeledMatrix back = read_labeled_matrix(path);
  CHECK(back.labels == labels);
  CHECK(back.values == m);
}

TEST_CASE("read_csv rejects ragged rows") {
  testing::ScopedTempDir tmp;
  const auto path = tmp.path() / "bad.csv";
  {
    std::ofstream out(path);
    out << "a,b\n1,2\n3\n";
  }
  CHECK_THROWS(read_csv(path));
}
