#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "aggiv/dataset.hpp"
#include "aggiv/errors.hpp"
#include "aggiv/rng.hpp"

using namespace aggiv;

namespace {

Dataset small_dataset() {
  Eigen::MatrixXd values(2, 3);
  values << 0.1, -2.5, 3.0, 1e-12, 12345.678, -0.0;
  return Dataset({"i1", "a", "y"}, values);
}

}  // namespace

TEST_CASE("format_double round-trips arbitrary doubles exactly") {
  rng::NormalStream s(99);
  for (int i = 0; i < 2000; ++i) {
    // Mix of scales, including subnormal-ish and huge values.
    const double x = s.normal() * std::pow(10.0, (s.uniform() - 0.5) * 60.0);
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(parse_double(format_double(0.1)) == 0.1);
  CHECK(parse_double(format_double(-0.0)) == 0.0);
  CHECK(parse_double(format_double(std::numeric_limits<double>::max())) ==
        std::numeric_limits<double>::max());
}

TEST_CASE("csv write/read reproduces values and labels exactly") {
  const Dataset original = small_dataset();
  std::stringstream buffer;
  write_csv(original, buffer);
  const Dataset loaded = read_csv(buffer);

  REQUIRE(loaded.labels() == original.labels());
  REQUIRE(loaded.rows() == original.rows());
  CHECK(loaded.values() == original.values());
  CHECK_FALSE(loaded.intervention_value.has_value());
}

TEST_CASE("interventional metadata row survives the round trip") {
  Dataset data({"a1", "a2"}, Eigen::MatrixXd::Zero(1, 2));
  data.intervention_value = -1.25;
  std::stringstream buffer;
  write_csv(data, buffer);
  CHECK(buffer.str().rfind("# intervention_value = -1.25\n", 0) == 0);
  const Dataset loaded = read_csv(buffer);
  REQUIRE(loaded.intervention_value.has_value());
  CHECK(*loaded.intervention_value == -1.25);
}

TEST_CASE("column access by label") {
  const Dataset data = small_dataset();
  CHECK(data.has_column("a"));
  CHECK_FALSE(data.has_column("u"));
  CHECK(data.column("a")(0) == -2.5);
  CHECK(data.index_of("y") == 2);
  CHECK_THROWS_AS(data.column("nope"), ValidationError);
}

TEST_CASE("malformed csv input is rejected") {
  std::stringstream ragged("i1,a\n1.0,2.0\n3.0\n");
  CHECK_THROWS_AS(read_csv(ragged), ConfigError);
  std::stringstream empty("");
  CHECK_THROWS_AS(read_csv(empty), ConfigError);
  std::stringstream garbage("i1,a\n1.0,two\n");
  CHECK_THROWS_AS(read_csv(garbage), ConfigError);
  CHECK_THROWS_AS(Dataset({"one"}, Eigen::MatrixXd::Zero(1, 2)), ValidationError);
}

TEST_CASE("empty dataset (header only) round-trips") {
  const Dataset data({"a1"}, Eigen::MatrixXd(0, 1));
  std::stringstream buffer;
  write_csv(data, buffer);
  const Dataset loaded = read_csv(buffer);
  CHECK(loaded.rows() == 0);
  CHECK(loaded.labels() == data.labels());
}
