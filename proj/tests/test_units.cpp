#include <doctest.h>

#include "cqed/error.hpp"
#include "cqed/units.hpp"

using namespace cqed;

TEST_CASE("SI-suffixed quantities") {
  CHECK(parse_quantity("4.76mm", Dimension::Length) == doctest::Approx(4.76e-3));
  CHECK(parse_quantity("7GHz", Dimension::Frequency) == doctest::Approx(7e9));
  CHECK(parse_quantity("86us", Dimension::Time) == doctest::Approx(86e-6));
  CHECK(parse_quantity("86µs", Dimension::Time) == doctest::Approx(86e-6));
  CHECK(parse_quantity("1.31K", Dimension::Temperature) == doctest::Approx(1.31));
  CHECK(parse_quantity("50ohm", Dimension::Resistance) == doctest::Approx(50.0));
  CHECK(parse_quantity("1.2%", Dimension::Dimensionless) == doctest::Approx(0.012));
  CHECK(parse_quantity("107 kHz", Dimension::Frequency) == doctest::Approx(107e3));
  CHECK(parse_quantity("2.5e-3", Dimension::Time) == doctest::Approx(2.5e-3));
}

TEST_CASE("malformed quantities are rejected") {
  CHECK_THROWS_AS(parse_quantity("7GHz", Dimension::Length), ValidationError);
  CHECK_THROWS_AS(parse_quantity("abc", Dimension::Length), ValidationError);
  CHECK_THROWS_AS(parse_quantity("", Dimension::Time), ValidationError);
  CHECK_THROWS_AS(parse_quantity("3%", Dimension::Frequency), ValidationError);
  CHECK_THROWS_AS(parse_quantity("4.76xx", Dimension::Length), ValidationError);
}
