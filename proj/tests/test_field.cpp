#include "catch_amalgamated.hpp"

#include <cmath>

#include "chlab/field.hpp"

using namespace chlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("grid geometry", "[field]") {
  const Grid g(10.0, 64);
  CHECK(g.size() == 64);
  CHECK_THAT(g.dx(), WithinAbs(20.0 / 64.0, 1e-15));
  CHECK_THAT(g.x(0), WithinAbs(-10.0, 1e-15));
  CHECK_THAT(g.x(32), WithinAbs(0.0, 1e-15));
  CHECK(g.modes() == 33);
  CHECK(g.nyquist() == 32);
  CHECK_THAT(g.wavenumber(1), WithinAbs(M_PI / 10.0, 1e-15));
  CHECK(g.nearest_index(0.0) == 32);
}

TEST_CASE("grid rejects bad sizes", "[field]") {
  CHECK_THROWS_AS(Grid(10.0, 32), InvalidArgument);
  CHECK_THROWS_AS(Grid(10.0, 96), InvalidArgument);
  CHECK_THROWS_AS(Grid(-1.0, 64), InvalidArgument);
}

TEST_CASE("field sample count must match grid", "[field]") {
  const Grid g(5.0, 64);
  CHECK_THROWS_AS(Field(g, std::vector<double>(10, 0.0)), InvalidArgument);
  Field a(g);
  Field b(Grid(6.0, 64));
  CHECK_THROWS_AS(a += b, InvalidArgument);
}

TEST_CASE("transform round trip", "[field]") {
  const Grid g(7.0, 128);
  const Field f = sample(g, [](double x) { return std::exp(-x * x) * (1.0 + 0.3 * std::sin(3.0 * x)); });
  CHECK(max_abs_difference(inverse(transform(f)), f) < 1e-14);
}

TEST_CASE("rectangle-rule integral", "[field]") {
  const Grid g(20.0, 1024);
  const Field f = sample(g, [](double x) { return std::exp(-x * x); });
  CHECK_THAT(integrate(f), WithinRel(std::sqrt(M_PI), 1e-12));
}

TEST_CASE("shift and reflect", "[field]") {
  const Grid g(8.0, 64);
  const Field f = sample(g, [](double x) { return x; });
  const Field s = shift(f, 3);
  CHECK(s[10] == f[7]);
  CHECK(s[1] == f[62]);
  const Field r = reflect(f);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK_THAT(r[i], WithinAbs(-f[i], 1e-13));
}

TEST_CASE("norm helpers", "[field]") {
  const Grid g(4.0, 64);
  Field f(g);
  f[5] = -3.0;
  f[9] = 2.0;
  CHECK(max_abs(f) == 3.0);
  CHECK(min_value(f) == -3.0);
  CHECK(all_finite(f));
  f[2] = std::nan("");
  CHECK_FALSE(all_finite(f));
}
