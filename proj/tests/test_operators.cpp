#include "catch_amalgamated.hpp"

#include <cmath>

#include "chlab/operators.hpp"
#include "chlab/random.hpp"

using namespace chlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

double max_error_off_kink(const Field& a, const Field& b, double gap) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a.x(i)) > gap) e = std::max(e, std::abs(a[i] - b[i]));
  return e;
}

Field random_nonnegative(const Grid& g, std::uint64_t seed) {
  Rng rng(seed);
  const double c = rng.uniform(-5.0, 5.0);
  const double w = rng.uniform(0.5, 2.0);
  const double a = rng.uniform(0.1, 3.0);
  return sample(g, [&](double x) { return a * std::exp(-(x - c) * (x - c) / (w * w)); });
}

}  // namespace

TEST_CASE("derivative of a single mode", "[operators]") {
  const Grid g(10.0, 256);
  const double k = M_PI / 10.0;
  const Field u = sample(g, [&](double x) { return std::sin(k * x); });
  const Field expected = sample(g, [&](double x) { return k * std::cos(k * x); });
  CHECK(max_abs_difference(derivative(u), expected) < 1e-10);
}

TEST_CASE("derivative of a constant is zero", "[operators]") {
  const Grid g(10.0, 128);
  const Field u = sample(g, [](double) { return 1.0; });
  CHECK(max_abs(derivative(u)) < 1e-14);
}

TEST_CASE("derivative of a Gaussian", "[operators]") {
  const Grid g(40.0, 4096);
  const Field u = sample(g, [](double x) { return std::exp(-x * x); });
  const Field expected = sample(g, [](double x) { return -2.0 * x * std::exp(-x * x); });
  CHECK(max_abs_difference(derivative(u), expected) < 1e-8);
}

TEST_CASE("helmholtz_inverse eigenfunctions and constants", "[operators]") {
  const Grid g(12.0, 256);
  const double k = M_PI / 12.0;
  const Field f = sample(g, [&](double x) { return std::cos(k * x); });
  const Field expected = sample(g, [&](double x) { return std::cos(k * x) / (1.0 + k * k); });
  CHECK(max_abs_difference(helmholtz_inverse(f), expected) < 1e-13);
  const Field c = sample(g, [](double) { return 2.5; });
  CHECK(max_abs_difference(helmholtz_inverse(c), c) < 1e-13);
}

TEST_CASE("convolve_dxG eigenfunctions and constants", "[operators]") {
  const Grid g(12.0, 256);
  const double k = 3.0 * M_PI / 12.0;
  const Field f = sample(g, [&](double x) { return std::cos(k * x); });
  const Field expected = sample(g, [&](double x) { return -k * std::sin(k * x) / (1.0 + k * k); });
  CHECK(max_abs_difference(convolve_dxG(f), expected) < 1e-13);
  const Field c = sample(g, [](double) { return -1.5; });
  CHECK(max_abs(convolve_dxG(c)) < 1e-14);
}

TEST_CASE("convolve_dxG of the peakon nonlinearity", "[operators]") {
  // Direct integration: G * (3/2 e^{-2|y|}) = e^{-|x|} - e^{-2|x|}/2, whose derivative
  // is sign(x)(e^{-2|x|} - e^{-|x|}).
  const Grid g(40.0, 4096);
  const Field f = sample(g, [](double x) { return 1.5 * std::exp(-2.0 * std::abs(x)); });
  const Field closed = sample(g, [](double x) { return sgn(x) * (std::exp(-2.0 * std::abs(x)) - std::exp(-std::abs(x))); });
  const Field got = convolve_dxG(f);
  CHECK(max_error_off_kink(got, closed, 3.0 * g.dx()) < 1e-4);
  CHECK(max_abs_difference(got, -1.0 * reflect(got)) < 1e-12);
}

TEST_CASE("nonlinearity F examples", "[operators]") {
  const Grid g(40.0, 4096);
  CHECK(max_abs(nonlinearity_F(Field(g))) == 0.0);
  const Field two = sample(g, [](double) { return 2.0; });
  CHECK(max_abs_difference(nonlinearity_F(two), sample(g, [](double) { return 4.0; })) < 1e-12);

  const Grid gs(20.0, 1024);
  const Field u = sample(gs, [](double x) { return std::exp(-x * x); });
  const Field expected = sample(gs, [](double x) { return (1.0 + 2.0 * x * x) * std::exp(-2.0 * x * x); });
  CHECK(max_abs_difference(nonlinearity_F(u, false), expected) < 1e-12);
  CHECK(max_abs_difference(nonlinearity_F(u, true), expected) < 1e-10);
}

TEST_CASE("peakon samples", "[operators]") {
  const Grid g(20.0, 1024);
  CHECK(peakon(1.0, 0.0, g)[g.nearest_index(0.0)] == 1.0);
  const Field p = peakon(2.0, 3.0, g);
  for (double x : {3.0, 4.0, -1.5}) {
    const std::size_t i = g.nearest_index(x);
    CHECK_THAT(p[i], WithinAbs(2.0 * std::exp(-std::abs(g.x(i) - 3.0)), 1e-14));
  }
  CHECK(p[g.nearest_index(3.0)] == max_abs(p));
  CHECK_THROWS_AS(peakon(1.0, 20.0, g), InvalidArgument);
}

TEST_CASE("peakon energy is 2 c^2", "[operators]") {
  const Grid g(20.0, 65536);
  for (double c : {1.0, 2.0}) CHECK_THAT(energy(peakon(c, 0.0, g)), WithinRel(2.0 * c * c, 1e-3));
}

TEST_CASE("m_of_u examples", "[operators]") {
  const Grid g(16.0, 2048);
  const double k = 2.0 * M_PI / 16.0;
  const Field c = sample(g, [&](double x) { return std::cos(k * x); });
  CHECK(max_abs_difference(m_of_u(c), (1.0 + k * k) * c) < 1e-10);
  const Field u = sample(g, [](double x) { return std::exp(-x * x); });
  const Field m = sample(g, [](double x) { return (3.0 - 4.0 * x * x) * std::exp(-x * x); });
  CHECK(max_abs_difference(m_of_u(u), m) < 1e-7);
}

TEST_CASE("Green identity and inverse round trips", "[operators][property]") {
  const Grid g(20.0, 512);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Field f = random_band_limited(g, 100, seed);
    CHECK(max_abs_difference(m_of_u(helmholtz_inverse(f)), f) < 1e-10);
    CHECK(max_abs_difference(u_of_m(m_of_u(f)), f) < 1e-10);
  }
}

TEST_CASE("convolve_dxG equals the derivative of helmholtz_inverse", "[operators][property]") {
  const Grid g(20.0, 512);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Field f = random_band_limited(g, 200, seed);
    CHECK(max_abs_difference(convolve_dxG(f), derivative(helmholtz_inverse(f))) < 1e-12 * std::max(1.0, max_abs(f)));
  }
}

TEST_CASE("helmholtz_inverse smoothing bound", "[operators][property]") {
  const Grid g(20.0, 512);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const Field f = random_nonnegative(g, seed);
    CHECK(max_abs(helmholtz_inverse(f)) <= 0.5 * integrate(f) * (1.0 + 1e-12));
  }
}

TEST_CASE("operator parity under reflection", "[operators][property]") {
  const Grid g(20.0, 512);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Field f = random_band_limited(g, 100, seed);
    const double tol = 1e-11 * std::max(1.0, max_abs(f));
    CHECK(max_abs_difference(derivative(reflect(f)), -1.0 * reflect(derivative(f))) < 50 * tol);
    CHECK(max_abs_difference(convolve_dxG(reflect(f)), -1.0 * reflect(convolve_dxG(f))) < tol);
    CHECK(max_abs_difference(helmholtz_inverse(reflect(f)), reflect(helmholtz_inverse(f))) < tol);
  }
}

TEST_CASE("dealiasing removes the upper third of the spectrum", "[operators]") {
  const Grid g(10.0, 64);
  const Field hi = sample(g, [&](double x) { return std::cos(g.wavenumber(30) * x); });
  const Field lo = sample(g, [&](double x) { return std::cos(g.wavenumber(5) * x); });
  CHECK(max_abs(dealias(hi)) < 1e-14);
  CHECK(max_abs_difference(dealias(lo), lo) < 1e-14);
}

TEST_CASE("discrete convolution of box functions", "[operators]") {
  const Grid g(8.0, 256);
  const Field box = sample(g, [](double x) { return std::abs(x) < 1.0 ? 1.0 : 0.0; });
  const Field c = convolve(box, box);
  // Triangle of height ~2 centred at 0.
  CHECK_THAT(c[g.nearest_index(0.0)], WithinAbs(integrate(box), 1e-12));
  CHECK(std::abs(c[g.nearest_index(3.0)]) < 1e-12);
  CHECK_THAT(integrate(c), WithinRel(integrate(box) * integrate(box), 1e-12));
}

TEST_CASE("mollified peakon keeps e^{-|x|} tails", "[operators]") {
  const Grid g(30.0, 8192);
  const double w = 0.25;
  const Field u = mollified_peakon(1.0, 0.0, w, g);
  for (double x : {10.0, -12.0}) {
    const std::size_t i = g.nearest_index(x);
    CHECK_THAT(u[i], WithinRel(std::exp(-std::abs(g.x(i))) * std::exp(0.5 * w * w), 1e-6));
  }
}
