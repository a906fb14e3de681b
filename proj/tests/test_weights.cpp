#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>

#include "chlab/operators.hpp"
#include "chlab/random.hpp"
#include "chlab/weights.hpp"

using namespace chlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Random piecewise-linear function with knots inside [-half, half], zero at its end knots.
Field random_piecewise_linear(const Grid& g, Rng& rng, double half) {
  const int knots = 2 + static_cast<int>(rng.uniform() * 7);
  std::vector<double> xs(static_cast<std::size_t>(knots)), ys(xs.size());
  for (auto& x : xs) x = rng.uniform(-half, half);
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = (i == 0 || i + 1 == ys.size()) ? 0.0 : rng.normal();
  return sample(g, [&](double x) {
    if (x <= xs.front() || x >= xs.back()) return 0.0;
    const std::size_t j = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const double w = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return (1 - w) * ys[j - 1] + w * ys[j];
  });
}

}  // namespace

TEST_CASE("standard family evaluation", "[weights]") {
  CHECK(eval_weight(WeightSpec::standard(0, 0, 0, 0), 7.3) == 1.0);
  CHECK_THAT(eval_weight(WeightSpec::standard(0, 0, 2, 0), 3.0), WithinRel(16.0, 1e-14));
  CHECK_THAT(eval_weight(WeightSpec::standard(1, 1, 0, 0), -2.0), WithinRel(std::exp(2.0), 1e-14));
  CHECK_THAT(eval_weight(WeightSpec::standard(0.5, 1, 0.5, 1), 4.0),
             WithinRel(std::exp(2.0) * std::sqrt(5.0) * std::log(std::exp(1.0) + 4.0), 1e-13));
  CHECK_THAT(eval_weight(WeightSpec::one_sided(2.0), 3.0), WithinRel(std::exp(6.0), 1e-14));
  CHECK(eval_weight(WeightSpec::one_sided(2.0), -3.0) == 1.0);
}

TEST_CASE("overflow is flagged, never saturated", "[weights]") {
  const auto v = evaluate(WeightSpec::standard(1, 1, 0, 0), 800.0);
  CHECK(v.overflow);
  CHECK(std::isinf(v.value));
  CHECK_FALSE(evaluate(WeightSpec::standard(1, 1, 0, 0), 700.0).overflow);
}

TEST_CASE("tabulated weights interpolate and reject off-table queries", "[weights]") {
  const auto w = WeightSpec::tabulate(-4.0, 4.0, 81, [](double x) { return 1.0 + x * x; });
  CHECK_THAT(eval_weight(w, 1.0), WithinRel(2.0, 1e-12));
  CHECK_THAT(eval_weight(w, 0.05), WithinAbs(1.0 + 0.5 * 0.01, 1e-12));
  CHECK_THROWS_AS(eval_weight(w, 4.5), DomainError);
  CHECK_THROWS_AS(WeightSpec::tabulate(0.0, 1.0, 3, [](double) { return 0.0; }), InvalidArgument);
}

TEST_CASE("truncation examples", "[weights]") {
  const auto phi = WeightSpec::standard(1, 1, 0, 0);
  const auto t = truncate_weight(phi, 10.0);
  CHECK(eval_weight(t, 0.0) == 1.0);
  CHECK_THAT(eval_weight(t, 5.0), WithinRel(10.0, 1e-14));
  CHECK_THROWS_AS(truncate_weight(phi, 0.0), InvalidArgument);
}

TEST_CASE("truncations increase monotonically to the weight", "[weights][property]") {
  const auto phi = WeightSpec::standard(0.5, 1, 1, 0);
  Rng rng(11);
  for (int k = 0; k < 200; ++k) {
    const double x = rng.uniform(-30.0, 30.0);
    double prev = 0.0;
    for (double N : {1.0, 2.0, 10.0, 1e3, 1e6, 1e12}) {
      const double v = eval_weight(truncate_weight(phi, N), x);
      CHECK(v >= prev);
      CHECK(v <= eval_weight(phi, x));
      if (eval_weight(phi, x) <= N) CHECK(v == eval_weight(phi, x));
      prev = v;
    }
    CHECK(eval_weight(truncate_weight(phi, 1e12), x) == eval_weight(phi, x));
  }
}

TEST_CASE("truncations are uniformly moderate", "[weights][property]") {
  const auto phi = WeightSpec::standard(0.5, 1, 0, 0);
  const auto v = WeightSpec::standard(0.5, 1, 0, 0);
  const SampleConfig sc{10.0, 5000, 3, {}};
  const double c0 = estimate_moderate_constant(phi, v, sc).value;
  double inf_v = kInf;
  for (const auto& [x, y] : sample_pairs(sc)) inf_v = std::min({inf_v, eval_weight(v, x), eval_weight(v, y)});
  const double c1 = std::max(c0, 1.0 / inf_v);
  for (double N : {1.5, 3.0, 10.0, 50.0, 1e3}) {
    const double cn = estimate_moderate_constant(truncate_weight(phi, N), v, sc).value;
    CHECK(cn <= c1 * (1.0 + 1e-12));
  }
}

TEST_CASE("sub-multiplicativity examples", "[weights]") {
  CHECK(check_submultiplicative(WeightSpec::standard(1, 1, 0, 0), 10.0, 20000, 1).value <= 1.0 + 1e-12);
  CHECK(check_submultiplicative(WeightSpec::standard(0, 0, 1, 0), 10.0, 20000, 1).value <= 1.0 + 1e-12);

  const auto gauss = WeightSpec::tabulate(-10.0, 10.0, 20001, [](double x) { return std::exp(x * x); });
  const SampleConfig sc{4.0, 100, 1, {{2.0, 2.0}}};
  const auto sup = check_submultiplicative(gauss, sc);
  CHECK(sup.value >= std::exp(8.0) * (1.0 - 1e-6));
  CHECK(sup.value > 1.0);
}

TEST_CASE("standard family members are sub-multiplicative with a finite constant", "[weights][property]") {
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto v = WeightSpec::standard(rng.uniform(0.0, 2.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 3.0), rng.uniform(0.0, 2.0));
    const auto s = check_submultiplicative(v, 20.0, 2000, static_cast<std::uint64_t>(k));
    CHECK(std::isfinite(s.value));
    CHECK_FALSE(s.overflow);
  }
}

TEST_CASE("moderate constant examples", "[weights]") {
  const auto e1 = WeightSpec::standard(1, 1, 0, 0);
  CHECK(estimate_moderate_constant(e1, e1, 10.0, 20000, 1).value <= 1.0 + 1e-12);
  CHECK(estimate_moderate_constant(WeightSpec::standard(-1, 1, 0, 0), e1, 10.0, 20000, 1).value <= 1.0 + 1e-12);
  const auto c = estimate_moderate_constant(WeightSpec::standard(0, 0, -2, 0), WeightSpec::standard(0, 0, 2, 0), 10.0, 20000, 1);
  CHECK(std::isfinite(c.value));
  CHECK(c.value <= 1.0 + 1e-12);
}

TEST_CASE("sampling is reproducible from the seed", "[weights]") {
  const SampleConfig a{10.0, 100, 42, {}};
  CHECK(sample_pairs(a) == sample_pairs(a));
  SampleConfig b = a;
  b.seed = 43;
  CHECK(sample_pairs(a) != sample_pairs(b));
}

TEST_CASE("certificate for e^{|x|/2}", "[weights]") {
  const auto w = WeightSpec::standard(0.5, 1, 0, 0);
  const auto c = certify_admissible(w, w, CertifyConfig{});
  CHECK(c.admissible);
  CHECK(c.integral_converged);
  CHECK_THAT(c.integral_v_exp, WithinAbs(4.0, 1e-8));
  CHECK_THAT(c.A, WithinAbs(0.5, 1e-12));
  CHECK(c.inf_v >= 1.0);
  CHECK_THAT(c.lp_v_exp.at(kInf), WithinAbs(1.0, 1e-12));
  CHECK_THAT(c.lp_v_exp.at(2.0), WithinRel(std::sqrt(2.0), 1e-8));
}

TEST_CASE("certificate for e^{|x|} diverges but keeps the sup route", "[weights]") {
  const auto w = WeightSpec::standard(1, 1, 0, 0);
  const auto c = certify_admissible(w, w, CertifyConfig{});
  CHECK_FALSE(c.admissible);
  CHECK_FALSE(c.integral_converged);
  CHECK(std::isinf(c.integral_v_exp));
  CHECK(std::isinf(c.lp_v_exp.at(2.0)));
  CHECK(c.lp_v_exp.at(kInf) == 1.0);
  CHECK(c.fast_growth_route_p == std::vector<double>{kInf});
}

TEST_CASE("certificate for algebraic weights", "[weights]") {
  for (double cc : {-3.0, -1.0, 0.5, 2.0}) {
    const auto phi = WeightSpec::standard(0, 0, cc, 0);
    const auto v = WeightSpec::standard(0, 0, std::abs(cc), 0);
    const auto c = certify_admissible(phi, v, CertifyConfig{});
    CHECK(c.admissible);
    CHECK_THAT(c.A, WithinAbs(std::abs(cc), 1e-12));
  }
  // 2 \int_0^inf (1 + x)^3 e^{-x} dx = 2 (1 + 3 + 6 + 6)
  const auto cubic = WeightSpec::standard(0, 0, 3, 0);
  CHECK_THAT(certify_admissible(cubic, cubic, CertifyConfig{}).integral_v_exp, WithinAbs(32.0, 1e-8));
}

TEST_CASE("weighted Lp norm examples", "[weights]") {
  const Grid g(40.0, 4096);
  for (double p : {1.0, 2.0, kInf}) CHECK(weighted_lp_norm(Field(g), WeightSpec::standard(1, 1, 0, 0), p) == 0.0);
  Field bump(g);
  bump[g.nearest_index(0.0)] = 1.0;
  CHECK_THAT(weighted_lp_norm(bump, WeightSpec::constant_one(), 1.0), WithinRel(g.dx(), 1e-14));
  const Field u = sample(g, [](double x) { return std::exp(-std::abs(x)); });
  CHECK_THAT(weighted_lp_norm(u, WeightSpec::standard(0.5, 1, 0, 0), 2.0), WithinAbs(std::sqrt(2.0), 1e-3));
}

TEST_CASE("weighted norms do not overflow in intermediate steps", "[weights]") {
  const Grid g(400.0, 4096);
  const Field u = sample(g, [](double x) { return std::exp(-1.5 * std::abs(x)); });
  const double n = weighted_lp_norm(u, WeightSpec::standard(1, 1, 0, 0), 2.0);
  CHECK(std::isfinite(n));
  CHECK(n > 0.0);
}

TEST_CASE("discrete Lq norms approach the sup norm", "[weights][property]") {
  const Grid g(20.0, 2048);
  const auto phi = WeightSpec::standard(0, 0, 2, 0);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Rng rng(seed);
    const double c = rng.uniform(-3.0, 3.0);
    const Field u = sample(g, [&](double x) { return std::exp(-(x - c) * (x - c)); });
    const double sup = weighted_lp_norm(u, phi, kInf);
    CHECK(std::abs(weighted_lp_norm(u, phi, 64.0) - sup) / sup < 0.05);
  }
}

TEST_CASE("Young inequality trivial cases", "[weights]") {
  const Grid g(16.0, 512);
  const Field gauss = sample(g, [](double x) { return std::exp(-x * x); });
  const auto one = WeightSpec::constant_one();
  const auto r0 = check_weighted_young(Field(g), gauss, one, one, 2.0, 1.0);
  CHECK(r0.pass);
  CHECK(r0.lhs == 0.0);
  CHECK(check_weighted_young(gauss, gauss, one, one, 2.0, 1.0).pass);
}

TEST_CASE("weighted Young inequality on random piecewise-linear pairs", "[weights][property]") {
  const Grid g(16.0, 512);
  const auto w = WeightSpec::standard(0, 0, 2, 0);
  const double c0 = estimate_moderate_constant(w, w, SampleConfig{16.0, 20000, 9, {{0.0, 0.0}}}).value;
  Rng rng(77);
  const double ps[] = {1.0, 2.0, 3.0, kInf};
  int failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const Field f1 = random_piecewise_linear(g, rng, 7.5);
    const Field f2 = random_piecewise_linear(g, rng, 7.5);
    const double p = ps[k % 4];
    if (!check_weighted_young(f1, f2, w, w, p, c0).pass) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("log derivative matches finite differences", "[weights]") {
  const auto w = WeightSpec::standard(0.7, 0.8, 1.5, 0.5);
  for (double x : {-5.0, -0.3, 0.4, 2.0, 9.0}) {
    const double h = 1e-5;
    const double fd = (log_weight(w, x + h) - log_weight(w, x - h)) / (2 * h);
    CHECK_THAT(log_derivative(w, x), WithinAbs(fd, 1e-6));
  }
}
