#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "mecrelay/link.hpp"
#include "mecrelay/solver.hpp"

using namespace mecrelay;
using namespace mecrelay::solver;

TEST_CASE("Bracket validation") {
  CHECK_THROWS_AS(Bracket(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Bracket(2.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(Bracket(0.0, 1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(Bracket(0.0, 1.0, 1e-2), std::invalid_argument);
  CHECK_NOTHROW(Bracket(0.0, 1.0, 1e-3));
}

TEST_CASE("bisect_root") {
  CHECK(bisect_root([](double x) { return x - 1.0; }, Bracket(0.0, 5.0)) == doctest::Approx(1.0).epsilon(1e-11));
  CHECK(bisect_root([](double x) { return std::exp2(x) - 8.0; }, Bracket(0.0, 10.0)) ==
        doctest::Approx(3.0).epsilon(1e-11));
  // decreasing function, infinite at the low end
  CHECK(bisect_root([](double x) { return 1.0 / x - 4.0; }, Bracket(0.0, 1.0)) == doctest::Approx(0.25).epsilon(1e-11));
  CHECK_THROWS_AS(bisect_root([](double x) { return x * x + 1.0; }, Bracket(-1.0, 2.0)), NoSignChange);

  SUBCASE("final bracket straddles the root") {
    const Bracket r = bisect_bracket([](double x) { return std::log(x) - 0.5; }, Bracket(0.1, 10.0, 1e-10));
    CHECK(std::log(r.lo) - 0.5 < 0.0);
    CHECK(std::log(r.hi) - 0.5 > 0.0);
    CHECK(r.span() <= 1e-10 * r.hi * 1.0000001);
  }
}

TEST_CASE("marginal-energy root agrees with a dense scan") {
  const RadioParams rp{};
  const double b = 20e6, d = 1.5e6;
  const double g1 = 3e-11, g2 = 4e-10;
  const double lambda = -link::hd_energy_slope(0.2, b, d, g1, rp);
  // hop 2 slot where its marginal energy equals hop 1's at t1 = 0.2
  auto f = [&](double t) { return link::hd_energy_slope(t, b, d, g2, rp) + lambda; };
  const double lo = link::min_slot_hd(b, d, g2, rp);
  const double root = bisect_root(f, Bracket(lo, 10.0, 1e-12));

  double best = lo, best_abs = std::abs(f(lo));
  const int n = 1000000;
  for (int i = 0; i <= n; ++i) {
    const double t = lo + (1.0 - lo) * i / n;
    const double v = std::abs(f(t));
    if (v < best_abs) best_abs = v, best = t;
  }
  CHECK(std::abs(root - best) <= 1e-6);
}

TEST_CASE("golden_minimize") {
  SUBCASE("smooth parabola") {
    const SolveReport r = golden_minimize([](double x) { return (x - 0.3) * (x - 0.3); }, Bracket(0.0, 1.0, 1e-10));
    CHECK(r.certificate == Certificate::Converged);
    CHECK(r.argmin[0] == doctest::Approx(0.3).epsilon(1e-8));
    CHECK(r.iterations <= golden_iteration_bound(Bracket(0.0, 1.0, 1e-10)));
  }
  SUBCASE("kink") {
    const SolveReport r = golden_minimize([](double x) { return std::abs(x - 0.5); }, Bracket(0.0, 1.0, 1e-10));
    CHECK(r.argmin[0] == doctest::Approx(0.5).epsilon(1e-8));
  }
  SUBCASE("iteration bound") {
    const Bracket b(0.0, 1.0, 1e-12);
    CHECK(golden_iteration_bound(b) == static_cast<int>(std::ceil(std::log(1e12) / std::log(std::numbers::phi))) + 2);
    int calls = 0;
    golden_minimize([&](double x) { ++calls; return std::cosh(x - 0.7); }, b);
    CHECK(calls <= golden_iteration_bound(b) + 4);
  }
  SUBCASE("all infeasible") {
    const double inf = std::numeric_limits<double>::infinity();
    const SolveReport r = golden_minimize([=](double) { return inf; }, Bracket(0.0, 1.0));
    CHECK(r.certificate == Certificate::Infeasible);
    CHECK_FALSE(r.feasible());
  }
  SUBCASE("minimum on a bound") {
    const SolveReport r = golden_minimize([](double x) { return x; }, Bracket(2.0, 3.0, 1e-10));
    CHECK(r.certificate == Certificate::HitBound);
    CHECK(r.argmin[0] == 2.0);
    CHECK(r.value == 2.0);
  }
  SUBCASE("finite only on a narrow window") {
    const double inf = std::numeric_limits<double>::infinity();
    auto f = [=](double x) { return (x > 0.81 && x < 0.83) ? (x - 0.815) * (x - 0.815) : inf; };
    const SolveReport r = golden_minimize(f, Bracket(0.0, 1.0, 1e-10));
    REQUIRE(r.feasible());
    CHECK(r.argmin[0] == doctest::Approx(0.815).epsilon(1e-7));
  }
}

namespace {

SeparableTerm power_law(double a) {
  // a / t: strictly convex and decreasing, marginal -a / t^2
  return {[=](double t) { return a / t; }, [=](double t) { return -a / (t * t); }};
}

}  // namespace

TEST_CASE("dual_equalize") {
  SUBCASE("two identical hops split evenly") {
    const std::vector<SeparableTerm> terms = {power_law(1.0), power_law(1.0)};
    const std::vector<double> lb = {1e-3, 1e-3};
    const SolveReport r = dual_equalize(terms, lb, 1.0);
    REQUIRE(r.feasible());
    CHECK(r.argmin[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.argmin[1] == doctest::Approx(0.5).epsilon(1e-9));
    REQUIRE(r.duals.size() == 1);
    CHECK(r.duals[0] == doctest::Approx(4.0).epsilon(1e-7));
  }
  SUBCASE("three identical hops split in thirds") {
    const std::vector<SeparableTerm> terms = {power_law(2.0), power_law(2.0), power_law(2.0)};
    const std::vector<double> lb = {1e-6, 1e-6, 1e-6};
    const SolveReport r = dual_equalize(terms, lb, 0.9);
    REQUIRE(r.feasible());
    for (double t : r.argmin) CHECK(t == doctest::Approx(0.3).epsilon(1e-9));
  }
  SUBCASE("unequal weights follow the square-root rule") {
    // minimizing a1/t1 + a2/t2 gives t_i proportional to sqrt(a_i)
    const std::vector<SeparableTerm> terms = {power_law(1.0), power_law(4.0)};
    const std::vector<double> lb = {1e-6, 1e-6};
    const SolveReport r = dual_equalize(terms, lb, 3.0);
    REQUIRE(r.feasible());
    CHECK(r.argmin[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.argmin[1] == doctest::Approx(2.0).epsilon(1e-9));
  }
  SUBCASE("lower bounds above the budget") {
    const std::vector<SeparableTerm> terms = {power_law(1.0), power_law(1.0)};
    const std::vector<double> lb = {0.6, 0.6};
    CHECK_FALSE(dual_equalize(terms, lb, 1.0).feasible());
  }
  SUBCASE("an active bound clamps its hop and the rest equalize") {
    const std::vector<SeparableTerm> terms = {power_law(1.0), power_law(1.0), power_law(1.0)};
    const std::vector<double> lb = {0.5, 1e-6, 1e-6};
    const SolveReport r = dual_equalize(terms, lb, 0.9);
    REQUIRE(r.feasible());
    CHECK(r.argmin[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(r.argmin[1] == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(r.argmin[2] == doctest::Approx(0.2).epsilon(1e-8));
  }
  SUBCASE("random instances: budget met, bounds respected, free hops equalized") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
      const std::size_t n = 2 + i % 3;
      std::vector<SeparableTerm> terms;
      std::vector<double> lb;
      for (std::size_t k = 0; k < n; ++k) {
        terms.push_back(power_law(std::exp(6.0 * u(gen) - 3.0)));
        lb.push_back(1e-6 + 0.2 * u(gen));
      }
      const SolveReport r = dual_equalize(terms, lb, 1.0);
      REQUIRE(r.feasible());
      double sum = 0.0, marginal = std::numeric_limits<double>::quiet_NaN();
      for (std::size_t k = 0; k < n; ++k) {
        sum += r.argmin[k];
        CHECK(r.argmin[k] >= lb[k]);
        if (r.argmin[k] > lb[k] * (1.0 + 1e-6)) {
          const double m = terms[k].slope(r.argmin[k]);
          if (std::isnan(marginal)) marginal = m;
          CHECK(m == doctest::Approx(marginal).epsilon(1e-6));
        }
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("grid_solve") {
  SUBCASE("quadratic bowl") {
    const GridObjective f = [](std::span<const double> x) {
      return (x[0] - 0.3137) * (x[0] - 0.3137) + 2.0 * (x[1] + 0.171) * (x[1] + 0.171);
    };
    const Box box{{-1.0, -1.0}, {1.0, 1.0}};
    GridOptions o;
    o.resolution = 256;
    const SolveReport r = grid_solve(f, {}, box, o);
    REQUIRE(r.feasible());
    CHECK(std::abs(r.argmin[0] - 0.3137) < 1e-4);
    CHECK(std::abs(r.argmin[1] + 0.171) < 1e-4);
  }
  SUBCASE("optimum on a constraint") {
    const GridObjective f = [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; };
    const std::vector<GridConstraint> c = {[](std::span<const double> x) { return 1.0 - (x[0] + x[1]); }};
    const SolveReport r = grid_solve(f, c, Box{{0.0, 0.0}, {2.0, 2.0}});
    REQUIRE(r.feasible());
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-5));
  }
  SUBCASE("nothing feasible") {
    const GridObjective f = [](std::span<const double> x) { return x[0]; };
    const std::vector<GridConstraint> c = {[](std::span<const double> x) { return x[0] * x[0] + 1.0; }};
    const SolveReport r = grid_solve(f, c, Box{{-1.0}, {1.0}});
    CHECK(r.certificate == Certificate::Infeasible);
  }
  SUBCASE("NaN constraints count as violated") {
    const GridObjective f = [](std::span<const double> x) { return -x[0]; };
    const std::vector<GridConstraint> c = {[](std::span<const double> x) {
      return x[0] > 0.5 ? std::numeric_limits<double>::quiet_NaN() : -1.0;
    }};
    const SolveReport r = grid_solve(f, c, Box{{0.0}, {1.0}});
    REQUIRE(r.feasible());
    CHECK(r.argmin[0] <= 0.5);
    CHECK(r.argmin[0] == doctest::Approx(0.5).epsilon(1e-4));
  }
}
