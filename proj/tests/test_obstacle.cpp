#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <sstream>

#include <isotraj/obstacle.hpp>

using namespace isotraj;
using Catch::Approx;

namespace {

HeightField flat(double level, YzRect bounds) {
  return HeightField::analytic([level](double, double) { return level; }, bounds);
}

/// Unit slab: zeta1 = 0.25, zeta2 = 0.75 over the unit YZ square, X in [0, 1].
PathSection unit_slab() {
  YzRect square{0, 1, 0, 1};
  PathSection sp{square, 0.0, 1.0, {}};
  sp.domains.push_back(make_obstacle_domain(flat(0.25, square), flat(0.75, square), 0.0, 1.0));
  return sp;
}

/// Monte Carlo oracle: mean of f-hat over uniform samples in the SP box,
/// scaled by the box volume. Returns (estimate, standard error).
std::pair<double, double> monte_carlo(const ScalarField& f, const PathSection& sp,
                                      std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> ux(sp.c3, sp.d3);
  std::uniform_real_distribution<double> uy(sp.yz.y0, sp.yz.y1);
  std::uniform_real_distribution<double> uz(sp.yz.z0, sp.yz.z1);
  double volume = sp.yz.area() * (sp.d3 - sp.c3);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p{ux(rng), uy(rng), uz(rng)};
    double v = indicator_eval(f, sp, p);
    sum += v;
    sq += v * v;
  }
  double mean = sum / static_cast<double>(n);
  double var = sq / static_cast<double>(n) - mean * mean;
  double se = std::sqrt(var / static_cast<double>(n)) * volume;
  return {mean * volume, se};
}

}  // namespace

TEST_CASE("indicator_eval") {
  auto sp = unit_slab();
  ScalarField one = [](Vec3) { return 1.0; };

  CHECK(indicator_eval(one, sp, {0.5, 0.5, 0.5}) == 1.0);
  CHECK(indicator_eval(one, sp, {0.1, 0.5, 0.5}) == 0.0);  // in Psi, outside Omega
  CHECK(indicator_eval(one, sp, {0.25, 0.5, 0.5}) == 1.0); // on zeta1: closed domain
  CHECK(indicator_eval(one, sp, {0.75, 0.5, 0.5}) == 1.0); // on zeta2
  CHECK_THROWS_AS(indicator_eval(one, sp, {1.5, 0.5, 0.5}), out_of_domain_error);
  CHECK_THROWS_AS(indicator_eval(one, sp, {0.5, -0.5, 0.5}), out_of_domain_error);
}

TEST_CASE("integrate_section") {
  auto sp = unit_slab();
  ScalarField one = [](Vec3) { return 1.0; };
  ScalarField fx = [](Vec3 p) { return p.x; };

  SECTION("constant over the slab is exact") {
    CHECK(integrate_section(one, sp, 8) == Approx(0.5).margin(1e-12));
  }

  SECTION("no obstacle domains integrates to zero") {
    PathSection empty{sp.yz, sp.c3, sp.d3, {}};
    CHECK(integrate_section(one, empty, 8) == 0.0);
  }

  SECTION("linear integrand over the slab") {
    // analytic: integral of x dx over [0.25, 0.75] = 0.25 over the unit square
    CHECK(integrate_section(fx, sp, 64) == Approx(0.25).margin(1e-6));
  }

  SECTION("agrees with the Monte Carlo oracle") {
    auto [mc, se] = monte_carlo(fx, sp, 200000, 97);
    double quad = integrate_section(fx, sp, 64);
    CHECK(std::abs(quad - mc) < 3.0 * se);
  }

  SECTION("degenerate region reports zero with the warning flag") {
    PathSection flat_region{{0, 1, 0.5, 0.5}, 0.0, 1.0, {}};
    bool degenerate = false;
    CHECK(integrate_section(one, flat_region, 4, &degenerate) == 0.0);
    CHECK(degenerate);
  }

  SECTION("resolution below 2 is rejected") {
    CHECK_THROWS_AS(integrate_section(one, sp, 1), std::invalid_argument);
  }

  SECTION("scaling: integrate(a f) = a integrate(f)") {
    ScalarField f3 = [](Vec3 p) { return 3.0 * p.x; };
    CHECK(integrate_section(f3, sp, 16) ==
          Approx(3.0 * integrate_section(fx, sp, 16)).margin(1e-12));
  }

  SECTION("monotone refinement: halving the step shrinks the change") {
    ScalarField smooth = [](Vec3 p) { return std::sin(p.x * 3) * std::cos(p.y * 2) + p.z * p.z; };
    double r8 = integrate_section(smooth, sp, 8);
    double r16 = integrate_section(smooth, sp, 16);
    double r32 = integrate_section(smooth, sp, 32);
    double r64 = integrate_section(smooth, sp, 64);
    CHECK(std::abs(r32 - r16) <= std::abs(r16 - r8));
    CHECK(std::abs(r64 - r32) <= std::abs(r32 - r16));
  }
}

TEST_CASE("zero-extension identity") {
  // integrating f-hat over the section equals the per-domain sum of f
  YzRect square{0, 1, 0, 1};
  PathSection sp{square, 0.0, 2.0, {}};
  sp.domains.push_back(make_obstacle_domain(flat(0.2, square), flat(0.6, square), 0.0, 2.0));
  sp.domains.push_back(make_obstacle_domain(flat(1.2, square), flat(1.5, square), 0.0, 2.0));
  ScalarField fx = [](Vec3 p) { return p.x + 0.5; };

  double whole = integrate_section(fx, sp, 32);
  double per_domain = 0.0;
  for (const auto& d : sp.domains) {
    PathSection single{square, sp.c3, sp.d3, {d}};
    per_domain += integrate_section(fx, single, 32);
  }
  CHECK(whole == Approx(per_domain).margin(1e-9));
}

TEST_CASE("integrate_multi") {
  auto sp = unit_slab();
  ScalarField one = [](Vec3) { return 1.0; };

  SECTION("two disjoint slab copies sum to 1") {
    auto other = unit_slab();
    other.yz = {2, 3, 0, 1};
    other.domains.clear();
    other.domains.push_back(
        make_obstacle_domain(flat(0.25, other.yz), flat(0.75, other.yz), 0.0, 1.0));
    CHECK(integrate_multi(one, {sp, other}, 8) == Approx(1.0).margin(1e-12));
  }

  SECTION("partitioning domains across sections does not change the sum") {
    YzRect square{0, 1, 0, 1};
    auto d1 = make_obstacle_domain(flat(0.1, square), flat(0.3, square), 0.0, 1.0);
    auto d2 = make_obstacle_domain(flat(0.6, square), flat(0.9, square), 0.0, 1.0);
    PathSection both{square, 0.0, 1.0, {d1, d2}};
    PathSection first{square, 0.0, 1.0, {d1}};
    PathSection second{square, 0.0, 1.0, {d2}};
    ScalarField f = [](Vec3 p) { return p.x * p.x + p.y; };
    CHECK(integrate_multi(f, {both}, 32) ==
          Approx(integrate_multi(f, {first, second}, 32)).margin(1e-12));
  }

  SECTION("empty list integrates to zero") {
    CHECK(integrate_multi(one, {}, 8) == 0.0);
  }
}

TEST_CASE("obstacle fixture file") {
  std::string text =
      "# slab fixture\n"
      "0 1 0 1\n"
      "0 1\n"
      "2 2\n"
      "0.25 0.25\n"
      "0.25 0.25\n"
      "0.75 0.75\n"
      "0.75 0.75\n";

  SECTION("loads and integrates like the analytic slab") {
    std::istringstream in(text);
    auto domain = load_obstacle_fixture(in);
    auto sp = section_around(domain);
    CHECK(integrate_section([](Vec3) { return 1.0; }, sp, 8) == Approx(0.5).margin(1e-12));
    CHECK(section_fill_fraction(sp) == Approx(0.5).margin(1e-12));
  }

  SECTION("bilinear interpolation between samples") {
    std::string sloped =
        "0 1 0 1\n"
        "0 2\n"
        "2 2\n"
        "0 0\n"
        "0 0\n"
        "1 1\n"
        "2 2\n";  // zeta2 rises from 1 to 2 along y
    std::istringstream in(sloped);
    auto domain = load_obstacle_fixture(in);
    CHECK(domain.zeta2(0.5, 0.5) == Approx(1.5));
    CHECK(domain.zeta2(0.0, 0.3) == Approx(1.0));
  }

  SECTION("malformed rows carry line numbers") {
    std::istringstream in("0 1 0 1\n0 1\n2 2\n0.25 oops\n");
    try {
      load_obstacle_fixture(in);
      FAIL("expected parse_error");
    } catch (const parse_error& e) {
      CHECK(e.line() == 4);
    }
  }

  SECTION("empty input") {
    std::istringstream in("# nothing here\n");
    CHECK_THROWS_AS(load_obstacle_fixture(in), empty_input_error);
  }

  SECTION("ordering violation is rejected") {
    std::istringstream in(
        "0 1 0 1\n"
        "0 1\n"
        "2 2\n"
        "0.8 0.8\n"
        "0.8 0.8\n"
        "0.2 0.2\n"
        "0.2 0.2\n");  // zeta1 above zeta2
    CHECK_THROWS_AS(load_obstacle_fixture(in), std::invalid_argument);
  }
}
