// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <isotraj/isotraj.hpp>

namespace fs = std::filesystem;
using namespace isotraj;

namespace {

int failures = 0;

void criterion(int num, const std::string& name, bool pass, const std::string& detail = "") {
  std::printf("%s criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", num, name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++failures;
}

// ---------------------------------------------------------------------------
// oracles

double gauss_density(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(double a, double b, double fa, double fm, double fb, double whole,
                        double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = gauss_density(lm), frm = gauss_density(rm);
  double left = simpson(a, m, fa, flm, fm);
  double right = simpson(m, b, fm, frm, fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double gauss_integral(double a, double b) {
  double m = 0.5 * (a + b);
  double fa = gauss_density(a), fm = gauss_density(m), fb = gauss_density(b);
  return adaptive_simpson(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), 1e-14, 40);
}

double covariance_oracle(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += (x[k] - mx) * (y[k] - my);
  return acc / static_cast<double>(x.size());
}

std::pair<double, double> monte_carlo(const ScalarField& f, const PathSection& sp, std::size_t n,
                                      unsigned seed) {
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
  return {mean * volume, std::sqrt(var / static_cast<double>(n)) * volume};
}

// ---------------------------------------------------------------------------
// fixtures

std::string log_text(const std::vector<double>& headings_deg) {
  ParsedLog log;
  for (std::size_t k = 0; k < headings_deg.size(); ++k) {
    double h = headings_deg[k] * std::numbers::pi / 180.0;
    RawSample s;
    s.timestamp_ms = static_cast<std::int64_t>(k) * 20;
    s.mx_counts = static_cast<int>(std::lround(512.0 * std::cos(h)));
    s.my_counts = static_cast<int>(std::lround(512.0 * std::sin(h)));
    log.samples.push_back(s);
  }
  return write_log(log);
}

HeightField flat(double level, YzRect bounds) {
  return HeightField::analytic([level](double, double) { return level; }, bounds);
}

// ---------------------------------------------------------------------------
// criteria

void criterion_1_sensor_constants() {
  SensorSpec spec;
  bool saturated = true;
  bool pass = counts_to_gauss(512, spec) == 1.0 && counts_to_gauss(0, spec) == 0.0;
  pass = pass && counts_to_gauss(2560, spec, &saturated) == 5.0 && !saturated;
  pass = pass && counts_to_gauss(-2560, spec, &saturated) == -5.0 && !saturated;
  pass = pass && counts_to_gauss(2561, spec, &saturated) == 5.0 && saturated;
  pass = pass && counts_to_gauss(-3000, spec, &saturated) == -5.0 && saturated;
  criterion(1, "sensor constants (512 counts = 1 gauss, clamp at +/-5 gauss)", pass);
}

void criterion_2_gaussian_identity() {
  SegmentationSurface unit{0, {0.0}, 0.0, 1.0};
  double p = segmentation_probability(unit, -1.0, 1.0);
  double oracle = gauss_integral(-1.0, 1.0);
  bool pass = std::abs(p - 0.682689492) <= 1e-6 && std::abs(p - oracle) <= 1e-6 &&
              std_normal_cdf(0.0) == 0.5;
  criterion(2, "gaussian identity (P(-1,1), oracle integration, Phi(0))", pass,
            "P = " + format_double(p));
}

void criterion_3_covariance_oracle() {
  std::mt19937 rng(2026);
  std::normal_distribution<double> d(0.0, 2.0);
  std::uniform_int_distribution<int> len(8, 100);
  bool pass = true;
  for (int trial = 0; trial < 50 && pass; ++trial) {
    std::size_t n_samples = static_cast<std::size_t>(len(rng));
    std::vector<SegmentationSurface> surfaces;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < 4; ++i) {
      std::vector<double> s(n_samples);
      for (auto& v : s) v = d(rng);
      raw.push_back(s);
      surfaces.push_back(make_segmentation_surface(i, s));
    }
    auto m = correlation_matrix(surfaces);
    Eigen::Matrix4d full;
    for (int i = 0; i < 4 && pass; ++i)
      for (int j = 0; j < 4 && pass; ++j) {
        std::size_t si = static_cast<std::size_t>(i), sj = static_cast<std::size_t>(j);
        if (std::abs(m.at(si, sj) - covariance_oracle(raw[si], raw[sj])) > 1e-10) pass = false;
        if (m.at(si, sj) != m.at(sj, si)) pass = false;
        full(i, j) = m.at(si, sj);
      }
    if (pass) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(full);
      if (eig.eigenvalues().minCoeff() < -1e-10) pass = false;
    }
  }
  criterion(3, "covariance oracle (50 random 4-surface instances)", pass);
}

void criterion_4_integration_oracle() {
  YzRect square{0, 1, 0, 1};
  PathSection slab{square, 0.0, 1.0, {}};
  slab.domains.push_back(make_obstacle_domain(flat(0.25, square), flat(0.75, square), 0.0, 1.0));

  PathSection two{square, 0.0, 2.0, {}};
  two.domains.push_back(make_obstacle_domain(flat(0.2, square), flat(0.6, square), 0.0, 2.0));
  two.domains.push_back(make_obstacle_domain(flat(1.2, square), flat(1.5, square), 0.0, 2.0));

  ScalarField one = [](Vec3) { return 1.0; };
  ScalarField fx = [](Vec3 p) { return p.x; };

  bool pass = std::abs(integrate_section(one, slab, 16) - 0.5) <= 1e-12;

  struct Case {
    const ScalarField& f;
    const PathSection& sp;
    unsigned seed;
  };
  const Case cases[] = {{one, slab, 11}, {fx, slab, 12}, {fx, two, 13}};
  std::string detail;
  for (const auto& c : cases) {
    double quad = integrate_section(c.f, c.sp, 64);
    auto [mc, se] = monte_carlo(c.f, c.sp, 1000000, c.seed);
    if (std::abs(quad - mc) > 3.0 * se) pass = false;
    detail += format_double(quad) + " vs " + format_double(mc) + "; ";
  }
  criterion(4, "integration oracle (slab exact, 3 fixtures vs 1e6-sample Monte Carlo)", pass,
            detail);
}

void criterion_5_theorem_1() {
  GridSpec grid{3, 3, 0.5};
  std::vector<IsochronousSurface> window;
  for (int i = 0; i < 2; ++i) {
    FramePose pose{{0.02 * i, 0, 0}, RotationMatrix::identity(), i * 20};
    window.push_back(build_surface(pose, grid, i));
  }
  auto graph = build_chord_graph(window, {2});
  std::vector<VibrationSample> trajectory(100);
  for (std::size_t i = 0; i < trajectory.size(); ++i)
    trajectory[i].tick = static_cast<std::int64_t>(i);

  propagate_disturbance(trajectory, graph, 0, 1.0, 0.8, 40);
  std::size_t unchanged = 0;
  for (const auto& s : trajectory)
    if (s.delta == 0.0) ++unchanged;
  criterion(5, "theorem-1 propagation (100 surfaces, zero left unchanged)", unchanged == 0,
            "unchanged = " + std::to_string(unchanged));
}

void criterion_6_dead_reckoning_circle() {
  std::vector<double> headings(41);
  for (std::size_t k = 0; k < headings.size(); ++k)
    headings[k] = std::fmod(9.0 * static_cast<double>(k), 360.0);
  std::istringstream in(log_text(headings));
  auto log = parse_log(in);
  auto path = dead_reckon(log, SensorSpec{}, SpeedModel::constant(1.0));

  const double omega = (9.0 * std::numbers::pi / 180.0) / 0.020;
  const double radius = 1.0 / omega;
  Vec3 center{0, 0, 0};
  for (std::size_t k = 0; k < 40; ++k) center = center + path[k].position;
  center = center / 40.0;
  double worst = 0.0;
  for (std::size_t k = 0; k < 40; ++k) {
    double r = (path[k].position - center).norm();
    worst = std::max(worst, std::abs(r - radius) / radius);
  }
  criterion(6, "dead-reckoning circle radius within 1% over a revolution", worst < 0.01,
            "worst relative error = " + format_double(worst));
}

void criterion_7_maneuver_classifier() {
  ManeuverParams params;
  const std::size_t n = 40;

  struct Fixture {
    Maneuver expected;
    std::vector<double> headings;
  };
  std::vector<Fixture> fixtures;
  {
    fixtures.push_back({Maneuver::straight, std::vector<double>(n, 30.0)});
    std::vector<double> lt, rt, llc, rlc;
    for (std::size_t k = 0; k < n; ++k) {
      double u = static_cast<double>(k) / (n - 1);
      lt.push_back(90.0 * u);
      rt.push_back(std::fmod(360.0 - 90.0 * u, 360.0));
      double s = 10.0 * std::sin(std::numbers::pi * u);
      llc.push_back(s);
      rlc.push_back(std::fmod(360.0 - s, 360.0));
    }
    fixtures.push_back({Maneuver::left_turn, lt});
    fixtures.push_back({Maneuver::right_turn, rt});
    fixtures.push_back({Maneuver::left_lane_change, llc});
    fixtures.push_back({Maneuver::right_lane_change, rlc});
  }
  std::vector<double> flat_speed(n, 8.0);

  bool noise_free_ok = true;
  for (const auto& f : fixtures)
    if (detect_maneuver(f.headings, flat_speed, params) != f.expected) noise_free_ok = false;

  // +/-5 degree uniform noise, the datasheet accuracy bound
  std::mt19937 rng(515);
  std::uniform_real_distribution<double> noise(-5.0, 5.0);
  int total = 0, correct = 0;
  for (int trial = 0; trial < 40; ++trial)
    for (const auto& f : fixtures) {
      std::vector<double> noisy(f.headings);
      for (auto& h : noisy) h = std::fmod(h + noise(rng) + 360.0, 360.0);
      ++total;
      if (detect_maneuver(noisy, flat_speed, params) == f.expected) ++correct;
    }
  double accuracy = static_cast<double>(correct) / static_cast<double>(total);
  criterion(7, "maneuver classifier (exact noise-free, >= 90% at +/-5 deg noise)",
            noise_free_ok && accuracy >= 0.9,
            "noisy accuracy = " + format_double(accuracy));
}

std::vector<double> loop_route() {
  // square loop: four 20 m legs at 10 m/s
  std::vector<double> headings;
  for (int leg = 0; leg < 4; ++leg)
    for (int k = 0; k < 100; ++k) headings.push_back(leg * 90.0);
  return headings;
}

void criterion_8_day_monotonicity() {
  auto started = std::chrono::steady_clock::now();

  Config cfg;
  cfg.predict_interval_ticks = 50;
  cfg.predict_horizon_ticks = 100;
  std::istringstream in(log_text(loop_route()));
  auto log = parse_log(in);
  std::vector<ParsedLog> days{log, log, log};
  PathStore store(cfg.store_cell_m, cfg.store_heading_bins);
  auto out = replay(days, cfg, SpeedModel::constant(10.0), store);

  double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  bool pass = out.days.size() == 3 && out.days[2].mean_rms_m <= out.days[1].mean_rms_m &&
              out.days[1].mean_rms_m <= out.days[0].mean_rms_m && elapsed < 10.0;
  criterion(8, "day-monotone horizon error over a 3-day identical route", pass,
            "rms day1/2/3 = " + format_double(out.days[0].mean_rms_m) + " / " +
                format_double(out.days[1].mean_rms_m) + " / " +
                format_double(out.days[2].mean_rms_m) + ", " + format_double(elapsed) + " s");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void criterion_9_replay_determinism() {
  fs::path root = fs::temp_directory_path() / "isotraj_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  fs::path log = root / "route.csv";
  {
    std::ofstream f(log, std::ios::binary);
    f << log_text(loop_route());
  }

  auto run = [&](const std::string& tag) {
    fs::path store = root / ("store_" + tag);
    fs::path report = root / ("report_" + tag + ".txt");
    std::string cmd = std::string(ISOTRAJ_CLI_PATH) + " replay --days " + log.string() + "," +
                      log.string() + "," + log.string() + " --store " + store.string() +
                      " --report " + report.string() + " > /dev/null";
    return std::system(cmd.c_str()) == 0
               ? std::make_pair(slurp(report.string() + ".states.csv"),
                                slurp(report.string() + ".geojson"))
               : std::make_pair(std::string("run failed"), tag);
  };

  auto a = run("a");
  auto b = run("b");
  bool pass = !a.first.empty() && a.first != "run failed" && a.first == b.first &&
              a.second == b.second;
  criterion(9, "replay determinism (byte-identical state CSV and GeoJSON)", pass);
  fs::remove_all(root);
}

}  // namespace

int main() {
  criterion_1_sensor_constants();
  criterion_2_gaussian_identity();
  criterion_3_covariance_oracle();
  criterion_4_integration_oracle();
  criterion_5_theorem_1();
  criterion_6_dead_reckoning_circle();
  criterion_7_maneuver_classifier();
  criterion_8_day_monotonicity();
  criterion_9_replay_determinism();

  if (failures) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
