#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpelab/fitting.hpp"

using namespace gpelab;
using Points = std::vector<std::pair<double, double>>;

TEST_CASE("least squares recovers an exact line with zero residual") {
  const std::vector<double> x = {-2.0, -0.5, 0.0, 1.0, 3.0};
  std::vector<double> y;
  for (double xi : x) y.push_back(3.0 * xi - 2.0);
  const auto line = fitting::least_squares_line(x, y);
  CHECK(line.slope == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(line.intercept == doctest::Approx(-2.0).epsilon(1e-13));
  CHECK(line.rms <= 1e-13);
}

TEST_CASE("least squares validates its input") {
  const std::vector<double> one = {1.0};
  CHECK_THROWS_AS(fitting::least_squares_line(one, one), std::invalid_argument);
  const std::vector<double> same = {2.0, 2.0, 2.0};
  const std::vector<double> y = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fitting::least_squares_line(same, y), std::invalid_argument);
}

TEST_CASE("power-law fit recovers synthetic deficit data exactly") {
  const double alpha = 1.0, a = 0.1007, b = 2.0788;
  const double asym = 1.0 / (1.0 + alpha * alpha);
  Points pts;
  for (double v : {3.0, 4.0, 5.0, 6.0, 8.0})
    pts.emplace_back(v, asym - a * std::pow(v, -b));
  const auto fit = fitting::fit_power_law(pts, alpha);
  CHECK(fit.coefficient == doctest::Approx(a).epsilon(1e-12));
  CHECK(fit.exponent == doctest::Approx(b).epsilon(1e-12));
  CHECK(fit.residual <= 1e-12);
  CHECK(fit.points_used.size() == pts.size());
}

TEST_CASE("power-law fit is invariant under reordering and stable under deletion") {
  const double alpha = -0.8, a = 0.07, b = 1.9;
  const double asym = 1.0 / (1.0 + alpha * alpha);
  Points pts;
  for (double v : {2.0, 3.0, 4.0, 5.0, 7.0, 9.0})
    pts.emplace_back(v, asym - a * std::pow(v, -b));

  const auto base = fitting::fit_power_law(pts, alpha);
  Points shuffled = pts;
  std::mt19937 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto permuted = fitting::fit_power_law(shuffled, alpha);
  CHECK(permuted.coefficient == doctest::Approx(base.coefficient).epsilon(1e-12));
  CHECK(permuted.exponent == doctest::Approx(base.exponent).epsilon(1e-12));

  Points fewer(pts.begin() + 1, pts.end());
  const auto dropped = fitting::fit_power_law(fewer, alpha);
  CHECK(dropped.coefficient == doctest::Approx(base.coefficient).epsilon(1e-10));
  CHECK(dropped.exponent == doctest::Approx(base.exponent).epsilon(1e-10));
}

TEST_CASE("power-law fit rejects transmission at or above the asymptote, naming velocities") {
  Points pts = {{3.0, 0.49}, {4.0, 0.51}, {5.0, 0.496}};
  try {
    fitting::fit_power_law(pts, 1.0);
    FAIL("expected a rejection");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("4") != std::string::npos);
    CHECK(msg.find("asymptote") != std::string::npos);
  }
  Points two = {{3.0, 0.49}, {4.0, 0.495}};
  CHECK_THROWS_AS(fitting::fit_power_law(two, 1.0), std::invalid_argument);
  Points badv = {{0.0, 0.4}, {4.0, 0.49}, {5.0, 0.49}};
  CHECK_THROWS_AS(fitting::fit_power_law(badv, 1.0), std::invalid_argument);
}

TEST_CASE("exponential fit recovers synthetic trapped-mass data exactly") {
  const double d = 1.0328, f = 2.9331;
  Points pts;
  for (double v : {2.0, 2.5, 3.0, 3.5})
    pts.emplace_back(v, d * std::exp(-f * v));
  const auto fit = fitting::fit_exponential(pts);
  CHECK(fit.coefficient == doctest::Approx(d).epsilon(1e-12));
  CHECK(fit.exponent == doctest::Approx(f).epsilon(1e-12));
  CHECK(fit.residual <= 1e-12);
}

TEST_CASE("exponential fit rejects values at or below the measurable floor, naming velocities") {
  const double floor = std::exp(-14.0);
  Points pts = {{2.0, 1e-3}, {2.5, 5e-4}, {3.0, floor}, {3.5, 2e-4}};
  try {
    fitting::fit_exponential(pts);
    FAIL("expected a rejection");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("3") != std::string::npos);
    CHECK(msg.find("floor") != std::string::npos);
  }
  Points zero = {{2.0, 1e-3}, {2.5, 5e-4}, {3.0, 0.0}};
  CHECK_THROWS_AS(fitting::fit_exponential(zero), std::invalid_argument);
  Points two = {{2.0, 1e-3}, {2.5, 5e-4}};
  CHECK_THROWS_AS(fitting::fit_exponential(two), std::invalid_argument);
}

TEST_CASE("fits tolerate small noise around the generating law") {
  std::mt19937 rng(12);
  std::uniform_real_distribution<double> noise(-0.01, 0.01);
  Points pts;
  for (double v : {2.0, 2.5, 3.0, 3.5, 4.0, 4.5})
    pts.emplace_back(v, 1.1 * std::exp(-2.9 * v) * (1.0 + noise(rng)));
  const auto fit = fitting::fit_exponential(pts);
  CHECK(fit.coefficient == doctest::Approx(1.1).epsilon(0.05));
  CHECK(fit.exponent == doctest::Approx(2.9).epsilon(0.02));
  CHECK(fit.residual <= 0.02);
}
