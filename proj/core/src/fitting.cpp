#include "gpelab/fitting.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace gpelab::fitting {
namespace {

constexpr double kFloor = 8.315287191035679e-7;  // e^{-14}

std::string list_velocities(const std::vector<double>& vs) {
  std::string out;
  for (double v : vs) {
    if (!out.empty()) out += ", ";
    out += std::to_string(v);
  }
  return out;
}

}  // namespace

Line least_squares_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("least_squares_line needs >= 2 paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("least_squares_line: degenerate abscissae");
  }
  Line line;
  line.slope = sxy / sxx;
  line.intercept = my - line.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (line.slope * x[i] + line.intercept);
    ss += r * r;
  }
  line.rms = std::sqrt(ss / n);
  return line;
}

FitResult fit_power_law(std::span<const std::pair<double, double>> points,
                        double alpha) {
  if (points.size() < 3) {
    throw std::invalid_argument("fit_power_law needs at least 3 points");
  }
  const double asymptote = 1.0 / (1.0 + alpha * alpha);
  std::vector<double> log_v, log_deficit, bad;
  FitResult result;
  for (const auto& [v, transmitted] : points) {
    if (!(v > 0.0)) {
      throw std::invalid_argument("fit_power_law: nonpositive velocity");
    }
    const double deficit = asymptote - transmitted;
    if (!(deficit > 0.0)) {
      bad.push_back(v);
      continue;
    }
    log_v.push_back(std::log(v));
    log_deficit.push_back(std::log(deficit));
    result.points_used.emplace_back(v, transmitted);
  }
  if (!bad.empty()) {
    throw std::invalid_argument(
        "fit_power_law: transmission at or above the asymptote " +
        std::to_string(asymptote) + " at v = " + list_velocities(bad));
  }
  const Line line = least_squares_line(log_v, log_deficit);
  result.coefficient = std::exp(line.intercept);
  result.exponent = -line.slope;
  result.residual = line.rms;
  return result;
}

FitResult fit_exponential(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) {
    throw std::invalid_argument("fit_exponential needs at least 3 points");
  }
  std::vector<double> v, log_b, bad;
  FitResult result;
  for (const auto& [velocity, trapped] : points) {
    if (!(trapped > kFloor)) {
      bad.push_back(velocity);
      continue;
    }
    v.push_back(velocity);
    log_b.push_back(std::log(trapped));
    result.points_used.emplace_back(velocity, trapped);
  }
  if (!bad.empty()) {
    throw std::invalid_argument(
        "fit_exponential: trapped mass at or below the e^-14 measurable "
        "floor at v = " +
        list_velocities(bad));
  }
  const Line line = least_squares_line(v, log_b);
  result.coefficient = std::exp(line.intercept);
  result.exponent = -line.slope;
  result.residual = line.rms;
  return result;
}

}  // namespace gpelab::fitting
