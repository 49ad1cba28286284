#include "wlab/convex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wlab {

namespace {
constexpr double kConvexityTol = 1e-12;
}

ConvexFunctional ConvexFunctional::power(double q) {
  if (!(q > 1.0)) throw std::invalid_argument("power functional requires exponent q > 1");
  ConvexFunctional phi;
  phi.kind_ = Kind::Power;
  phi.q_ = q;
  std::ostringstream os;
  os << "power:" << q;
  phi.name_ = os.str();
  phi.check_convexity_grid();
  return phi;
}

ConvexFunctional ConvexFunctional::xlogx() {
  ConvexFunctional phi;
  phi.kind_ = Kind::XLogX;
  phi.name_ = "xlogx";
  phi.check_convexity_grid();
  return phi;
}

ConvexFunctional ConvexFunctional::piecewise_linear(
    std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("pwl functional needs at least two points");
  if (points.front().first != 0.0 || points.back().first != 1.0)
    throw std::invalid_argument("pwl breakpoints must start at t=0 and end at t=1");
  ConvexFunctional phi;
  phi.kind_ = Kind::Pwl;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && !(points[i].first > points[i - 1].first))
      throw std::invalid_argument("pwl breakpoints must be strictly increasing");
    phi.ts_.push_back(points[i].first);
    phi.vs_.push_back(points[i].second);
  }
  for (std::size_t i = 0; i + 1 < phi.ts_.size(); ++i)
    phi.slopes_.push_back((phi.vs_[i + 1] - phi.vs_[i]) / (phi.ts_[i + 1] - phi.ts_[i]));
  for (std::size_t i = 0; i + 1 < phi.slopes_.size(); ++i)
    if (phi.slopes_[i + 1] < phi.slopes_[i] - kConvexityTol)
      throw std::invalid_argument("pwl table is not convex: slopes must be non-decreasing");
  std::ostringstream os;
  os << "pwl:";
  for (std::size_t i = 0; i < phi.ts_.size(); ++i) {
    if (i) os << ';';
    os << phi.ts_[i] << ',' << phi.vs_[i];
  }
  phi.name_ = os.str();
  phi.check_convexity_grid();
  return phi;
}

ConvexFunctional ConvexFunctional::parse(const std::string& spec) {
  if (spec == "xlogx") return xlogx();
  if (spec.rfind("power:", 0) == 0) {
    std::size_t pos = 0;
    double q;
    try {
      q = std::stod(spec.substr(6), &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse functional spec '" + spec + "'");
    }
    if (pos != spec.size() - 6)
      throw std::invalid_argument("trailing characters in functional spec '" + spec + "'");
    return power(q);
  }
  if (spec.rfind("pwl:", 0) == 0) {
    std::vector<std::pair<double, double>> pts;
    std::stringstream body(spec.substr(4));
    std::string item;
    while (std::getline(body, item, ';')) {
      const auto comma = item.find(',');
      if (comma == std::string::npos)
        throw std::invalid_argument("pwl point '" + item + "' must be '<t>,<v>'");
      try {
        pts.emplace_back(std::stod(item.substr(0, comma)), std::stod(item.substr(comma + 1)));
      } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse pwl point '" + item + "'");
      }
    }
    return piecewise_linear(std::move(pts));
  }
  throw std::invalid_argument("unknown functional spec '" + spec +
                              "' (expected power:<q>, xlogx, or pwl:<t,v;...>)");
}

double ConvexFunctional::value(double t) const {
  switch (kind_) {
    case Kind::Power:
      return std::pow(t, q_);
    case Kind::XLogX:
      return t == 0.0 ? 0.0 : t * std::log(t);
    case Kind::Pwl: {
      auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
      std::size_t i = (it == ts_.begin()) ? 0 : static_cast<std::size_t>(it - ts_.begin()) - 1;
      if (i + 1 >= ts_.size()) i = ts_.size() - 2;
      return vs_[i] + slopes_[i] * (t - ts_[i]);
    }
  }
  return 0.0;
}

double ConvexFunctional::right_derivative(double t) const {
  switch (kind_) {
    case Kind::Power:
      return q_ * std::pow(t, q_ - 1.0);
    case Kind::XLogX:
      return t == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(t) + 1.0;
    case Kind::Pwl: {
      // slope of the segment [t_k, t_{k+1}) containing t, right-continuous
      auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
      std::size_t k = (it == ts_.begin()) ? 0 : static_cast<std::size_t>(it - ts_.begin()) - 1;
      if (k >= slopes_.size()) k = slopes_.size() - 1;
      return slopes_[k];
    }
  }
  return 0.0;
}

double ConvexFunctional::left_derivative(double t) const {
  switch (kind_) {
    case Kind::Power:
      return q_ * std::pow(t, q_ - 1.0);
    case Kind::XLogX:
      return t == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(t) + 1.0;
    case Kind::Pwl: {
      // segment ending at or after t, looking left
      auto it = std::lower_bound(ts_.begin(), ts_.end(), t);
      std::size_t i = static_cast<std::size_t>(it - ts_.begin());
      if (i == 0) return slopes_.front();
      return slopes_[i - 1];
    }
  }
  return 0.0;
}

std::vector<double> ConvexFunctional::kinks() const {
  if (kind_ != Kind::Pwl) return {};
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < ts_.size(); ++i) out.push_back(ts_[i]);
  return out;
}

bool ConvexFunctional::vanishes_at_zero() const { return value(0.0) == 0.0; }

void ConvexFunctional::check_convexity_grid() const {
  const int n = 101;
  std::vector<double> grid(n), val(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = static_cast<double>(i) / (n - 1);
    val[i] = value(grid[i]);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; j += 7) {
      const double mid = value(0.5 * (grid[i] + grid[j]));
      if (mid > 0.5 * (val[i] + val[j]) + kConvexityTol)
        throw std::invalid_argument("functional failed the midpoint convexity check");
    }
    if (grid[i] > 0.0 && grid[i] < 1.0) {
      if (left_derivative(grid[i]) > right_derivative(grid[i]) + kConvexityTol)
        throw std::invalid_argument("functional has left derivative above right derivative");
    }
  }
}

}  // namespace wlab
