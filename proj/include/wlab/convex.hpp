#pragma once

#include <string>
#include <vector>

namespace wlab {

// Convex function on [0, 1] with one-sided derivatives. Instances come from a
// small catalogue (t^q, t*log t) or from user piecewise-linear tables; all
// constructors validate convexity and reject anything outside the contract.
class ConvexFunctional {
 public:
  static ConvexFunctional power(double q);
  static ConvexFunctional xlogx();
  // points are (t, value) pairs with t strictly increasing from 0 to 1
  static ConvexFunctional piecewise_linear(std::vector<std::pair<double, double>> points);
  // grammar: "power:<q>" | "xlogx" | "pwl:<t1,v1;t2,v2;...>"
  static ConvexFunctional parse(const std::string& spec);

  double value(double t) const;
  double right_derivative(double t) const;
  double left_derivative(double t) const;

  const std::string& name() const { return name_; }
  // true when the derivative has no interior jumps
  bool smooth() const { return kind_ != Kind::Pwl; }
  // interior kink locations, for quadrature splitting
  std::vector<double> kinks() const;
  // true when value(0) == 0 (needed by integrals against infinite measures)
  bool vanishes_at_zero() const;

 private:
  enum class Kind { Power, XLogX, Pwl };
  ConvexFunctional() = default;
  void check_convexity_grid() const;

  Kind kind_ = Kind::Power;
  double q_ = 2.0;
  std::vector<double> ts_, vs_, slopes_;
  std::string name_;
};

}  // namespace wlab
