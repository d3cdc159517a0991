#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace projnod {

/// Odd saturating nonlinearity S with S(0) = 0, S'(0) = 1 and
/// sign(S''(z)) = -sign(z).
struct Sigmoid {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> slope;
  /// S'''(0), needed for the cubic bifurcation coefficient.
  double third_at_zero = 0.0;
  /// True for the built-in tanh; lets hot loops skip std::function dispatch.
  bool is_tanh = false;

  double operator()(double z) const { return is_tanh ? std::tanh(z) : value(z); }
  double derivative(double z) const;
};

Sigmoid tanh_sigmoid();
/// z / sqrt(1 + z^2).
Sigmoid algebraic_sigmoid();

/// Numerically checks the sigmoid contract on a grid; throws ValidationError
/// naming the violated property.
void validate_sigmoid(const Sigmoid& s);

/// Named sigmoids. Registration validates the contract.
class SigmoidRegistry {
 public:
  static SigmoidRegistry& instance();

  void add(Sigmoid s);
  /// Throws ValidationError for an unknown name.
  Sigmoid get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  SigmoidRegistry();
  std::vector<Sigmoid> entries_;
};

}  // namespace projnod
