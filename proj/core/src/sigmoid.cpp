#include "projnod/sigmoid.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "projnod/errors.hpp"

namespace projnod {

namespace {
std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

double Sigmoid::derivative(double z) const {
  if (is_tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  if (slope) return slope(z);
  const double h = 1e-6 * std::max(1.0, std::abs(z));
  return (value(z + h) - value(z - h)) / (2.0 * h);
}

Sigmoid tanh_sigmoid() {
  Sigmoid s;
  s.name = "tanh";
  s.value = [](double z) { return std::tanh(z); };
  s.slope = [](double z) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  };
  s.third_at_zero = -2.0;
  s.is_tanh = true;
  return s;
}

Sigmoid algebraic_sigmoid() {
  Sigmoid s;
  s.name = "algebraic";
  s.value = [](double z) { return z / std::sqrt(1.0 + z * z); };
  s.slope = [](double z) { return std::pow(1.0 + z * z, -1.5); };
  s.third_at_zero = -3.0;
  return s;
}

void validate_sigmoid(const Sigmoid& s) {
  if (!s.value) throw ValidationError("sigmoid '" + s.name + "' has no value function");
  const auto fail = [&](const std::string& what) {
    throw ValidationError("sigmoid '" + s.name + "' violates " + what);
  };
  if (std::abs(s(0.0)) > 1e-14) fail("S(0) = 0");
  if (std::abs(s.derivative(0.0) - 1.0) > 1e-6) fail("S'(0) = 1");
  if (!(s.third_at_zero < 0.0)) fail("S'''(0) < 0");
  const double h = 1e-3;
  for (int k = 1; k <= 400; ++k) {
    const double z = 0.025 * k;
    if (std::abs(s(z) + s(-z)) > 1e-12 * std::max(1.0, std::abs(s(z)))) fail("oddness at z = " + std::to_string(z));
    const double second = (s(z + h) - 2.0 * s(z) + s(z - h)) / (h * h);
    if (second > 1e-7) fail("concavity for z > 0 at z = " + std::to_string(z));
    if (!(s.derivative(z) >= 0.0)) fail("monotonicity at z = " + std::to_string(z));
  }
  // Finite-difference cross-check of the declared third derivative.
  const double t = 1e-2;
  const double fd = (s(2 * t) - 2 * s(t) + 2 * s(-t) - s(-2 * t)) / (2 * t * t * t);
  if (std::abs(fd - s.third_at_zero) > 1e-2 * std::abs(s.third_at_zero)) {
    fail("declared S'''(0) = " + std::to_string(s.third_at_zero) + " (finite difference " + std::to_string(fd) + ")");
  }
}

SigmoidRegistry::SigmoidRegistry() : entries_{tanh_sigmoid(), algebraic_sigmoid()} {}

SigmoidRegistry& SigmoidRegistry::instance() {
  static SigmoidRegistry r;
  return r;
}

void SigmoidRegistry::add(Sigmoid s) {
  validate_sigmoid(s);
  std::lock_guard lock(registry_mutex());
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const Sigmoid& e) { return e.name == s.name; });
  if (it != entries_.end()) {
    *it = std::move(s);
  } else {
    entries_.push_back(std::move(s));
  }
}

Sigmoid SigmoidRegistry::get(const std::string& name) const {
  std::lock_guard lock(registry_mutex());
  for (const auto& e : entries_) {
    if (e.name == name) return e;
  }
  std::string known;
  for (const auto& e : entries_) known += (known.empty() ? "" : ", ") + e.name;
  throw ValidationError("unknown sigmoid '" + name + "' (known: " + known + ")");
}

std::vector<std::string> SigmoidRegistry::names() const {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

}  // namespace projnod
