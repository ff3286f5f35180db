// Deterministic random draws on top of mt19937 (the engine is fully
// specified by the standard; library distributions are not, so draws are
// derived here to keep regression outputs stable across toolchains).
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace specgeo {

class DetRng {
 public:
  explicit DetRng(uint32_t seed) : eng_(seed) {}

  double uniform01() {
    return (static_cast<double>(eng_()) + 0.5) / 4294967296.0;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }
  int below(int n) { return static_cast<int>(eng_() % static_cast<uint32_t>(n)); }
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    have_spare_ = true;
    return r * std::cos(th);
  }

 private:
  std::mt19937 eng_;
  bool have_spare_ = false;
  double spare_ = 0;
};

}  // namespace specgeo
