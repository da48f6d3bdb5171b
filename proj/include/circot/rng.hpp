#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace circot {

// mt19937_64 with hand-rolled output transforms so streams are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // [0, 1)
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // (0, 1]
  double uniform_pos() { return 1.0 - uniform(); }

  std::uint64_t uniform_int(std::uint64_t bound) {
    // rejection keeps the distribution exact
    std::uint64_t lim = bound * (UINT64_MAX / bound);
    std::uint64_t r;
    do {
      r = eng_();
    } while (r >= lim);
    return r % bound;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform_pos();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace circot
