#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "circot/error.hpp"

namespace circot {

// Probability histogram over N circular bins. Bin i covers direction
// 2*pi*i/N; bin 0 and bin N-1 are adjacent.
class Histogram {
 public:
  enum class Mode {
    scale,    // divide by the total
    require,  // total must already be 1 within 1e-9
    raw,      // intermediate use; entries only checked for sign
  };

  Histogram(std::vector<double> values, Mode mode);

  // Matches the common construction flag: normalize=true scales,
  // normalize=false validates.
  static Histogram make(std::vector<double> values, bool normalize) {
    return Histogram(std::move(values), normalize ? Mode::scale : Mode::require);
  }
  static Histogram unnormalized(std::vector<double> values) {
    return Histogram(std::move(values), Mode::raw);
  }
  static Histogram one_hot(std::size_t n, std::size_t j_star);
  static Histogram uniform(std::size_t n);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const { return values_; }
  double total() const;
  bool normalized() const { return normalized_; }

  // Index of the single unit-mass bin, if this histogram is (numerically) one-hot.
  std::optional<std::size_t> one_hot_index(double tol = 1e-12) const;

 private:
  std::vector<double> values_;
  bool normalized_ = false;
};

struct CumulativeDistribution {
  std::vector<double> prefix;  // prefix[i] = sum of bins 0..i
  double total = 0.0;
};

CumulativeDistribution cumulative(const Histogram& h);

// Periodic extension: prefix(i + N) = prefix(i) + total for integer i.
double extended_prefix(const CumulativeDistribution& c, long i);

// Pseudo-inverse quantile: smallest bin index i with prefix[i] >= m.
// Requires 0 < m <= total (small slack for rounding).
std::size_t quantile(const CumulativeDistribution& c, double m);

// Cyclic shift: bin i of the result holds bin (i - k) mod N of the input.
Histogram rotate(const Histogram& h, long k);

}  // namespace circot
