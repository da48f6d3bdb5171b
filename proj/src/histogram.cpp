#include "circot/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace circot {

namespace {
constexpr double kNegativeClamp = -1e-12;  // entries in [-1e-12, 0) are rounding noise
constexpr double kSumTolerance = 1e-9;
}  // namespace

Histogram::Histogram(std::vector<double> values, Mode mode) : values_(std::move(values)) {
  if (values_.empty()) fail(errc::empty_input, "histogram needs at least one bin");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    double& v = values_[i];
    if (v < kNegativeClamp)
      fail(errc::negative_mass,
           "bin " + std::to_string(i) + " holds " + std::to_string(v));
    if (v < 0.0) v = 0.0;
  }
  double sum = std::accumulate(values_.begin(), values_.end(), 0.0);
  switch (mode) {
    case Mode::scale:
      if (sum <= 0.0) fail(errc::zero_total, "cannot normalize zero mass");
      for (double& v : values_) v /= sum;
      normalized_ = true;
      break;
    case Mode::require:
      if (std::abs(sum - 1.0) > kSumTolerance)
        fail(errc::bad_parameter, "mass sums to " + std::to_string(sum) + ", expected 1");
      normalized_ = true;
      break;
    case Mode::raw:
      normalized_ = std::abs(sum - 1.0) <= kSumTolerance;
      break;
  }
}

Histogram Histogram::one_hot(std::size_t n, std::size_t j_star) {
  if (n == 0) fail(errc::empty_input, "histogram needs at least one bin");
  if (j_star >= n)
    fail(errc::index_out_of_range,
         "bin " + std::to_string(j_star) + " outside [0, " + std::to_string(n) + ")");
  std::vector<double> v(n, 0.0);
  v[j_star] = 1.0;
  return Histogram(std::move(v), Mode::require);
}

Histogram Histogram::uniform(std::size_t n) {
  if (n == 0) fail(errc::empty_input, "histogram needs at least one bin");
  return Histogram(std::vector<double>(n, 1.0 / static_cast<double>(n)), Mode::scale);
}

double Histogram::total() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

std::optional<std::size_t> Histogram::one_hot_index(double tol) const {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] > best) {
      best = values_[i];
      arg = i;
    }
  if (std::abs(best - 1.0) > tol) return std::nullopt;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (i != arg && values_[i] > tol) return std::nullopt;
  return arg;
}

CumulativeDistribution cumulative(const Histogram& h) {
  CumulativeDistribution c;
  c.prefix.resize(h.size());
  double run = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    run += h[i];
    c.prefix[i] = run;
  }
  c.total = run;
  return c;
}

double extended_prefix(const CumulativeDistribution& c, long i) {
  const long n = static_cast<long>(c.prefix.size());
  long turns = i >= 0 ? i / n : -((-i + n - 1) / n);
  long base = i - turns * n;
  return c.prefix[static_cast<std::size_t>(base)] + static_cast<double>(turns) * c.total;
}

std::size_t quantile(const CumulativeDistribution& c, double m) {
  if (!(m > 0.0) || m > c.total + 1e-12)
    fail(errc::out_of_range,
         "mass level " + std::to_string(m) + " outside (0, " + std::to_string(c.total) + "]");
  auto it = std::lower_bound(c.prefix.begin(), c.prefix.end(), m);
  if (it == c.prefix.end()) --it;  // m within slack of the total
  return static_cast<std::size_t>(it - c.prefix.begin());
}

Histogram rotate(const Histogram& h, long k) {
  const long n = static_cast<long>(h.size());
  std::vector<double> out(h.size());
  for (long i = 0; i < n; ++i) {
    long src = ((i - k) % n + n) % n;
    out[static_cast<std::size_t>(i)] = h[static_cast<std::size_t>(src)];
  }
  return Histogram(std::move(out), Histogram::Mode::raw);
}

}  // namespace circot
