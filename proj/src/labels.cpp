#include "circot/labels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "circot/error.hpp"

namespace circot {

namespace {

double log_choose(unsigned n, unsigned k) {
  return std::lgamma(double(n) + 1.0) - std::lgamma(double(k) + 1.0) -
         std::lgamma(double(n - k) + 1.0);
}

}  // namespace

std::vector<double> binomial_pmf(unsigned k, double p) {
  if (p < 0.0 || p > 1.0) fail(errc::bad_parameter, "binomial p must lie in [0, 1]");
  std::vector<double> pmf(k + 1, 0.0);
  if (p == 0.0) {
    pmf[0] = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf[k] = 1.0;
    return pmf;
  }
  const double lp = std::log(p);
  const double lq = std::log1p(-p);
  for (unsigned i = 0; i <= k; ++i)
    pmf[i] = std::exp(log_choose(k, i) + double(i) * lp + double(k - i) * lq);
  return pmf;
}

std::vector<double> poisson_pmf(unsigned k, double lambda) {
  if (!(lambda > 0.0)) fail(errc::bad_parameter, "poisson lambda must be positive");
  const double ll = std::log(lambda);
  std::vector<double> pmf(k + 1);
  double sum = 0.0;
  for (unsigned i = 0; i <= k; ++i) {
    pmf[i] = std::exp(double(i) * ll - lambda - std::lgamma(double(i) + 1.0));
    sum += pmf[i];
  }
  if (!(sum > 0.0)) fail(errc::numerical_failure, "truncated poisson mass underflowed");
  for (double& v : pmf) v /= sum;
  return pmf;
}

std::vector<double> gaussian_pmf(unsigned k, double sigma2, bool softmax_over_pdf) {
  if (!(sigma2 > 0.0)) fail(errc::bad_parameter, "gaussian variance must be positive");
  const double mu = double(k) / 2.0;
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma2);
  std::vector<double> vals(k + 1);
  for (unsigned i = 0; i <= k; ++i) {
    const double z = double(i) - mu;
    vals[i] = norm * std::exp(-z * z / (2.0 * sigma2));
  }
  if (softmax_over_pdf) {
    const double vmax = *std::max_element(vals.begin(), vals.end());
    double sum = 0.0;
    for (double& v : vals) {
      v = std::exp(v - vmax);
      sum += v;
    }
    for (double& v : vals) v /= sum;
  } else {
    double sum = 0.0;
    for (double v : vals) sum += v;
    for (double& v : vals) v /= sum;
  }
  return vals;
}

std::vector<double> wrap_center(std::span<const double> pmf, std::size_t j_star, std::size_t n) {
  if (n == 0) fail(errc::empty_input, "cannot wrap onto zero bins");
  if (pmf.empty()) fail(errc::empty_input, "empty pmf");
  if (j_star >= n) fail(errc::index_out_of_range, "center bin outside histogram");
  std::vector<double> out(n, 0.0);
  const long shift = long(j_star) - long((pmf.size() - 1) / 2);
  const long ln = long(n);
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    long b = (shift + long(i)) % ln;
    if (b < 0) b += ln;
    out[std::size_t(b)] += pmf[i];
  }
  return out;
}

ConservativeLabel conservative_label(std::size_t j_star, std::size_t n,
                                     const SmoothingSpec& spec) {
  if (n == 0) fail(errc::empty_input, "label needs at least one bin");
  if (j_star >= n) fail(errc::index_out_of_range, "true bin outside histogram");
  if (spec.xi < 0.0 || spec.eta < 0.0 || spec.xi + spec.eta > 1.0)
    fail(errc::bad_parameter, "smoothing masses must satisfy xi, eta >= 0 and xi + eta <= 1");

  std::vector<double> pmf;
  switch (spec.family) {
    case SmoothingFamily::binomial:
      pmf = binomial_pmf(spec.k, spec.p);
      break;
    case SmoothingFamily::poisson:
      pmf = poisson_pmf(spec.k, spec.lambda);
      break;
    case SmoothingFamily::gaussian:
      pmf = gaussian_pmf(spec.k, spec.sigma2, spec.gaussian_softmax);
      break;
  }
  const std::vector<double> wrapped = wrap_center(pmf, j_star, n);

  std::vector<double> t(n);
  const double point = 1.0 - spec.xi - spec.eta;
  for (std::size_t j = 0; j < n; ++j) t[j] = spec.eta / double(n) + spec.xi * wrapped[j];
  t[j_star] += point;
  return ConservativeLabel{Histogram::make(std::move(t), false), j_star};
}

const char* smoothing_family_name(SmoothingFamily f) {
  switch (f) {
    case SmoothingFamily::binomial: return "binomial";
    case SmoothingFamily::poisson: return "poisson";
    case SmoothingFamily::gaussian: return "gaussian";
  }
  return "unknown";
}

}  // namespace circot
