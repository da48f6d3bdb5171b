#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "circot/histogram.hpp"

namespace circot {

enum class SmoothingFamily { binomial, poisson, gaussian };

// Unimodal pmf over offsets 0..k, recentered on the true bin and mixed with a
// uniform floor: t = (1 - xi - eta) * onehot + xi * wrapped_pmf + eta / N.
struct SmoothingSpec {
  SmoothingFamily family = SmoothingFamily::binomial;
  unsigned k = 4;        // support size k + 1
  double p = 0.5;        // binomial success rate
  double lambda = 2.0;   // poisson rate
  double sigma2 = 2.5;   // gaussian variance
  double xi = 0.1;       // smoothing mass
  double eta = 0.05;     // uniform outlier mass
  // The gaussian recipe pushes the sampled density values through a softmax;
  // turning this off normalizes them by their sum instead.
  bool gaussian_softmax = true;
};

// Exact binomial probabilities, log-space, no renormalization.
std::vector<double> binomial_pmf(unsigned k, double p);

// Poisson probabilities truncated to 0..k and renormalized.
std::vector<double> poisson_pmf(unsigned k, double lambda);

// Gaussian density sampled at 0..k with mean k/2, then softmax (default) or
// plain normalization.
std::vector<double> gaussian_pmf(unsigned k, double sigma2, bool softmax_over_pdf = true);

// Places pmf entry i at bin (j_star - floor(k/2) + i) mod n; masses landing on
// the same bin add up when the support exceeds the circle.
std::vector<double> wrap_center(std::span<const double> pmf, std::size_t j_star, std::size_t n);

struct ConservativeLabel {
  Histogram histogram;
  std::size_t j_star;
};

ConservativeLabel conservative_label(std::size_t j_star, std::size_t n, const SmoothingSpec& spec);

const char* smoothing_family_name(SmoothingFamily f);

}  // namespace circot
