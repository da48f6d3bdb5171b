#include "circot/ground_metric.hpp"

#include <cmath>
#include <numbers>

namespace circot {

GroundMetricSpec GroundMetricSpec::power(double rho) {
  if (!(rho > 0.0)) fail(errc::bad_parameter, "power exponent must be positive");
  return {MetricKind::power, rho, 1.0, 0};
}

GroundMetricSpec GroundMetricSpec::huber(double tau) {
  if (!(tau > 0.0)) fail(errc::bad_parameter, "huber knee must be positive");
  return {MetricKind::huber, 1.0, tau, 0};
}

GroundMetricSpec GroundMetricSpec::chord(std::size_t n_bins) {
  if (n_bins == 0) fail(errc::bad_parameter, "chord metric needs the bin count");
  return {MetricKind::chord, 1.0, 1.0, n_bins};
}

bool GroundMetricSpec::convex() const {
  switch (kind) {
    case MetricKind::linear: return true;
    case MetricKind::power: return rho >= 1.0;
    case MetricKind::huber: return true;
    case MetricKind::chord: return false;
    case MetricKind::step: return false;
  }
  return false;
}

std::string GroundMetricSpec::name() const {
  switch (kind) {
    case MetricKind::linear: return "linear";
    case MetricKind::power: return "power(" + std::to_string(rho) + ")";
    case MetricKind::huber: return "huber(" + std::to_string(tau) + ")";
    case MetricKind::chord: return "chord";
    case MetricKind::step: return "step";
  }
  return "?";
}

std::size_t arc_length(std::size_t i, std::size_t j, std::size_t n) {
  if (n == 0) fail(errc::empty_input, "arc_length on empty cycle");
  if (i >= n || j >= n)
    fail(errc::index_out_of_range,
         "bins (" + std::to_string(i) + ", " + std::to_string(j) + ") outside [0, " +
             std::to_string(n) + ")");
  std::size_t d = i > j ? i - j : j - i;
  return d <= n - d ? d : n - d;
}

double apply_metric(const GroundMetricSpec& spec, double d) {
  if (d < 0.0) fail(errc::bad_parameter, "distance must be nonnegative");
  switch (spec.kind) {
    case MetricKind::linear:
      return d;
    case MetricKind::power:
      if (!(spec.rho > 0.0)) fail(errc::bad_parameter, "power exponent must be positive");
      return std::pow(d, spec.rho);
    case MetricKind::huber:
      if (!(spec.tau > 0.0)) fail(errc::bad_parameter, "huber knee must be positive");
      return d <= spec.tau ? d * d : spec.tau * (2.0 * d - spec.tau);
    case MetricKind::chord: {
      if (spec.n_bins == 0) fail(errc::bad_parameter, "chord metric needs the bin count");
      double r = static_cast<double>(spec.n_bins) / (2.0 * std::numbers::pi);
      return 2.0 * r * std::sin(d / (2.0 * r));
    }
    case MetricKind::step:
      return d == 0.0 ? 0.0 : 1.0;
  }
  fail(errc::bad_parameter, "unknown metric kind");
}

Matrix ground_matrix(const GroundMetricSpec& spec, std::size_t n) {
  if (n == 0) fail(errc::empty_input, "ground matrix needs at least one bin");
  if (spec.kind == MetricKind::chord && spec.n_bins != n)
    fail(errc::bad_parameter, "chord spec built for a different bin count");
  // f of each distinct arc length, computed once.
  std::vector<double> by_arc(n / 2 + 1);
  for (std::size_t d = 0; d <= n / 2; ++d)
    by_arc[d] = apply_metric(spec, static_cast<double>(d));
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = by_arc[arc_length(i, j, n)];
  return m;
}

Matrix line_matrix(const GroundMetricSpec& spec, std::size_t n) {
  if (n == 0) fail(errc::empty_input, "line matrix needs at least one bin");
  std::vector<double> by_gap(n);
  for (std::size_t d = 0; d < n; ++d) by_gap[d] = apply_metric(spec, static_cast<double>(d));
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m.at(i, j) = by_gap[i > j ? i - j : j - i];
  return m;
}

Matrix centroid_distances(const std::vector<std::vector<std::vector<double>>>& features_by_class) {
  const std::size_t n = features_by_class.size();
  if (n == 0) fail(errc::empty_input, "no classes");
  std::size_t dim = 0;
  for (const auto& cls : features_by_class)
    for (const auto& f : cls) {
      dim = f.size();
      break;
    }
  if (dim == 0) fail(errc::missing_class, "no feature vectors at all");

  std::vector<std::vector<double>> centroid(n, std::vector<double>(dim, 0.0));
  for (std::size_t c = 0; c < n; ++c) {
    const auto& cls = features_by_class[c];
    if (cls.empty()) fail(errc::missing_class, "class " + std::to_string(c) + " has no samples");
    for (const auto& f : cls) {
      if (f.size() != dim)
        fail(errc::dimension_mismatch, "feature length " + std::to_string(f.size()) +
                                           " != " + std::to_string(dim));
      for (std::size_t k = 0; k < dim; ++k) centroid[c][k] += f[k];
    }
    for (std::size_t k = 0; k < dim; ++k) centroid[c][k] /= static_cast<double>(cls.size());
  }

  Matrix d(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) {
      double l1 = 0.0;
      for (std::size_t k = 0; k < dim; ++k) l1 += std::abs(centroid[a][k] - centroid[b][k]);
      d.at(a, b) = l1;
      d.at(b, a) = l1;
    }
  return d;
}

Matrix blend_adaptive(const Matrix& d_bar, const GroundMetricSpec& spec, double blend_weight,
                      bool rescale) {
  if (d_bar.rows == 0 || d_bar.rows != d_bar.cols)
    fail(errc::dimension_mismatch, "d_bar must be square and nonempty");
  if (blend_weight < 0.0) fail(errc::bad_parameter, "blend weight must be nonnegative");
  const std::size_t n = d_bar.rows;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(d_bar.at(i, j) - d_bar.at(j, i)) > 1e-9)
        fail(errc::asymmetric_input, "d_bar is not symmetric");

  double scale = 1.0;
  if (rescale) {
    double mx = d_bar.max_value();
    if (mx <= 0.0) fail(errc::bad_parameter, "d_bar has no positive entries");
    scale = static_cast<double>(n / 2) / mx;
  }

  Matrix arc = ground_matrix(spec, n);
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double learned = apply_metric(spec, d_bar.at(i, j) * scale);
      out.at(i, j) = (learned + blend_weight * arc.at(i, j)) / (1.0 + blend_weight);
    }
  return out;
}

}  // namespace circot
