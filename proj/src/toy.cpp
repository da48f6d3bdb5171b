#include "circot/toy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <numeric>

#include "circot/error.hpp"
#include "circot/rng.hpp"

namespace circot {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

bool parse_number(const std::string& text, double* out) {
  if (text.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) return false;
  *out = v;
  return true;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

SyntheticDataset gen_synthetic(std::size_t n_bins, std::size_t n_samples, const NoiseSpec& noise,
                               std::uint64_t seed) {
  if (n_bins < 4) fail(errc::bad_parameter, "need at least four bins");
  if (n_samples < n_bins) fail(errc::bad_parameter, "need at least one sample per bin");
  if (noise.p < 0.0 || noise.p > 1.0) fail(errc::bad_parameter, "noise p must lie in [0, 1]");
  if (noise.outlier_rate < 0.0 || noise.outlier_rate > 1.0)
    fail(errc::bad_parameter, "outlier rate must lie in [0, 1]");
  if (noise.feature_sigma < 0.0) fail(errc::bad_parameter, "feature sigma must be nonnegative");

  Rng rng(seed);
  SyntheticDataset ds;
  ds.n_bins = n_bins;
  ds.samples.reserve(n_samples);
  const long ln = long(n_bins);
  for (std::size_t i = 0; i < n_samples; ++i) {
    Sample smp;
    smp.true_bin = rng.uniform_int(n_bins);
    const double angle = 2.0 * std::numbers::pi * double(smp.true_bin) / double(n_bins);
    smp.features.reserve(kToyFeatureDim);
    for (int h = 1; h <= 3; ++h) {
      smp.features.push_back(std::cos(h * angle) + noise.feature_sigma * rng.gaussian());
      smp.features.push_back(std::sin(h * angle) + noise.feature_sigma * rng.gaussian());
    }
    if (rng.bernoulli(noise.outlier_rate)) {
      smp.noisy_bin = rng.uniform_int(n_bins);
    } else {
      long off = -long(noise.k / 2);
      for (unsigned k = 0; k < noise.k; ++k) off += rng.bernoulli(noise.p) ? 1 : 0;
      long b = (long(smp.true_bin) + off) % ln;
      if (b < 0) b += ln;
      smp.noisy_bin = std::size_t(b);
    }
    ds.samples.push_back(std::move(smp));
  }
  return ds;
}

std::vector<double> ToyModel::hidden(std::span<const double> x) const {
  std::vector<double> h(n_hidden, 0.0);
  for (std::size_t f = 0; f < n_features; ++f) {
    const double xf = x[f];
    const double* row = &w1[f * n_hidden];
    for (std::size_t j = 0; j < n_hidden; ++j) h[j] += xf * row[j];
  }
  for (double& v : h) v = std::tanh(v);
  return h;
}

std::vector<double> ToyModel::logits(std::span<const double> x) const {
  const std::vector<double> h = hidden(x);
  std::vector<double> z(n_bins, 0.0);
  for (std::size_t j = 0; j < n_hidden; ++j) {
    const double hv = h[j];
    const double* row = &w2[j * n_bins];
    for (std::size_t n = 0; n < n_bins; ++n) z[n] += hv * row[n];
  }
  return z;
}

std::vector<double> ToyModel::softmax(std::span<const double> x) const {
  std::vector<double> z = logits(x);
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return z;
}

std::size_t ToyModel::predict_bin(std::span<const double> x) const {
  const std::vector<double> z = logits(x);
  return std::size_t(std::max_element(z.begin(), z.end()) - z.begin());
}

LossDescriptor LossDescriptor::parse(const std::string& text) {
  std::string low;
  low.reserve(text.size());
  for (char c : text) low.push_back(char(std::tolower((unsigned char)c)));
  if (low == "ce") return LossDescriptor{};

  const std::string prefix = "wass-";
  if (low.rfind(prefix, 0) != 0) fail(errc::parse_error, "unknown loss '" + text + "'");
  const std::vector<std::string> parts = split(low.substr(prefix.size()), '-');
  if (parts.size() > 2) fail(errc::parse_error, "unknown loss '" + text + "'");

  LossDescriptor d;
  d.kind = LossKind::wasserstein;
  const std::string& m = parts[0];
  double param = 0.0;
  if (m == "linear") {
    d.metric = GroundMetricSpec::linear();
  } else if (m == "chord") {
    d.metric.kind = MetricKind::chord;  // n_bins filled in from the histogram size
  } else if (m == "step") {
    d.metric = GroundMetricSpec::step();
  } else if (m.rfind("power", 0) == 0 && parse_number(m.substr(5), &param)) {
    d.metric = GroundMetricSpec::power(param);
  } else if (m.rfind("huber", 0) == 0 && parse_number(m.substr(5), &param)) {
    d.metric = GroundMetricSpec::huber(param);
  } else {
    fail(errc::parse_error, "unknown ground metric '" + m + "'");
  }

  if (parts.size() == 2) {
    // shape parameters inherit the label-module defaults; the mixing weight is
    // opened up to half so the target spread covers the benchmark label noise
    SmoothingSpec s;
    s.xi = 0.5;
    if (parts[1] == "binomial") s.family = SmoothingFamily::binomial;
    else if (parts[1] == "poisson") s.family = SmoothingFamily::poisson;
    else if (parts[1] == "gaussian") s.family = SmoothingFamily::gaussian;
    else fail(errc::parse_error, "unknown smoothing family '" + parts[1] + "'");
    d.smoothing = s;
  }
  return d;
}

std::string LossDescriptor::name() const {
  if (kind == LossKind::cross_entropy) return "ce";
  std::string out = "wass-";
  switch (metric.kind) {
    case MetricKind::linear: out += "linear"; break;
    case MetricKind::power: out += "power" + format_number(metric.rho); break;
    case MetricKind::huber: out += "huber" + format_number(metric.tau); break;
    case MetricKind::chord: out += "chord"; break;
    case MetricKind::step: out += "step"; break;
  }
  if (smoothing) {
    out += '-';
    out += smoothing_family_name(smoothing->family);
  }
  return out;
}

namespace {

// Logits and softmax from precomputed hidden activations; throws on overflow.
void head_forward(const ToyModel& m, const std::vector<double>& hid, std::vector<double>& z,
                  std::vector<double>& s) {
  z.assign(m.n_bins, 0.0);
  for (std::size_t j = 0; j < m.n_hidden; ++j) {
    const double hv = hid[j];
    const double* row = &m.w2[j * m.n_bins];
    for (std::size_t n = 0; n < m.n_bins; ++n) z[n] += hv * row[n];
  }
  const double zmax = *std::max_element(z.begin(), z.end());
  if (!std::isfinite(zmax)) fail(errc::diverged_loss, "logits are not finite");
  s.assign(m.n_bins, 0.0);
  double sum = 0.0;
  for (std::size_t n = 0; n < m.n_bins; ++n) {
    s[n] = std::exp(z[n] - zmax);
    sum += s[n];
  }
  for (std::size_t n = 0; n < m.n_bins; ++n) s[n] /= sum;
}

}  // namespace

TrainResult train_toy(const SyntheticDataset& data, const LossDescriptor& loss,
                      const TrainOptions& opt) {
  if (data.samples.empty()) fail(errc::empty_input, "dataset has no samples");
  if (data.n_bins < 2) fail(errc::bad_parameter, "need at least two bins");
  if (opt.epochs == 0) fail(errc::bad_parameter, "epochs must be at least 1");
  if (!(opt.lr > 0.0)) fail(errc::bad_parameter, "learning rate must be positive");
  if (opt.weight_decay < 0.0) fail(errc::bad_parameter, "weight decay must be nonnegative");
  if (opt.hidden == 0) fail(errc::bad_parameter, "hidden width must be positive");

  const std::size_t n = data.samples.size();
  const std::size_t nb = data.n_bins;
  const std::size_t nf = data.samples.front().features.size();
  if (nf == 0) fail(errc::empty_input, "samples have no features");
  for (const Sample& smp : data.samples) {
    if (smp.features.size() != nf) fail(errc::dimension_mismatch, "ragged feature vectors");
    if (smp.true_bin >= nb || smp.noisy_bin >= nb)
      fail(errc::index_out_of_range, "sample bin outside histogram");
  }

  GroundMetricSpec spec = loss.metric;
  if (spec.kind == MetricKind::chord && spec.n_bins == 0) spec.n_bins = nb;
  const bool wass = loss.kind == LossKind::wasserstein;
  const bool smoothed = wass && loss.smoothing.has_value();
  if (smoothed && !spec.convex())
    fail(errc::bad_parameter, "smoothed targets need a convex ground metric for gradients");
  if (opt.adaptive && (!wass || smoothed))
    fail(errc::bad_parameter, "adaptive metric learning applies to one-hot Wasserstein losses");
  if (opt.adaptive && opt.adapt_rounds == 0)
    fail(errc::bad_parameter, "adapt_rounds must be positive");
  const QuantilePrecision prec(loss.precision);

  std::vector<std::vector<double>> grad_cache;
  std::vector<Histogram> targets;
  if (wass && !smoothed) {
    grad_cache.assign(nb, std::vector<double>(nb, 0.0));
    for (std::size_t j = 0; j < nb; ++j)
      for (std::size_t i = 0; i < nb; ++i)
        grad_cache[j][i] = apply_metric(spec, double(arc_length(i, j, nb)));
  } else if (smoothed) {
    targets.reserve(nb);
    for (std::size_t j = 0; j < nb; ++j)
      targets.push_back(conservative_label(j, nb, *loss.smoothing).histogram);
  }

  ToyModel model;
  model.n_features = nf;
  model.n_hidden = opt.hidden;
  model.n_bins = nb;
  Rng rng(opt.seed);
  model.w1.resize(nf * opt.hidden);
  const double scale1 = 1.0 / std::sqrt(double(nf));
  for (double& v : model.w1) v = scale1 * rng.gaussian();
  model.w2.resize(opt.hidden * nb);
  const double scale2 = 1.0 / std::sqrt(double(opt.hidden));
  for (double& v : model.w2) v = scale2 * rng.gaussian();

  std::vector<double> gw1(model.w1.size()), gw2(model.w2.size());
  std::vector<double> hid, z, s, g, dz, dh;
  const double deg = 360.0 / double(nb);
  const std::size_t bs = (opt.batch_size == 0 || opt.batch_size > n) ? n : opt.batch_size;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult out;
  out.history.reserve(opt.epochs);

  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    double blend = 0.0;
    if (opt.adaptive) {
      const double left = double(opt.adapt_rounds - std::min(epoch, opt.adapt_rounds));
      blend = 10.0 * left / double(opt.adapt_rounds);
      std::vector<std::vector<std::vector<double>>> by_class(nb);
      for (const Sample& smp : data.samples) {
        std::vector<double> hv = model.hidden(smp.features);
        double norm = 0.0;
        for (double v : hv) norm += v * v;
        norm = std::sqrt(norm);
        if (norm > 1e-12)
          for (double& v : hv) v /= norm;
        by_class[smp.noisy_bin].push_back(std::move(hv));
      }
      const Matrix blended = blend_adaptive(centroid_distances(by_class), spec, blend);
      for (std::size_t j = 0; j < nb; ++j)
        for (std::size_t i = 0; i < nb; ++i) grad_cache[j][i] = blended.at(i, j);
    }

    if (bs < n)
      for (std::size_t i = n - 1; i > 0; --i)
        std::swap(order[i], order[rng.uniform_int(i + 1)]);
    double loss_sum = 0.0;

    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t stop = std::min(start + bs, n);
      std::fill(gw1.begin(), gw1.end(), 0.0);
      std::fill(gw2.begin(), gw2.end(), 0.0);

      for (std::size_t idx = start; idx < stop; ++idx) {
        const Sample& smp = data.samples[order[idx]];
        hid = model.hidden(smp.features);
        head_forward(model, hid, z, s);

        const std::size_t y = smp.noisy_bin;
        double li = 0.0;
        dz.assign(nb, 0.0);
        if (!wass) {
          li = -std::log(std::max(s[y], 1e-300));
          for (std::size_t nn = 0; nn < nb; ++nn) dz[nn] = s[nn];
          dz[y] -= 1.0;
        } else if (!smoothed) {
          const std::vector<double>& gc = grad_cache[y];
          double dot = 0.0;
          for (std::size_t nn = 0; nn < nb; ++nn) dot += s[nn] * gc[nn];
          li = dot;
          for (std::size_t nn = 0; nn < nb; ++nn) dz[nn] = s[nn] * (gc[nn] - dot);
        } else {
          const Histogram hs = Histogram::unnormalized(s);
          const Histogram& ht = targets[y];
          if (spec.kind == MetricKind::linear) {
            li = linear_circular(hs, ht).value;
            g = linear_circular_grad(hs, ht);
          } else {
            li = convex_circular_with_grad(hs, ht, spec, g, prec).value;
          }
          double dot = 0.0;
          for (std::size_t nn = 0; nn < nb; ++nn) dot += s[nn] * g[nn];
          for (std::size_t nn = 0; nn < nb; ++nn) dz[nn] = s[nn] * (g[nn] - dot);
        }
        if (!std::isfinite(li)) fail(errc::diverged_loss, "loss is not finite");
        loss_sum += li;

        for (std::size_t j = 0; j < opt.hidden; ++j) {
          const double hv = hid[j];
          if (hv == 0.0) continue;
          double* row = &gw2[j * nb];
          for (std::size_t nn = 0; nn < nb; ++nn) row[nn] += hv * dz[nn];
        }
        dh.assign(opt.hidden, 0.0);
        for (std::size_t j = 0; j < opt.hidden; ++j) {
          const double* row = &model.w2[j * nb];
          double acc = 0.0;
          for (std::size_t nn = 0; nn < nb; ++nn) acc += row[nn] * dz[nn];
          dh[j] = acc * (1.0 - hid[j] * hid[j]);
        }
        for (std::size_t f = 0; f < nf; ++f) {
          const double xf = smp.features[f];
          if (xf == 0.0) continue;
          double* row = &gw1[f * opt.hidden];
          for (std::size_t j = 0; j < opt.hidden; ++j) row[j] += xf * dh[j];
        }
      }

      const double step = opt.lr / double(stop - start);
      const double keep = 1.0 - opt.lr * opt.weight_decay;
      for (std::size_t i = 0; i < model.w1.size(); ++i)
        model.w1[i] = keep * model.w1[i] - step * gw1[i];
      for (std::size_t i = 0; i < model.w2.size(); ++i)
        model.w2[i] = keep * model.w2[i] - step * gw2[i];
    }

    const double mean_loss = loss_sum / double(n);
    if (!std::isfinite(mean_loss)) fail(errc::diverged_loss, "loss is not finite");

    double arc_sum = 0.0;
    double exp_arc = 0.0;
    for (const Sample& smp : data.samples) {
      hid = model.hidden(smp.features);
      head_forward(model, hid, z, s);
      const std::size_t pred = std::size_t(std::max_element(z.begin(), z.end()) - z.begin());
      arc_sum += double(arc_length(pred, smp.true_bin, nb));
      double ea = 0.0;
      for (std::size_t nn = 0; nn < nb; ++nn)
        ea += s[nn] * double(arc_length(nn, smp.true_bin, nb));
      exp_arc += ea;
    }
    out.history.push_back(
        {epoch, mean_loss, arc_sum / double(n) * deg, exp_arc / double(n) * deg, blend});
  }

  out.model = std::move(model);
  return out;
}

namespace {

void check_bin_pairs(std::span<const std::size_t> pred, std::span<const std::size_t> truth) {
  if (pred.size() != truth.size()) fail(errc::length_mismatch, "prediction count != truth count");
  if (pred.empty()) fail(errc::empty_input, "no samples to score");
}

}  // namespace

double maad(std::span<const std::size_t> pred_bins, std::span<const std::size_t> true_bins,
            std::size_t n_bins) {
  check_bin_pairs(pred_bins, true_bins);
  double acc = 0.0;
  for (std::size_t i = 0; i < pred_bins.size(); ++i)
    acc += double(arc_length(pred_bins[i], true_bins[i], n_bins));
  return acc / double(pred_bins.size()) * (360.0 / double(n_bins));
}

double acc_at(std::span<const std::size_t> pred_bins, std::span<const std::size_t> true_bins,
              std::size_t n_bins, double threshold_radians) {
  check_bin_pairs(pred_bins, true_bins);
  if (!(threshold_radians > 0.0) || threshold_radians > std::numbers::pi + 1e-12)
    fail(errc::bad_parameter, "threshold must lie in (0, pi]");
  const double scale = 2.0 * std::numbers::pi / double(n_bins);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred_bins.size(); ++i)
    if (double(arc_length(pred_bins[i], true_bins[i], n_bins)) * scale < threshold_radians) ++hits;
  return double(hits) / double(pred_bins.size());
}

double median_ae(std::span<const std::size_t> pred_bins, std::span<const std::size_t> true_bins,
                 std::size_t n_bins) {
  check_bin_pairs(pred_bins, true_bins);
  std::vector<double> errors(pred_bins.size());
  const double deg = 360.0 / double(n_bins);
  for (std::size_t i = 0; i < pred_bins.size(); ++i)
    errors[i] = double(arc_length(pred_bins[i], true_bins[i], n_bins)) * deg;
  std::sort(errors.begin(), errors.end());
  const std::size_t half = errors.size() / 2;
  if (errors.size() % 2 == 1) return errors[half];
  return 0.5 * (errors[half - 1] + errors[half]);
}

}  // namespace circot
