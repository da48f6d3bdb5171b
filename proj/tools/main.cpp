#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "circot/circular_ot.hpp"
#include "circot/error.hpp"
#include "circot/fuzz.hpp"
#include "circot/ground_metric.hpp"
#include "circot/json_io.hpp"
#include "circot/labels.hpp"
#include "circot/rng.hpp"
#include "circot/sinkhorn.hpp"
#include "circot/toy.hpp"
#include "circot/transport_lp.hpp"

namespace {

using circot::errc;
using circot::fail;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty())
    std::fputs(text.c_str(), stdout);
  else
    circot::write_text_file(out_path, text);
}

circot::GroundMetricSpec make_spec(const std::string& metric, double rho, double tau,
                                   std::size_t n_bins) {
  if (metric == "linear") return circot::GroundMetricSpec::linear();
  if (metric == "power") return circot::GroundMetricSpec::power(rho);
  if (metric == "huber") return circot::GroundMetricSpec::huber(tau);
  if (metric == "chord") return circot::GroundMetricSpec::chord(n_bins);
  if (metric == "step") return circot::GroundMetricSpec::step();
  fail(errc::parse_error, "unknown metric '" + metric + "'");
}

struct DistArgs {
  std::string path_a, path_b, out;
  std::string metric = "linear";
  double rho = 2.0;
  double tau = 1.0;
  std::uint64_t precision = circot::kDefaultCutGrid;
  bool oracle = false;
};

int cmd_dist(const DistArgs& a) {
  const circot::Histogram s = circot::read_histogram(a.path_a, true);
  const circot::Histogram t = circot::read_histogram(a.path_b, true);
  const circot::GroundMetricSpec spec = make_spec(a.metric, a.rho, a.tau, s.size());

  const auto t0 = std::chrono::steady_clock::now();
  const circot::LossValue lv =
      circot::dispatch_loss(s, t, spec, circot::QuantilePrecision(a.precision));
  const auto t1 = std::chrono::steady_clock::now();

  nlohmann::json out;
  out["value"] = lv.value;
  out["solver"] = lv.solver_tag;
  out["micros"] = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
  if (lv.alpha_star) out["alpha_star"] = *lv.alpha_star;
  if (a.oracle) {
    const circot::LpSolution lp = circot::lp_exact(s, t, circot::ground_matrix(spec, s.size()));
    out["oracle"] = lp.loss.value;
    out["gap"] = std::fabs(lv.value - lp.loss.value);
  }
  emit(out.dump(2) + "\n", a.out);
  return 0;
}

struct LabelArgs {
  std::size_t bins = 8;
  std::size_t j_star = 0;
  std::string family = "binomial";
  unsigned k = 4;
  double p = 0.5;
  double lambda = 2.0;
  double sigma2 = 2.5;
  double xi = 0.1;
  double eta = 0.05;
  bool plain_gaussian = false;
  std::string out, csv;
};

int cmd_label(const LabelArgs& a) {
  circot::SmoothingSpec spec;
  if (a.family == "binomial") spec.family = circot::SmoothingFamily::binomial;
  else if (a.family == "poisson") spec.family = circot::SmoothingFamily::poisson;
  else if (a.family == "gaussian") spec.family = circot::SmoothingFamily::gaussian;
  else fail(errc::parse_error, "unknown family '" + a.family + "'");
  spec.k = a.k;
  spec.p = a.p;
  spec.lambda = a.lambda;
  spec.sigma2 = a.sigma2;
  spec.xi = a.xi;
  spec.eta = a.eta;
  spec.gaussian_softmax = !a.plain_gaussian;

  const circot::ConservativeLabel label = circot::conservative_label(a.j_star, a.bins, spec);
  emit(circot::histogram_to_json(label.histogram) + "\n", a.out);
  if (!a.csv.empty()) {
    std::string table = "bin,value\n";
    char buf[48];
    for (std::size_t i = 0; i < label.histogram.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", i, label.histogram[i]);
      table += buf;
    }
    circot::write_text_file(a.csv, table);
  }
  return 0;
}

struct FuzzArgs {
  std::size_t cases = 500;
  std::size_t max_n = 16;
  std::uint64_t grid = 1'000'000;
  std::uint64_t seed = 1;
  std::vector<std::string> solvers;
  std::string out;
};

int cmd_fuzz(const FuzzArgs& a) {
  circot::FuzzOptions opt;
  opt.cases = a.cases;
  opt.grid = a.grid;
  opt.seed = a.seed;
  opt.solvers = a.solvers;
  opt.sizes.clear();
  for (const std::size_t n : {std::size_t{3}, std::size_t{4}, std::size_t{5}, std::size_t{8},
                              std::size_t{13}, std::size_t{16}, std::size_t{24}, std::size_t{32}})
    if (n <= a.max_n) opt.sizes.push_back(n);
  if (opt.sizes.empty()) fail(errc::bad_parameter, "--max-n admits no sizes");

  const circot::FuzzReport report = circot::run_fuzz(opt);
  nlohmann::json rows = nlohmann::json::array();
  for (const circot::SolverGap& g : report.per_solver) {
    rows.push_back({{"solver", g.solver},
                    {"cases", g.cases},
                    {"max_gap", g.max_gap},
                    {"tolerance", g.tolerance},
                    {"violations", g.violations},
                    {"worst_case", g.worst_case}});
  }
  nlohmann::json out;
  out["ok"] = report.ok();
  out["checks"] = rows;
  emit(out.dump(2) + "\n", a.out);
  return report.ok() ? 0 : 2;
}

struct BenchArgs {
  std::size_t reps = 30;
  std::size_t max_n = 3600;
  std::uint64_t seed = 1;
  std::vector<std::string> solvers;
  std::string out;
};

// Mean and p95 wall time per call, in microseconds, over fresh random pairs.
struct BenchRow {
  std::string solver;
  std::size_t n;
  double mean_us;
  double p95_us;
};

template <typename F>
BenchRow bench_one(const std::string& solver, std::size_t n, std::size_t reps, circot::Rng& rng,
                   F&& call) {
  std::vector<std::pair<circot::Histogram, circot::Histogram>> inputs;
  const std::size_t warmup = 3;
  inputs.reserve(reps + warmup);
  for (std::size_t i = 0; i < reps + warmup; ++i)
    inputs.emplace_back(circot::random_histogram(n, rng), circot::random_histogram(n, rng));

  volatile double sink = 0.0;
  std::vector<double> us;
  us.reserve(reps);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    sink = sink + call(inputs[i].first, inputs[i].second);
    const auto t1 = std::chrono::steady_clock::now();
    if (i >= warmup) us.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
  }
  std::sort(us.begin(), us.end());
  double mean = 0.0;
  for (const double v : us) mean += v;
  mean /= double(us.size());
  const std::size_t p95 = std::min(us.size() - 1, (us.size() * 95 + 99) / 100);
  return {solver, n, mean, us[p95]};
}

int cmd_bench(const BenchArgs& a) {
  if (a.reps == 0) fail(errc::bad_parameter, "--reps must be positive");
  const auto wants = [&](const char* name) {
    return a.solvers.empty() ||
           std::find(a.solvers.begin(), a.solvers.end(), name) != a.solvers.end();
  };

  circot::Rng rng(a.seed);
  const circot::GroundMetricSpec pow2 = circot::GroundMetricSpec::power(2.0);
  std::vector<BenchRow> rows;

  for (const std::size_t n : {std::size_t{8}, std::size_t{36}, std::size_t{90}, std::size_t{360},
                              std::size_t{3600}}) {
    if (n > a.max_n) continue;
    if (wants("linear"))
      rows.push_back(bench_one("linear_circular", n, a.reps, rng,
                               [](const circot::Histogram& s, const circot::Histogram& t) {
                                 return circot::linear_circular(s, t).value;
                               }));
    if (wants("convex"))
      rows.push_back(bench_one("convex_circular", n, a.reps, rng,
                               [&](const circot::Histogram& s, const circot::Histogram& t) {
                                 return circot::convex_circular(s, t, pow2).value;
                               }));
    if (n <= 360) {
      const circot::Matrix cost = circot::ground_matrix(pow2, n);
      if (wants("lp"))
        rows.push_back(bench_one("lp_exact", n, a.reps, rng,
                                 [&](const circot::Histogram& s, const circot::Histogram& t) {
                                   return circot::lp_exact(s, t, cost).loss.value;
                                 }));
      if (wants("sinkhorn"))
        rows.push_back(bench_one("sinkhorn", n, a.reps, rng,
                                 [&](const circot::Histogram& s, const circot::Histogram& t) {
                                   return circot::sinkhorn_approx(s, t, cost).loss.value;
                                 }));
    }
  }

  std::string csv = "solver,n,mean_us,p95_us\n";
  char buf[128];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%zu,%.3f,%.3f\n", r.solver.c_str(), r.n, r.mean_us,
                  r.p95_us);
    csv += buf;
  }
  emit(csv, a.out);
  return 0;
}

struct TrainArgs {
  std::size_t bins = 36;
  std::size_t samples = 5000;
  std::size_t epochs = 200;
  double lr = 0.5;
  std::size_t batch_size = 0;
  double weight_decay = 0.0;
  std::uint64_t seed = 1;
  std::string loss = "ce";
  std::string compare;
  std::size_t n_seeds = 5;
  bool adaptive = false;
  std::size_t hidden = 32;
  unsigned noise_k = 10;
  double noise_p = 0.5;
  double outliers = 0.05;
  double feature_noise = circot::kToyFeatureNoise;
  std::string history, out;
};

std::string history_csv(const std::vector<circot::EpochStats>& history) {
  std::string csv = "epoch,train_loss,eval_maad,expected_arc,blend_weight\n";
  char buf[160];
  for (const circot::EpochStats& e : history) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", e.epoch, e.train_loss,
                  e.eval_maad, e.expected_arc, e.blend_weight);
    csv += buf;
  }
  return csv;
}

int cmd_train_toy(const TrainArgs& a) {
  const circot::NoiseSpec noise{a.noise_k, a.noise_p, a.outliers, a.feature_noise};
  circot::TrainOptions opt;
  opt.epochs = a.epochs;
  opt.lr = a.lr;
  opt.batch_size = a.batch_size;
  opt.weight_decay = a.weight_decay;
  opt.adaptive = a.adaptive;
  opt.hidden = a.hidden;

  if (!a.compare.empty()) {
    std::vector<circot::LossDescriptor> losses;
    std::vector<std::string> names;
    std::size_t start = 0;
    while (start <= a.compare.size()) {
      const std::size_t comma = a.compare.find(',', start);
      const std::string tok =
          a.compare.substr(start, comma == std::string::npos ? comma : comma - start);
      if (!tok.empty()) {
        losses.push_back(circot::LossDescriptor::parse(tok));
        names.push_back(losses.back().name());
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (losses.empty()) fail(errc::parse_error, "--compare lists no losses");
    if (a.n_seeds == 0) fail(errc::bad_parameter, "--seeds must be positive");

    std::vector<double> mean_maad(losses.size(), 0.0);
    for (std::size_t s = 0; s < a.n_seeds; ++s) {
      const std::uint64_t seed = a.seed + s;
      const circot::SyntheticDataset data =
          circot::gen_synthetic(a.bins, a.samples, noise, seed);
      for (std::size_t li = 0; li < losses.size(); ++li) {
        circot::TrainOptions run = opt;
        run.seed = seed;
        // --adaptive only applies where it is defined: one-hot Wasserstein runs
        run.adaptive = opt.adaptive && losses[li].kind == circot::LossKind::wasserstein &&
                       !losses[li].smoothing.has_value();
        const circot::TrainResult res = circot::train_toy(data, losses[li], run);
        mean_maad[li] += res.history.back().eval_maad;
      }
    }
    std::string csv = "loss,mean_final_maad\n";
    char buf[96];
    for (std::size_t li = 0; li < losses.size(); ++li) {
      std::snprintf(buf, sizeof(buf), "%s,%.6f\n", names[li].c_str(),
                    mean_maad[li] / double(a.n_seeds));
      csv += buf;
    }
    emit(csv, a.out);
    return 0;
  }

  const circot::LossDescriptor loss = circot::LossDescriptor::parse(a.loss);
  opt.seed = a.seed;
  const circot::SyntheticDataset data = circot::gen_synthetic(a.bins, a.samples, noise, a.seed);
  const circot::TrainResult res = circot::train_toy(data, loss, opt);
  if (!a.history.empty()) circot::write_text_file(a.history, history_csv(res.history));

  std::vector<std::size_t> preds, trues;
  preds.reserve(data.samples.size());
  trues.reserve(data.samples.size());
  for (const circot::Sample& smp : data.samples) {
    preds.push_back(res.model.predict_bin(smp.features));
    trues.push_back(smp.true_bin);
  }
  nlohmann::json out;
  out["loss"] = loss.name();
  out["epochs"] = a.epochs;
  out["final_train_loss"] = res.history.back().train_loss;
  out["final_maad"] = circot::maad(preds, trues, a.bins);
  out["acc_pi_over_8"] = circot::acc_at(preds, trues, a.bins, std::numbers::pi / 8.0);
  out["median_ae"] = circot::median_ae(preds, trues, a.bins);
  emit(out.dump(2) + "\n", a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"circular histogram transport toolkit"};
  app.require_subcommand(1);

  DistArgs dist;
  CLI::App* c_dist = app.add_subcommand("dist", "transport cost between two histograms");
  c_dist->add_option("a", dist.path_a, "first histogram (JSON array or CSV)")->required();
  c_dist->add_option("b", dist.path_b, "second histogram")->required();
  c_dist->add_option("--metric", dist.metric, "linear|power|huber|chord|step");
  c_dist->add_option("--rho", dist.rho, "power exponent");
  c_dist->add_option("--tau", dist.tau, "huber knee");
  c_dist->add_option("--precision", dist.precision, "cut-search grid size");
  c_dist->add_flag("--oracle", dist.oracle, "also solve the exact LP and report the gap");
  c_dist->add_option("--out", dist.out, "write the report here instead of stdout");

  LabelArgs label;
  CLI::App* c_label = app.add_subcommand("label", "conservative target distribution");
  c_label->add_option("--bins,--N", label.bins, "number of bins")->required();
  c_label->add_option("--j", label.j_star, "true bin")->required();
  c_label->add_option("--family", label.family, "binomial|poisson|gaussian");
  c_label->add_option("--K", label.k, "support size minus one");
  c_label->add_option("--p", label.p, "binomial rate");
  c_label->add_option("--lambda", label.lambda, "poisson rate");
  c_label->add_option("--sigma2", label.sigma2, "gaussian variance");
  c_label->add_option("--xi", label.xi, "smoothing mass");
  c_label->add_option("--eta", label.eta, "uniform mass");
  c_label->add_flag("--plain-gaussian", label.plain_gaussian,
                    "normalize gaussian densities instead of softmaxing them");
  c_label->add_option("--out", label.out, "write the JSON label here");
  c_label->add_option("--csv", label.csv, "also write a bin,value table here");

  FuzzArgs fuzz;
  CLI::App* c_fuzz = app.add_subcommand("fuzz", "randomized solver-vs-LP equivalence suite");
  c_fuzz->add_option("--cases", fuzz.cases, "pairs per histogram size");
  c_fuzz->add_option("--max-n", fuzz.max_n, "largest histogram size");
  c_fuzz->add_option("--grid", fuzz.grid, "cut-search grid size under test");
  c_fuzz->add_option("--seed", fuzz.seed, "RNG seed");
  c_fuzz->add_option("--solver", fuzz.solvers,
                     "restrict to checks: linear step one_hot convex line cross");
  c_fuzz->add_option("--out", fuzz.out, "write the JSON report here");

  BenchArgs bench;
  CLI::App* c_bench = app.add_subcommand("bench", "per-call solver timings");
  c_bench->add_option("--reps", bench.reps, "timed repetitions per cell");
  c_bench->add_option("--max-n", bench.max_n, "largest histogram size");
  c_bench->add_option("--seed", bench.seed, "RNG seed");
  c_bench->add_option("--solver", bench.solvers, "restrict to: linear convex lp sinkhorn");
  c_bench->add_option("--out", bench.out, "write the CSV here");

  TrainArgs train;
  CLI::App* c_train = app.add_subcommand("train-toy", "synthetic circular-label training demo");
  c_train->add_option("--bins", train.bins, "number of classes");
  c_train->add_option("--samples", train.samples, "dataset size");
  c_train->add_option("--epochs", train.epochs, "training epochs");
  c_train->add_option("--lr", train.lr, "learning rate");
  c_train->add_option("--batch-size", train.batch_size, "mini-batch size, 0 for full batch");
  c_train->add_option("--weight-decay", train.weight_decay, "L2 penalty on the weights");
  c_train->add_option("--seed", train.seed, "RNG seed");
  c_train->add_option("--loss", train.loss, "ce or wass-<metric>[-<family>]");
  c_train->add_option("--compare", train.compare, "comma-separated losses, paired seeds");
  c_train->add_option("--seeds", train.n_seeds, "paired seed count for --compare");
  c_train->add_flag("--adaptive", train.adaptive, "learn the ground metric while training");
  c_train->add_option("--hidden", train.hidden, "hidden layer width");
  c_train->add_option("--noise-k", train.noise_k, "inlier binomial K");
  c_train->add_option("--noise-p", train.noise_p, "inlier binomial p");
  c_train->add_option("--outliers", train.outliers, "uniform relabeling rate");
  c_train->add_option("--feature-noise", train.feature_noise, "feature embedding noise sigma");
  c_train->add_option("--history", train.history, "write per-epoch CSV here");
  c_train->add_option("--out", train.out, "write the summary here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_dist->parsed()) return cmd_dist(dist);
    if (c_label->parsed()) return cmd_label(label);
    if (c_fuzz->parsed()) return cmd_fuzz(fuzz);
    if (c_bench->parsed()) return cmd_bench(bench);
    if (c_train->parsed()) return cmd_train_toy(train);
  } catch (const circot::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return circot::errc_is_numerical(e.code()) ? 3 : 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
