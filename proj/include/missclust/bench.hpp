#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "missclust/completion.hpp"
#include "missclust/csv.hpp"
#include "missclust/fiml.hpp"
#include "missclust/labeling.hpp"
#include "missclust/lpa.hpp"
#include "missclust/matrix.hpp"
#include "missclust/metrics.hpp"
#include "missclust/norms.hpp"
#include "missclust/random_matrix.hpp"
#include "missclust/rng.hpp"
#include "missclust/simulators.hpp"
#include "missclust/spectral.hpp"

namespace missclust {

enum class ExperimentKind {
  CcrSweep,          // two-Gaussian CCR over an a-grid, equal cluster sizes
  CcrSweepUnequal,   // same with a 5%/95% split
  CompletionError,   // low-rank recovery error over rank x missing-fraction cells
  MissingPipeline,   // block-mean generator, fiml+lpa vs mc+lpa vs mc+sc
  RealDataProtocol,  // consistent-population protocol over a user CSV
};

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::CcrSweep: return "ccr-sweep";
    case ExperimentKind::CcrSweepUnequal: return "ccr-sweep-unequal";
    case ExperimentKind::CompletionError: return "completion-error";
    case ExperimentKind::MissingPipeline: return "missing-pipeline";
    case ExperimentKind::RealDataProtocol: return "real-data-protocol";
  }
  throw std::logic_error("to_string: bad ExperimentKind");
}

inline ExperimentKind experiment_from_string(const std::string& s) {
  if (s == "ccr-sweep") return ExperimentKind::CcrSweep;
  if (s == "ccr-sweep-unequal") return ExperimentKind::CcrSweepUnequal;
  if (s == "completion-error") return ExperimentKind::CompletionError;
  if (s == "missing-pipeline") return ExperimentKind::MissingPipeline;
  if (s == "real-data-protocol") return ExperimentKind::RealDataProtocol;
  throw std::runtime_error("unknown experiment '" + s + "'");
}

struct ExperimentSpec {
  ExperimentKind experiment = ExperimentKind::CcrSweep;
  std::uint64_t base_seed = 1;
  std::size_t trials = 40;
  std::size_t k = 2;
  std::vector<std::string> methods;

  std::vector<double> a_grid;        // ccr sweeps
  std::vector<double> missing_grid;  // completion-error, missing-pipeline, real-data-protocol
  std::vector<std::size_t> rank_grid;

  TwoGaussianSpec two_gaussian;
  BlockMeanSpec block_mean;
  std::size_t completion_rows = 1000;
  std::size_t completion_cols = 300;

  CompletionConfig completion;
  EmConfig em;
  SpectralConfig spectral;
  SimilarityConfig similarity;

  std::string csv_path;  // real-data-protocol input
  std::vector<std::string> exclude_columns;
  std::size_t subsample = 1000;  // rows drawn from the consistent population per trial
};

// Fully populated defaults per experiment; JSON parsing and programmatic
// construction both start from here.
inline ExperimentSpec default_spec(ExperimentKind kind) {
  ExperimentSpec s;
  s.experiment = kind;
  switch (kind) {
    case ExperimentKind::CcrSweep:
      s.a_grid = {1.0, 2.0, 3.0, 5.0};
      s.methods = {"sc", "lpa"};
      break;
    case ExperimentKind::CcrSweepUnequal:
      s.a_grid = {1.0, 2.0, 3.0, 5.0};
      s.methods = {"sc", "lpa"};
      s.two_gaussian.proportion_cluster1 = 0.05;
      break;
    case ExperimentKind::CompletionError:
      s.trials = 1;  // recovery error is reported per instance, not averaged
      s.missing_grid = {0.2, 0.4, 0.6, 0.8};
      s.rank_grid = {2, 10};
      s.methods = {"svt"};
      break;
    case ExperimentKind::MissingPipeline:
      s.missing_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
      s.methods = {"fiml+lpa", "mc+lpa", "mc+sc"};
      // The generator is full-rank (low-rank signal plus noise), so the
      // equality-constrained solver cannot reach its residual tolerance at
      // high missingness; a tighter cap keeps sweeps fast without changing
      // clustering quality.
      s.completion.max_iter = 200;
      break;
    case ExperimentKind::RealDataProtocol:
      s.missing_grid = {0.1, 0.3, 0.5};
      s.methods = {"fiml+lpa", "mc+lpa", "mc+sc"};
      s.completion.max_iter = 200;
      break;
  }
  return s;
}

struct TrialRow {
  std::string experiment;
  std::string param;
  std::string method;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string metric;
  double value = 0.0;

  friend bool operator==(const TrialRow&, const TrialRow&) = default;
};

struct SummaryRow {
  std::string experiment;
  std::string param;
  std::string method;
  std::string metric;  // base metric plus _mean/_sd/_min/_median/_max/_n_trials
  double value = 0.0;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct ExperimentReport {
  std::vector<TrialRow> trials;
  std::vector<SummaryRow> summary;

  friend bool operator==(const ExperimentReport&, const ExperimentReport&) = default;
};

// Runtime failure that occurred after validation; carries whatever rows were
// produced so the CLI can flush a partial report before exiting.
class BenchRuntimeError : public std::runtime_error {
 public:
  BenchRuntimeError(const std::string& msg, ExperimentReport partial_report)
      : std::runtime_error(msg), partial(std::move(partial_report)) {}

  ExperimentReport partial;
};

namespace detail {

inline const std::vector<std::string>& allowed_methods(ExperimentKind kind) {
  static const std::vector<std::string> sweep{"sc", "lpa"};
  static const std::vector<std::string> completion{"svt"};
  static const std::vector<std::string> pipeline{"fiml+lpa", "mc+lpa", "mc+sc"};
  switch (kind) {
    case ExperimentKind::CcrSweep:
    case ExperimentKind::CcrSweepUnequal: return sweep;
    case ExperimentKind::CompletionError: return completion;
    default: return pipeline;
  }
}

}  // namespace detail

// Field-level validation; an empty result means the spec is runnable.
inline std::vector<std::string> validate(const ExperimentSpec& s) {
  std::vector<std::string> errors;
  auto err = [&errors](const std::string& m) { errors.push_back(m); };

  if (s.trials == 0) err("trials: must be at least 1");
  if (s.methods.empty()) err("methods: must select at least one method");
  const auto& allowed = detail::allowed_methods(s.experiment);
  for (const auto& m : s.methods) {
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end())
      err("methods: '" + m + "' is not valid for experiment '" + to_string(s.experiment) + "'");
    if (std::count(s.methods.begin(), s.methods.end(), m) > 1)
      err("methods: duplicate entry '" + m + "'");
  }

  const bool uses_missing = s.experiment == ExperimentKind::CompletionError ||
                            s.experiment == ExperimentKind::MissingPipeline ||
                            s.experiment == ExperimentKind::RealDataProtocol;
  if (uses_missing) {
    if (s.missing_grid.empty()) err("missing_grid: must be nonempty");
    for (double f : s.missing_grid)
      if (!(f > 0.0 && f < 1.0)) err("missing_grid: fractions must lie in (0,1)");
  }

  switch (s.experiment) {
    case ExperimentKind::CcrSweep:
    case ExperimentKind::CcrSweepUnequal:
      if (s.a_grid.empty()) err("a_grid: must be nonempty");
      for (double a : s.a_grid)
        if (!(a >= 0.0)) err("a_grid: offsets must be nonnegative");
      if (s.two_gaussian.n_total < 2) err("n_total: must be at least 2");
      if (s.two_gaussian.dim == 0) err("dim: must be at least 1");
      if (!(s.two_gaussian.proportion_cluster1 > 0.0 && s.two_gaussian.proportion_cluster1 < 1.0))
        err("proportion_cluster1: must lie in (0,1)");
      if (s.k != 2) err("k: two-Gaussian sweeps are defined for k = 2");
      break;
    case ExperimentKind::CompletionError:
      if (s.rank_grid.empty()) err("rank_grid: must be nonempty");
      for (std::size_t r : s.rank_grid)
        if (r == 0 || r > std::min(s.completion_rows, s.completion_cols))
          err("rank_grid: rank " + std::to_string(r) + " out of range for " +
              std::to_string(s.completion_rows) + "x" + std::to_string(s.completion_cols));
      if (s.completion_rows == 0 || s.completion_cols == 0)
        err("completion_shape: dimensions must be positive");
      break;
    case ExperimentKind::MissingPipeline:
      if (s.block_mean.n < 2 || s.block_mean.n % 2 != 0) err("block_mean.n: must be even and >= 2");
      if (s.block_mean.block_width == 0 || s.block_mean.d % s.block_mean.block_width != 0)
        err("block_mean.block_width: must divide d");
      if (s.k != 2) err("k: the block-mean generator has exactly 2 populations");
      break;
    case ExperimentKind::RealDataProtocol:
      if (s.csv_path.empty()) err("csv_path: required for real-data-protocol");
      if (s.k < 2) err("k: must be at least 2");
      if (s.subsample == 0) err("subsample: must be at least 1");
      break;
  }

  if (s.completion.max_iter == 0) err("completion.max_iter: must be positive");
  if (!(s.completion.tol > 0.0 && s.completion.tol < 1.0)) err("completion.tol: must lie in (0,1)");
  if (s.completion.tau && !(*s.completion.tau > 0.0)) err("completion.tau: must be positive");
  if (s.completion.step && !(*s.completion.step > 0.0)) err("completion.step: must be positive");
  if (s.em.max_iter == 0 || s.em.restarts == 0) err("em: max_iter and restarts must be positive");
  if (!(s.em.loglik_tol > 0.0)) err("em.loglik_tol: must be positive");
  if (!(s.em.variance_floor > 0.0)) err("em.variance_floor: must be positive");
  if (s.similarity.bandwidth && !(*s.similarity.bandwidth > 0.0))
    err("similarity.bandwidth: must be positive");
  if (s.spectral.kmeans_config.max_iter == 0 || s.spectral.kmeans_config.restarts == 0)
    err("spectral.kmeans: max_iter and restarts must be positive");
  return errors;
}

namespace detail {

struct BenchTask {
  std::string param;
  std::size_t trial = 0;
  double a = 0.0;
  double missing = 0.0;
  std::size_t rank = 0;
};

// Shared, method-independent seeding: the dataset of a trial is identical for
// every method, while each method draws its own stream keyed by its name.
struct TrialSeeds {
  std::uint64_t trial_seed;
  explicit TrialSeeds(const ExperimentSpec& s, const std::string& param, std::size_t trial)
      : trial_seed(hash_combine(hash_combine(s.base_seed, hash_string(param)), trial)) {}

  Rng data_rng() const { return Rng(trial_seed).split(0); }
  Rng method_rng(const std::string& method) const {
    return Rng(hash_combine(trial_seed, hash_string(method)));
  }
};

class RowSink {
 public:
  RowSink(std::string experiment, std::string param, std::size_t trial, std::uint64_t seed,
          std::vector<TrialRow>& out)
      : experiment_(std::move(experiment)), param_(std::move(param)), trial_(trial), seed_(seed),
        out_(out) {}

  void push(const std::string& method, const std::string& metric, double value) {
    out_.push_back(TrialRow{.experiment = experiment_, .param = param_, .method = method,
                            .trial = trial_, .seed = seed_, .metric = metric, .value = value});
  }

 private:
  std::string experiment_;
  std::string param_;
  std::size_t trial_;
  std::uint64_t seed_;
  std::vector<TrialRow>& out_;
};

inline void run_ccr_trial(const ExperimentSpec& s, const BenchTask& task,
                          std::vector<TrialRow>& out) {
  const TrialSeeds seeds(s, task.param, task.trial);
  RowSink sink(to_string(s.experiment), task.param, task.trial, seeds.trial_seed, out);
  Rng data_rng = seeds.data_rng();
  TwoGaussianSpec gspec = s.two_gaussian;
  gspec.a = task.a;
  const Dataset ds = gen_two_gaussians(gspec, data_rng);

  for (const auto& method : s.methods) {
    try {
      Rng rng = seeds.method_rng(method);
      if (method == "sc") {
        SpectralConfig scfg = s.spectral;
        scfg.k = s.k;
        const Labeling pred = spectral_cluster(ds.points, scfg, s.similarity, rng);
        sink.push(method, "ccr", ccr(pred, ds.truth));
      } else {  // lpa
        const LpaFitResult fit = lpa_fit(ds.points, s.k, s.em, rng);
        sink.push(method, "ccr", ccr(lpa_assign(fit.model, ds.points), ds.truth));
        sink.push(method, "em_converged", fit.converged ? 1.0 : 0.0);
      }
    } catch (const std::exception&) {
      sink.push(method, "failed", 1.0);
    }
  }
}

inline void run_completion_trial(const ExperimentSpec& s, const BenchTask& task,
                                 std::vector<TrialRow>& out) {
  const TrialSeeds seeds(s, task.param, task.trial);
  RowSink sink(to_string(s.experiment), task.param, task.trial, seeds.trial_seed, out);
  Rng data_rng = seeds.data_rng();
  const Matrix m = random_low_rank(s.completion_rows, s.completion_cols, task.rank, data_rng);
  const MaskedMatrix masked = remove_entries(m, task.missing, data_rng);

  for (const auto& method : s.methods) {
    try {
      const CompletionResult res = complete(masked, s.completion);
      Matrix diff(m.rows(), m.cols());
      for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) diff(i, j) = m(i, j) - res.completed(i, j);
      sink.push(method, "frobenius_error", frobenius_norm(diff));
      sink.push(method, "spectral_error", spectral_norm(diff));
      sink.push(method, "relative_frobenius_error", relative_frobenius(m, res.completed));
      sink.push(method, "iterations", static_cast<double>(res.iterations));
      sink.push(method, "converged", res.converged ? 1.0 : 0.0);
    } catch (const std::exception&) {
      sink.push(method, "failed", 1.0);
    }
  }
}

// Shared by missing-pipeline and real-data-protocol: the three incomplete-data
// methods on one masked dataset with known row labels. The completion run is
// cached across mc+ methods since it depends only on the data.
inline void run_pipeline_methods(const ExperimentSpec& s, const TrialSeeds& seeds,
                                 const MaskedMatrix& masked, const Labeling& truth,
                                 RowSink& sink) {
  std::optional<CompletionResult> comp;
  auto completed = [&]() -> const CompletionResult& {
    if (!comp) comp = complete(masked, s.completion);
    return *comp;
  };

  for (const auto& method : s.methods) {
    try {
      Rng rng = seeds.method_rng(method);
      if (method == "fiml+lpa") {
        const FimlLpaResult fit = fiml_lpa_fit(masked, s.k, s.em, rng);
        sink.push(method, "ccr", ccr(fit.labeling, truth));
        sink.push(method, "em_converged", fit.converged ? 1.0 : 0.0);
      } else if (method == "mc+lpa") {
        const CompletionResult& res = completed();
        const LpaFitResult fit = lpa_fit(res.completed, s.k, s.em, rng);
        sink.push(method, "ccr", ccr(lpa_assign(fit.model, res.completed), truth));
        sink.push(method, "completion_iterations", static_cast<double>(res.iterations));
        sink.push(method, "completion_converged", res.converged ? 1.0 : 0.0);
      } else {  // mc+sc
        const CompletionResult& res = completed();
        SpectralConfig scfg = s.spectral;
        scfg.k = s.k;
        const Labeling pred = spectral_cluster(res.completed, scfg, s.similarity, rng);
        sink.push(method, "ccr", ccr(pred, truth));
        sink.push(method, "completion_iterations", static_cast<double>(res.iterations));
        sink.push(method, "completion_converged", res.converged ? 1.0 : 0.0);
      }
    } catch (const std::exception&) {
      sink.push(method, "failed", 1.0);
    }
  }
}

inline void run_missing_pipeline_trial(const ExperimentSpec& s, const BenchTask& task,
                                       std::vector<TrialRow>& out) {
  const TrialSeeds seeds(s, task.param, task.trial);
  RowSink sink(to_string(s.experiment), task.param, task.trial, seeds.trial_seed, out);
  Rng data_rng = seeds.data_rng();
  const Dataset ds = gen_block_mean(s.block_mean, data_rng);
  const MaskedMatrix masked = remove_entries(ds.points, task.missing, data_rng);
  run_pipeline_methods(s, seeds, masked, ds.truth, sink);
}

struct RealDataContext {
  Matrix retained;  // consistent-population rows of the input
  Labeling labels;
  double consistent_fraction = 0.0;
};

inline void run_real_data_trial(const ExperimentSpec& s, const RealDataContext& ctx,
                                const BenchTask& task, std::vector<TrialRow>& out) {
  const TrialSeeds seeds(s, task.param, task.trial);
  RowSink sink(to_string(s.experiment), task.param, task.trial, seeds.trial_seed, out);
  sink.push("protocol", "consistent_fraction", ctx.consistent_fraction);
  Rng data_rng = seeds.data_rng();
  Rng sub_rng = data_rng.split(0);
  Rng mask_rng = data_rng.split(1);
  const std::size_t n_sample = std::min(s.subsample, ctx.retained.rows());
  const Dataset sub = subsample_rows(ctx.retained, ctx.labels, n_sample, sub_rng);
  const MaskedMatrix masked = remove_entries(sub.points, task.missing, mask_rng);
  run_pipeline_methods(s, seeds, masked, sub.truth, sink);
}

inline RealDataContext load_real_data_context(const ExperimentSpec& s) {
  const CsvData csv = load_csv_matrix(s.csv_path, s.exclude_columns);
  if (csv.data.observed_count() != csv.data.rows() * csv.data.cols())
    throw BenchRuntimeError(
        "real-data-protocol: input CSV must be complete; remove incomplete rows or exclude sparse columns",
        {});
  Rng cp_rng(hash_combine(s.base_seed, hash_string("consistent-population")));
  ConsistentPopulationConfig cfg{.spectral = s.spectral, .similarity = s.similarity, .em = s.em};
  const ConsistentPopulation cp =
      consistent_population(csv.data.values(), s.k, cfg, cp_rng);
  RealDataContext ctx;
  ctx.retained = Matrix(cp.indices.size(), csv.data.cols());
  for (std::size_t r = 0; r < cp.indices.size(); ++r)
    for (std::size_t j = 0; j < csv.data.cols(); ++j)
      ctx.retained(r, j) = csv.data.values()(cp.indices[r], j);
  ctx.labels = cp.labels;
  ctx.consistent_fraction =
      static_cast<double>(cp.indices.size()) / static_cast<double>(csv.data.rows());
  return ctx;
}

inline std::vector<BenchTask> build_tasks(const ExperimentSpec& s) {
  std::vector<BenchTask> tasks;
  auto add = [&](const std::string& param, double a, double missing, std::size_t rank) {
    for (std::size_t t = 0; t < s.trials; ++t)
      tasks.push_back(BenchTask{.param = param, .trial = t, .a = a, .missing = missing,
                                .rank = rank});
  };
  switch (s.experiment) {
    case ExperimentKind::CcrSweep:
    case ExperimentKind::CcrSweepUnequal:
      for (double a : s.a_grid) add("a=" + format_double(a), a, 0.0, 0);
      break;
    case ExperimentKind::CompletionError:
      for (std::size_t rank : s.rank_grid)
        for (double f : s.missing_grid)
          add("rank=" + std::to_string(rank) + "|missing=" + format_double(f), 0.0, f, rank);
      break;
    case ExperimentKind::MissingPipeline:
    case ExperimentKind::RealDataProtocol:
      for (double f : s.missing_grid) add("missing=" + format_double(f), 0.0, f, 0);
      break;
  }
  return tasks;
}

inline void append_summaries(ExperimentReport& report, const std::string& experiment) {
  std::map<std::tuple<std::string, std::string, std::string>, std::vector<double>> groups;
  for (const auto& row : report.trials)
    groups[{row.param, row.method, row.metric}].push_back(row.value);
  for (const auto& [key, values] : groups) {
    const auto& [param, method, metric] = key;
    const CcrSummary s = summarize(values);
    auto push = [&](const char* suffix, double v) {
      report.summary.push_back(SummaryRow{.experiment = experiment, .param = param,
                                          .method = method, .metric = metric + suffix,
                                          .value = v});
    };
    push("_mean", s.mean);
    push("_sd", s.sd);
    push("_min", s.min);
    push("_median", s.median);
    push("_max", s.max);
    push("_n_trials", static_cast<double>(s.n_trials));
  }
}

}  // namespace detail

// Executes the full trial grid. Deterministic for a fixed spec: per-trial
// seeds are derived from (base_seed, parameter point, trial), rows are sorted
// before summarization, and the thread count never changes the output.
inline ExperimentReport run(const ExperimentSpec& spec, std::size_t threads = 1) {
  {
    const auto errors = validate(spec);
    if (!errors.empty()) {
      std::string msg = "invalid experiment spec:";
      for (const auto& e : errors) msg += "\n  " + e;
      throw std::invalid_argument(msg);
    }
  }

  std::optional<detail::RealDataContext> real_ctx;
  if (spec.experiment == ExperimentKind::RealDataProtocol)
    real_ctx = detail::load_real_data_context(spec);

  const auto tasks = detail::build_tasks(spec);
  std::vector<std::vector<TrialRow>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      switch (spec.experiment) {
        case ExperimentKind::CcrSweep:
        case ExperimentKind::CcrSweepUnequal:
          detail::run_ccr_trial(spec, tasks[i], results[i]);
          break;
        case ExperimentKind::CompletionError:
          detail::run_completion_trial(spec, tasks[i], results[i]);
          break;
        case ExperimentKind::MissingPipeline:
          detail::run_missing_pipeline_trial(spec, tasks[i], results[i]);
          break;
        case ExperimentKind::RealDataProtocol:
          detail::run_real_data_trial(spec, *real_ctx, tasks[i], results[i]);
          break;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    const std::size_t count = std::min(threads, tasks.size());
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentReport report;
  for (auto& rows : results)
    report.trials.insert(report.trials.end(), rows.begin(), rows.end());
  std::sort(report.trials.begin(), report.trials.end(),
            [](const TrialRow& a, const TrialRow& b) {
              return std::tie(a.param, a.trial, a.method, a.metric) <
                     std::tie(b.param, b.trial, b.method, b.metric);
            });
  detail::append_summaries(report, to_string(spec.experiment));
  return report;
}

inline std::string report_to_csv(const ExperimentReport& report) {
  std::string out = "experiment,param,method,trial,seed,metric,value\n";
  for (const auto& r : report.trials) {
    out += r.experiment + ',' + r.param + ',' + r.method + ',' + std::to_string(r.trial) + ',' +
           std::to_string(r.seed) + ',' + r.metric + ',' + detail::format_double(r.value) + '\n';
  }
  for (const auto& r : report.summary) {
    out += r.experiment + ',' + r.param + ',' + r.method + ",,," + r.metric + ',' +
           detail::format_double(r.value) + '\n';
  }
  return out;
}

inline nlohmann::ordered_json report_to_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  j["trials"] = nlohmann::ordered_json::array();
  for (const auto& r : report.trials) {
    j["trials"].push_back({{"experiment", r.experiment},
                           {"param", r.param},
                           {"method", r.method},
                           {"trial", r.trial},
                           {"seed", r.seed},
                           {"metric", r.metric},
                           {"value", r.value}});
  }
  j["summary"] = nlohmann::ordered_json::array();
  for (const auto& r : report.summary) {
    j["summary"].push_back({{"experiment", r.experiment},
                            {"param", r.param},
                            {"method", r.method},
                            {"trial", nullptr},
                            {"seed", nullptr},
                            {"metric", r.metric},
                            {"value", r.value}});
  }
  return j;
}

enum class ReportFormat { Csv, Json };

inline void emit(const ExperimentReport& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit: cannot open '" + path + "' for writing");
  if (format == ReportFormat::Csv) {
    out << report_to_csv(report);
  } else {
    out << report_to_json(report).dump(2) << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error("emit: write to '" + path + "' failed");
}

// Inverse of the CSV emitter; empty trial and seed fields mark summary rows.
inline ExperimentReport parse_csv_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_csv_report: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("parse_csv_report: '" + path + "' is empty");
  ExperimentReport report;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 7)
      throw std::runtime_error("parse_csv_report: '" + path + "' line " + std::to_string(lineno) +
                               " has " + std::to_string(fields.size()) + " fields, expected 7");
    const std::string ctx = "parse_csv_report: '" + path + "' line " + std::to_string(lineno);
    if (fields[3].empty() && fields[4].empty()) {
      report.summary.push_back(SummaryRow{.experiment = fields[0], .param = fields[1],
                                          .method = fields[2], .metric = fields[5],
                                          .value = detail::parse_double(fields[6], ctx)});
    } else {
      report.trials.push_back(
          TrialRow{.experiment = fields[0], .param = fields[1], .method = fields[2],
                   .trial = static_cast<std::size_t>(detail::parse_double(fields[3], ctx)),
                   .seed = static_cast<std::uint64_t>(
                       std::stoull(fields[4])),
                   .metric = fields[5], .value = detail::parse_double(fields[6], ctx)});
    }
  }
  return report;
}

namespace detail {

template <typename T>
T get_json_field(const nlohmann::json& j, const std::string& field) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("experiment spec field '" + field + "': " + e.what());
  }
}

}  // namespace detail

// Parses the documented JSON experiment schema. Structural problems (unknown
// fields, wrong types) throw; semantic range checks live in validate().
inline ExperimentSpec parse_spec_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("experiment spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("experiment spec must be a JSON object");
  if (!j.contains("experiment"))
    throw std::runtime_error("experiment spec field 'experiment' is required");

  ExperimentSpec s =
      default_spec(experiment_from_string(j["experiment"].get<std::string>()));

  using detail::get_json_field;
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") {
      continue;
    } else if (key == "base_seed") {
      s.base_seed = get_json_field<std::uint64_t>(value, key);
    } else if (key == "trials") {
      s.trials = get_json_field<std::size_t>(value, key);
    } else if (key == "k") {
      s.k = get_json_field<std::size_t>(value, key);
    } else if (key == "methods") {
      s.methods = get_json_field<std::vector<std::string>>(value, key);
    } else if (key == "a_grid") {
      s.a_grid = get_json_field<std::vector<double>>(value, key);
    } else if (key == "missing_grid") {
      s.missing_grid = get_json_field<std::vector<double>>(value, key);
    } else if (key == "rank_grid") {
      s.rank_grid = get_json_field<std::vector<std::size_t>>(value, key);
    } else if (key == "n_total") {
      s.two_gaussian.n_total = get_json_field<std::size_t>(value, key);
    } else if (key == "proportion_cluster1") {
      s.two_gaussian.proportion_cluster1 = get_json_field<double>(value, key);
    } else if (key == "dim") {
      s.two_gaussian.dim = get_json_field<std::size_t>(value, key);
    } else if (key == "block_mean") {
      for (const auto& [bk, bv] : value.items()) {
        if (bk == "n") s.block_mean.n = get_json_field<std::size_t>(bv, "block_mean.n");
        else if (bk == "d") s.block_mean.d = get_json_field<std::size_t>(bv, "block_mean.d");
        else if (bk == "block_width")
          s.block_mean.block_width = get_json_field<std::size_t>(bv, "block_mean.block_width");
        else if (bk == "mean_step")
          s.block_mean.mean_step = get_json_field<double>(bv, "block_mean.mean_step");
        else throw std::runtime_error("unknown experiment spec field 'block_mean." + bk + "'");
      }
    } else if (key == "completion_shape") {
      for (const auto& [ck, cv] : value.items()) {
        if (ck == "rows")
          s.completion_rows = get_json_field<std::size_t>(cv, "completion_shape.rows");
        else if (ck == "cols")
          s.completion_cols = get_json_field<std::size_t>(cv, "completion_shape.cols");
        else
          throw std::runtime_error("unknown experiment spec field 'completion_shape." + ck + "'");
      }
    } else if (key == "completion") {
      for (const auto& [ck, cv] : value.items()) {
        if (ck == "tau") {
          if (!cv.is_null()) s.completion.tau = get_json_field<double>(cv, "completion.tau");
        } else if (ck == "step") {
          if (!cv.is_null()) s.completion.step = get_json_field<double>(cv, "completion.step");
        } else if (ck == "max_iter") {
          s.completion.max_iter = get_json_field<std::size_t>(cv, "completion.max_iter");
        } else if (ck == "tol") {
          s.completion.tol = get_json_field<double>(cv, "completion.tol");
        } else {
          throw std::runtime_error("unknown experiment spec field 'completion." + ck + "'");
        }
      }
    } else if (key == "em") {
      for (const auto& [ek, ev] : value.items()) {
        if (ek == "max_iter") s.em.max_iter = get_json_field<std::size_t>(ev, "em.max_iter");
        else if (ek == "loglik_tol") s.em.loglik_tol = get_json_field<double>(ev, "em.loglik_tol");
        else if (ek == "restarts") s.em.restarts = get_json_field<std::size_t>(ev, "em.restarts");
        else if (ek == "variance_floor")
          s.em.variance_floor = get_json_field<double>(ev, "em.variance_floor");
        else throw std::runtime_error("unknown experiment spec field 'em." + ek + "'");
      }
    } else if (key == "similarity") {
      for (const auto& [sk, sv] : value.items()) {
        if (sk == "bandwidth") {
          if (!sv.is_null()) s.similarity.bandwidth = get_json_field<double>(sv, "similarity.bandwidth");
        } else {
          throw std::runtime_error("unknown experiment spec field 'similarity." + sk + "'");
        }
      }
    } else if (key == "spectral") {
      for (const auto& [sk, sv] : value.items()) {
        if (sk == "embedding_dim") {
          s.spectral.embedding_dim = get_json_field<std::size_t>(sv, "spectral.embedding_dim");
        } else if (sk == "two_cluster_rule") {
          const auto rule = get_json_field<std::string>(sv, "spectral.two_cluster_rule");
          if (rule == "threshold-zero") s.spectral.two_cluster_rule = TwoClusterRule::ThresholdZero;
          else if (rule == "kmeans") s.spectral.two_cluster_rule = TwoClusterRule::Kmeans;
          else throw std::runtime_error("spectral.two_cluster_rule must be 'threshold-zero' or 'kmeans'");
        } else if (sk == "kmeans") {
          for (const auto& [kk, kv] : sv.items()) {
            if (kk == "max_iter")
              s.spectral.kmeans_config.max_iter = get_json_field<std::size_t>(kv, "spectral.kmeans.max_iter");
            else if (kk == "restarts")
              s.spectral.kmeans_config.restarts = get_json_field<std::size_t>(kv, "spectral.kmeans.restarts");
            else if (kk == "tol")
              s.spectral.kmeans_config.tol = get_json_field<double>(kv, "spectral.kmeans.tol");
            else throw std::runtime_error("unknown experiment spec field 'spectral.kmeans." + kk + "'");
          }
        } else {
          throw std::runtime_error("unknown experiment spec field 'spectral." + sk + "'");
        }
      }
    } else if (key == "csv_path") {
      s.csv_path = get_json_field<std::string>(value, key);
    } else if (key == "exclude_columns") {
      s.exclude_columns = get_json_field<std::vector<std::string>>(value, key);
    } else if (key == "subsample") {
      s.subsample = get_json_field<std::size_t>(value, key);
    } else {
      throw std::runtime_error("unknown experiment spec field '" + key + "'");
    }
  }
  return s;
}

}  // namespace missclust
